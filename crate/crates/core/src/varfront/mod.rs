//! Fact extraction from C sources with preprocessor conditionals.
//!
//! Directives are resolved first: every token is tagged with the presence
//! condition of the branch it sits in. The parser then walks all branches at
//! once, which requires each branch to hold complete declarations or
//! statements. Identifier occurrences are finally resolved to entities, with
//! locals and globals collected across every branch and unit.

mod parser;
mod preprocess;

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use crate::conditions::Formula;
use crate::config::OptionSet;
use crate::error::{Error, Location, Result};

pub use preprocess::strip_prefix;

/// Scope name for file-level entities.
pub const GLOBAL: &str = "GLOBAL";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceUnit {
    pub path: String,
    pub text: String,
}

impl SourceUnit {
    pub fn new(path: impl Into<String>, text: impl Into<String>) -> Self {
        SourceUnit {
            path: path.into(),
            text: text.into(),
        }
    }

    pub fn read(path: &std::path::Path) -> std::io::Result<Self> {
        Ok(SourceUnit::new(
            path.display().to_string(),
            std::fs::read_to_string(path)?,
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EntityKind {
    Variable,
    Function,
    Label,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Entity {
    pub scope: String,
    pub name: String,
    pub kind: EntityKind,
}

impl Entity {
    pub fn new(scope: impl Into<String>, name: impl Into<String>, kind: EntityKind) -> Self {
        Entity {
            scope: scope.into(),
            name: name.into(),
            kind,
        }
    }

    pub fn global(name: impl Into<String>, kind: EntityKind) -> Self {
        Entity::new(GLOBAL, name, kind)
    }

    pub fn is_global(&self) -> bool {
        self.scope == GLOBAL
    }
}

impl fmt::Display for Entity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.scope, self.name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Op {
    Declare,
    Assign,
    Use,
    Destruct,
}

impl Op {
    pub const ALL: [Op; 4] = [Op::Declare, Op::Assign, Op::Use, Op::Destruct];
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OperationRecord {
    pub op: Op,
    pub entity: Entity,
    pub pc: Formula,
    pub loc: Location,
    /// Set only on assignments whose value is a null pointer literal.
    pub null_assign: bool,
}

impl OperationRecord {
    /// The facts-file tag: DECLARE, ASSIGN, ASSIGN_NULL, USE or DESTRUCT.
    pub fn tag(&self) -> &'static str {
        match (self.op, self.null_assign) {
            (Op::Declare, _) => "DECLARE",
            (Op::Assign, false) => "ASSIGN",
            (Op::Assign, true) => "ASSIGN_NULL",
            (Op::Use, _) => "USE",
            (Op::Destruct, _) => "DESTRUCT",
        }
    }
}

/// Front-end settings shared by every unit of a project.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrontendConfig {
    /// Stripped from option names found in directives.
    pub prefix: String,
    /// Calls to these functions destruct their argument.
    pub destructors: Vec<String>,
}

impl Default for FrontendConfig {
    fn default() -> Self {
        FrontendConfig {
            prefix: "CONFIG_".to_string(),
            destructors: vec!["free".to_string()],
        }
    }
}

/// Option names mentioned by any directive condition, deduplicated and
/// sorted.
pub fn extract_options(srcs: &[SourceUnit], cfg: &FrontendConfig) -> Result<OptionSet> {
    let mut names = BTreeSet::new();
    for src in srcs {
        let pre = preprocess::preprocess(src, &cfg.prefix)?;
        names.extend(pre.atoms);
    }
    Ok(OptionSet::new(names))
}

/// Extracts the operation records of a single unit.
pub fn parse_unit(
    src: &SourceUnit,
    options: &OptionSet,
    cfg: &FrontendConfig,
) -> Result<Vec<OperationRecord>> {
    parse_units(std::slice::from_ref(src), options, cfg)
}

/// Extracts the records of several units, resolving globals across them.
/// Records come out unit by unit, each in source order.
pub fn parse_units(
    srcs: &[SourceUnit],
    options: &OptionSet,
    cfg: &FrontendConfig,
) -> Result<Vec<OperationRecord>> {
    let mut raws = Vec::with_capacity(srcs.len());
    for src in srcs {
        let pre = preprocess::preprocess(src, &cfg.prefix)?;
        if let Some(unknown) = pre.atoms.iter().find(|a| !options.contains(a)) {
            return Err(Error::UnknownOption(unknown.clone()));
        }
        let raw = parser::parse(&src.path, &pre, &cfg.destructors)?;
        raws.push((pre, raw));
    }

    let mut globals = Globals::default();
    for (_, raw) in &raws {
        globals.vars.extend(raw.global_vars.iter().cloned());
        globals.funcs.extend(raw.global_funcs.iter().cloned());
    }

    let mut out = Vec::new();
    for (src, (pre, raw)) in srcs.iter().zip(&raws) {
        let mut records: Vec<(u64, OperationRecord)> = raw
            .events
            .iter()
            .map(|ev| (ev.order, resolve(ev, raw, &globals, pre, &src.path)))
            .collect();
        records.sort_by_key(|(order, _)| *order);
        out.extend(records.into_iter().map(|(_, r)| r));
    }
    Ok(out)
}

/// Distinct non-trivial presence conditions, in order of first appearance.
pub fn presence_blocks(records: &[OperationRecord]) -> Vec<Formula> {
    let mut seen = HashSet::new();
    records
        .iter()
        .filter(|r| r.pc != Formula::TRUE && seen.insert(&r.pc))
        .map(|r| r.pc.clone())
        .collect()
}

#[derive(Default)]
struct Globals {
    vars: HashSet<String>,
    funcs: HashSet<String>,
}

fn resolve(
    ev: &parser::Event,
    raw: &parser::RawUnit,
    globals: &Globals,
    pre: &preprocess::Preprocessed,
    path: &str,
) -> OperationRecord {
    use parser::EventKind as K;

    let scope = ev.func.as_deref().unwrap_or(GLOBAL);
    let is_local = |name: &str| {
        ev.func
            .as_ref()
            .and_then(|f| raw.locals.get(f))
            .is_some_and(|names| names.contains(name))
    };
    let entity = match &ev.kind {
        K::Declare(kind) => Entity::new(scope, &ev.name, *kind),
        K::Label { .. } => Entity::new(scope, &ev.name, EntityKind::Label),
        _ if is_local(&ev.name) => Entity::new(scope, &ev.name, EntityKind::Variable),
        K::Use { call: true } => {
            if globals.vars.contains(&ev.name) && !globals.funcs.contains(&ev.name) {
                Entity::global(&ev.name, EntityKind::Variable)
            } else {
                Entity::global(&ev.name, EntityKind::Function)
            }
        }
        _ if globals.vars.contains(&ev.name) => Entity::global(&ev.name, EntityKind::Variable),
        _ if globals.funcs.contains(&ev.name) => Entity::global(&ev.name, EntityKind::Function),
        _ => Entity::new(scope, &ev.name, EntityKind::Variable),
    };
    let (op, null_assign) = match ev.kind {
        K::Declare(_) | K::Label { declare: true } => (Op::Declare, false),
        K::Label { declare: false } | K::Use { .. } => (Op::Use, false),
        K::Assign { null } => (Op::Assign, null),
        K::Destruct => (Op::Destruct, false),
    };
    OperationRecord {
        op,
        entity,
        pc: pre.pcs[ev.pc].clone(),
        loc: Location {
            file: path.to_string(),
            line: ev.line,
        },
        null_assign,
    }
}

/// Groups records by entity, keeping first-appearance order.
pub fn records_by_entity(records: &[OperationRecord]) -> Vec<(&Entity, Vec<usize>)> {
    let mut index: HashMap<&Entity, usize> = HashMap::new();
    let mut out: Vec<(&Entity, Vec<usize>)> = Vec::new();
    for (i, r) in records.iter().enumerate() {
        let slot = *index.entry(&r.entity).or_insert_with(|| {
            out.push((&r.entity, Vec::new()));
            out.len() - 1
        });
        out[slot].1.push(i);
    }
    out
}
