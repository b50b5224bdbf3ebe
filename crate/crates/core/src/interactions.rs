//! Feature interactions over shared entities and the suspicious selections
//! they imply.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::conditions::{self, Formula};
use crate::config::{Literal, PartialAssignment};
use crate::error::Result;
use crate::facts::{SelectionTables, Selector, Sets};
use crate::varfront::{Entity, Op};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum InteractionKind {
    DeclareDeclare,
    DeclareAssign,
    DeclareUse,
    DeclareDestruct,
    AssignAssign,
    AssignUse,
    AssignDestruct,
    UseDestruct,
    DestructDestruct,
}

impl InteractionKind {
    pub const ALL: [InteractionKind; 9] = [
        InteractionKind::DeclareDeclare,
        InteractionKind::DeclareAssign,
        InteractionKind::DeclareUse,
        InteractionKind::DeclareDestruct,
        InteractionKind::AssignAssign,
        InteractionKind::AssignUse,
        InteractionKind::AssignDestruct,
        InteractionKind::UseDestruct,
        InteractionKind::DestructDestruct,
    ];

    /// The sets intersected: first side, second side.
    pub fn selectors(self) -> (Selector, Selector) {
        use Selector::*;
        match self {
            InteractionKind::DeclareDeclare => (Alpha, Alpha),
            InteractionKind::DeclareAssign => (Alpha, Beta),
            InteractionKind::DeclareUse => (Alpha, Gamma),
            InteractionKind::DeclareDestruct => (Alpha, Delta),
            InteractionKind::AssignAssign => (Beta, Beta),
            InteractionKind::AssignUse => (Beta, Gamma),
            InteractionKind::AssignDestruct => (Beta, Delta),
            InteractionKind::UseDestruct => (Gamma, Delta),
            InteractionKind::DestructDestruct => (Delta, Delta),
        }
    }

    pub fn is_symmetric(self) -> bool {
        let (a, b) = self.selectors();
        a == b
    }

    pub fn name(self) -> &'static str {
        match self {
            InteractionKind::DeclareDeclare => "declare-declare",
            InteractionKind::DeclareAssign => "declare-assign",
            InteractionKind::DeclareUse => "declare-use",
            InteractionKind::DeclareDestruct => "declare-destruct",
            InteractionKind::AssignAssign => "assign-assign",
            InteractionKind::AssignUse => "assign-use",
            InteractionKind::AssignDestruct => "assign-destruct",
            InteractionKind::UseDestruct => "use-destruct",
            InteractionKind::DestructDestruct => "destruct-destruct",
        }
    }
}

impl fmt::Display for InteractionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One side of an interaction: a literal, or the unconditional core.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Core,
    Lit(Literal),
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::Core => f.write_str("core"),
            Side::Lit(l) => write!(f, "{l}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Interaction {
    pub kind: InteractionKind,
    pub entity: Entity,
    pub first: Side,
    pub second: Side,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Violation {
    DeclarationDuplication,
    UseWithoutDeclaration,
    Unused,
    DestructionWithoutDeclaration,
    AssignmentWithoutDeclaration,
    UseWithoutAssignment,
    DestructionWithoutDefinition,
    MemoryLeak,
    DestructionDuplication,
    UseAfterDestruction,
}

impl Violation {
    pub const ALL: [Violation; 10] = [
        Violation::DeclarationDuplication,
        Violation::UseWithoutDeclaration,
        Violation::Unused,
        Violation::DestructionWithoutDeclaration,
        Violation::AssignmentWithoutDeclaration,
        Violation::UseWithoutAssignment,
        Violation::DestructionWithoutDefinition,
        Violation::MemoryLeak,
        Violation::DestructionDuplication,
        Violation::UseAfterDestruction,
    ];

    /// Rule number, 1 to 10.
    pub fn rule(self) -> u8 {
        self as u8 + 1
    }

    pub fn from_rule(rule: u8) -> Option<Violation> {
        Violation::ALL.get(usize::from(rule).checked_sub(1)?).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Violation::DeclarationDuplication => "Declaration duplication",
            Violation::UseWithoutDeclaration => "Use without declaration",
            Violation::Unused => "Unused variables/functions",
            Violation::DestructionWithoutDeclaration => "Destruction without declaration",
            Violation::AssignmentWithoutDeclaration => "Assignment without declaration",
            Violation::UseWithoutAssignment => "Use without assignment",
            Violation::DestructionWithoutDefinition => "Destruction without definition",
            Violation::MemoryLeak => "Memory leak",
            Violation::DestructionDuplication => "Destruction duplication",
            Violation::UseAfterDestruction => "Use after destruction",
        }
    }

    pub fn from_name(name: &str) -> Option<Violation> {
        Violation::ALL.into_iter().find(|v| v.name() == name)
    }

    fn kind(self) -> InteractionKind {
        use InteractionKind::*;
        match self {
            Violation::DeclarationDuplication => DeclareDeclare,
            Violation::UseWithoutDeclaration | Violation::Unused => DeclareUse,
            Violation::DestructionWithoutDeclaration => DeclareDestruct,
            Violation::AssignmentWithoutDeclaration => DeclareAssign,
            Violation::UseWithoutAssignment => AssignUse,
            Violation::DestructionWithoutDefinition | Violation::MemoryLeak => AssignDestruct,
            Violation::DestructionDuplication => DestructDestruct,
            Violation::UseAfterDestruction => UseDestruct,
        }
    }

    /// Which side's literal the suspicious selection negates.
    fn flips(self) -> (bool, bool) {
        match self {
            Violation::UseWithoutDeclaration
            | Violation::DestructionWithoutDeclaration
            | Violation::AssignmentWithoutDeclaration
            | Violation::UseWithoutAssignment
            | Violation::DestructionWithoutDefinition => (true, false),
            Violation::Unused | Violation::MemoryLeak => (false, true),
            _ => (false, false),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuspiciousSelection {
    pub violation: Violation,
    pub entity: Entity,
    pub literals: PartialAssignment,
    /// Use-without-assignment raised although the only assignments on the
    /// flipped side store a null pointer.
    pub null_only: bool,
}

impl SuspiciousSelection {
    pub fn rule(&self) -> u8 {
        self.violation.rule()
    }
}

fn sides(tables: &SelectionTables) -> Vec<Side> {
    tables
        .literals()
        .into_iter()
        .map(|l| Side::Lit(l.clone()))
        .chain(std::iter::once(Side::Core))
        .collect()
}

fn sets_of<'t>(tables: &'t SelectionTables, side: &Side) -> &'t Sets {
    match side {
        Side::Core => tables.core(),
        Side::Lit(l) => tables.sets(l),
    }
}

fn distinct_witnesses(a: &[usize], b: &[usize]) -> bool {
    a.iter().any(|x| b.iter().any(|y| x != y))
}

/// Every interaction between two distinct sides over a shared entity.
pub fn detect_interactions(tables: &SelectionTables) -> Vec<Interaction> {
    let mut out = Vec::new();
    let sides = sides(tables);
    for (i, s1) in sides.iter().enumerate() {
        for (j, s2) in sides.iter().enumerate() {
            if i == j {
                continue;
            }
            for kind in InteractionKind::ALL {
                if kind.is_symmetric() && i > j {
                    continue;
                }
                let (x, y) = kind.selectors();
                let first = sets_of(tables, s1).get(x);
                let second = sets_of(tables, s2).get(y);
                for (entity, w1) in first {
                    if let Some(w2) = second.get(entity) {
                        if distinct_witnesses(w1, w2) {
                            out.push(Interaction {
                                kind,
                                entity: entity.clone(),
                                first: s1.clone(),
                                second: s2.clone(),
                            });
                        }
                    }
                }
            }
        }
    }
    out
}

/// Record indices of one entity, grouped by operation.
#[derive(Default)]
struct EntityOps {
    by_op: [Vec<usize>; 4],
    non_null: Vec<usize>,
}

impl EntityOps {
    fn of(&self, op: Op) -> &[usize] {
        &self.by_op[op as usize]
    }
}

struct Detector<'t> {
    tables: &'t SelectionTables,
    ops: HashMap<&'t Entity, EntityOps>,
}

impl<'t> Detector<'t> {
    fn new(tables: &'t SelectionTables) -> Self {
        let mut ops: HashMap<&Entity, EntityOps> = HashMap::new();
        for (i, r) in tables.records().iter().enumerate() {
            let e = ops.entry(&r.entity).or_default();
            e.by_op[r.op as usize].push(i);
            if r.op == Op::Assign && !r.null_assign {
                e.non_null.push(i);
            }
        }
        Detector { tables, ops }
    }

    fn any(&self, indices: &[usize]) -> Formula {
        Formula::any(indices.iter().map(|&i| self.tables.record(i).pc.clone()))
    }

    fn both_active(&self, a: &[usize], b: &[usize]) -> Formula {
        Formula::any(a.iter().flat_map(|&x| {
            b.iter().filter(move |&&y| y != x).map(move |&y| {
                Formula::and(
                    self.tables.record(x).pc.clone(),
                    self.tables.record(y).pc.clone(),
                )
            })
        }))
    }

    /// Whether the violation can occur in some configuration containing
    /// `sel`, judged from all records of the entity.
    fn realizable(
        &self,
        v: Violation,
        entity: &Entity,
        w1: &[usize],
        w2: &[usize],
        sel: &PartialAssignment,
    ) -> Result<bool> {
        let ops = &self.ops[entity];
        let not = |idx: &[usize]| Formula::not(self.any(idx));
        let cond = match v {
            Violation::DeclarationDuplication | Violation::DestructionDuplication => {
                self.both_active(w1, w2)
            }
            Violation::UseWithoutDeclaration
            | Violation::DestructionWithoutDeclaration
            | Violation::AssignmentWithoutDeclaration => {
                Formula::and(self.any(w2), not(ops.of(Op::Declare)))
            }
            Violation::Unused => Formula::and(self.any(w1), not(ops.of(Op::Use))),
            Violation::UseWithoutAssignment => Formula::all([
                self.any(w2),
                self.any(ops.of(Op::Declare)),
                not(&ops.non_null),
            ]),
            Violation::DestructionWithoutDefinition => {
                Formula::and(self.any(w2), not(ops.of(Op::Assign)))
            }
            Violation::MemoryLeak => Formula::and(self.any(w1), not(ops.of(Op::Destruct))),
            Violation::UseAfterDestruction => Formula::and(self.any(w1), self.any(w2)),
        };
        let sel = Formula::all(sel.literals().map(|l| Formula::literal(&l)));
        conditions::is_satisfiable(&Formula::and(sel, cond))
    }

    fn suppressed(&self, v: Violation, entity: &Entity) -> bool {
        let core = self.tables.core();
        match v {
            Violation::UseWithoutDeclaration
            | Violation::DestructionWithoutDeclaration
            | Violation::AssignmentWithoutDeclaration => core.alpha.contains_key(entity),
            Violation::Unused => core.gamma.contains_key(entity),
            Violation::UseWithoutAssignment => core.beta_non_null.contains_key(entity),
            Violation::DestructionWithoutDefinition => core.beta.contains_key(entity),
            Violation::MemoryLeak => core.delta.contains_key(entity),
            _ => false,
        }
    }
}

fn literal_for(side: &Side, flip: bool) -> Option<Option<Literal>> {
    match (side, flip) {
        // the core cannot be switched off
        (Side::Core, true) => None,
        (Side::Core, false) => Some(None),
        (Side::Lit(l), false) => Some(Some(l.clone())),
        (Side::Lit(l), true) => Some(Some(l.flipped())),
    }
}

fn selection(first: Option<Literal>, second: Option<Literal>) -> Option<PartialAssignment> {
    PartialAssignment::from_literals(first.into_iter().chain(second)).ok()
}

/// Applies the ten rules to every interaction. Selections are merged on
/// (rule, literals), keeping the smallest witness entity, and sorted by
/// (rule, entity, literals).
pub fn detect_suspicious_selections(tables: &SelectionTables) -> Result<Vec<SuspiciousSelection>> {
    let detector = Detector::new(tables);
    let mut merged: BTreeMap<(u8, PartialAssignment), SuspiciousSelection> = BTreeMap::new();

    for it in detect_interactions(tables) {
        let (x, y) = it.kind.selectors();
        let s1 = sets_of(tables, &it.first);
        let s2 = sets_of(tables, &it.second);
        let w1 = &s1.get(x)[&it.entity];
        let w2 = &s2.get(y)[&it.entity];

        for v in Violation::ALL.into_iter().filter(|v| v.kind() == it.kind) {
            if v == Violation::Unused && it.entity.is_global() {
                continue;
            }
            if detector.suppressed(v, &it.entity) {
                continue;
            }
            let mut w1 = w1.as_slice();
            let mut candidates = Vec::new();
            let (flip1, flip2) = v.flips();
            match v {
                Violation::MemoryLeak => match s1.beta_non_null.get(&it.entity) {
                    Some(nn) => w1 = nn,
                    None => continue,
                },
                Violation::UseWithoutAssignment
                    if !s1.beta_non_null.contains_key(&it.entity) =>
                {
                    candidates.push((false, false, true));
                }
                _ => {}
            }
            candidates.push((flip1, flip2, false));

            for (f1, f2, null_only) in candidates {
                let (Some(l1), Some(l2)) = (literal_for(&it.first, f1), literal_for(&it.second, f2))
                else {
                    continue;
                };
                let Some(sel) = selection(l1, l2) else {
                    continue;
                };
                if !detector.realizable(v, &it.entity, w1, w2, &sel)? {
                    continue;
                }
                let candidate = SuspiciousSelection {
                    violation: v,
                    entity: it.entity.clone(),
                    literals: sel.clone(),
                    null_only,
                };
                merged
                    .entry((v.rule(), sel))
                    .and_modify(|kept| {
                        if candidate.entity < kept.entity {
                            *kept = candidate.clone();
                        }
                    })
                    .or_insert(candidate);
            }
        }
    }

    let mut out: Vec<SuspiciousSelection> = merged.into_values().collect();
    out.sort_by(|a, b| {
        (a.rule(), &a.entity, &a.literals).cmp(&(b.rule(), &b.entity, &b.literals))
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::varfront::{extract_options, parse_units, FrontendConfig, SourceUnit};
    use std::sync::Arc;

    fn tables_of(units: &[(&str, &str)]) -> SelectionTables {
        let srcs: Vec<SourceUnit> = units.iter().map(|(p, t)| SourceUnit::new(*p, *t)).collect();
        let cfg = FrontendConfig::default();
        let opts = Arc::new(extract_options(&srcs, &cfg).unwrap());
        let recs = parse_units(&srcs, &opts, &cfg).unwrap();
        SelectionTables::build(recs, opts).unwrap()
    }

    fn rendered(text: &str) -> Vec<String> {
        detect_suspicious_selections(&tables_of(&[("t.c", text)]))
            .unwrap()
            .iter()
            .map(|s| format!("{} {} {}", s.rule(), s.entity, s.literals))
            .collect()
    }

    #[test]
    fn empty_tables_have_no_interactions() {
        assert!(detect_interactions(&tables_of(&[("t.c", "")])).is_empty());
    }

    #[test]
    fn declarations_in_two_files_interact_once() {
        let t = tables_of(&[
            ("a.c", "#ifdef A\nint g;\n#endif\n"),
            ("b.c", "#ifdef B\nint g;\n#endif\n"),
        ]);
        let its = detect_interactions(&t);
        assert_eq!(its.len(), 1);
        assert_eq!(its[0].kind, InteractionKind::DeclareDeclare);
    }

    #[test]
    fn single_record_does_not_interact_with_itself() {
        let t = tables_of(&[("t.c", "#if defined(A) && defined(B)\nint g;\n#endif\n")]);
        assert!(detect_interactions(&t).is_empty());
    }

    #[test]
    fn core_declaration_suppresses_use_without_declaration() {
        assert!(rendered("void f(void);\n#ifdef A\nint g(void) { f(); return 0; }\n#endif\n")
            .iter()
            .all(|l| !l.starts_with("2 GLOBAL.f")));
    }

    #[test]
    fn assignment_and_destruction_in_two_features() {
        let text = "void free(void *p);\nint *m;\nvoid run(void) {\n#ifdef A\n m = alloc();\n#endif\n#ifdef B\n free(m);\n#endif\n}\n";
        assert_eq!(rendered(text), ["7 GLOBAL.m A=F,B=T", "8 GLOBAL.m A=T,B=F"]);
    }

    #[test]
    fn intra_option_interaction_collapses() {
        let text = "#ifdef A\nint g;\n#endif\nvoid f(void) {\n#ifndef A\n g = 1;\n#endif\n}\n";
        assert_eq!(rendered(text), ["5 GLOBAL.g A=F"]);
    }

    #[test]
    fn core_side_is_never_flipped() {
        // declared in core, used under A: nothing to report; the unused
        // variant would need the core switched off
        let text = "int g;\n#ifdef A\nvoid f(void) { g = 1; }\n#endif\n";
        assert!(rendered(text).is_empty());
    }

    #[test]
    fn null_only_assignment_gets_a_second_selection() {
        let text = "void f(void) {\n int *p;\n#ifdef A\n p = NULL;\n#endif\n#ifdef B\n use(p);\n#endif\n}\n";
        let sels = detect_suspicious_selections(&tables_of(&[("t.c", text)])).unwrap();
        let got: Vec<String> = sels
            .iter()
            .filter(|s| s.rule() == 6)
            .map(|s| format!("{} {} {}", s.rule(), s.literals, s.null_only))
            .collect();
        assert_eq!(got, ["6 A=F,B=T false", "6 A=T,B=T true"]);
    }

    #[test]
    fn violation_names_round_trip() {
        for v in Violation::ALL {
            assert_eq!(Violation::from_name(v.name()), Some(v));
            assert_eq!(Violation::from_rule(v.rule()), Some(v));
        }
        assert_eq!(Violation::from_rule(0), None);
        assert_eq!(Violation::from_rule(11), None);
    }
}
