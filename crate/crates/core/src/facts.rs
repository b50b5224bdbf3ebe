//! The per-literal entity sets (declared, assigned, used, destructed) and
//! their unconditional counterparts.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::{Arc, OnceLock};

use crate::conditions::{self, Formula};
use crate::config::{Literal, OptionSet};
use crate::error::{Error, Result};
use crate::varfront::{Entity, Op, OperationRecord};

/// Which literals a record's presence condition belongs to.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Membership {
    /// `o=v` switches the code on and never off. Agrees with `Entails` on
    /// conjunctions of literals and also handles disjunctive conditions.
    #[default]
    Enables,
    /// Every satisfying assignment sets `o=v`.
    Entails,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Selector {
    Alpha,
    Beta,
    Gamma,
    Delta,
}

impl Selector {
    pub const ALL: [Selector; 4] = [Selector::Alpha, Selector::Beta, Selector::Gamma, Selector::Delta];

    pub fn op(self) -> Op {
        match self {
            Selector::Alpha => Op::Declare,
            Selector::Beta => Op::Assign,
            Selector::Gamma => Op::Use,
            Selector::Delta => Op::Destruct,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Selector::Alpha => "alpha",
            Selector::Beta => "beta",
            Selector::Gamma => "gamma",
            Selector::Delta => "delta",
        }
    }
}

/// Entities with the indices of the records that put them there.
pub type Witnessed = BTreeMap<Entity, Vec<usize>>;

/// The four sets for one literal, or for the core.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Sets {
    pub alpha: Witnessed,
    pub beta: Witnessed,
    /// The part of `beta` justified by non-null assignments.
    pub beta_non_null: Witnessed,
    pub gamma: Witnessed,
    pub delta: Witnessed,
}

impl Sets {
    pub fn get(&self, s: Selector) -> &Witnessed {
        match s {
            Selector::Alpha => &self.alpha,
            Selector::Beta => &self.beta,
            Selector::Gamma => &self.gamma,
            Selector::Delta => &self.delta,
        }
    }

    pub fn entities(&self, s: Selector) -> BTreeSet<&Entity> {
        self.get(s).keys().collect()
    }

    pub fn is_empty(&self) -> bool {
        Selector::ALL.iter().all(|&s| self.get(s).is_empty())
    }

    fn add(&mut self, index: usize, r: &OperationRecord) {
        let set = match r.op {
            Op::Declare => &mut self.alpha,
            Op::Assign => &mut self.beta,
            Op::Use => &mut self.gamma,
            Op::Destruct => &mut self.delta,
        };
        set.entry(r.entity.clone()).or_default().push(index);
        if r.op == Op::Assign && !r.null_assign {
            self.beta_non_null
                .entry(r.entity.clone())
                .or_default()
                .push(index);
        }
    }
}

fn member(pc: &Formula, option: &str, value: bool, how: Membership) -> Result<bool> {
    match how {
        Membership::Enables => conditions::enables_literal(pc, option, value),
        Membership::Entails => conditions::entails_literal(pc, option, value),
    }
}

/// `(α(o,v), β(o,v), γ(o,v), δ(o,v))` as one [`Sets`].
pub fn collect_program_entities(
    records: &[OperationRecord],
    option: &str,
    value: bool,
    how: Membership,
) -> Result<Sets> {
    let mut sets = Sets::default();
    for (i, r) in records.iter().enumerate() {
        if r.pc.atoms().contains(option) && member(&r.pc, option, value, how)? {
            sets.add(i, r);
        }
    }
    Ok(sets)
}

/// Entities operated on by records whose presence condition always holds.
pub fn collect_core(records: &[OperationRecord]) -> Result<Sets> {
    let mut sets = Sets::default();
    for (i, r) in records.iter().enumerate() {
        if conditions::is_valid(&r.pc)? {
            sets.add(i, r);
        }
    }
    Ok(sets)
}

/// All selection sets of a project, plus the records they index into.
#[derive(Debug, Clone)]
pub struct SelectionTables {
    options: Arc<OptionSet>,
    records: Vec<OperationRecord>,
    by_literal: BTreeMap<Literal, Sets>,
    core: Sets,
}

impl SelectionTables {
    pub fn build(records: Vec<OperationRecord>, options: Arc<OptionSet>) -> Result<Self> {
        Self::build_with(records, options, Membership::default())
    }

    pub fn build_with(
        records: Vec<OperationRecord>,
        options: Arc<OptionSet>,
        how: Membership,
    ) -> Result<Self> {
        // one decision per distinct condition
        let mut memo: HashMap<&Formula, Vec<Literal>> = HashMap::new();
        let mut by_literal: BTreeMap<Literal, Sets> = BTreeMap::new();
        let mut core = Sets::default();
        for (i, r) in records.iter().enumerate() {
            if !memo.contains_key(&r.pc) {
                let mut lits = Vec::new();
                for atom in r.pc.atoms() {
                    if !options.contains(atom) {
                        return Err(Error::UnknownOption(atom.to_string()));
                    }
                    for value in [true, false] {
                        if member(&r.pc, atom, value, how)? {
                            lits.push(Literal::new(atom, value));
                        }
                    }
                }
                memo.insert(&r.pc, lits);
            }
            for lit in &memo[&r.pc] {
                by_literal.entry(lit.clone()).or_default().add(i, r);
            }
            if conditions::is_valid(&r.pc)? {
                core.add(i, r);
            }
        }
        Ok(SelectionTables {
            options,
            by_literal,
            core,
            records,
        })
    }

    pub fn options(&self) -> &Arc<OptionSet> {
        &self.options
    }

    pub fn records(&self) -> &[OperationRecord] {
        &self.records
    }

    pub fn record(&self, index: usize) -> &OperationRecord {
        &self.records[index]
    }

    /// The sets for `lit`; empty when no record is controlled by it.
    pub fn sets(&self, lit: &Literal) -> &Sets {
        static EMPTY: OnceLock<Sets> = OnceLock::new();
        self.by_literal
            .get(lit)
            .unwrap_or_else(|| EMPTY.get_or_init(Sets::default))
    }

    pub fn core(&self) -> &Sets {
        &self.core
    }

    /// Literals with at least one non-empty set, options in declared order
    /// and `T` before `F`.
    pub fn literals(&self) -> Vec<&Literal> {
        let mut lits: Vec<&Literal> = self.by_literal.keys().collect();
        lits.sort_by_key(|l| (self.options.index_of(&l.option), !l.value));
        lits
    }

    /// The value that switches `option`'s code on: `F` when only the
    /// disabled side controls any entity, `T` otherwise.
    pub fn polarity(&self, option: &str) -> bool {
        let on = self.sets(&Literal::new(option, true)).is_empty();
        let off = self.sets(&Literal::new(option, false)).is_empty();
        !(on && !off)
    }

    /// Per-option polarity in declared order.
    pub fn polarities(&self) -> Vec<bool> {
        self.polarities_for(&self.options)
    }

    /// Polarity of each option of `options`, in that order. Options the
    /// tables never saw count as `T`.
    pub fn polarities_for(&self, options: &OptionSet) -> Vec<bool> {
        options.iter().map(|o| self.polarity(o)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::varfront::{extract_options, parse_unit, FrontendConfig, SourceUnit};

    fn tables(text: &str) -> SelectionTables {
        let src = SourceUnit::new("t.c", text);
        let cfg = FrontendConfig::default();
        let opts = Arc::new(extract_options(std::slice::from_ref(&src), &cfg).unwrap());
        let recs = parse_unit(&src, &opts, &cfg).unwrap();
        SelectionTables::build(recs, opts).unwrap()
    }

    fn names(w: &Witnessed) -> Vec<String> {
        w.keys().map(ToString::to_string).collect()
    }

    #[test]
    fn top_level_declaration_is_core() {
        let t = tables("int g;");
        assert_eq!(names(&t.core().alpha), ["GLOBAL.g"]);
        assert!(t.literals().is_empty());
    }

    #[test]
    fn tautological_condition_is_core() {
        let t = tables("#if defined(A) || !defined(A)\nint g;\n#endif\n");
        assert_eq!(names(&t.core().alpha), ["GLOBAL.g"]);
        assert!(t.sets(&Literal::new("A", true)).is_empty());
        assert!(t.sets(&Literal::new("A", false)).is_empty());
    }

    #[test]
    fn unmentioned_option_has_empty_sets() {
        let t = tables("#ifdef A\nint g;\n#endif\n");
        assert!(t.sets(&Literal::new("Z", true)).is_empty());
    }

    #[test]
    fn disjunction_membership_depends_on_mode() {
        let text = "#if defined(A) || defined(B)\nint g;\n#endif\n";
        let src = SourceUnit::new("t.c", text);
        let cfg = FrontendConfig::default();
        let opts = Arc::new(extract_options(std::slice::from_ref(&src), &cfg).unwrap());
        let recs = parse_unit(&src, &opts, &cfg).unwrap();

        let enables = SelectionTables::build(recs.clone(), opts.clone()).unwrap();
        assert_eq!(names(&enables.sets(&Literal::new("A", true)).alpha), ["GLOBAL.g"]);
        assert!(enables.sets(&Literal::new("A", false)).is_empty());

        let entails = SelectionTables::build_with(recs.clone(), opts, Membership::Entails).unwrap();
        assert!(entails.sets(&Literal::new("A", true)).is_empty());

        let direct = collect_program_entities(&recs, "B", true, Membership::Enables).unwrap();
        assert_eq!(direct, *enables.sets(&Literal::new("B", true)));
    }

    #[test]
    fn null_assignments_stay_out_of_non_null_beta() {
        let t = tables("#ifdef A\nint *p = NULL;\n#endif\n#ifdef B\nint *q = &x;\n#endif\n");
        let a = t.sets(&Literal::new("A", true));
        assert_eq!(names(&a.beta), ["GLOBAL.p"]);
        assert!(a.beta_non_null.is_empty());
        assert_eq!(names(&t.sets(&Literal::new("B", true)).beta_non_null), ["GLOBAL.q"]);
    }

    #[test]
    fn polarity_follows_controlled_side() {
        let t = tables("#ifndef S\nint a;\n#endif\n#ifdef T\nint b;\n#endif\n#ifdef U\nint c;\n#else\nint d;\n#endif\n");
        assert!(!t.polarity("S"));
        assert!(t.polarity("T"));
        assert!(t.polarity("U"));
    }
}
