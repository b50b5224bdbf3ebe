//! Brute-force reference: evaluate every record under one configuration and
//! check the violation kinds directly on the resulting variant.
//!
//! Works on sets of entities, ignoring statement order, like the detector.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::conditions::Formula;
use crate::config::{Configuration, Literal, OptionSet};
use crate::error::Location;
use crate::interactions::Violation;
use crate::varfront::{Entity, EntityKind, Op, OperationRecord};

/// Counts of active operations on one entity in one variant.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct VariantFacts {
    pub declared: usize,
    pub assigned: usize,
    pub assigned_non_null: usize,
    pub used: usize,
    pub destructed: usize,
}

/// Facts of every entity that has a record, active or not.
pub fn variant_facts(
    records: &[OperationRecord],
    c: &Configuration,
) -> BTreeMap<Entity, VariantFacts> {
    let mut out: BTreeMap<Entity, VariantFacts> = BTreeMap::new();
    for r in records {
        let f = out.entry(r.entity.clone()).or_default();
        if !r.pc.eval_config(c) {
            continue;
        }
        match r.op {
            Op::Declare => f.declared += 1,
            Op::Assign => {
                f.assigned += 1;
                if !r.null_assign {
                    f.assigned_non_null += 1;
                }
            }
            Op::Use => f.used += 1,
            Op::Destruct => f.destructed += 1,
        }
    }
    out
}

/// Violations present in the variant selected by `c`, ordered by entity and
/// then rule.
pub fn check_variant(records: &[OperationRecord], c: &Configuration) -> Vec<(Violation, Entity)> {
    let destructible: BTreeSet<&Entity> = records
        .iter()
        .filter(|r| r.op == Op::Destruct)
        .map(|r| &r.entity)
        .collect();
    let mut out = Vec::new();
    for (e, f) in variant_facts(records, c) {
        let declared = f.declared > 0;
        let mut flag = |hit: bool, v: Violation| {
            if hit {
                out.push((v, e.clone()));
            }
        };
        flag(f.declared >= 2, Violation::DeclarationDuplication);
        flag(f.used > 0 && !declared, Violation::UseWithoutDeclaration);
        flag(declared && f.used == 0 && !e.is_global(), Violation::Unused);
        flag(f.destructed > 0 && !declared, Violation::DestructionWithoutDeclaration);
        flag(f.assigned > 0 && !declared, Violation::AssignmentWithoutDeclaration);
        flag(
            e.kind == EntityKind::Variable && f.used > 0 && declared && f.assigned_non_null == 0,
            Violation::UseWithoutAssignment,
        );
        flag(f.destructed > 0 && f.assigned == 0, Violation::DestructionWithoutDefinition);
        flag(
            f.assigned_non_null > 0 && f.destructed == 0 && destructible.contains(&e),
            Violation::MemoryLeak,
        );
        flag(f.destructed >= 2, Violation::DestructionDuplication);
        flag(f.used > 0 && f.destructed > 0, Violation::UseAfterDestruction);
    }
    out
}

/// Parameters of [`generate_fixture`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FixtureShape {
    pub max_options: usize,
    pub max_entities: usize,
    /// Upper bound on records per operation kind and entity.
    pub max_per_op: usize,
}

impl Default for FixtureShape {
    fn default() -> Self {
        FixtureShape {
            max_options: 8,
            max_entities: 4,
            max_per_op: 2,
        }
    }
}

/// A random fixture in which every entity is declared, assigned and used at
/// least once, and usually destructed. Each record is guarded by a single
/// literal, or for at most one record per entity by nothing. No two records
/// of one entity share an option, so any violation needs the code of two
/// different options, or of one option and the core.
pub fn generate_fixture(seed: u64, shape: FixtureShape) -> (Arc<OptionSet>, Vec<OperationRecord>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_opts = rng.gen_range(2..=shape.max_options.max(2));
    let options = Arc::new(OptionSet::new((0..n_opts).map(|i| format!("O{i}"))));
    let n_ents = rng.gen_range(1..=shape.max_entities.max(1));
    let mut records = Vec::new();
    let mut line = 0;

    for e in 0..n_ents {
        let entity = if rng.gen_bool(0.5) {
            Entity::global(format!("g{e}"), EntityKind::Variable)
        } else {
            Entity::new("f", format!("v{e}"), EntityKind::Variable)
        };
        // declare, assign and use come first so truncation keeps them
        let mut ops = vec![Op::Declare, Op::Assign, Op::Use];
        if rng.gen_bool(0.7) {
            ops.push(Op::Destruct);
        }
        for op in Op::ALL {
            let extra = rng.gen_range(0..shape.max_per_op.max(1));
            ops.extend(std::iter::repeat_n(op, extra));
        }
        ops.truncate(n_opts + 1);
        let core = rng.gen_bool(0.5).then(|| rng.gen_range(0..ops.len()));
        let mut free: Vec<usize> = (0..n_opts).collect();
        for (i, op) in ops.into_iter().enumerate() {
            let pc = if Some(i) == core || free.is_empty() {
                Formula::TRUE
            } else {
                let o = free.swap_remove(rng.gen_range(0..free.len()));
                Formula::literal(&Literal::new(options.names()[o].clone(), rng.gen_bool(0.5)))
            };
            line += 1;
            records.push(OperationRecord {
                op,
                entity: entity.clone(),
                pc,
                loc: Location {
                    file: format!("gen{seed}.c"),
                    line,
                },
                null_assign: op == Op::Assign && rng.gen_bool(0.2),
            });
        }
    }
    (options, records)
}

/// The oracle's verdict for every configuration of `configs`.
pub fn check_all(records: &[OperationRecord], configs: &[Configuration]) -> Vec<Vec<(Violation, Entity)>> {
    configs.iter().map(|c| check_variant(records, c)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::configurations_from_rows;
    use crate::varfront::{extract_options, parse_units, FrontendConfig, SourceUnit};

    fn project(text: &str) -> (Arc<OptionSet>, Vec<OperationRecord>) {
        let srcs = [SourceUnit::new("t.c", text)];
        let cfg = FrontendConfig::default();
        let opts = Arc::new(extract_options(&srcs, &cfg).unwrap());
        let recs = parse_units(&srcs, &opts, &cfg).unwrap();
        (opts, recs)
    }

    fn config(o: &Arc<OptionSet>, row: &str) -> Configuration {
        configurations_from_rows(o.clone(), [row.chars().map(|c| c == 'T').collect()]).remove(0)
    }

    fn rendered(flags: &[(Violation, Entity)]) -> Vec<String> {
        flags.iter().map(|(v, e)| format!("{} {e}", v.rule())).collect()
    }

    #[test]
    fn well_formed_variant_is_clean() {
        let (o, recs) = project("int g(void);\nint x = 1;\n#ifdef A\nint main(void) { return g() + x; }\n#endif\n");
        assert!(check_variant(&recs, &config(&o, "T")).is_empty());
    }

    #[test]
    fn never_assigned_variable_is_flagged() {
        let (o, recs) = project("void f(void) {\n int x;\n#ifdef A\n use(x);\n#endif\n}\n");
        let x = |row| {
            let all = rendered(&check_variant(&recs, &config(&o, row)));
            all.into_iter().filter(|f| f.ends_with("f.x")).collect::<Vec<_>>()
        };
        assert_eq!(x("T"), ["6 f.x"]);
        assert_eq!(x("F"), ["3 f.x"]);
    }

    #[test]
    fn leak_needs_a_destructor_somewhere() {
        let (o, recs) = project("int *m;\nvoid run(void) {\n#ifdef A\n m = alloc();\n#endif\n#ifdef B\n free(m);\n#endif\n}\n");
        let flags = rendered(&check_variant(&recs, &config(&o, "TF")));
        assert!(flags.contains(&"8 GLOBAL.m".to_string()), "{flags:?}");
        let flags = rendered(&check_variant(&recs, &config(&o, "FT")));
        assert!(flags.contains(&"7 GLOBAL.m".to_string()), "{flags:?}");
    }

    #[test]
    fn generator_is_deterministic_and_shaped() {
        let shape = FixtureShape::default();
        for seed in 0..50 {
            let (o1, r1) = generate_fixture(seed, shape);
            let (o2, r2) = generate_fixture(seed, shape);
            assert_eq!(o1, o2);
            assert_eq!(r1, r2);
            assert!(o1.len() <= shape.max_options);
            for r in &r1 {
                assert!(r.pc.atoms().len() <= 1);
            }
        }
    }
}
