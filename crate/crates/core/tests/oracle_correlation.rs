//! The detector against the brute-force oracle on generated fixtures.

use featint_core::conditions::{valid_configurations, FeatureModel};
use featint_core::config::Configuration;
use featint_core::facts::SelectionTables;
use featint_core::interactions::{detect_suspicious_selections, SuspiciousSelection};
use featint_core::oracle::{check_variant, generate_fixture, FixtureShape};
use featint_core::ranking::{copro_prioritize, suspiciousness};
use featint_core::OperationRecord;

struct Case {
    records: Vec<OperationRecord>,
    sels: Vec<SuspiciousSelection>,
    configs: Vec<Configuration>,
}

fn case(seed: u64, shape: FixtureShape) -> Case {
    let (opts, records) = generate_fixture(seed, shape);
    let tables = SelectionTables::build(records.clone(), opts.clone()).unwrap();
    let sels = detect_suspicious_selections(&tables).unwrap();
    let configs = valid_configurations(&FeatureModel::unconstrained(opts)).unwrap();
    Case {
        records,
        sels,
        configs,
    }
}

#[test]
fn every_flagged_variant_scores() {
    for seed in 0..200 {
        let k = case(seed, FixtureShape::default());
        for c in &k.configs {
            let flags = check_variant(&k.records, c);
            if !flags.is_empty() {
                assert!(
                    suspiciousness(c, &k.sels).unwrap() >= 1,
                    "seed {seed}: [{c}] flagged {flags:?} but contains no selection"
                );
            }
        }
    }
}

#[test]
fn top_ranked_variant_is_flagged() {
    for seed in 0..200 {
        let k = case(seed, FixtureShape::default());
        if k.configs.iter().all(|c| check_variant(&k.records, c).is_empty()) {
            continue;
        }
        let top = &copro_prioritize(&k.configs, &k.sels).unwrap()[0].config;
        assert!(!check_variant(&k.records, top).is_empty(), "seed {seed}: [{top}] is clean");
    }
}

// Holds when each entity has one record per operation. With several
// declarations, a selection naming one of them can be contained in a variant
// the other declaration rescues, so clean variants may outscore flagged ones.
#[test]
fn flagged_variants_never_score_below_clean_ones() {
    let shape = FixtureShape {
        max_per_op: 1,
        ..FixtureShape::default()
    };
    for seed in 0..200 {
        let k = case(seed, shape);
        let scored: Vec<(bool, usize)> = k
            .configs
            .iter()
            .map(|c| (!check_variant(&k.records, c).is_empty(), suspiciousness(c, &k.sels).unwrap()))
            .collect();
        let Some(clean_max) = scored.iter().filter(|s| !s.0).map(|s| s.1).max() else {
            continue;
        };
        for (flagged, score) in &scored {
            if *flagged {
                assert!(*score >= clean_max, "seed {seed}: flagged {score} < clean {clean_max}");
            }
        }
    }
}
