//! Orderings of a configuration batch: suspiciousness score (copro), greedy
//! additional coverage, similarity-based and random baselines.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{Configuration, PartialAssignment};
use crate::error::{Error, Result};
use crate::interactions::SuspiciousSelection;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankedConfiguration {
    pub config: Configuration,
    pub score: usize,
    /// 1-based.
    pub rank: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Copro,
    Additional,
    Sp,
    Random,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::Copro,
        Strategy::Additional,
        Strategy::Sp,
        Strategy::Random,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Copro => "copro",
            Strategy::Additional => "additional",
            Strategy::Sp => "sp",
            Strategy::Random => "random",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| format!("unknown strategy `{s}`"))
    }
}

fn ranked(order: impl IntoIterator<Item = (Configuration, usize)>) -> Vec<RankedConfiguration> {
    order
        .into_iter()
        .enumerate()
        .map(|(i, (config, score))| RankedConfiguration {
            config,
            score,
            rank: i + 1,
        })
        .collect()
}

/// `containment[c][s]`: whether configuration `c` contains selection `s`.
fn containment(configs: &[Configuration], sels: &[&PartialAssignment]) -> Result<Vec<Vec<bool>>> {
    configs
        .iter()
        .map(|c| sels.iter().map(|s| c.contains(s)).collect())
        .collect()
}

/// Number of selections contained in `c`.
pub fn suspiciousness(c: &Configuration, sels: &[SuspiciousSelection]) -> Result<usize> {
    let mut n = 0;
    for s in sels {
        n += usize::from(c.contains(&s.literals)?);
    }
    Ok(n)
}

/// Descending suspiciousness, ties in input order.
pub fn copro_prioritize(
    configs: &[Configuration],
    sels: &[SuspiciousSelection],
) -> Result<Vec<RankedConfiguration>> {
    let mut scored = configs
        .iter()
        .map(|c| Ok((c.clone(), suspiciousness(c, sels)?)))
        .collect::<Result<Vec<_>>>()?;
    scored.sort_by_key(|s| std::cmp::Reverse(s.1));
    Ok(ranked(scored))
}

/// Greedy: each pick contains the most selections not yet contained by an
/// earlier pick. Once nothing new can be gained the rest follow by raw
/// score. The reported score is the number of newly covered selections.
pub fn additional_prioritize(
    configs: &[Configuration],
    sels: &[SuspiciousSelection],
) -> Result<Vec<RankedConfiguration>> {
    let lits: Vec<&PartialAssignment> = sels.iter().map(|s| &s.literals).collect();
    let table = containment(configs, &lits)?;
    let mut covered = vec![false; sels.len()];
    let mut remaining: Vec<usize> = (0..configs.len()).collect();
    let mut order = Vec::with_capacity(configs.len());

    while !remaining.is_empty() {
        let gain = |c: usize| {
            table[c]
                .iter()
                .zip(&covered)
                .filter(|(has, done)| **has && !**done)
                .count()
        };
        let (pos, best) = remaining
            .iter()
            .enumerate()
            .map(|(pos, &c)| (pos, gain(c)))
            .fold((0, 0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best == 0 {
            break;
        }
        let c = remaining.remove(pos);
        for (done, has) in covered.iter_mut().zip(&table[c]) {
            *done |= *has;
        }
        order.push((configs[c].clone(), best));
    }

    let raw = |c: usize| table[c].iter().filter(|&&h| h).count();
    remaining.sort_by_key(|&c| std::cmp::Reverse(raw(c)));
    order.extend(remaining.into_iter().map(|c| (configs[c].clone(), 0)));
    Ok(ranked(order))
}

/// Similarity-based ordering. The first pick has the most features switched
/// on; every later pick maximizes its minimum Hamming distance to all
/// earlier picks. Ties go to input order.
///
/// `on_value[i]` is the value that switches option `i`'s code on (see
/// [`SelectionTables::polarities`](crate::facts::SelectionTables::polarities));
/// `None` counts enabled options.
pub fn sp_prioritize(configs: &[Configuration], on_value: Option<&[bool]>) -> Vec<RankedConfiguration> {
    if configs.is_empty() {
        return Vec::new();
    }
    let features = |c: &Configuration| match on_value {
        Some(on) => c.values().iter().zip(on).filter(|(v, o)| v == o).count(),
        None => c.enabled_count(),
    };
    let first = (0..configs.len())
        .fold(0, |best, i| if features(&configs[i]) > features(&configs[best]) { i } else { best });

    let mut order = vec![(configs[first].clone(), features(&configs[first]))];
    // minimum distance from each candidate to everything picked so far
    let mut dist: Vec<Option<usize>> = configs
        .iter()
        .map(|c| Some(c.hamming(&configs[first])))
        .collect();
    dist[first] = None;

    while order.len() < configs.len() {
        let (pick, d) = dist
            .iter()
            .enumerate()
            .filter_map(|(i, d)| d.map(|d| (i, d)))
            .fold(None, |acc: Option<(usize, usize)>, x| match acc {
                Some(a) if a.1 >= x.1 => Some(a),
                _ => Some(x),
            })
            .expect("candidates remain");
        dist[pick] = None;
        for (i, slot) in dist.iter_mut().enumerate() {
            if let Some(cur) = slot {
                *cur = (*cur).min(configs[i].hamming(&configs[pick]));
            }
        }
        order.push((configs[pick].clone(), d));
    }
    ranked(order)
}

/// Seeded uniform shuffle. Scores are zero.
pub fn random_prioritize(configs: &[Configuration], seed: u64) -> Vec<RankedConfiguration> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order = configs.to_vec();
    order.shuffle(&mut rng);
    ranked(order.into_iter().map(|c| (c, 0)))
}

/// Dispatches on `strategy`. `on_value` is only read by [`Strategy::Sp`],
/// `seed` only by [`Strategy::Random`].
pub fn prioritize(
    strategy: Strategy,
    configs: &[Configuration],
    sels: &[SuspiciousSelection],
    on_value: Option<&[bool]>,
    seed: u64,
) -> Result<Vec<RankedConfiguration>> {
    if let Some(first) = configs.first() {
        for s in sels {
            if let Some(o) = s.literals.options().find(|o| !first.options().contains(o)) {
                return Err(Error::UnknownOption(o.to_string()));
            }
        }
    }
    match strategy {
        Strategy::Copro => copro_prioritize(configs, sels),
        Strategy::Additional => additional_prioritize(configs, sels),
        Strategy::Sp => Ok(sp_prioritize(configs, on_value)),
        Strategy::Random => Ok(random_prioritize(configs, seed)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{configurations_from_rows, Literal, OptionSet};
    use crate::interactions::Violation;
    use crate::varfront::Entity;
    use proptest::prelude::{any, prop, prop_assert, prop_assert_eq, proptest};
    use proptest::strategy::Strategy as _;
    use std::collections::BTreeSet;
    use std::sync::Arc;

    fn configs(names: &[&str], rows: &[&str]) -> Vec<Configuration> {
        let o = Arc::new(OptionSet::new(names.iter().copied()));
        configurations_from_rows(o, rows.iter().map(|r| r.chars().map(|c| c == 'T').collect()))
    }

    fn sel(lits: &[(&str, bool)]) -> SuspiciousSelection {
        SuspiciousSelection {
            violation: Violation::UseWithoutDeclaration,
            entity: Entity::global("x", crate::varfront::EntityKind::Variable),
            literals: PartialAssignment::from_literals(lits.iter().map(|&(o, v)| Literal::new(o, v)))
                .unwrap(),
            null_only: false,
        }
    }

    fn ids(r: &[RankedConfiguration]) -> Vec<usize> {
        r.iter().map(|x| x.config.id).collect()
    }

    #[test]
    fn copro_examples() {
        let cs = configs(&["A"], &["T", "F"]);
        let r = copro_prioritize(&cs, &[]).unwrap();
        assert_eq!(ids(&r), [0, 1]);
        assert!(r.iter().all(|x| x.score == 0));

        let r = copro_prioritize(&cs, &[sel(&[("A", true)])]).unwrap();
        assert_eq!(r.iter().map(|x| x.score).collect::<Vec<_>>(), [1, 0]);

        let r = copro_prioritize(&configs(&["A"], &["F", "T"]), &[sel(&[("A", true)])]).unwrap();
        assert_eq!(ids(&r), [1, 0]);
        assert_eq!(r[0].rank, 1);
    }

    #[test]
    fn copro_rejects_unknown_option() {
        let cs = configs(&["A"], &["T"]);
        assert_eq!(
            copro_prioritize(&cs, &[sel(&[("Q", true)])]),
            Err(Error::UnknownOption("Q".into()))
        );
        assert!(prioritize(Strategy::Sp, &cs, &[sel(&[("Q", true)])], None, 0).is_err());
    }

    #[test]
    fn additional_examples() {
        let cs = configs(&["A", "B"], &["TF", "FT", "TT"]);
        let sels = [sel(&[("A", true)]), sel(&[("B", true)])];
        let r = additional_prioritize(&cs, &sels).unwrap();
        assert_eq!(ids(&r), [2, 0, 1]);
        assert_eq!(r.iter().map(|x| x.score).collect::<Vec<_>>(), [2, 0, 0]);

        assert_eq!(ids(&additional_prioritize(&cs, &[]).unwrap()), [0, 1, 2]);
        let same = configs(&["A"], &["T", "T", "T"]);
        assert_eq!(ids(&additional_prioritize(&same, &[sel(&[("A", true)])]).unwrap()), [0, 1, 2]);
    }

    #[test]
    fn additional_falls_back_to_raw_score() {
        // after the first pick nothing is new; raw scores 1 vs 2 decide
        let cs = configs(&["A", "B"], &["TT", "TF", "TT"]);
        let sels = [sel(&[("A", true)]), sel(&[("B", true)])];
        let r = additional_prioritize(&cs, &sels).unwrap();
        assert_eq!(ids(&r), [0, 2, 1]);
    }

    #[test]
    fn sp_examples() {
        let cs = configs(&["A", "B", "C"], &["TFF", "TTT", "FFF", "TTF"]);
        let r = sp_prioritize(&cs, None);
        assert_eq!(ids(&r), [1, 2, 0, 3]);
        assert_eq!(r[0].score, 3);
        assert_eq!(r[1].score, 3);

        let one = configs(&["A"], &["F"]);
        assert_eq!(ids(&sp_prioritize(&one, None)), [0]);
        assert!(sp_prioritize(&[], None).is_empty());
    }

    #[test]
    fn sp_respects_polarity() {
        let cs = configs(&["A", "B"], &["TT", "TF"]);
        assert_eq!(ids(&sp_prioritize(&cs, Some(&[true, false])))[0], 1);
    }

    #[test]
    fn random_reaches_every_permutation() {
        let cs = configs(&["A", "B"], &["TT", "TF", "FT"]);
        let seen: BTreeSet<Vec<usize>> = (0..200).map(|s| ids(&random_prioritize(&cs, s))).collect();
        assert_eq!(seen.len(), 6);
    }

    #[test]
    fn strategy_names_round_trip() {
        for s in Strategy::ALL {
            assert_eq!(s.name().parse::<Strategy>(), Ok(s));
        }
        assert!("nope".parse::<Strategy>().is_err());
    }

    fn batch() -> impl proptest::strategy::Strategy<Value = (Vec<Configuration>, Vec<SuspiciousSelection>)> {
        let names = ["A", "B", "C", "D"];
        let rows = prop::collection::vec(prop::collection::vec(any::<bool>(), 4), 1..12);
        let lit = (0..4usize, any::<bool>());
        let sels = prop::collection::vec(prop::collection::btree_map(lit.0, lit.1, 1..3), 0..8);
        (rows, sels).prop_map(move |(rows, sels)| {
            let o = Arc::new(OptionSet::new(names));
            let cs = configurations_from_rows(o, rows);
            let sels = sels
                .into_iter()
                .map(|m| {
                    let lits: Vec<(&str, bool)> = m.into_iter().map(|(i, v)| (names[i], v)).collect();
                    sel(&lits)
                })
                .collect();
            (cs, sels)
        })
    }

    fn is_permutation(r: &[RankedConfiguration], n: usize) -> bool {
        let mut got = ids(r);
        got.sort_unstable();
        got == (0..n).collect::<Vec<_>>()
            && r.iter().enumerate().all(|(i, x)| x.rank == i + 1)
    }

    proptest! {
        #[test]
        fn copro_scores_descend_and_recount((cs, sels) in batch()) {
            let r = copro_prioritize(&cs, &sels).unwrap();
            prop_assert!(is_permutation(&r, cs.len()));
            prop_assert!(r.windows(2).all(|w| w[0].score >= w[1].score));
            for x in &r {
                let recount = sels.iter().filter(|s| {
                    s.literals.literals().all(|l| x.config.value(&l.option) == Some(l.value))
                }).count();
                prop_assert_eq!(x.score, recount);
            }
        }

        #[test]
        fn every_strategy_permutes((cs, sels) in batch(), seed in any::<u64>()) {
            for s in Strategy::ALL {
                let r = prioritize(s, &cs, &sels, None, seed).unwrap();
                prop_assert!(is_permutation(&r, cs.len()));
            }
        }

        #[test]
        fn additional_covers_everything_coverable_up_front((cs, sels) in batch()) {
            let r = additional_prioritize(&cs, &sels).unwrap();
            let coverable = sels.iter().filter(|s| cs.iter().any(|c| c.contains(&s.literals).unwrap())).count();
            let gained: usize = r.iter().map(|x| x.score).sum();
            prop_assert_eq!(gained, coverable);
        }
    }
}
