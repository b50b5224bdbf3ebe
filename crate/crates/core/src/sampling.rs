//! Configuration sampling: one-enabled, one-disabled, most-enabled-disabled,
//! greedy t-wise covering and greedy statement coverage.

use std::fmt;

use itertools::Itertools;

use crate::conditions::{self, FeatureModel, Formula};
use crate::config::Configuration;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SamplePlan {
    TWise(usize),
    OneEnabled,
    OneDisabled,
    MostEnabledDisabled,
    StatementCoverage(Vec<Formula>),
}

impl fmt::Display for SamplePlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SamplePlan::TWise(t) => write!(f, "{t}-wise"),
            SamplePlan::OneEnabled => f.write_str("one-enabled"),
            SamplePlan::OneDisabled => f.write_str("one-disabled"),
            SamplePlan::MostEnabledDisabled => f.write_str("most-enabled-disabled"),
            SamplePlan::StatementCoverage(_) => f.write_str("statement-coverage"),
        }
    }
}

/// A sample plus what the algorithm had to leave out.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Sample {
    pub configs: Vec<Configuration>,
    /// Candidates rejected by the feature model.
    pub invalid: Vec<Configuration>,
    /// Block conditions no valid configuration satisfies.
    pub dead_blocks: Vec<Formula>,
}

impl Sample {
    fn of(configs: Vec<Configuration>) -> Self {
        Sample {
            configs,
            ..Default::default()
        }
    }
}

pub fn sample(fm: &FeatureModel, plan: &SamplePlan) -> Result<Sample> {
    match plan {
        SamplePlan::TWise(t) => sample_t_wise(fm, *t).map(Sample::of),
        SamplePlan::OneEnabled => sample_one_enabled(fm),
        SamplePlan::OneDisabled => sample_one_disabled(fm),
        SamplePlan::MostEnabledDisabled => sample_most_enabled_disabled(fm).map(Sample::of),
        SamplePlan::StatementCoverage(blocks) => sample_statement_coverage(fm, blocks),
    }
}

fn one_hot(fm: &FeatureModel, value: bool) -> Result<Sample> {
    fm.check_atoms()?;
    let n = fm.options().len();
    let mut out = Sample::default();
    for i in 0..n {
        let values = (0..n).map(|j| if j == i { value } else { !value }).collect();
        let c = Configuration::new(out.configs.len(), fm.options().clone(), values);
        if fm.admits(&c) {
            out.configs.push(c);
        } else {
            out.invalid.push(c.with_id(i));
        }
    }
    Ok(out)
}

/// For each option in declared order: that option on, all others off.
pub fn sample_one_enabled(fm: &FeatureModel) -> Result<Sample> {
    one_hot(fm, true)
}

/// For each option in declared order: that option off, all others on.
pub fn sample_one_disabled(fm: &FeatureModel) -> Result<Sample> {
    one_hot(fm, false)
}

fn renumber(configs: Vec<Configuration>) -> Vec<Configuration> {
    configs
        .into_iter()
        .enumerate()
        .map(|(i, c)| c.with_id(i))
        .collect()
}

fn nonempty_space(fm: &FeatureModel) -> Result<Vec<Configuration>> {
    let valid = conditions::valid_configurations(fm)?;
    if valid.is_empty() {
        return Err(Error::EmptySpace);
    }
    Ok(valid)
}

/// The first valid configuration (in enumeration order) with the most
/// options enabled, then the first with the fewest.
pub fn sample_most_enabled_disabled(fm: &FeatureModel) -> Result<Vec<Configuration>> {
    let valid = nonempty_space(fm)?;
    // max_by_key keeps the last maximum, so compare on reversed position
    let most = valid
        .iter()
        .enumerate()
        .max_by_key(|(i, c)| (c.enabled_count(), std::cmp::Reverse(*i)))
        .map(|(_, c)| c.clone())
        .expect("space is non-empty");
    let least = valid
        .iter()
        .min_by_key(|c| c.enabled_count())
        .cloned()
        .expect("space is non-empty");
    let mut out = vec![most];
    if least != out[0] {
        out.push(least);
    }
    Ok(renumber(out))
}

/// Identifier of the t-tuple a configuration realizes on option
/// combination `comb` (the `k`-th combination in lexicographic order).
fn tuple_id(k: usize, comb: &[usize], values: &[bool], t: usize) -> usize {
    let pattern = comb
        .iter()
        .fold(0usize, |acc, &o| (acc << 1) | usize::from(values[o]));
    (k << t) | pattern
}

/// Greedy covering: repeatedly takes the valid configuration that covers
/// the most still-uncovered satisfiable t-tuples, earliest on ties.
pub fn sample_t_wise(fm: &FeatureModel, t: usize) -> Result<Vec<Configuration>> {
    let n = fm.options().len();
    if t < 2 || t > n {
        return Err(Error::InvalidPlan(format!(
            "t must lie in 2..={n} for {n} options, got {t}"
        )));
    }
    let valid = nonempty_space(fm)?;
    let combos: Vec<Vec<usize>> = (0..n).combinations(t).collect();
    let covers: Vec<Vec<usize>> = valid
        .iter()
        .map(|c| {
            combos
                .iter()
                .enumerate()
                .map(|(k, comb)| tuple_id(k, comb, c.values(), t))
                .collect()
        })
        .collect();
    let universe = combos.len() << t;
    let mut uncovered = vec![false; universe];
    for ids in &covers {
        for &id in ids {
            uncovered[id] = true;
        }
    }
    let remaining: usize = uncovered.iter().filter(|&&u| u).count();
    Ok(greedy(&valid, &covers, uncovered, remaining))
}

fn greedy(
    valid: &[Configuration],
    covers: &[Vec<usize>],
    mut uncovered: Vec<bool>,
    mut remaining: usize,
) -> Vec<Configuration> {
    let mut out = Vec::new();
    while remaining > 0 {
        let mut best = (0usize, 0usize);
        for (i, ids) in covers.iter().enumerate() {
            let gain = ids.iter().filter(|&&id| uncovered[id]).count();
            if gain > best.1 {
                best = (i, gain);
            }
        }
        let (pick, gain) = best;
        debug_assert!(gain > 0, "every uncovered goal is coverable");
        for &id in &covers[pick] {
            uncovered[id] = false;
        }
        remaining -= gain;
        out.push(valid[pick].clone().with_id(out.len()));
    }
    out
}

/// Greedy set cover of the satisfiable block conditions.
pub fn sample_statement_coverage(fm: &FeatureModel, blocks: &[Formula]) -> Result<Sample> {
    for b in blocks {
        if let Some(a) = b.atoms().into_iter().find(|a| !fm.options().contains(a)) {
            return Err(Error::UnknownOption(a.to_string()));
        }
    }
    let valid = nonempty_space(fm)?;
    let covers: Vec<Vec<usize>> = valid
        .iter()
        .map(|c| {
            blocks
                .iter()
                .enumerate()
                .filter(|(_, b)| b.eval_config(c))
                .map(|(i, _)| i)
                .collect()
        })
        .collect();
    let mut live = vec![false; blocks.len()];
    for ids in &covers {
        for &id in ids {
            live[id] = true;
        }
    }
    let dead_blocks = blocks
        .iter()
        .zip(&live)
        .filter(|(_, l)| !**l)
        .map(|(b, _)| b.clone())
        .collect();
    let remaining = live.iter().filter(|&&l| l).count();
    Ok(Sample {
        configs: greedy(&valid, &covers, live, remaining),
        invalid: Vec::new(),
        dead_blocks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::OptionSet;
    use std::sync::Arc;

    fn fm(names: &[&str], constraints: &[&str]) -> FeatureModel {
        FeatureModel::new(
            Arc::new(OptionSet::new(names.iter().copied())),
            constraints.iter().map(|c| Formula::parse(c).unwrap()).collect(),
        )
    }

    fn rows(cs: &[Configuration]) -> Vec<String> {
        cs.iter().map(|c| c.to_string().replace(' ', "")).collect()
    }

    #[test]
    fn one_enabled_examples() {
        let s = sample_one_enabled(&fm(&["A", "B", "C"], &[])).unwrap();
        assert_eq!(rows(&s.configs), ["TFF", "FTF", "FFT"]);
        let s = sample_one_enabled(&fm(&["A", "B"], &["A -> B"])).unwrap();
        assert_eq!(rows(&s.configs), ["FT"]);
        assert_eq!(rows(&s.invalid), ["TF"]);
        assert!(sample_one_enabled(&fm(&[], &[])).unwrap().configs.is_empty());
    }

    #[test]
    fn one_disabled_mirrors_one_enabled() {
        let s = sample_one_disabled(&fm(&["A", "B", "C"], &[])).unwrap();
        assert_eq!(rows(&s.configs), ["FTT", "TFT", "TTF"]);
    }

    #[test]
    fn most_enabled_disabled_examples() {
        let s = sample_most_enabled_disabled(&fm(&["A", "B", "C"], &[])).unwrap();
        assert_eq!(rows(&s), ["TTT", "FFF"]);
        let s = sample_most_enabled_disabled(&fm(&["A", "B", "C"], &["!(A && B && C)"])).unwrap();
        assert_eq!(rows(&s)[0], "TTF");
        let s = sample_most_enabled_disabled(&fm(&["A", "B", "C"], &["A"])).unwrap();
        assert!(s.iter().all(|c| c.value("A") == Some(true)));
        assert_eq!(
            sample_most_enabled_disabled(&fm(&["A"], &["A && !A"])),
            Err(Error::EmptySpace)
        );
    }

    #[test]
    fn single_valid_configuration_is_not_repeated() {
        let s = sample_most_enabled_disabled(&fm(&["A", "B"], &["A && !B"])).unwrap();
        assert_eq!(rows(&s), ["TF"]);
    }

    #[test]
    fn t_wise_examples() {
        let s = sample_t_wise(&fm(&["A", "B"], &[]), 2).unwrap();
        assert_eq!(s.len(), 4);
        let s = sample_t_wise(&fm(&["A", "B", "C"], &[]), 2).unwrap();
        assert!(s.len() <= 5);
        assert_eq!(rows(&s)[..2], ["TTT", "TFF"]);
        let s = sample_t_wise(&fm(&["A", "B", "C"], &["A && B && C"]), 2).unwrap();
        assert_eq!(rows(&s), ["TTT"]);
    }

    #[test]
    fn t_wise_rejects_bad_strength() {
        let m = fm(&["A", "B"], &[]);
        assert!(matches!(sample_t_wise(&m, 1), Err(Error::InvalidPlan(_))));
        assert!(matches!(sample_t_wise(&m, 3), Err(Error::InvalidPlan(_))));
    }

    #[test]
    fn statement_coverage_examples() {
        let m = fm(&["A", "B"], &[]);
        let p = |s: &str| Formula::parse(s).unwrap();
        let s = sample_statement_coverage(&m, &[p("A"), p("!A")]).unwrap();
        assert_eq!(s.configs.len(), 2);
        assert_ne!(s.configs[0].value("A"), s.configs[1].value("A"));

        let s = sample_statement_coverage(&fm(&["A", "B"], &["!B"]), &[p("A && B")]).unwrap();
        assert!(s.configs.is_empty());
        assert_eq!(s.dead_blocks, [p("A && B")]);

        let s = sample_statement_coverage(&m, &[p("A"), p("B"), p("A && B")]).unwrap();
        assert_eq!(rows(&s.configs), ["TT"]);
    }

    #[test]
    fn ids_follow_output_order() {
        let s = sample_t_wise(&fm(&["A", "B", "C"], &[]), 2).unwrap();
        assert!(s.iter().enumerate().all(|(i, c)| c.id == i));
    }
}
