//! Detection-rate metrics of an ordering against known bugs.

use std::collections::BTreeMap;
use std::fmt;

use crate::config::{Configuration, PartialAssignment};
use crate::error::{Error, Result};

/// Bug id to the assignment that reveals it.
pub type BugSpec = BTreeMap<String, PartialAssignment>;

pub const TOP_K: [usize; 4] = [1, 3, 5, 10];

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    /// Length of the ordering.
    pub n: usize,
    pub apfd: f64,
    /// 1-based position of the first revealing configuration; `n + 1` when
    /// nothing reveals the bug.
    pub cf: BTreeMap<String, usize>,
    pub avg_rank: f64,
    /// Fraction of bugs with `cf <= k`, for each k of [`TOP_K`].
    pub top_k: Vec<(usize, f64)>,
    pub undetected: Vec<String>,
}

/// `1 - sum(cf) / (n*m) + 1 / (2n)`.
pub fn apfd(cf: &[usize], n: usize) -> f64 {
    let m = cf.len() as f64;
    let n = n as f64;
    let sum: usize = cf.iter().sum();
    1.0 - sum as f64 / (n * m) + 1.0 / (2.0 * n)
}

pub fn evaluate<'a, I>(order: I, bugs: &BugSpec) -> Result<EvalReport>
where
    I: IntoIterator<Item = &'a Configuration>,
{
    if bugs.is_empty() {
        return Err(Error::NoBugs);
    }
    let order: Vec<&Configuration> = order.into_iter().collect();
    if order.is_empty() {
        return Err(Error::EmptyRanking);
    }
    let n = order.len();
    let mut cf = BTreeMap::new();
    let mut undetected = Vec::new();
    for (id, lits) in bugs {
        let mut first = None;
        for (i, c) in order.iter().enumerate() {
            if c.contains(lits)? {
                first = Some(i + 1);
                break;
            }
        }
        if first.is_none() {
            undetected.push(id.clone());
        }
        cf.insert(id.clone(), first.unwrap_or(n + 1));
    }
    let values: Vec<usize> = cf.values().copied().collect();
    let m = values.len() as f64;
    let top_k = TOP_K
        .iter()
        .map(|&k| (k, values.iter().filter(|&&v| v <= k).count() as f64 / m))
        .collect();
    Ok(EvalReport {
        n,
        apfd: apfd(&values, n),
        avg_rank: values.iter().sum::<usize>() as f64 / m,
        cf,
        top_k,
        undetected,
    })
}

impl EvalReport {
    /// `key=value` lines for scripts.
    pub fn key_values(&self) -> String {
        let mut out = format!("n={}\napfd={:.4}\navg_rank={:.4}\n", self.n, self.apfd, self.avg_rank);
        for (id, v) in &self.cf {
            out += &format!("cf.{id}={v}\n");
        }
        for (k, f) in &self.top_k {
            out += &format!("top{k}={f:.4}\n");
        }
        out += &format!("undetected={}\n", self.undetected.join(","));
        out
    }
}

/// Aligned text for humans.
impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# undetected bugs count as position n+1 = {}", self.n + 1)?;
        writeln!(f, "{:<12}{}", "configs", self.n)?;
        writeln!(f, "{:<12}{:.4}", "APFD", self.apfd)?;
        writeln!(f, "{:<12}{:.4}", "avg rank", self.avg_rank)?;
        for (k, frac) in &self.top_k {
            writeln!(f, "{:<12}{:.4}", format!("top-{k}"), frac)?;
        }
        let width = self.cf.keys().map(String::len).max().unwrap_or(0).max(3);
        writeln!(f, "{:<width$}  CF", "bug")?;
        for (id, v) in &self.cf {
            let mark = if *v > self.n { "  (undetected)" } else { "" };
            writeln!(f, "{id:<width$}  {v}{mark}")?;
        }
        Ok(())
    }
}
