//! Plain-text file formats. Writers return the full file content; readers
//! take it back. Tables are tab-separated with one header line.

use std::sync::Arc;

use crate::conditions::{FeatureModel, Formula};
use crate::config::{Configuration, Literal, OptionSet, PartialAssignment};
use crate::error::{Error, Result};
use crate::facts::{SelectionTables, Selector, Sets};
use crate::interactions::{SuspiciousSelection, Violation};
use crate::metrics::BugSpec;
use crate::ranking::RankedConfiguration;
use crate::varfront::{Entity, EntityKind, OperationRecord};

/// Lines that carry content: trimmed, with `#` comments and blanks removed.
/// Yields 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        (!l.is_empty()).then_some((i + 1, l))
    })
}

fn parse_value(what: &'static str, line: usize, s: &str) -> Result<bool> {
    match s {
        "T" => Ok(true),
        "F" => Ok(false),
        _ => Err(Error::format(what, line, format!("expected T or F, found `{s}`"))),
    }
}

/// `OPT=T` or `OPT=F`; the option name is everything before the last `=`.
pub fn parse_literal(what: &'static str, line: usize, s: &str) -> Result<Literal> {
    let (o, v) = s
        .trim()
        .rsplit_once('=')
        .ok_or_else(|| Error::format(what, line, format!("expected OPTION=T|F, found `{s}`")))?;
    let o = o.trim();
    if o.is_empty() {
        return Err(Error::format(what, line, "empty option name"));
    }
    Ok(Literal::new(o, parse_value(what, line, v.trim())?))
}

fn parse_literals(what: &'static str, line: usize, s: &str) -> Result<PartialAssignment> {
    let mut p = PartialAssignment::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        p.insert(parse_literal(what, line, part)?)
            .map_err(|e| Error::format(what, line, e.to_string()))?;
    }
    Ok(p)
}

/// `OP<TAB>entity<TAB>pc`, one line per record in extraction order.
pub fn write_facts(records: &[OperationRecord]) -> String {
    records
        .iter()
        .map(|r| format!("{}\t{}\t{}\n", r.tag(), r.entity, r.pc))
        .collect()
}

/// `SET<TAB>LIT<TAB>entity`, literals in option order, `T` first, then the
/// core under the pseudo-literal `CORE`.
pub fn write_tables(t: &SelectionTables) -> String {
    let mut out = String::new();
    let mut emit = |label: &str, sets: &Sets| {
        for s in Selector::ALL {
            for e in sets.get(s).keys() {
                out += &format!("{}\t{label}\t{e}\n", s.name());
            }
        }
    };
    for lit in t.literals() {
        emit(&lit.to_string(), t.sets(lit));
    }
    emit("CORE", t.core());
    out
}

/// `RULE<TAB>violation<TAB>entity<TAB>lit,lit`.
pub fn write_selections(sels: &[SuspiciousSelection]) -> String {
    sels.iter()
        .map(|s| format!("{}\t{}\t{}\t{}\n", s.rule(), s.violation, s.entity, s.literals))
        .collect()
}

/// Reads [`write_selections`] output. Entity kinds are not stored and come
/// back as [`EntityKind::Variable`]; `null_only` comes back false.
pub fn read_selections(text: &str) -> Result<Vec<SuspiciousSelection>> {
    const WHAT: &str = "selections";
    let mut out = Vec::new();
    for (line, l) in content_lines(text) {
        let cols: Vec<&str> = l.split('\t').collect();
        if !(3..=4).contains(&cols.len()) {
            return Err(Error::format(WHAT, line, format!("expected 4 columns, found {}", cols.len())));
        }
        let violation = cols[0]
            .trim()
            .parse::<u8>()
            .ok()
            .and_then(Violation::from_rule)
            .ok_or_else(|| Error::format(WHAT, line, format!("bad rule `{}`", cols[0])))?;
        if Violation::from_name(cols[1].trim()) != Some(violation) {
            return Err(Error::format(WHAT, line, format!("rule {} is not `{}`", violation.rule(), cols[1])));
        }
        let (scope, name) = cols[2]
            .trim()
            .split_once('.')
            .ok_or_else(|| Error::format(WHAT, line, format!("bad entity `{}`", cols[2])))?;
        out.push(SuspiciousSelection {
            violation,
            entity: Entity::new(scope, name, EntityKind::Variable),
            literals: parse_literals(WHAT, line, cols.get(3).copied().unwrap_or(""))?,
            null_only: false,
        });
    }
    Ok(out)
}

fn tf_row<'a>(values: impl IntoIterator<Item = &'a bool>) -> String {
    values
        .into_iter()
        .map(|&v| if v { "T" } else { "F" })
        .collect::<Vec<_>>()
        .join("\t")
}

/// Header of option names, then one `T`/`F` row per configuration.
pub fn write_configs(options: &OptionSet, configs: &[Configuration]) -> String {
    let mut out = options.names().join("\t") + "\n";
    for c in configs {
        out += &tf_row(c.values());
        out.push('\n');
    }
    out
}

fn parse_header(what: &'static str, line: usize, cols: &[&str]) -> Result<Arc<OptionSet>> {
    let set = OptionSet::new(cols.iter().map(|c| c.trim()));
    if set.len() != cols.len() || cols.iter().any(|c| c.trim().is_empty()) {
        return Err(Error::format(what, line, "option names must be non-empty and distinct"));
    }
    Ok(Arc::new(set))
}

fn parse_row(what: &'static str, line: usize, cols: &[&str], width: usize) -> Result<Vec<bool>> {
    if cols.len() != width {
        return Err(Error::format(what, line, format!("expected {width} values, found {}", cols.len())));
    }
    cols.iter().map(|c| parse_value(what, line, c.trim())).collect()
}

fn split_tabs(l: &str) -> Vec<&str> {
    if l.is_empty() {
        Vec::new()
    } else {
        l.split('\t').collect()
    }
}

/// Reads [`write_configs`] output; ids follow row order.
pub fn read_configs(text: &str) -> Result<(Arc<OptionSet>, Vec<Configuration>)> {
    const WHAT: &str = "configuration table";
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let Some((h, header)) = lines.next() else {
        return Err(Error::format(WHAT, 1, "missing header"));
    };
    let options = parse_header(WHAT, h + 1, &split_tabs(header.trim_end()))?;
    let mut configs = Vec::new();
    for (i, l) in lines {
        let values = parse_row(WHAT, i + 1, &split_tabs(l.trim_end()), options.len())?;
        configs.push(Configuration::new(configs.len(), options.clone(), values));
    }
    Ok((options, configs))
}

/// Header `rank score OPTIONS...`, then one row per ranked configuration.
pub fn write_ranked(options: &OptionSet, ranked: &[RankedConfiguration]) -> String {
    let mut out = String::from("rank\tscore");
    for o in options.iter() {
        out.push('\t');
        out += o;
    }
    out.push('\n');
    for r in ranked {
        out += &format!("{}\t{}", r.rank, r.score);
        if !options.is_empty() {
            out.push('\t');
            out += &tf_row(r.config.values());
        }
        out.push('\n');
    }
    out
}

pub fn read_ranked(text: &str) -> Result<(Arc<OptionSet>, Vec<RankedConfiguration>)> {
    const WHAT: &str = "ranked table";
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let Some((h, header)) = lines.next() else {
        return Err(Error::format(WHAT, 1, "missing header"));
    };
    let cols = split_tabs(header.trim_end());
    if cols.len() < 2 || cols[0] != "rank" || cols[1] != "score" {
        return Err(Error::format(WHAT, h + 1, "header must start with rank and score"));
    }
    let options = parse_header(WHAT, h + 1, &cols[2..])?;
    let mut out = Vec::new();
    for (i, l) in lines {
        let cols = split_tabs(l.trim_end());
        let num = |s: Option<&&str>| {
            s.and_then(|s| s.trim().parse::<usize>().ok())
                .ok_or_else(|| Error::format(WHAT, i + 1, "rank and score must be integers"))
        };
        let rank = num(cols.first())?;
        let score = num(cols.get(1))?;
        let values = parse_row(WHAT, i + 1, cols.get(2..).unwrap_or(&[]), options.len())?;
        if rank != out.len() + 1 {
            return Err(Error::format(WHAT, i + 1, format!("expected rank {}, found {rank}", out.len() + 1)));
        }
        out.push(RankedConfiguration {
            config: Configuration::new(out.len(), options.clone(), values),
            score,
            rank,
        });
    }
    Ok((options, out))
}

/// `id: OPT=T, OPT=F` per line.
pub fn read_bugs(text: &str) -> Result<BugSpec> {
    const WHAT: &str = "bug specification";
    let mut bugs = BugSpec::new();
    for (line, l) in content_lines(text) {
        let (id, lits) = l
            .split_once(':')
            .ok_or_else(|| Error::format(WHAT, line, "expected `id: OPT=T, ...`"))?;
        let id = id.trim();
        if id.is_empty() {
            return Err(Error::format(WHAT, line, "empty bug id"));
        }
        if bugs.insert(id.to_string(), parse_literals(WHAT, line, lits)?).is_some() {
            return Err(Error::format(WHAT, line, format!("duplicate bug id `{id}`")));
        }
    }
    Ok(bugs)
}

pub fn write_bugs(bugs: &BugSpec) -> String {
    bugs.iter()
        .map(|(id, p)| {
            let lits: Vec<String> = p.literals().map(|l| l.to_string()).collect();
            format!("{id}: {}\n", lits.join(", "))
        })
        .collect()
}

/// One constraint per line over `options`.
pub fn read_feature_model(text: &str, options: Arc<OptionSet>) -> Result<FeatureModel> {
    let mut constraints = Vec::new();
    for (line, l) in content_lines(text) {
        let f = Formula::parse(l).map_err(|e| match e {
            Error::Parse { message, .. } | Error::Format { message, .. } => {
                Error::format("feature model", line, message)
            }
            other => other,
        })?;
        constraints.push(f);
    }
    let fm = FeatureModel::new(options, constraints);
    fm.check_atoms()?;
    Ok(fm)
}
