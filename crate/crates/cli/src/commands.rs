use std::collections::BTreeSet;
use std::path::Path;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use featint_core::conditions::{valid_configurations, FeatureModel};
use featint_core::facts::SelectionTables;
use featint_core::formats;
use featint_core::interactions::detect_suspicious_selections;
use featint_core::metrics::evaluate as eval_report;
use featint_core::oracle::check_variant;
use featint_core::ranking::prioritize as rank;
use featint_core::sampling::{self, Sample, SamplePlan};
use featint_core::varfront::{extract_options, parse_units, presence_blocks};
use featint_core::{
    Configuration, Error, FrontendConfig, OperationRecord, OptionSet, SourceUnit, SuspiciousSelection,
};

use crate::io::{emit, read, write_atomic};
use crate::{
    AnalyzeArgs, EvaluateArgs, FrontendArgs, OracleArgs, PipelineArgs, PlanArgs, PlanKind, PrioritizeArgs,
    ReportFormat, SampleArgs, SpaceArgs,
};

struct Project {
    options: Arc<OptionSet>,
    records: Vec<OperationRecord>,
}

fn frontend_config(prefix: &str, destructors: &[String]) -> FrontendConfig {
    FrontendConfig {
        prefix: prefix.to_string(),
        destructors: destructors.to_vec(),
    }
}

fn load_project(paths: &[impl AsRef<Path>], cfg: &FrontendConfig) -> Result<Project> {
    let srcs = paths
        .iter()
        .map(|p| {
            let p = p.as_ref();
            SourceUnit::read(p).with_context(|| format!("reading {}", p.display()))
        })
        .collect::<Result<Vec<_>>>()?;
    let options = Arc::new(extract_options(&srcs, cfg)?);
    let records = parse_units(&srcs, &options, cfg)?;
    Ok(Project { options, records })
}

fn load(frontend: &FrontendArgs) -> Result<Project> {
    load_project(
        &frontend.sources,
        &frontend_config(&frontend.options_prefix, &frontend.destructors),
    )
}

struct Analysis {
    tables: SelectionTables,
    sels: Vec<SuspiciousSelection>,
}

fn analyse(p: &Project) -> Result<Analysis> {
    let tables = SelectionTables::build(p.records.clone(), p.options.clone())?;
    let sels = detect_suspicious_selections(&tables)?;
    Ok(Analysis { tables, sels })
}

fn write_analysis(dir: &Path, p: &Project, a: &Analysis) -> Result<()> {
    write_atomic(&dir.join("facts.tsv"), &formats::write_facts(&p.records))?;
    write_atomic(&dir.join("tables.tsv"), &formats::write_tables(&a.tables))?;
    write_atomic(&dir.join("selections.tsv"), &formats::write_selections(&a.sels))
}

pub fn analyze(args: &AnalyzeArgs) -> Result<()> {
    let p = load(&args.frontend)?;
    let a = analyse(&p)?;
    match &args.out {
        Some(dir) => write_analysis(dir, &p, &a),
        None => emit(None, &formats::write_selections(&a.sels)),
    }
}

fn feature_model(options: Arc<OptionSet>, space: &SpaceArgs) -> Result<FeatureModel> {
    let fm = match &space.feature_model {
        Some(path) => formats::read_feature_model(&read(path)?, options)?,
        None => FeatureModel::unconstrained(options),
    };
    Ok(fm.with_bound(space.max_options))
}

fn run_plan(fm: &FeatureModel, plan: &PlanArgs, records: &[OperationRecord]) -> Result<Sample> {
    let plan = match plan.plan {
        PlanKind::TWise => SamplePlan::TWise(plan.t),
        PlanKind::OneEnabled => SamplePlan::OneEnabled,
        PlanKind::OneDisabled => SamplePlan::OneDisabled,
        PlanKind::MostEnabledDisabled => SamplePlan::MostEnabledDisabled,
        PlanKind::StatementCoverage => SamplePlan::StatementCoverage(presence_blocks(records)),
    };
    let s = sampling::sample(fm, &plan)?;
    for c in &s.invalid {
        eprintln!("featint: {plan}: dropped invalid candidate [{c}]");
    }
    for b in &s.dead_blocks {
        eprintln!("featint: {plan}: block `{b}` is dead under the feature model");
    }
    Ok(s)
}

pub fn sample(args: &SampleArgs) -> Result<()> {
    let cfg = frontend_config(&args.options_prefix, &args.destructors);
    let project = if args.sources.is_empty() {
        None
    } else {
        Some(load_project(&args.sources, &cfg)?)
    };
    let options = match (&args.options, &project) {
        (Some(names), _) => Arc::new(OptionSet::new(names.iter().map(|n| n.trim().to_string()))),
        (None, Some(p)) => p.options.clone(),
        (None, None) => bail!("give --options or source files"),
    };
    if args.plan.plan == PlanKind::StatementCoverage && project.is_none() {
        bail!("statement coverage needs source files");
    }
    let records = project.as_ref().map_or(&[][..], |p| &p.records[..]);
    let fm = feature_model(options.clone(), &args.space)?;
    let s = run_plan(&fm, &args.plan, records)?;
    emit(args.out.as_deref(), &formats::write_configs(&options, &s.configs))
}

/// Value that switches each option's code on, recovered from tables.tsv.
fn polarities_from_tables(text: &str, options: &OptionSet) -> Result<Vec<bool>> {
    let mut seen = BTreeSet::new();
    for (i, line) in text.lines().enumerate() {
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 3 {
            return Err(Error::Format {
                what: "tables",
                line: i + 1,
                message: "expected 3 columns".into(),
            }
            .into());
        }
        if cols[1] != "CORE" {
            let lit = formats::parse_literal("tables", i + 1, cols[1])?;
            seen.insert((lit.option, lit.value));
        }
    }
    Ok(options
        .iter()
        .map(|o| {
            let on = seen.contains(&(o.to_string(), true));
            let off = seen.contains(&(o.to_string(), false));
            on || !off
        })
        .collect())
}

fn check_selection_options(options: &OptionSet, sels: &[SuspiciousSelection]) -> Result<()> {
    let missing: BTreeSet<&str> = sels
        .iter()
        .flat_map(|s| s.literals.options())
        .filter(|o| !options.contains(o))
        .collect();
    if !missing.is_empty() {
        let names: Vec<&str> = missing.into_iter().collect();
        return Err(Error::OptionMismatch(format!(
            "selections mention options missing from the configuration table: {}",
            names.join(", ")
        ))
        .into());
    }
    Ok(())
}

fn rank_table(
    options: &OptionSet,
    configs: &[Configuration],
    sels: &[SuspiciousSelection],
    on_value: Option<&[bool]>,
    strategy: &crate::StrategyArgs,
) -> Result<String> {
    check_selection_options(options, sels)?;
    let ranked = rank(strategy.strategy, configs, sels, on_value, strategy.seed)?;
    Ok(formats::write_ranked(options, &ranked))
}

pub fn prioritize(args: &PrioritizeArgs) -> Result<()> {
    let (options, configs) = formats::read_configs(&read(&args.configs)?)?;
    let sels = formats::read_selections(&read(&args.selections)?)?;
    let on_value = match &args.tables {
        Some(path) => Some(polarities_from_tables(&read(path)?, &options)?),
        None => None,
    };
    let text = rank_table(&options, &configs, &sels, on_value.as_deref(), &args.strategy)?;
    emit(args.out.as_deref(), &text)
}

fn report(ranked_text: &str, bugs_text: &str, format: ReportFormat) -> Result<String> {
    let (_, ranked) = formats::read_ranked(ranked_text)?;
    let bugs = formats::read_bugs(bugs_text)?;
    let r = eval_report(ranked.iter().map(|r| &r.config), &bugs)?;
    Ok(match format {
        ReportFormat::Text => r.to_string(),
        ReportFormat::Kv => r.key_values(),
    })
}

pub fn evaluate(args: &EvaluateArgs) -> Result<()> {
    let text = report(&read(&args.ranked)?, &read(&args.bugs)?, args.format)?;
    emit(args.out.as_deref(), &text)
}

pub fn pipeline(args: &PipelineArgs) -> Result<()> {
    let p = load(&args.frontend)?;
    let a = analyse(&p)?;
    write_analysis(&args.out, &p, &a)?;

    let (options, configs) = match &args.configs {
        Some(path) => formats::read_configs(&read(path)?)?,
        None => {
            let fm = feature_model(p.options.clone(), &args.space)?;
            let s = run_plan(&fm, &args.plan, &p.records)?;
            (p.options.clone(), s.configs)
        }
    };
    write_atomic(&args.out.join("configs.tsv"), &formats::write_configs(&options, &configs))?;

    let on_value = a.tables.polarities_for(&options);
    let ranked = rank_table(&options, &configs, &a.sels, Some(&on_value), &args.strategy)?;
    write_atomic(&args.out.join("ranked.tsv"), &ranked)?;

    if let Some(bugs) = &args.bugs {
        let bugs = read(bugs)?;
        let text = report(&ranked, &bugs, ReportFormat::Text)?;
        write_atomic(&args.out.join("report.txt"), &text)?;
        write_atomic(&args.out.join("report.kv"), &report(&ranked, &bugs, ReportFormat::Kv)?)?;
        emit(None, &text)?;
    }
    Ok(())
}

pub fn oracle(args: &OracleArgs) -> Result<()> {
    let p = load(&args.frontend)?;
    let configs = match &args.configs {
        Some(path) => {
            let (options, configs) = formats::read_configs(&read(path)?)?;
            if *options != *p.options {
                return Err(Error::OptionMismatch(
                    "configuration table and sources name different options".into(),
                )
                .into());
            }
            configs
        }
        None => valid_configurations(&feature_model(p.options.clone(), &args.space)?)?,
    };
    let mut out = String::new();
    for c in &configs {
        for (v, e) in check_variant(&p.records, c) {
            out += &format!("{}\t{c}\t{}\t{v}\t{e}\n", c.id + 1, v.rule());
        }
    }
    emit(None, &out)
}
