use std::io::Write;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::json;
use wikistream::analysis::{correlation_report, design_matrix, rfe, target_labels, FeatureSet};
use wikistream::eval::{
    prequential_run, prequential_stacking, render_table, write_prediction_log, write_stacking_log,
    MetricsReport, TableRow,
};
use wikistream::fabricate::{
    balance_dataset, compare_stats, contributor_counts, synthesize_bots, ComparisonRow, GapFill,
    QuartileStats,
};
use wikistream::ingest::{
    aggregate_daily, load_aggregates, sort_stream, summarize, summarize_events, write_aggregates_csv,
    write_events_csv, write_events_jsonl,
};
use wikistream::learn::{
    Classifier, ClassifierKind, StackingConfig, StackingModel,
};
use wikistream::model::Feature;
use wikistream::profile::ProfileStore;
use wikistream::sim::{simulate, SimConfig};
use wikistream::{DailyAggregate, Error, Target};

use crate::cli::{
    AnalyzeArgs, BalanceArgs, Command, EvaluateArgs, EventFormat, ProfileArgs, ReportArgs,
    SelectArgs, SimulateArgs, SynthesizeArgs, TableFormat,
};
use crate::output::{require_file, OutDir};

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Analyze(a) => analyze(a),
        Command::Select(a) => select(a),
        Command::Synthesize(a) => synthesize(a),
        Command::Balance(a) => balance(a),
        Command::Profile(a) => profile(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Simulate(a) => simulate_cmd(a),
        Command::Report(a) => report(a),
    }
}

fn load(path: &Path) -> Result<Vec<DailyAggregate>> {
    require_file(path)?;
    let mut aggs = load_aggregates(path).with_context(|| format!("loading {}", path.display()))?;
    sort_stream(&mut aggs);
    Ok(aggs)
}

fn analyze(args: AnalyzeArgs) -> Result<()> {
    let aggs = load(&args.input.input)?;
    let report = correlation_report(&aggs, args.target, args.threshold)?;
    let out = OutDir::create(&args.out)?;

    let mut w = csv::Writer::from_writer(out.writer("report.csv")?);
    w.write_record(["feature", "r", "reported"])?;
    for e in &report.entries {
        w.write_record([e.feature.id(), &e.r.to_string(), &e.reported.to_string()])?;
    }
    for f in &report.undefined {
        w.write_record([f.id(), "", "false"])?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_writer(out.writer("feature_matrix.csv")?);
    let mut header = vec!["feature"];
    header.extend(Feature::ALL.iter().map(|f| f.id()));
    w.write_record(&header)?;
    for (f, row) in Feature::ALL.iter().zip(&report.feature_matrix) {
        let mut cells = vec![f.id().to_string()];
        cells.extend(row.iter().map(|v| v.map(|r| r.to_string()).unwrap_or_default()));
        w.write_record(&cells)?;
    }
    w.flush()?;

    out.json("report.json", &json!({ "summary": summarize(&aggs), "report": report }))?;
    for e in report.reported() {
        println!("{:>20}  {:+.4}", e.feature.id(), e.r);
    }
    Ok(())
}

fn select(args: SelectArgs) -> Result<()> {
    let aggs = load(&args.input.input)?;
    let start = FeatureSet::from_name(&args.features, args.target)?;
    let count = args.count.unwrap_or_else(|| FeatureSet::set3(args.target).len());
    let x = design_matrix(&aggs, &start);
    let y = target_labels(&aggs, args.target);
    let result = rfe(&x, &y, start.features(), args.step, count, args.lambda)?;
    let out = OutDir::create(&args.out)?;

    let mut w = csv::Writer::from_writer(out.writer("selection.csv")?);
    w.write_record(["feature", "status", "round", "weight"])?;
    for (f, wt) in result.selected.features().iter().zip(&result.final_weights) {
        w.write_record([f.id(), "selected", "", &wt.to_string()])?;
    }
    for e in &result.eliminated {
        w.write_record([e.feature.id(), "eliminated", &e.round.to_string(), &e.weight.to_string()])?;
    }
    w.flush()?;

    let preset: Vec<&str> = FeatureSet::set3(args.target).features().iter().map(|f| f.id()).collect();
    out.json(
        "selection.json",
        &json!({
            "target": args.target,
            "start": start.features(),
            "step": args.step,
            "lambda": args.lambda,
            "result": result,
            "set3_preset": preset,
        }),
    )?;
    let ids: Vec<&str> = result.selected.features().iter().map(|f| f.id()).collect();
    println!("{}", ids.join(","));
    Ok(())
}

fn write_comparison(out: &OutDir, rows: &[ComparisonRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out.writer("comparison.csv")?);
    w.write_record(["feature", "statistic", "original", "synthetic", "change_percent"])?;
    for r in rows {
        w.write_record([
            r.feature.id(),
            r.statistic.name(),
            &r.original.to_string(),
            &r.synthetic.to_string(),
            &r.change.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn stats_of(aggs: &[DailyAggregate]) -> Option<QuartileStats> {
    QuartileStats::from_rows(&aggs.iter().map(|a| a.features).collect::<Vec<_>>()).ok()
}

fn comparison(original: &Option<QuartileStats>, synthetic: &Option<QuartileStats>) -> Result<Vec<ComparisonRow>> {
    Ok(match (original, synthetic) {
        (Some(o), Some(s)) => compare_stats(&Feature::ALL, o, s)?,
        _ => Vec::new(),
    })
}

fn synthesize(args: SynthesizeArgs) -> Result<()> {
    let aggs = load(&args.input.input)?;
    let counts = contributor_counts(&aggs);
    if counts.bots == 0 {
        return Err(Error::NoBots.into());
    }
    let rule = GapFill::from(args.rule);
    let count = args
        .count
        .unwrap_or_else(|| rule.count(counts.humans.saturating_sub(counts.bots)));
    if count == 0 {
        eprintln!("warning: input is already balanced; generating 0 samples");
    }
    let out = OutDir::create(&args.out)?;
    let real_bots: Vec<DailyAggregate> = aggs.iter().filter(|a| a.is_bot && !a.synthetic).cloned().collect();
    let (synthetic, per_cluster) = if count == 0 {
        (Vec::new(), Vec::new())
    } else {
        let s = synthesize_bots(&aggs, count, args.seed)?;
        (s.aggregates, s.per_cluster)
    };
    write_aggregates_csv(out.writer("synthetic.csv")?, &synthetic)?;
    let rows = comparison(&stats_of(&real_bots), &stats_of(&synthetic))?;
    write_comparison(&out, &rows)?;
    out.json(
        "synthesize.json",
        &json!({
            "seed": args.seed,
            "counts": counts,
            "generated": synthetic.len(),
            "per_cluster": per_cluster,
            "comparison": rows,
        }),
    )?;
    println!("generated {} synthetic bot aggregates", synthetic.len());
    Ok(())
}

fn balance(args: BalanceArgs) -> Result<()> {
    let aggs = load(&args.input.input)?;
    let outcome = balance_dataset(&aggs, args.seed, args.rule.into())?;
    let out = OutDir::create(&args.out)?;
    write_aggregates_csv(out.writer("balanced.csv")?, &outcome.aggregates)?;
    let rows = comparison(&outcome.original_stats, &outcome.synthetic_stats)?;
    write_comparison(&out, &rows)?;
    out.json(
        "balance.json",
        &json!({
            "seed": args.seed,
            "counts": outcome.counts,
            "n_real": aggs.len(),
            "n_synthetic": outcome.n_synthetic,
            "n_aggregates": outcome.aggregates.len(),
            "per_cluster": outcome.per_cluster,
            "summary": summarize(&outcome.aggregates),
        }),
    )?;
    println!(
        "{} real + {} synthetic = {} aggregates",
        aggs.len(),
        outcome.n_synthetic,
        outcome.aggregates.len()
    );
    Ok(())
}

fn profile(args: ProfileArgs) -> Result<()> {
    let aggs = load(&args.input.input)?;
    let mut store = ProfileStore::new();
    for a in &aggs {
        store.update_ref(a);
    }
    let out = OutDir::create(&args.out)?;
    let mut w = out.writer("profiles.jsonl")?;
    store.export_jsonl(&mut w)?;
    w.flush()?;

    let mut w = csv::Writer::from_writer(out.writer("profiles.csv")?);
    let mut header = vec!["contributor_id", "is_bot", "first_seen", "last_seen", "updates"];
    header.extend(Feature::ALL.iter().map(|f| f.id()));
    w.write_record(&header)?;
    for p in store.iter() {
        let mut row = vec![
            p.contributor_id.clone(),
            u8::from(p.is_bot).to_string(),
            p.first_seen.to_string(),
            p.last_seen.to_string(),
            p.n_updates.to_string(),
        ];
        row.extend(p.values.iter().map(|v| v.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    out.json(
        "profile.json",
        &json!({ "n_profiles": store.len(), "n_aggregates": aggs.len() }),
    )?;
    println!("{} profiles from {} aggregates", store.len(), aggs.len());
    Ok(())
}

#[derive(Debug, Clone)]
struct Cell {
    name: String,
    kind: ClassifierKind,
    features: Option<FeatureSet>,
}

#[derive(Debug, Serialize)]
struct CellReport {
    name: String,
    classifier: ClassifierKind,
    target: Target,
    features: Vec<Feature>,
    report: MetricsReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    user_report: Option<MetricsReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    joint_report: Option<MetricsReport>,
}

struct CellOutput {
    report: CellReport,
    log: Vec<u8>,
}

fn grid(args: &EvaluateArgs) -> Result<Vec<Cell>> {
    let mut cells = Vec::new();
    for kind in &args.classifier {
        if *kind == ClassifierKind::Stacking {
            cells.push(Cell {
                name: "stacking".into(),
                kind: *kind,
                features: None,
            });
            continue;
        }
        for name in &args.features {
            let set = FeatureSet::from_name(&name.replace('+', ","), args.target)?;
            cells.push(Cell {
                name: format!("{kind}-{}", name.replace('+', "_")),
                kind: *kind,
                features: Some(set),
            });
        }
    }
    let mut names: Vec<&str> = cells.iter().map(|c| c.name.as_str()).collect();
    names.sort_unstable();
    names.dedup();
    if names.len() != cells.len() {
        return Err(Error::validation("classifier", "grid has duplicate cells").into());
    }
    Ok(cells)
}

fn run_cell(cell: &Cell, stream: &[DailyAggregate], args: &EvaluateArgs) -> Result<CellOutput> {
    let mut store = ProfileStore::new();
    let mut log = Vec::new();
    match &cell.features {
        None => {
            let mut model = StackingModel::new(StackingConfig {
                seed: args.seed,
                level2_raw_features: !args.no_level2_raw,
                ..StackingConfig::default()
            });
            let features = model.input_features().features().to_vec();
            let outcome = prequential_stacking(stream, &mut store, &mut model, args.window)?;
            write_stacking_log(&outcome.log, &mut log)?;
            Ok(CellOutput {
                report: CellReport {
                    name: cell.name.clone(),
                    classifier: cell.kind,
                    target: Target::ContributionType,
                    features,
                    report: outcome.contribution,
                    user_report: Some(outcome.user),
                    joint_report: Some(outcome.joint),
                },
                log,
            })
        }
        Some(set) => {
            let mut model = Classifier::binary(cell.kind, args.seed)?;
            let run = prequential_run(stream, &mut store, &mut model, set, args.target, args.window)?;
            write_prediction_log(&run.log, 2, &mut log)?;
            Ok(CellOutput {
                report: CellReport {
                    name: cell.name.clone(),
                    classifier: cell.kind,
                    target: args.target,
                    features: set.features().to_vec(),
                    report: run.report,
                    user_report: None,
                    joint_report: None,
                },
                log,
            })
        }
    }
}

fn evaluate(args: EvaluateArgs) -> Result<()> {
    let cells = grid(&args)?;
    let real = load(&args.input.input)?;
    let stream = if args.balance {
        balance_dataset(&real, args.seed, args.rule.into())?.aggregates
    } else {
        real
    };
    let out = OutDir::create(&args.out)?;

    let threads = args
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .clamp(1, cells.len().max(1));
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<CellOutput>>>> =
        Mutex::new((0..cells.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(cell) = cells.get(i) else { break };
                let r = run_cell(cell, &stream, &args).with_context(|| format!("cell {}", cell.name));
                results.lock().expect("no poisoned workers")[i] = Some(r);
            });
        }
    });

    let mut reports = Vec::new();
    let mut rows = Vec::new();
    for result in results.into_inner().expect("no poisoned workers") {
        let cell = result.expect("every cell ran")?;
        let name = &cell.report.name;
        std::fs::write(out.path(&format!("predictions-{name}.csv")), &cell.log)
            .map_err(|e| Error::io(out.path(&format!("predictions-{name}.csv")), e))?;
        let mut w = csv::Writer::from_writer(out.writer(&format!("window-{name}.csv"))?);
        w.write_record(["end", "accuracy", "macro_f"])?;
        for p in &cell.report.report.window_series {
            w.write_record([p.end.to_string(), p.accuracy.to_string(), p.macro_f.to_string()])?;
        }
        w.flush()?;
        rows.push(TableRow::from_report(name.clone(), &cell.report.report));
        reports.push(cell.report);
    }
    let table = render_table(&rows);
    std::fs::write(out.path("table.txt"), &table).map_err(|e| Error::io(out.path("table.txt"), e))?;
    out.json(
        "report.json",
        &json!({
            "input": args.input.input,
            "target": args.target,
            "seed": args.seed,
            "balanced": args.balance,
            "n_events": stream.len(),
            "summary": summarize(&stream),
            "cells": reports,
            "table": rows,
        }),
    )?;
    print!("{table}");
    Ok(())
}

fn simulate_cmd(args: SimulateArgs) -> Result<()> {
    let mut config = match &args.sim {
        Some(path) => {
            require_file(path)?;
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            toml::from_str::<SimConfig>(&text)
                .map_err(|e| Error::validation("sim", format!("{}: {e}", path.display())))?
        }
        None => SimConfig::default(),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let sim = simulate(&config)?;
    let out = OutDir::create(&args.out)?;
    let events_name = match args.format {
        EventFormat::Csv => {
            write_events_csv(out.writer("events.csv")?, &sim.events)?;
            "events.csv"
        }
        EventFormat::Jsonl => {
            let mut w = out.writer("events.jsonl")?;
            write_events_jsonl(&mut w, &sim.events)?;
            w.flush()?;
            "events.jsonl"
        }
    };
    sim.write_labels_csv(out.writer("labels.csv")?)?;
    let aggs = aggregate_daily(&sim.events)?;
    out.json(
        "simulate.json",
        &json!({
            "config": config,
            "events": events_name,
            "labels": "labels.csv",
            "summary": summarize_events(&sim.events, &aggs),
        }),
    )?;
    println!(
        "{} events, {} day aggregates, {} contributors",
        sim.events.len(),
        aggs.len(),
        sim.labels.len()
    );
    Ok(())
}

fn report(args: ReportArgs) -> Result<()> {
    let mut rows: Vec<TableRow> = Vec::new();
    for path in &args.input {
        require_file(path)?;
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let value: serde_json::Value = serde_json::from_str(&text).map_err(Error::from)?;
        let table = value
            .get("table")
            .cloned()
            .ok_or_else(|| Error::validation("input", format!("{}: no table in report", path.display())))?;
        rows.extend(serde_json::from_value::<Vec<TableRow>>(table).map_err(Error::from)?);
    }
    match args.format {
        TableFormat::Table => print!("{}", render_table(&rows)),
        TableFormat::Csv => {
            let mut w = csv::Writer::from_writer(std::io::stdout());
            for r in &rows {
                w.serialize(r)?;
            }
            w.flush()?;
        }
    }
    Ok(())
}
