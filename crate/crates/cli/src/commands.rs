use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;

use skillgrade::datagen::generate_trial;
use skillgrade::evaluation::{
    by_feature_count, by_train_fraction, at_working_point, confusion_ranges, render_confusion_table,
    run_grid_with_workers, summary_text, ClassSizes, WorkingPoint,
};
use skillgrade::features::catalog::reference_document;
use skillgrade::features::{definition, extract_features_with, normalize};
use skillgrade::io::{self, DatasetManifest};
use skillgrade::selection::{candidates_with_top_up, forward_select, ttest_filter, SelectionResult};
use skillgrade::{FeatureMatrix, FeatureVector};

use crate::args::{
    Command, EvaluateArgs, ExtractArgs, ExtractNormalize, GenerateArgs, PipelineArgs, ReportArgs,
    RerunArgs, SelectArgs,
};
use crate::manifest::{RunManifest, MANIFEST_FILE};

pub const FEATURES_FILE: &str = "features.csv";
pub const FEATURES_NORMALIZED_FILE: &str = "features_normalized.csv";
pub const REPORT_FILE: &str = "report.csv";
pub const CLASS_SIZES_FILE: &str = "class_sizes.json";

pub fn run(command: &Command) -> Result<()> {
    match command {
        Command::Generate(a) => generate(a),
        Command::Extract(a) => extract(a),
        Command::Select(a) => select(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Report(a) => report(a),
        Command::Pipeline(a) => pipeline(a),
        Command::Rerun(a) => rerun(a),
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn write_text(path: &Path, text: &str) -> Result<PathBuf> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(path.to_path_buf())
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<PathBuf> {
    write_text(path, &(serde_json::to_string_pretty(value)? + "\n"))
}

fn finish(mut manifest: RunManifest, dir: &Path, started: Instant) -> Result<()> {
    manifest.wall_time_s = started.elapsed().as_secs_f64();
    let path = manifest.write(dir)?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn generate(a: &GenerateArgs) -> Result<()> {
    let started = Instant::now();
    let config = a.generator.config();
    config.validate().context("generate: invalid configuration")?;
    create_dir(&a.out_dir)?;
    // Trials are written as they are produced so the whole dataset never
    // sits in memory.
    let trials = config
        .trial_specs()
        .par_iter()
        .map(|spec| {
            let trial = generate_trial(&config, spec)?;
            io::write_trial(&a.out_dir, &trial)
        })
        .collect::<skillgrade::Result<Vec<_>>>()
        .context("generate")?;
    let dataset = DatasetManifest { trials };
    let sidecar = dataset.write(&a.out_dir).context("generate: writing dataset sidecar")?;

    let mut manifest = RunManifest::new(Command::Generate(a.clone()));
    manifest.config = serde_json::to_value(&config)?;
    manifest.seed = Some(config.seed);
    manifest.outputs.push(sidecar);
    manifest.outputs.extend(dataset.trials.iter().map(|t| a.out_dir.join(&t.file)));
    println!("generated {} trials in {}", dataset.trials.len(), a.out_dir.display());
    finish(manifest, &a.out_dir, started)
}

/// Normalizes each scenario with constants fitted on all of its rows; the
/// row order is kept.
fn normalize_per_scenario(matrix: &FeatureMatrix) -> Result<FeatureMatrix> {
    let mut rows: Vec<Option<FeatureVector>> = vec![None; matrix.len()];
    for s in matrix.scenarios() {
        let idx: Vec<usize> = (0..matrix.len()).filter(|&i| matrix.scenario_ids[i] == s).collect();
        let sub = matrix.subset(&idx);
        let all: Vec<usize> = (0..sub.len()).collect();
        let normed = normalize(&sub, &all)?;
        for (i, row) in idx.into_iter().zip(normed.rows) {
            rows[i] = Some(row);
        }
    }
    let rows = rows.into_iter().map(|r| r.expect("every row has a scenario")).collect();
    Ok(FeatureMatrix::new(rows, matrix.labels.clone(), matrix.scenario_ids.clone())?)
}

fn extract(a: &ExtractArgs) -> Result<()> {
    let started = Instant::now();
    let dataset = DatasetManifest::read(&a.in_dir)
        .with_context(|| format!("extract: reading dataset in {}", a.in_dir.display()))?;
    let options = a.options.options();
    let rows = dataset
        .trials
        .par_iter()
        .map(|meta| {
            let trial = io::read_trial_csv(&a.in_dir.join(&meta.file), meta)?;
            extract_features_with(&trial, &options)
        })
        .collect::<skillgrade::Result<Vec<_>>>()
        .context("extract")?;
    let degenerate: usize = rows.iter().map(|r| r.degenerate.len()).sum();
    if degenerate > 0 {
        log::warn!("{degenerate} feature values fell back to a degenerate-input rule");
    }
    let matrix = FeatureMatrix::new(
        rows,
        dataset.trials.iter().map(|t| t.label).collect(),
        dataset.trials.iter().map(|t| t.scenario_id).collect(),
    )?;

    create_dir(&a.out_dir)?;
    let mut manifest = RunManifest::new(Command::Extract(a.clone()));
    manifest.config = serde_json::to_value(options)?;
    manifest.inputs.push(a.in_dir.join(io::DATASET_FILE));
    manifest.inputs.extend(dataset.trials.iter().map(|t| a.in_dir.join(&t.file)));

    let raw = a.out_dir.join(FEATURES_FILE);
    io::write_features_csv(&raw, &matrix).context("extract: writing features")?;
    manifest.outputs.push(raw);
    if a.normalize_on == ExtractNormalize::Full {
        let path = a.out_dir.join(FEATURES_NORMALIZED_FILE);
        io::write_features_csv(&path, &normalize_per_scenario(&matrix)?)
            .context("extract: writing normalized features")?;
        manifest.outputs.push(path);
    }
    manifest.outputs.push(write_text(&a.out_dir.join("catalog.md"), &reference_document())?);
    println!("extracted {} x {} features", matrix.len(), matrix.n_features());
    finish(manifest, &a.out_dir, started)
}

#[derive(serde::Serialize)]
struct ScenarioSelection {
    scenario_id: u8,
    n_skilled: usize,
    n_novice: usize,
    /// Candidate pool handed to forward selection.
    candidates: Vec<skillgrade::FeatureId>,
    #[serde(flatten)]
    result: SelectionResult,
}

fn select(a: &SelectArgs) -> Result<()> {
    let started = Instant::now();
    let matrix = io::read_features_csv(&a.features).context("select: reading features")?;
    let mut out = Vec::new();
    for s in matrix.scenarios() {
        let sub = matrix.scenario(s);
        let sub = if a.normalized {
            sub
        } else {
            let all: Vec<usize> = (0..sub.len()).collect();
            normalize(&sub, &all)?
        };
        let mut result = ttest_filter(&sub, a.alpha, a.ttest.into())
            .with_context(|| format!("select: scenario {s}"))?;
        let candidates = if a.top_up {
            candidates_with_top_up(&result, a.k_max)
        } else {
            result.filtered_ids.clone()
        };
        if candidates.len() < a.k_max {
            log::warn!(
                "scenario {s}: {} candidate features, fewer than k-max {}",
                candidates.len(),
                a.k_max
            );
        }
        let ranked = forward_select(&sub, a.k_max.min(candidates.len()), &candidates)
            .with_context(|| format!("select: scenario {s}"))?;
        result.forward_ranking = ranked.ranking;
        result.criterion_trace = ranked.criterion_trace;
        out.push(ScenarioSelection {
            scenario_id: s,
            n_skilled: sub.count(skillgrade::Label::Skilled),
            n_novice: sub.count(skillgrade::Label::Novice),
            candidates,
            result,
        });
    }

    let mut text = String::new();
    for sel in &out {
        let r = &sel.result;
        let _ = writeln!(
            text,
            "scenario {}: {} skilled, {} novice, {} of {} features pass p < {}, {} degenerate",
            sel.scenario_id,
            sel.n_skilled,
            sel.n_novice,
            r.filtered_ids.len(),
            r.p_values.len(),
            r.alpha,
            r.degenerate.len()
        );
        for (rank, (id, j)) in r.forward_ranking.iter().zip(&r.criterion_trace).enumerate() {
            let _ = writeln!(
                text,
                "  {:>2}. {:>2} p={:<12.4e} J={:<12.6} {}",
                rank + 1,
                id,
                r.p_values[id.index()],
                j,
                definition(*id).description
            );
        }
        let _ = writeln!(text);
    }

    create_dir(&a.out_dir)?;
    let mut manifest = RunManifest::new(Command::Select(a.clone()));
    manifest.inputs.push(a.features.clone());
    manifest.outputs.push(write_text(&a.out_dir.join("selection.txt"), &text)?);
    manifest.outputs.push(write_json(&a.out_dir.join("selection.json"), &out)?);
    print!("{text}");
    finish(manifest, &a.out_dir, started)
}

fn evaluate(a: &EvaluateArgs) -> Result<()> {
    let started = Instant::now();
    let config = a.grid.config()?;
    config.validate().context("evaluate: invalid configuration")?;
    if a.workers == 0 {
        bail!("evaluate: --workers must be at least 1");
    }
    let matrix = io::read_features_csv(&a.features).context("evaluate: reading features")?;
    let report = run_grid_with_workers(&matrix, &config, a.workers).context("evaluate")?;
    let failures = report.failures().count();
    if failures > 0 {
        log::warn!("{failures} of {} cells failed", report.cells.len());
    }

    create_dir(&a.out_dir)?;
    let mut manifest = RunManifest::new(Command::Evaluate(a.clone()));
    manifest.config = serde_json::to_value(&config)?;
    manifest.seed = Some(config.master_seed);
    manifest.inputs.push(a.features.clone());

    let report_path = a.out_dir.join(REPORT_FILE);
    io::write_report_csv(&report_path, &report.cells).context("evaluate: writing report")?;
    manifest.outputs.push(report_path);
    let sizes = report.overall_sizes();
    manifest.outputs.push(write_json(&a.out_dir.join(CLASS_SIZES_FILE), &sizes)?);
    let summary = summary_text(&report.cells, config.working_point, sizes);
    manifest.outputs.push(write_text(&a.out_dir.join("summary.txt"), &summary)?);
    print!("{summary}");
    finish(manifest, &a.out_dir, started)
}

fn report(a: &ReportArgs) -> Result<()> {
    let started = Instant::now();
    let cells = io::read_report_csv(&a.report).context("report: reading report")?;
    let wp = WorkingPoint {
        train_fraction: a.working_fraction,
        feature_count: a.working_features,
    };
    let mut manifest = RunManifest::new(Command::Report(a.clone()));
    manifest.inputs.push(a.report.clone());
    let sizes = match (a.n_skilled, a.n_novice) {
        (Some(n_skilled), Some(n_novice)) => ClassSizes { n_skilled, n_novice },
        (None, None) => {
            let path = a.report.with_file_name(CLASS_SIZES_FILE);
            let text = fs::read_to_string(&path).with_context(|| {
                format!("report: reading {}; pass --n-skilled and --n-novice instead", path.display())
            })?;
            manifest.inputs.push(path.clone());
            serde_json::from_str(&text).with_context(|| format!("report: parsing {}", path.display()))?
        }
        _ => bail!("report: give both --n-skilled and --n-novice or neither"),
    };

    create_dir(&a.out_dir)?;
    let outputs = [
        ("by_train_fraction.csv", "train_frac", by_train_fraction(&cells, wp.feature_count)),
        ("by_feature_count.csv", "n_features", by_feature_count(&cells, wp.train_fraction)),
        ("working_point.csv", "working_point", at_working_point(&cells, wp)),
    ];
    for (file, x, rows) in &outputs {
        let path = a.out_dir.join(file);
        io::write_summary_csv(&path, x, rows).with_context(|| format!("report: writing {file}"))?;
        manifest.outputs.push(path);
    }
    let ranges = confusion_ranges(&cells, wp, sizes).context("report: confusion ranges")?;
    let table: String = ranges.iter().map(|r| render_confusion_table(r, wp) + "\n").collect();
    manifest.outputs.push(write_text(&a.out_dir.join("confusion.txt"), &table)?);
    print!("{table}");
    finish(manifest, &a.out_dir, started)
}

fn pipeline(a: &PipelineArgs) -> Result<()> {
    let started = Instant::now();
    let dir = |name: &str| a.out_dir.join(name);
    let steps = [
        Command::Generate(GenerateArgs {
            out_dir: dir("data"),
            generator: a.generator.clone(),
        }),
        Command::Extract(ExtractArgs {
            in_dir: dir("data"),
            out_dir: dir("features"),
            normalize_on: ExtractNormalize::None,
            options: a.options.clone(),
        }),
        Command::Select(SelectArgs {
            features: dir("features").join(FEATURES_FILE),
            out_dir: dir("selection"),
            alpha: a.grid.alpha,
            k_max: a.k_max,
            ttest: a.grid.ttest,
            top_up: !a.grid.no_top_up,
            normalized: false,
        }),
        Command::Evaluate(EvaluateArgs {
            features: dir("features").join(FEATURES_FILE),
            out_dir: dir("evaluation"),
            workers: a.workers,
            grid: a.grid.clone(),
        }),
        Command::Report(ReportArgs {
            report: dir("evaluation").join(REPORT_FILE),
            out_dir: dir("report"),
            working_fraction: a.grid.working_fraction,
            working_features: a.grid.working_features,
            n_skilled: None,
            n_novice: None,
        }),
    ];
    create_dir(&a.out_dir)?;
    let mut manifest = RunManifest::new(Command::Pipeline(a.clone()));
    manifest.seed = Some(a.generator.seed);
    for step in &steps {
        log::info!("pipeline: {}", step.name());
        run(step).with_context(|| format!("pipeline: {} stage", step.name()))?;
    }
    manifest.outputs = ["data", "features", "selection", "evaluation", "report"]
        .iter()
        .map(|d| dir(d).join(MANIFEST_FILE))
        .collect();
    finish(manifest, &a.out_dir, started)
}

fn rerun(a: &RerunArgs) -> Result<()> {
    let recorded = RunManifest::read(&a.manifest)?;
    if recorded.tool_version != env!("CARGO_PKG_VERSION") {
        log::warn!(
            "manifest was written by version {}, this is {}",
            recorded.tool_version,
            env!("CARGO_PKG_VERSION")
        );
    }
    let mut command = recorded.command;
    if let Some(out) = &a.out_dir {
        match &mut command {
            Command::Generate(c) => c.out_dir = out.clone(),
            Command::Extract(c) => c.out_dir = out.clone(),
            Command::Select(c) => c.out_dir = out.clone(),
            Command::Evaluate(c) => c.out_dir = out.clone(),
            Command::Report(c) => c.out_dir = out.clone(),
            Command::Pipeline(c) => c.out_dir = out.clone(),
            Command::Rerun(_) => bail!("rerun: the manifest records another rerun"),
        }
    }
    log::info!("rerunning {}", command.name());
    run(&command)
}
