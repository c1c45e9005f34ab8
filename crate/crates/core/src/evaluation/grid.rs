use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::confusion::{confusion_ranges, ClassSizes, ConfusionRange};
use super::eer::{compute_eer_with, EerMethod};
use super::split::{random_split, stratified_split, Split};
use crate::classifiers::{self, ClassifierConfig, ClassifierKind};
use crate::error::{Error, Result};
use crate::features::{FeatureId, FeatureMatrix, Normalizer};
use crate::selection::{self, TTestVariant, DEFAULT_ALPHA, PREMIER_SIZES};
use crate::signal::Label;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorkingPoint {
    pub train_fraction: f64,
    pub feature_count: usize,
}

impl Default for WorkingPoint {
    fn default() -> Self {
        Self {
            train_fraction: 0.5,
            feature_count: 15,
        }
    }
}

/// Rows the feature-ranking stage sees.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionScope {
    /// Re-ranked from each cell's training rows.
    #[default]
    PerCell,
    /// Ranked once per scenario from all of its rows.
    PerScenario,
}

/// Rows the normalization constants are fitted on.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizeOn {
    #[default]
    Train,
    Full,
    /// Features arrive normalized already.
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub train_fractions: Vec<f64>,
    pub feature_counts: Vec<usize>,
    pub iterations: usize,
    pub classifiers: Vec<ClassifierKind>,
    pub master_seed: u64,
    pub working_point: WorkingPoint,
    /// Scenarios to run; empty means every scenario in the matrix.
    pub scenarios: Vec<u8>,
    pub alpha: f64,
    pub ttest: TTestVariant,
    pub stratify: bool,
    pub selection_scope: SelectionScope,
    pub normalize_on: NormalizeOn,
    pub eer_method: EerMethod,
    /// Fill the candidate pool with the lowest-p features when fewer than
    /// the largest feature count pass the t-test.
    pub top_up: bool,
    pub classifier: ClassifierConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            train_fractions: (1..=9).map(|i| i as f64 / 10.0).collect(),
            feature_counts: PREMIER_SIZES.to_vec(),
            iterations: 20,
            classifiers: ClassifierKind::ALL.to_vec(),
            master_seed: 0,
            working_point: WorkingPoint::default(),
            scenarios: Vec::new(),
            alpha: DEFAULT_ALPHA,
            ttest: TTestVariant::Welch,
            stratify: true,
            selection_scope: SelectionScope::PerCell,
            normalize_on: NormalizeOn::Train,
            eer_method: EerMethod::Staircase,
            top_up: true,
            classifier: ClassifierConfig::default(),
        }
    }
}

impl ExperimentConfig {
    /// Working point only: one fraction and one feature count.
    pub fn working_point_only(mut self) -> Self {
        self.train_fractions = vec![self.working_point.train_fraction];
        self.feature_counts = vec![self.working_point.feature_count];
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.train_fractions.is_empty() || self.feature_counts.is_empty() {
            return bad("empty train fraction or feature count list".into());
        }
        if let Some(f) = self.train_fractions.iter().find(|f| !(**f > 0.0 && **f < 1.0)) {
            return bad(format!("train fraction {f} outside (0, 1)"));
        }
        if self.feature_counts.contains(&0) {
            return bad("feature count 0".into());
        }
        if self.iterations == 0 {
            return bad("iterations must be at least 1".into());
        }
        if self.classifiers.is_empty() {
            return bad("no classifiers".into());
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad(format!("alpha {} outside (0, 1]", self.alpha));
        }
        Ok(())
    }

    /// Number of report rows for `n_scenarios` scenarios.
    pub fn cell_count(&self, n_scenarios: usize) -> usize {
        n_scenarios
            * self.train_fractions.len()
            * self.feature_counts.len()
            * self.classifiers.len()
            * self.iterations
    }
}

/// One (scenario, classifier, fraction, feature count, iteration) result.
/// Failed cells carry NaN metrics and the error text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub scenario_id: u8,
    pub classifier: ClassifierKind,
    pub train_fraction: f64,
    pub feature_count: usize,
    pub iteration: usize,
    pub eer: f64,
    pub sensitivity: f64,
    pub specificity: f64,
    pub threshold: f64,
    pub error: Option<String>,
}

impl CellRecord {
    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }

    fn failed(key: CellKey, classifier: ClassifierKind, feature_count: usize, msg: String) -> Self {
        Self {
            scenario_id: key.scenario_id,
            classifier,
            train_fraction: key.train_fraction,
            feature_count,
            iteration: key.iteration,
            eer: f64::NAN,
            sensitivity: f64::NAN,
            specificity: f64::NAN,
            threshold: f64::NAN,
            error: Some(msg),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioSizes {
    pub scenario_id: u8,
    pub n_skilled: usize,
    pub n_novice: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub config: ExperimentConfig,
    pub class_sizes: Vec<ScenarioSizes>,
    /// Sorted by scenario, classifier, fraction, feature count, iteration.
    pub cells: Vec<CellRecord>,
    /// Working-point confusion ranges; empty when the grid lacks them.
    pub confusion_ranges: Vec<ConfusionRange>,
}

impl EvalReport {
    pub fn failures(&self) -> impl Iterator<Item = &CellRecord> {
        self.cells.iter().filter(|c| !c.is_ok())
    }

    /// Largest class sizes over the scenarios.
    pub fn overall_sizes(&self) -> ClassSizes {
        ClassSizes {
            n_skilled: self.class_sizes.iter().map(|s| s.n_skilled).max().unwrap_or(0),
            n_novice: self.class_sizes.iter().map(|s| s.n_novice).max().unwrap_or(0),
        }
    }
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(z: u64) -> u64 {
    let mut z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of one split, independent of scheduling.
pub fn cell_seed(master_seed: u64, scenario_id: u8, fraction_index: usize, iteration: usize) -> u64 {
    [scenario_id as u64, fraction_index as u64, iteration as u64]
        .iter()
        .fold(splitmix64(master_seed), |acc, &v| splitmix64(acc ^ v))
}

#[derive(Debug, Clone, Copy)]
struct CellKey {
    scenario_id: u8,
    fraction_index: usize,
    train_fraction: f64,
    iteration: usize,
}

/// Runs the grid on the rayon global pool.
pub fn run_grid(matrix: &FeatureMatrix, config: &ExperimentConfig) -> Result<EvalReport> {
    run(matrix, config, None)
}

/// Runs the grid on `workers` threads; `1` runs serially on the caller.
/// The report does not depend on `workers`.
pub fn run_grid_with_workers(
    matrix: &FeatureMatrix,
    config: &ExperimentConfig,
    workers: usize,
) -> Result<EvalReport> {
    run(matrix, config, Some(workers))
}

fn run(matrix: &FeatureMatrix, config: &ExperimentConfig, workers: Option<usize>) -> Result<EvalReport> {
    config.validate()?;
    let scenarios = if config.scenarios.is_empty() {
        matrix.scenarios()
    } else {
        config.scenarios.clone()
    };
    let mut per_scenario = Vec::with_capacity(scenarios.len());
    let mut class_sizes = Vec::with_capacity(scenarios.len());
    for &s in &scenarios {
        let m = matrix.scenario(s);
        if m.is_empty() {
            return Err(Error::InvalidParameter(format!("no rows for scenario {s}")));
        }
        class_sizes.push(ScenarioSizes {
            scenario_id: s,
            n_skilled: m.count(Label::Skilled),
            n_novice: m.count(Label::Novice),
        });
        let global = match config.selection_scope {
            SelectionScope::PerCell => None,
            SelectionScope::PerScenario => Some(global_ranking(&m, config)),
        };
        per_scenario.push((m, global));
    }

    let mut keys = Vec::new();
    for (si, &s) in scenarios.iter().enumerate() {
        for (fi, &f) in config.train_fractions.iter().enumerate() {
            for it in 0..config.iterations {
                keys.push((
                    si,
                    CellKey {
                        scenario_id: s,
                        fraction_index: fi,
                        train_fraction: f,
                        iteration: it,
                    },
                ));
            }
        }
    }

    let job = |(si, key): &(usize, CellKey)| {
        let (m, global) = &per_scenario[*si];
        run_cell(m, config, *key, global.as_ref())
    };
    let nested: Vec<Vec<CellRecord>> = match workers {
        Some(w) if w <= 1 => keys.iter().map(job).collect(),
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("worker pool: {e}")))?
            .install(|| keys.par_iter().map(job).collect()),
        None => keys.par_iter().map(job).collect(),
    };

    let mut cells: Vec<CellRecord> = nested.into_iter().flatten().collect();
    let class_pos = |k: ClassifierKind| config.classifiers.iter().position(|&c| c == k);
    let frac_pos = |f: f64| config.train_fractions.iter().position(|&x| x == f);
    let count_pos = |n: usize| config.feature_counts.iter().position(|&x| x == n);
    cells.sort_by(|a, b| {
        (a.scenario_id, class_pos(a.classifier), frac_pos(a.train_fraction), count_pos(a.feature_count), a.iteration)
            .cmp(&(b.scenario_id, class_pos(b.classifier), frac_pos(b.train_fraction), count_pos(b.feature_count), b.iteration))
    });
    for c in cells.iter().filter(|c| !c.is_ok()) {
        log::warn!(
            "cell scenario {} {} fraction {} features {} iteration {} failed: {}",
            c.scenario_id,
            c.classifier,
            c.train_fraction,
            c.feature_count,
            c.iteration,
            c.error.as_deref().unwrap_or("")
        );
    }

    let mut report = EvalReport {
        config: config.clone(),
        class_sizes,
        cells,
        confusion_ranges: Vec::new(),
    };
    let wp = config.working_point;
    if config.train_fractions.contains(&wp.train_fraction)
        && config.feature_counts.contains(&wp.feature_count)
    {
        match confusion_ranges(&report.cells, wp, report.overall_sizes()) {
            Ok(r) => report.confusion_ranges = r,
            Err(e) => log::warn!("no confusion ranges: {e}"),
        }
    }
    Ok(report)
}

fn largest_count(config: &ExperimentConfig) -> usize {
    config.feature_counts.iter().copied().max().unwrap_or(0)
}

fn rank(train: &FeatureMatrix, config: &ExperimentConfig) -> Result<Vec<FeatureId>> {
    let filter = selection::ttest_filter(train, config.alpha, config.ttest)?;
    let want = largest_count(config);
    let pool = if config.top_up {
        selection::candidates_with_top_up(&filter, want)
    } else {
        filter.filtered_ids.clone()
    };
    let k = want.min(pool.len());
    Ok(selection::forward_select(train, k, &pool)?.ranking)
}

fn global_ranking(m: &FeatureMatrix, config: &ExperimentConfig) -> std::result::Result<Vec<FeatureId>, String> {
    let all: Vec<usize> = (0..m.len()).collect();
    let normalized = match config.normalize_on {
        NormalizeOn::None => m.clone(),
        _ => Normalizer::fit(m, &all).map_err(|e| e.to_string())?.apply(m),
    };
    rank(&normalized, config).map_err(|e| e.to_string())
}

fn prepare(
    m: &FeatureMatrix,
    config: &ExperimentConfig,
    key: CellKey,
    global: Option<&std::result::Result<Vec<FeatureId>, String>>,
) -> Result<(FeatureMatrix, FeatureMatrix, Vec<FeatureId>)> {
    let seed = cell_seed(config.master_seed, key.scenario_id, key.fraction_index, key.iteration);
    let split: Split = if config.stratify {
        stratified_split(&m.labels, key.train_fraction, seed)?
    } else {
        random_split(m.len(), key.train_fraction, seed)?
    };
    if split.train.iter().any(|i| split.test.binary_search(i).is_ok()) {
        return Err(Error::Split("train and test rows overlap".into()));
    }
    let normalized = match config.normalize_on {
        NormalizeOn::Train => Normalizer::fit(m, &split.train)?.apply(m),
        NormalizeOn::Full => {
            let all: Vec<usize> = (0..m.len()).collect();
            Normalizer::fit(m, &all)?.apply(m)
        }
        NormalizeOn::None => m.clone(),
    };
    let train = normalized.subset(&split.train);
    let test = normalized.subset(&split.test);
    let ranking = match global {
        Some(r) => r.clone().map_err(Error::InvalidParameter)?,
        None => rank(&train, config)?,
    };
    Ok((train, test, ranking))
}

fn run_cell(
    m: &FeatureMatrix,
    config: &ExperimentConfig,
    key: CellKey,
    global: Option<&std::result::Result<Vec<FeatureId>, String>>,
) -> Vec<CellRecord> {
    let mut out = Vec::with_capacity(config.feature_counts.len() * config.classifiers.len());
    let (train, test, ranking) = match prepare(m, config, key, global) {
        Ok(p) => p,
        Err(e) => {
            for &n in &config.feature_counts {
                for &c in &config.classifiers {
                    out.push(CellRecord::failed(key, c, n, e.to_string()));
                }
            }
            return out;
        }
    };
    for &n in &config.feature_counts {
        if n > ranking.len() {
            for &c in &config.classifiers {
                out.push(CellRecord::failed(
                    key,
                    c,
                    n,
                    format!("only {} features ranked", ranking.len()),
                ));
            }
            continue;
        }
        let feats = &ranking[..n];
        let x_train = train.project(feats);
        let x_test = test.project(feats);
        for &c in &config.classifiers {
            let result = classifiers::fit(c, &x_train, &train.labels, feats, &config.classifier)
                .and_then(|model| {
                    let scores: Vec<f64> = x_test.iter().map(|q| model.score(q)).collect();
                    compute_eer_with(&scores, &test.labels, config.eer_method)
                });
            out.push(match result {
                Ok(r) => CellRecord {
                    scenario_id: key.scenario_id,
                    classifier: c,
                    train_fraction: key.train_fraction,
                    feature_count: n,
                    iteration: key.iteration,
                    eer: r.eer,
                    sensitivity: r.sensitivity,
                    specificity: r.specificity,
                    threshold: r.threshold,
                    error: None,
                },
                Err(e) => CellRecord::failed(key, c, n, e.to_string()),
            });
        }
    }
    out
}
