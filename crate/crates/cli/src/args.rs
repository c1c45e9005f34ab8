use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use skillgrade::classifiers::{Bandwidth, ClassifierConfig, ClassifierKind, Gamma, Kernel, SvmParams};
use skillgrade::datagen::{GeneratorConfig, Perturbations};
use skillgrade::evaluation::{EerMethod, ExperimentConfig, NormalizeOn, SelectionScope, WorkingPoint};
use skillgrade::features::ExtractOptions;
use skillgrade::selection::TTestVariant;

#[derive(Debug, Parser)]
#[command(name = "skillgrade", version, about = "Skill classification from simulator recordings")]
pub struct Cli {
    /// Log level filter (error, warn, info, debug, trace).
    #[arg(long, global = true, default_value = "warn")]
    pub log_level: String,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Write a synthetic dataset: trial CSVs plus a dataset sidecar.
    Generate(GenerateArgs),
    /// Extract the 68-feature catalog from a dataset directory.
    Extract(ExtractArgs),
    /// Rank features per scenario: t-test filter then forward selection.
    Select(SelectArgs),
    /// Run the repeated-split evaluation grid.
    Evaluate(EvaluateArgs),
    /// Aggregate a report CSV into plot-ready tables and confusion ranges.
    Report(ReportArgs),
    /// generate, extract, select, evaluate and report in one go.
    Pipeline(PipelineArgs),
    /// Re-execute the command recorded in a run manifest.
    Rerun(RerunArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Generate(_) => "generate",
            Command::Extract(_) => "extract",
            Command::Select(_) => "select",
            Command::Evaluate(_) => "evaluate",
            Command::Report(_) => "report",
            Command::Pipeline(_) => "pipeline",
            Command::Rerun(_) => "rerun",
        }
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct GeneratorArgs {
    #[arg(long, default_value_t = 23)]
    pub n_skilled: usize,
    #[arg(long, default_value_t = 92)]
    pub n_novice: usize,
    /// Separability between the classes, >= 0.
    #[arg(long, default_value_t = 0.0)]
    pub delta: f64,
    #[arg(long, default_value_t = 100.0)]
    pub sample_rate: f64,
    /// Seconds per tumor segment.
    #[arg(long, default_value_t = 180.0)]
    pub segment_duration: f64,
    #[arg(long, value_delimiter = ',', default_values_t = [1u8, 2, 3, 4, 5, 6])]
    pub scenarios: Vec<u8>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub no_jitter: bool,
    #[arg(long)]
    pub no_submovements: bool,
    #[arg(long)]
    pub no_force_tremor: bool,
    #[arg(long)]
    pub no_pedal_chatter: bool,
}

impl GeneratorArgs {
    pub fn config(&self) -> GeneratorConfig {
        GeneratorConfig {
            n_skilled: self.n_skilled,
            n_novice: self.n_novice,
            delta: self.delta,
            sample_rate_hz: self.sample_rate,
            segment_duration_s: self.segment_duration,
            scenarios: self.scenarios.clone(),
            seed: self.seed,
            perturbations: Perturbations {
                jitter: !self.no_jitter,
                submovements: !self.no_submovements,
                force_tremor: !self.no_force_tremor,
                pedal_chatter: !self.no_pedal_chatter,
            },
        }
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct GenerateArgs {
    #[arg(long)]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub generator: GeneratorArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtractNormalize {
    /// Raw features only.
    None,
    /// Also write a copy normalized with constants from every row.
    Full,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ExtractOptionArgs {
    /// Boundary between the low and high force bands, Hz.
    #[arg(long, default_value_t = 2.0)]
    pub spectral_cutoff: f64,
    /// Force above which the tool counts as in contact, N.
    #[arg(long, default_value_t = 0.1)]
    pub contact_threshold: f64,
}

impl ExtractOptionArgs {
    pub fn options(&self) -> ExtractOptions {
        ExtractOptions {
            spectral_cutoff_hz: self.spectral_cutoff,
            contact_threshold_n: self.contact_threshold,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ExtractArgs {
    /// Dataset directory written by `generate`.
    #[arg(long)]
    pub in_dir: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, value_enum, default_value_t = ExtractNormalize::None)]
    pub normalize_on: ExtractNormalize,
    #[command(flatten)]
    pub options: ExtractOptionArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TTestArg {
    Welch,
    Student,
}

impl From<TTestArg> for TTestVariant {
    fn from(v: TTestArg) -> Self {
        match v {
            TTestArg::Welch => TTestVariant::Welch,
            TTestArg::Student => TTestVariant::Student,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SelectArgs {
    /// Raw feature CSV.
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value_t = 30)]
    pub k_max: usize,
    #[arg(long, value_enum, default_value_t = TTestArg::Welch)]
    pub ttest: TTestArg,
    /// Fill the candidate pool up to `k-max` with the lowest-p features.
    #[arg(long)]
    pub top_up: bool,
    /// The CSV is already normalized; skip per-scenario normalization.
    #[arg(long)]
    pub normalized: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizeArg {
    Train,
    Full,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScopeArg {
    PerCell,
    PerScenario,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EerArg {
    Staircase,
    ConvexHull,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelArg {
    Rbf,
    Linear,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct GridArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9])]
    pub train_fractions: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [5usize, 10, 15, 20, 25, 30])]
    pub feature_counts: Vec<usize>,
    #[arg(long, default_value_t = 20)]
    pub iterations: usize,
    #[arg(long, value_delimiter = ',', default_values_t = ["knn".to_string(), "parzen".into(), "svm".into(), "fknn".into()])]
    pub classifiers: Vec<String>,
    #[arg(long, default_value_t = 0)]
    pub master_seed: u64,
    /// Evaluate only these scenarios; all present by default.
    #[arg(long, value_delimiter = ',')]
    pub eval_scenarios: Vec<u8>,
    #[arg(long, default_value_t = 0.5)]
    pub working_fraction: f64,
    #[arg(long, default_value_t = 15)]
    pub working_features: usize,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t = TTestArg::Welch)]
    pub ttest: TTestArg,
    /// Simple random splits instead of per-class ones.
    #[arg(long)]
    pub no_stratify: bool,
    #[arg(long, value_enum, default_value_t = ScopeArg::PerCell)]
    pub selection_scope: ScopeArg,
    #[arg(long, value_enum, default_value_t = NormalizeArg::Train)]
    pub normalize_on: NormalizeArg,
    #[arg(long, value_enum, default_value_t = EerArg::Staircase)]
    pub eer_method: EerArg,
    /// Rank only the features that pass the t-test.
    #[arg(long)]
    pub no_top_up: bool,
    #[arg(long, default_value_t = 7)]
    pub knn_k: usize,
    #[arg(long, default_value_t = 7)]
    pub fknn_k: usize,
    #[arg(long, default_value_t = 2.0)]
    pub fknn_m: f64,
    /// Parzen kernel width; Silverman's rule when omitted.
    #[arg(long)]
    pub parzen_bandwidth: Option<f64>,
    #[arg(long, value_enum, default_value_t = KernelArg::Rbf)]
    pub svm_kernel: KernelArg,
    #[arg(long, default_value_t = 1.0)]
    pub svm_c: f64,
    /// RBF gamma; scaled to the training variance when omitted.
    #[arg(long)]
    pub svm_gamma: Option<f64>,
    #[arg(long, default_value_t = 1e-3)]
    pub svm_tolerance: f64,
}

impl GridArgs {
    pub fn config(&self) -> anyhow::Result<ExperimentConfig> {
        let classifiers = self
            .classifiers
            .iter()
            .map(|s| s.parse::<ClassifierKind>())
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ExperimentConfig {
            train_fractions: self.train_fractions.clone(),
            feature_counts: self.feature_counts.clone(),
            iterations: self.iterations,
            classifiers,
            master_seed: self.master_seed,
            working_point: WorkingPoint {
                train_fraction: self.working_fraction,
                feature_count: self.working_features,
            },
            scenarios: self.eval_scenarios.clone(),
            alpha: self.alpha,
            ttest: self.ttest.into(),
            stratify: !self.no_stratify,
            selection_scope: match self.selection_scope {
                ScopeArg::PerCell => SelectionScope::PerCell,
                ScopeArg::PerScenario => SelectionScope::PerScenario,
            },
            normalize_on: match self.normalize_on {
                NormalizeArg::Train => NormalizeOn::Train,
                NormalizeArg::Full => NormalizeOn::Full,
                NormalizeArg::None => NormalizeOn::None,
            },
            eer_method: match self.eer_method {
                EerArg::Staircase => EerMethod::Staircase,
                EerArg::ConvexHull => EerMethod::ConvexHull,
            },
            top_up: !self.no_top_up,
            classifier: ClassifierConfig {
                knn_k: self.knn_k,
                fknn_k: self.fknn_k,
                fknn_m: self.fknn_m,
                parzen_bandwidth: self.parzen_bandwidth.map_or(Bandwidth::Silverman, Bandwidth::Fixed),
                svm: SvmParams {
                    kernel: match self.svm_kernel {
                        KernelArg::Rbf => Kernel::Rbf,
                        KernelArg::Linear => Kernel::Linear,
                    },
                    c: self.svm_c,
                    gamma: self.svm_gamma.map_or(Gamma::Scale, Gamma::Value),
                    tolerance: self.svm_tolerance,
                    ..SvmParams::default()
                },
            },
        })
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct EvaluateArgs {
    /// Raw feature CSV.
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Evaluation threads; results do not depend on this.
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ReportArgs {
    /// Report CSV written by `evaluate`.
    #[arg(long)]
    pub report: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    pub working_fraction: f64,
    #[arg(long, default_value_t = 15)]
    pub working_features: usize,
    /// Class sizes for the confusion table; read from the `class_sizes.json`
    /// beside the report when omitted.
    #[arg(long)]
    pub n_skilled: Option<usize>,
    #[arg(long)]
    pub n_novice: Option<usize>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct PipelineArgs {
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    #[command(flatten)]
    pub generator: GeneratorArgs,
    #[command(flatten)]
    pub options: ExtractOptionArgs,
    #[arg(long, default_value_t = 30)]
    pub k_max: usize,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct RerunArgs {
    /// `run_manifest.json` of an earlier run.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Write to this directory instead of the recorded one.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}
