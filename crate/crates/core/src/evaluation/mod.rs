//! Repeated stratified train/test splits scored by equal error rate.

mod aggregate;
mod confusion;
mod eer;
mod grid;
mod split;

pub use aggregate::{
    at_working_point, by_feature_count, by_train_fraction, mean_eer_by_classifier, summary_text,
    EerSummary,
};
pub use confusion::{confusion_ranges, render_confusion_table, ClassSizes, ConfusionRange};
pub use eer::{compute_eer, compute_eer_with, EerMethod, EerResult, RocPoint};
pub use grid::{
    cell_seed, run_grid, run_grid_with_workers, CellRecord, EvalReport, ExperimentConfig,
    NormalizeOn, ScenarioSizes, SelectionScope, WorkingPoint,
};
pub use split::{random_split, stratified_split, Split};
