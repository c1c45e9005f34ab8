//! Parametric feature extraction and exponential normalization.

pub mod catalog;
mod derived;
pub mod extract;
pub mod metrics;

use serde::{Deserialize, Serialize};

pub use catalog::{definition, FeatureDefinition, FeatureId, FormulaTag, Tier, CATALOG, N_FEATURES};
pub use extract::{extract_features, extract_features_with, ExtractOptions, FeatureVector};
pub use metrics::{
    force_consistency_metrics, iav, iav_window, normalized_jerk, ForceConsistency, Metric,
};

use crate::error::{Error, Result};
use crate::signal::Label;

/// Feature values of many trials, one row per trial.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub rows: Vec<FeatureVector>,
    pub labels: Vec<Label>,
    pub scenario_ids: Vec<u8>,
    /// Present once [`Normalizer::apply`] produced this matrix.
    pub normalization: Option<Normalizer>,
}

impl FeatureMatrix {
    pub fn new(rows: Vec<FeatureVector>, labels: Vec<Label>, scenario_ids: Vec<u8>) -> Result<Self> {
        if rows.len() != labels.len() || rows.len() != scenario_ids.len() {
            return Err(Error::Shape(format!(
                "{} rows, {} labels, {} scenario ids",
                rows.len(),
                labels.len(),
                scenario_ids.len()
            )));
        }
        if let Some(width) = rows.first().map(|r| r.values.len()) {
            if let Some(bad) = rows.iter().find(|r| r.values.len() != width) {
                return Err(Error::Shape(format!(
                    "row `{}` has {} values, expected {width}",
                    bad.trial_id,
                    bad.values.len()
                )));
            }
        }
        Ok(Self {
            rows,
            labels,
            scenario_ids,
            normalization: None,
        })
    }

    /// Matrix from bare value rows; trial ids are the row indices.
    pub fn from_values(values: Vec<Vec<f64>>, labels: Vec<Label>) -> Result<Self> {
        let n = values.len();
        let rows = values
            .into_iter()
            .enumerate()
            .map(|(i, values)| FeatureVector {
                trial_id: i.to_string(),
                values,
                degenerate: Vec::new(),
            })
            .collect();
        Self::new(rows, labels, vec![1; n])
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.rows.first().map_or(0, |r| r.values.len())
    }

    pub fn is_normalized(&self) -> bool {
        self.normalization.is_some()
    }

    pub fn value(&self, row: usize, feature: FeatureId) -> f64 {
        self.rows[row].values[feature.index()]
    }

    pub fn column(&self, feature: FeatureId) -> Vec<f64> {
        self.rows.iter().map(|r| r.values[feature.index()]).collect()
    }

    /// Rows `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            scenario_ids: indices.iter().map(|&i| self.scenario_ids[i]).collect(),
            normalization: self.normalization.clone(),
        }
    }

    /// Rows of one scenario.
    pub fn scenario(&self, scenario_id: u8) -> FeatureMatrix {
        let idx: Vec<usize> = (0..self.len())
            .filter(|&i| self.scenario_ids[i] == scenario_id)
            .collect();
        self.subset(&idx)
    }

    pub fn scenarios(&self) -> Vec<u8> {
        let mut s = self.scenario_ids.clone();
        s.sort_unstable();
        s.dedup();
        s
    }

    /// Values of the given features for every row.
    pub fn project(&self, features: &[FeatureId]) -> Vec<Vec<f64>> {
        self.rows
            .iter()
            .map(|r| features.iter().map(|f| r.values[f.index()]).collect())
            .collect()
    }

    pub fn count(&self, label: Label) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }
}

/// Fitted constants of the exponential normalization `z = exp(-x / M)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    /// Largest absolute training value of each feature.
    pub constants: Vec<f64>,
    /// Features whose training values were all zero; they map to 1.
    pub zero_features: Vec<FeatureId>,
}

impl Normalizer {
    /// Fits the constants on `training_rows` of `matrix` only.
    pub fn fit(matrix: &FeatureMatrix, training_rows: &[usize]) -> Result<Self> {
        if training_rows.is_empty() {
            return Err(Error::EmptyTrainingSet);
        }
        let width = matrix.n_features();
        let mut constants = vec![0.0f64; width];
        for &i in training_rows {
            for (c, v) in constants.iter_mut().zip(&matrix.rows[i].values) {
                *c = c.max(v.abs());
            }
        }
        let zero_features = constants
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == 0.0)
            .map(|(j, _)| FeatureId::from_index(j))
            .collect();
        Ok(Self {
            constants,
            zero_features,
        })
    }

    pub fn transform(&self, values: &[f64]) -> Vec<f64> {
        values
            .iter()
            .zip(&self.constants)
            .map(|(&x, &m)| if m == 0.0 { 1.0 } else { (-x / m).exp() })
            .collect()
    }

    /// Normalizes every row of `matrix` (training or not) with these constants.
    pub fn apply(&self, matrix: &FeatureMatrix) -> FeatureMatrix {
        let rows = matrix
            .rows
            .iter()
            .map(|r| FeatureVector {
                trial_id: r.trial_id.clone(),
                values: self.transform(&r.values),
                degenerate: r.degenerate.clone(),
            })
            .collect();
        FeatureMatrix {
            rows,
            labels: matrix.labels.clone(),
            scenario_ids: matrix.scenario_ids.clone(),
            normalization: Some(self.clone()),
        }
    }
}

/// Fit on `training_rows`, then normalize every row.
pub fn normalize(matrix: &FeatureMatrix, training_rows: &[usize]) -> Result<FeatureMatrix> {
    Ok(Normalizer::fit(matrix, training_rows)?.apply(matrix))
}
