//! Binary skilled-vs-novice classifiers. Every fitted model exposes a
//! continuous score that grows with skilled-ness, for threshold sweeps.

mod fknn;
mod knn;
mod parzen;
mod svm;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use fknn::FuzzyKnn;
pub use knn::Knn;
pub use parzen::{Bandwidth, Parzen};
pub use svm::{Gamma, Kernel, Svm, SvmParams};

use crate::error::{Error, Result};
use crate::features::FeatureId;
use crate::signal::Label;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    Knn,
    Parzen,
    Svm,
    Fknn,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 4] = [
        ClassifierKind::Knn,
        ClassifierKind::Parzen,
        ClassifierKind::Svm,
        ClassifierKind::Fknn,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ClassifierKind::Knn => "knn",
            ClassifierKind::Parzen => "parzen",
            ClassifierKind::Svm => "svm",
            ClassifierKind::Fknn => "fknn",
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown classifier `{s}`")))
    }
}

/// Hyperparameters of all four classifiers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    pub knn_k: usize,
    pub fknn_k: usize,
    /// Fuzzifier of the fuzzy k-NN weights, > 1.
    pub fknn_m: f64,
    pub parzen_bandwidth: Bandwidth,
    pub svm: SvmParams,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self {
            knn_k: 7,
            fknn_k: 7,
            fknn_m: 2.0,
            parzen_bandwidth: Bandwidth::Silverman,
            svm: SvmParams::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub enum Model {
    Knn(Knn),
    Parzen(Parzen),
    Svm(Svm),
    Fknn(FuzzyKnn),
}

#[derive(Debug, Clone)]
pub struct TrainedClassifier {
    pub model: Model,
    /// Catalog features the model was trained on, in column order.
    pub feature_ids: Vec<FeatureId>,
}

/// Structured description of a fitted model for reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelSummary {
    pub kind: ClassifierKind,
    pub hyperparameters: Vec<(String, String)>,
    /// Stored training rows (neighbor and kernel models) or support vectors.
    pub stored_rows: usize,
    pub feature_ids: Vec<FeatureId>,
}

impl TrainedClassifier {
    pub fn kind(&self) -> ClassifierKind {
        match self.model {
            Model::Knn(_) => ClassifierKind::Knn,
            Model::Parzen(_) => ClassifierKind::Parzen,
            Model::Svm(_) => ClassifierKind::Svm,
            Model::Fknn(_) => ClassifierKind::Fknn,
        }
    }

    pub fn score(&self, query: &[f64]) -> f64 {
        match &self.model {
            Model::Knn(m) => m.score(query),
            Model::Parzen(m) => m.score(query),
            Model::Svm(m) => m.score(query),
            Model::Fknn(m) => m.score(query),
        }
    }

    pub fn summary(&self) -> ModelSummary {
        let (hyperparameters, stored_rows) = match &self.model {
            Model::Knn(m) => (vec![("k".into(), m.k().to_string())], m.len()),
            Model::Fknn(m) => (
                vec![("k".into(), m.k().to_string()), ("m".into(), m.m().to_string())],
                m.len(),
            ),
            Model::Parzen(m) => (vec![("bandwidth".into(), m.bandwidth().to_string())], m.len()),
            Model::Svm(m) => (
                vec![
                    ("kernel".into(), m.kernel().to_string()),
                    ("C".into(), m.c().to_string()),
                    ("bias".into(), m.bias().to_string()),
                ],
                m.support_vector_count(),
            ),
        };
        ModelSummary {
            kind: self.kind(),
            hyperparameters,
            stored_rows,
            feature_ids: self.feature_ids.clone(),
        }
    }
}

/// Fits one classifier on training rows already projected to `feature_ids`.
pub fn fit(
    kind: ClassifierKind,
    train: &[Vec<f64>],
    labels: &[Label],
    feature_ids: &[FeatureId],
    config: &ClassifierConfig,
) -> Result<TrainedClassifier> {
    let model = match kind {
        ClassifierKind::Knn => Model::Knn(Knn::fit(train, labels, config.knn_k)?),
        ClassifierKind::Parzen => {
            Model::Parzen(Parzen::fit(train, labels, config.parzen_bandwidth)?)
        }
        ClassifierKind::Svm => Model::Svm(Svm::fit(train, labels, &config.svm)?),
        ClassifierKind::Fknn => {
            Model::Fknn(FuzzyKnn::fit(train, labels, config.fknn_k, config.fknn_m)?)
        }
    };
    Ok(TrainedClassifier {
        model,
        feature_ids: feature_ids.to_vec(),
    })
}

pub(crate) fn check_training(train: &[Vec<f64>], labels: &[Label]) -> Result<()> {
    if train.len() != labels.len() {
        return Err(Error::Shape(format!(
            "{} training rows, {} labels",
            train.len(),
            labels.len()
        )));
    }
    if train.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let width = train[0].len();
    if train.iter().any(|r| r.len() != width) {
        return Err(Error::Shape("training rows differ in length".into()));
    }
    Ok(())
}

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Indices of the `k` training rows nearest to `query` with their squared
/// distances, ascending; equal distances keep training order.
pub(crate) fn nearest(train: &[Vec<f64>], query: &[f64], k: usize) -> Vec<(usize, f64)> {
    let mut d: Vec<(usize, f64)> = train
        .iter()
        .enumerate()
        .map(|(i, row)| (i, squared_distance(row, query)))
        .collect();
    d.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    d.truncate(k);
    d
}
