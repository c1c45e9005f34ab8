use super::{check_training, nearest};
use crate::error::{Error, Result};
use crate::signal::Label;

/// k-nearest neighbors. The score is the skilled fraction among the `k`
/// Euclidean-nearest training rows.
#[derive(Debug, Clone)]
pub struct Knn {
    train: Vec<Vec<f64>>,
    skilled: Vec<bool>,
    k: usize,
}

impl Knn {
    pub fn fit(train: &[Vec<f64>], labels: &[Label], k: usize) -> Result<Self> {
        check_training(train, labels)?;
        if k == 0 {
            return Err(Error::InvalidParameter("k must be positive".into()));
        }
        if k > train.len() {
            return Err(Error::KTooLarge {
                k,
                available: train.len(),
                what: "training rows",
            });
        }
        Ok(Self {
            train: train.to_vec(),
            skilled: labels.iter().map(|l| l.is_skilled()).collect(),
            k,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.train.len()
    }

    pub fn is_empty(&self) -> bool {
        self.train.is_empty()
    }

    pub fn score(&self, query: &[f64]) -> f64 {
        let hits = nearest(&self.train, query, self.k)
            .iter()
            .filter(|(i, _)| self.skilled[*i])
            .count();
        hits as f64 / self.k as f64
    }
}
