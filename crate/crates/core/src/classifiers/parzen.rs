use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{check_training, squared_distance};
use crate::error::{Error, Result};
use crate::signal::Label;
use crate::stats;

/// Kernel width selection for [`Parzen`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bandwidth {
    /// Silverman's rule applied to the mean per-feature standard deviation
    /// of the training rows.
    Silverman,
    Fixed(f64),
}

/// Parzen-window classifier with an isotropic Gaussian kernel and equal
/// class priors. Scores are the posterior probability of the skilled class.
#[derive(Debug, Clone)]
pub struct Parzen {
    skilled: Vec<Vec<f64>>,
    novice: Vec<Vec<f64>>,
    h: f64,
    dim: usize,
}

impl Parzen {
    pub fn fit(train: &[Vec<f64>], labels: &[Label], bandwidth: Bandwidth) -> Result<Self> {
        check_training(train, labels)?;
        let (mut skilled, mut novice) = (Vec::new(), Vec::new());
        for (row, label) in train.iter().zip(labels) {
            if label.is_skilled() {
                skilled.push(row.clone());
            } else {
                novice.push(row.clone());
            }
        }
        if skilled.is_empty() || novice.is_empty() {
            return Err(Error::OneClass);
        }
        let dim = train[0].len();
        let h = match bandwidth {
            Bandwidth::Fixed(h) if h > 0.0 && h.is_finite() => h,
            Bandwidth::Fixed(h) => {
                return Err(Error::InvalidParameter(format!("bandwidth must be positive, got {h}")))
            }
            Bandwidth::Silverman => silverman(train),
        };
        Ok(Self { skilled, novice, h, dim })
    }

    pub fn bandwidth(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.skilled.len() + self.novice.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Log of the kernel density estimate of one class at `query`.
    pub fn log_class_density(&self, query: &[f64], label: Label) -> f64 {
        let rows = if label.is_skilled() { &self.skilled } else { &self.novice };
        let two_h2 = 2.0 * self.h * self.h;
        let exps: Vec<f64> = rows
            .iter()
            .map(|r| -squared_distance(r, query) / two_h2)
            .collect();
        let top = exps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = top + exps.iter().map(|e| (e - top).exp()).sum::<f64>().ln();
        let norm = rows.len() as f64 * (2.0 * PI * self.h * self.h).powf(self.dim as f64 / 2.0);
        lse - norm.ln()
    }

    pub fn class_density(&self, query: &[f64], label: Label) -> f64 {
        self.log_class_density(query, label).exp()
    }

    pub fn score(&self, query: &[f64]) -> f64 {
        let ls = self.log_class_density(query, Label::Skilled);
        let ln = self.log_class_density(query, Label::Novice);
        let diff = ls - ln;
        if diff.is_nan() {
            0.5
        } else {
            1.0 / (1.0 + (-diff).exp())
        }
    }
}

fn silverman(train: &[Vec<f64>]) -> f64 {
    let n = train.len() as f64;
    let d = train[0].len();
    let sigma = (0..d)
        .map(|j| {
            let col: Vec<f64> = train.iter().map(|r| r[j]).collect();
            stats::std_dev(&col)
        })
        .sum::<f64>()
        / d.max(1) as f64;
    let h = sigma * (4.0 / ((d as f64 + 2.0) * n)).powf(1.0 / (d as f64 + 4.0));
    if h > 0.0 && h.is_finite() {
        h
    } else {
        1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Label::{Novice, Skilled};

    fn mirrored() -> Parzen {
        let train = vec![vec![-1.0], vec![-2.0], vec![1.0], vec![2.0]];
        Parzen::fit(&train, &[Skilled, Skilled, Novice, Novice], Bandwidth::Fixed(0.7)).unwrap()
    }

    #[test]
    fn midpoint_is_undecided() {
        let m = mirrored();
        assert!((m.score(&[0.0]) - 0.5).abs() < 1e-12);
        assert!(m.score(&[-1.5]) > 0.9);
        assert!(m.score(&[1.5]) < 0.1);
    }

    #[test]
    fn scores_are_mirror_images() {
        let m = mirrored();
        for x in [0.1, 0.4, 1.3, 3.0] {
            assert!((m.score(&[x]) + m.score(&[-x]) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn density_integrates_to_one() {
        let m = mirrored();
        let (a, b, n) = (-12.0, 12.0, 24_000);
        let dx = (b - a) / n as f64;
        let total: f64 = (0..=n)
            .map(|i| {
                let w = if i == 0 || i == n { 0.5 } else { 1.0 };
                w * m.class_density(&[a + i as f64 * dx], Skilled)
            })
            .sum::<f64>()
            * dx;
        assert!((total - 1.0).abs() < 1e-6, "{total}");
    }

    #[test]
    fn far_queries_do_not_underflow_to_nan() {
        let m = mirrored();
        let s = m.score(&[-1e4]);
        assert!(s.is_finite() && s > 0.5);
    }

    #[test]
    fn silverman_bandwidth() {
        let train = vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0]];
        let m = Parzen::fit(&train, &[Skilled, Skilled, Novice, Novice], Bandwidth::Silverman)
            .unwrap();
        let sd = (5.0f64 / 3.0).sqrt();
        let expect = sd * (4.0f64 / 12.0).powf(0.2);
        assert!((m.bandwidth() - expect).abs() < 1e-12);
    }

    #[test]
    fn one_class_rejected() {
        let train = vec![vec![0.0], vec![1.0]];
        assert!(matches!(
            Parzen::fit(&train, &[Skilled, Skilled], Bandwidth::Silverman),
            Err(Error::OneClass)
        ));
    }
}
