use super::{check_training, nearest};
use crate::error::{Error, Result};
use crate::signal::Label;

/// Fuzzy k-nearest neighbors with crisp training memberships.
///
/// The skilled membership of a query is the average of its `k` nearest
/// neighbors' memberships weighted by `d^(-2 / (m - 1))`. A query at zero
/// distance from one or more neighbors takes the mean membership of those
/// neighbors.
#[derive(Debug, Clone)]
pub struct FuzzyKnn {
    train: Vec<Vec<f64>>,
    skilled: Vec<bool>,
    k: usize,
    m: f64,
}

impl FuzzyKnn {
    pub fn fit(train: &[Vec<f64>], labels: &[Label], k: usize, m: f64) -> Result<Self> {
        check_training(train, labels)?;
        if !(m > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "fuzzifier m must exceed 1, got {m}"
            )));
        }
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
            m,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn len(&self) -> usize {
        self.train.len()
    }

    pub fn is_empty(&self) -> bool {
        self.train.is_empty()
    }

    /// `(skilled, novice)` memberships of `query`; they sum to 1.
    pub fn memberships(&self, query: &[f64]) -> (f64, f64) {
        let neighbors = nearest(&self.train, query, self.k);
        let member = |i: usize| if self.skilled[i] { 1.0 } else { 0.0 };

        let exact: Vec<usize> = neighbors
            .iter()
            .filter(|(_, d2)| *d2 == 0.0)
            .map(|(i, _)| *i)
            .collect();
        let u = if !exact.is_empty() {
            exact.iter().map(|&i| member(i)).sum::<f64>() / exact.len() as f64
        } else {
            // d^(-2/(m-1)) with d = sqrt(d2)
            let power = -1.0 / (self.m - 1.0);
            let (mut num, mut den) = (0.0, 0.0);
            for &(i, d2) in &neighbors {
                let w = d2.powf(power);
                num += w * member(i);
                den += w;
            }
            num / den
        };
        (u, 1.0 - u)
    }

    pub fn score(&self, query: &[f64]) -> f64 {
        self.memberships(query).0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Label::{Novice, Skilled};

    #[test]
    fn keller_weights_by_hand() {
        let train = vec![vec![1.0], vec![-2.0]];
        let m = FuzzyKnn::fit(&train, &[Skilled, Novice], 2, 2.0).unwrap();
        // w = (1, 1/4): 1 / 1.25
        assert!((m.score(&[0.0]) - 0.8).abs() <= 1e-12);
    }

    #[test]
    fn all_skilled_neighbors() {
        let train: Vec<Vec<f64>> = (0..7).map(|i| vec![i as f64]).collect();
        let m = FuzzyKnn::fit(&train, &[Skilled; 7], 7, 2.0).unwrap();
        assert_eq!(m.score(&[3.3]), 1.0);
    }

    #[test]
    fn zero_distance_adopts_membership() {
        let train = vec![vec![0.0], vec![1.0], vec![2.0]];
        let m = FuzzyKnn::fit(&train, &[Novice, Skilled, Skilled], 3, 2.0).unwrap();
        assert_eq!(m.memberships(&[0.0]), (0.0, 1.0));
        assert_eq!(m.score(&[1.0]), 1.0);
    }

    #[test]
    fn fuzzifier_must_exceed_one() {
        let train = vec![vec![0.0], vec![1.0]];
        assert!(matches!(
            FuzzyKnn::fit(&train, &[Novice, Skilled], 1, 1.0),
            Err(Error::InvalidParameter(_))
        ));
    }
}
