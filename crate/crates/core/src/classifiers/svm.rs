use std::fmt;

use serde::{Deserialize, Serialize};

use super::{check_training, squared_distance};
use crate::error::{Error, Result};
use crate::signal::Label;
use crate::stats;

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kernel {
    Linear,
    Rbf,
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kernel::Linear => "linear",
            Kernel::Rbf => "rbf",
        })
    }
}

/// RBF width `exp(-gamma * |x - y|^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gamma {
    /// `1 / (n_features * var)` with `var` the variance of every training
    /// value pooled; `1 / n_features` when that variance is zero.
    Scale,
    Value(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub kernel: Kernel,
    pub c: f64,
    pub gamma: Gamma,
    /// Stopping tolerance on the maximal KKT violation.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            kernel: Kernel::Rbf,
            c: 1.0,
            gamma: Gamma::Scale,
            tolerance: 1e-3,
            max_iterations: 1_000_000,
        }
    }
}

/// Soft-margin support vector machine trained by sequential minimal
/// optimization with second-order working set selection. The score is the
/// signed decision value, positive on the skilled side.
#[derive(Debug, Clone)]
pub struct Svm {
    kernel: Kernel,
    gamma: f64,
    c: f64,
    support: Vec<Vec<f64>>,
    /// `alpha_i * y_i` of each support vector.
    coef: Vec<f64>,
    bias: f64,
    iterations: usize,
}

impl Svm {
    pub fn fit(train: &[Vec<f64>], labels: &[Label], params: &SvmParams) -> Result<Self> {
        check_training(train, labels)?;
        if !(params.c > 0.0) || !params.c.is_finite() {
            return Err(Error::InvalidParameter(format!("C must be positive, got {}", params.c)));
        }
        if !(params.tolerance > 0.0) {
            return Err(Error::InvalidParameter("tolerance must be positive".into()));
        }
        let y: Vec<f64> = labels
            .iter()
            .map(|l| if l.is_skilled() { 1.0 } else { -1.0 })
            .collect();
        if y.iter().all(|&v| v > 0.0) || y.iter().all(|&v| v < 0.0) {
            return Err(Error::OneClass);
        }
        let gamma = match params.gamma {
            Gamma::Value(g) if g > 0.0 && g.is_finite() => g,
            Gamma::Value(g) => {
                return Err(Error::InvalidParameter(format!("gamma must be positive, got {g}")))
            }
            Gamma::Scale => scale_gamma(train),
        };

        let n = train.len();
        let kernel = |a: &[f64], b: &[f64]| kernel_value(params.kernel, gamma, a, b);
        // Q_ij = y_i y_j K(x_i, x_j)
        let mut q = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = y[i] * y[j] * kernel(&train[i], &train[j]);
                q[i * n + j] = v;
                q[j * n + i] = v;
            }
        }
        let (alpha, rho, iterations) = solve(&q, &y, params.c, params.tolerance, params.max_iterations)?;

        let mut support = Vec::new();
        let mut coef = Vec::new();
        for i in 0..n {
            if alpha[i] > 0.0 {
                support.push(train[i].clone());
                coef.push(alpha[i] * y[i]);
            }
        }
        Ok(Self {
            kernel: params.kernel,
            gamma,
            c: params.c,
            support,
            coef,
            bias: -rho,
            iterations,
        })
    }

    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn support_vector_count(&self) -> usize {
        self.support.len()
    }

    pub fn decision(&self, query: &[f64]) -> f64 {
        self.support
            .iter()
            .zip(&self.coef)
            .map(|(sv, c)| c * kernel_value(self.kernel, self.gamma, sv, query))
            .sum::<f64>()
            + self.bias
    }

    pub fn score(&self, query: &[f64]) -> f64 {
        self.decision(query)
    }
}

fn kernel_value(kernel: Kernel, gamma: f64, a: &[f64], b: &[f64]) -> f64 {
    match kernel {
        Kernel::Linear => a.iter().zip(b).map(|(x, y)| x * y).sum(),
        Kernel::Rbf => (-gamma * squared_distance(a, b)).exp(),
    }
}

fn scale_gamma(train: &[Vec<f64>]) -> f64 {
    let d = train[0].len().max(1) as f64;
    let pooled: Vec<f64> = train.iter().flatten().copied().collect();
    let var = if pooled.len() > 1 {
        let m = stats::mean(&pooled);
        pooled.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / pooled.len() as f64
    } else {
        0.0
    };
    if var > 0.0 {
        1.0 / (d * var)
    } else {
        1.0 / d
    }
}

/// Dual solver for `min 1/2 a'Qa - e'a` subject to `0 <= a <= C`, `y'a = 0`.
/// Returns the multipliers, the offset `rho` and the iteration count.
fn solve(
    q: &[f64],
    y: &[f64],
    c: f64,
    eps: f64,
    max_iterations: usize,
) -> Result<(Vec<f64>, f64, usize)> {
    let n = y.len();
    let qd: Vec<f64> = (0..n).map(|i| q[i * n + i]).collect();
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let is_upper = |a: f64| a >= c;
    let is_lower = |a: f64| a <= 0.0;

    let mut iter = 0;
    loop {
        // first index: maximal violation among I_up
        let mut gmax = f64::NEG_INFINITY;
        let mut gmax_idx = None;
        for t in 0..n {
            if y[t] > 0.0 {
                if !is_upper(alpha[t]) && -grad[t] >= gmax {
                    gmax = -grad[t];
                    gmax_idx = Some(t);
                }
            } else if !is_lower(alpha[t]) && grad[t] >= gmax {
                gmax = grad[t];
                gmax_idx = Some(t);
            }
        }

        // second index: largest objective decrease among I_low
        let mut gmax2 = f64::NEG_INFINITY;
        let mut gmin_idx = None;
        let mut obj_diff_min = f64::INFINITY;
        if let Some(i) = gmax_idx {
            let qi = &q[i * n..(i + 1) * n];
            for j in 0..n {
                if y[j] > 0.0 {
                    if !is_lower(alpha[j]) {
                        let grad_diff = gmax + grad[j];
                        gmax2 = gmax2.max(grad[j]);
                        if grad_diff > 0.0 {
                            let quad = qd[i] + qd[j] - 2.0 * y[i] * qi[j];
                            let obj_diff = -(grad_diff * grad_diff) / if quad > 0.0 { quad } else { TAU };
                            if obj_diff <= obj_diff_min {
                                gmin_idx = Some(j);
                                obj_diff_min = obj_diff;
                            }
                        }
                    }
                } else if !is_upper(alpha[j]) {
                    let grad_diff = gmax - grad[j];
                    gmax2 = gmax2.max(-grad[j]);
                    if grad_diff > 0.0 {
                        let quad = qd[i] + qd[j] + 2.0 * y[i] * qi[j];
                        let obj_diff = -(grad_diff * grad_diff) / if quad > 0.0 { quad } else { TAU };
                        if obj_diff <= obj_diff_min {
                            gmin_idx = Some(j);
                            obj_diff_min = obj_diff;
                        }
                    }
                }
            }
        }

        let (i, j) = match (gmax_idx, gmin_idx) {
            (Some(i), Some(j)) if gmax + gmax2 >= eps => (i, j),
            _ => break,
        };
        if iter >= max_iterations {
            return Err(Error::NoConvergence {
                iterations: iter,
                gap: gmax + gmax2,
                tolerance: eps,
            });
        }
        iter += 1;

        let qi = &q[i * n..(i + 1) * n];
        let qj = &q[j * n..(j + 1) * n];
        let (old_i, old_j) = (alpha[i], alpha[j]);
        let (mut ai, mut aj) = (old_i, old_j);

        if y[i] != y[j] {
            let mut quad = qd[i] + qd[j] + 2.0 * qi[j];
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = ai - aj;
            ai += delta;
            aj += delta;
            if diff > 0.0 {
                if aj < 0.0 {
                    aj = 0.0;
                    ai = diff;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = -diff;
            }
            if diff > 0.0 {
                if ai > c {
                    ai = c;
                    aj = c - diff;
                }
            } else if aj > c {
                aj = c;
                ai = c + diff;
            }
        } else {
            let mut quad = qd[i] + qd[j] - 2.0 * qi[j];
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (grad[i] - grad[j]) / quad;
            let sum = ai + aj;
            ai -= delta;
            aj += delta;
            if sum > c {
                if ai > c {
                    ai = c;
                    aj = sum - c;
                }
            } else if aj < 0.0 {
                aj = 0.0;
                ai = sum;
            }
            if sum > c {
                if aj > c {
                    aj = c;
                    ai = sum - c;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = sum;
            }
        }
        alpha[i] = ai;
        alpha[j] = aj;

        let (dai, daj) = (ai - old_i, aj - old_j);
        for k in 0..n {
            grad[k] += qi[k] * dai + qj[k] * daj;
        }
    }

    // offset from free multipliers, or the midpoint of the feasible interval
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut n_free, mut sum_free) = (0usize, 0.0);
    for t in 0..n {
        let yg = y[t] * grad[t];
        if is_upper(alpha[t]) {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if is_lower(alpha[t]) {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            n_free += 1;
            sum_free += yg;
        }
    }
    let rho = if n_free > 0 {
        sum_free / n_free as f64
    } else {
        (ub + lb) / 2.0
    };
    Ok((alpha, rho, iter))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use Label::{Novice, Skilled};

    fn blobs(seed: u64) -> (Vec<Vec<f64>>, Vec<Label>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..40 {
            let (cx, label) = if i % 2 == 0 { (2.0, Skilled) } else { (-2.0, Novice) };
            x.push(vec![
                cx + rng.random_range(-0.8..0.8),
                rng.random_range(-1.0..1.0),
            ]);
            y.push(label);
        }
        (x, y)
    }

    #[test]
    fn separates_blobs() {
        let (x, y) = blobs(3);
        let m = Svm::fit(&x, &y, &SvmParams::default()).unwrap();
        for (row, label) in x.iter().zip(&y) {
            assert_eq!(m.decision(row) > 0.0, label.is_skilled());
        }
    }

    #[test]
    fn linear_margin_by_hand() {
        // optimum w = 1, b = 0 with both points on the margin
        let x = vec![vec![1.0], vec![-1.0]];
        let params = SvmParams {
            kernel: Kernel::Linear,
            c: 10.0,
            tolerance: 1e-12,
            ..SvmParams::default()
        };
        let m = Svm::fit(&x, &[Skilled, Novice], &params).unwrap();
        assert!((m.decision(&[1.0]) - 1.0).abs() < 1e-9);
        assert!((m.decision(&[-1.0]) + 1.0).abs() < 1e-9);
        assert!(m.bias().abs() < 1e-9);
    }

    #[test]
    fn xor_with_rbf() {
        let x = vec![vec![1.0, 1.0], vec![-1.0, -1.0], vec![1.0, -1.0], vec![-1.0, 1.0]];
        let y = [Skilled, Skilled, Novice, Novice];
        let params = SvmParams {
            c: 100.0,
            gamma: Gamma::Value(1.0),
            ..SvmParams::default()
        };
        let m = Svm::fit(&x, &y, &params).unwrap();
        for (row, label) in x.iter().zip(&y) {
            assert_eq!(m.decision(row) > 0.0, label.is_skilled());
        }
    }

    #[test]
    fn swapping_labels_negates_decision() {
        let (x, y) = blobs(11);
        let swapped: Vec<Label> = y
            .iter()
            .map(|l| if l.is_skilled() { Novice } else { Skilled })
            .collect();
        let params = SvmParams {
            tolerance: 1e-10,
            ..SvmParams::default()
        };
        let a = Svm::fit(&x, &y, &params).unwrap();
        let b = Svm::fit(&x, &swapped, &params).unwrap();
        for q in [[0.3, 0.1], [1.5, -0.2], [-2.2, 0.9]] {
            assert!((a.decision(&q) + b.decision(&q)).abs() < 1e-6);
        }
    }

    #[test]
    fn iteration_cap_reports_no_convergence() {
        let (x, y) = blobs(5);
        let params = SvmParams {
            max_iterations: 1,
            tolerance: 1e-12,
            ..SvmParams::default()
        };
        assert!(matches!(
            Svm::fit(&x, &y, &params),
            Err(Error::NoConvergence { iterations: 1, .. })
        ));
    }

    #[test]
    fn scale_gamma_falls_back_on_constant_data() {
        assert_eq!(scale_gamma(&[vec![2.0, 2.0], vec![2.0, 2.0]]), 0.5);
        // pooled values 0,1,2,3: population variance 1.25
        assert!((scale_gamma(&[vec![0.0, 1.0], vec![2.0, 3.0]]) - 1.0 / 2.5).abs() < 1e-12);
    }

    #[test]
    fn one_class_rejected() {
        let x = vec![vec![0.0], vec![1.0]];
        assert!(matches!(
            Svm::fit(&x, &[Novice, Novice], &SvmParams::default()),
            Err(Error::OneClass)
        ));
    }
}
