use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::Label;

/// How the equal error rate is read off the ROC.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EerMethod {
    /// Linear interpolation between the two sweep thresholds that bracket
    /// the sensitivity/specificity crossing of the empirical ROC.
    #[default]
    Staircase,
    /// Crossing of the ROC convex hull with the `sens = spec` diagonal.
    ConvexHull,
}

/// One sweep threshold: rows scoring `>= threshold` are called skilled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RocPoint {
    pub threshold: f64,
    pub sensitivity: f64,
    pub specificity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EerResult {
    pub eer: f64,
    /// Sweep threshold with the smallest `|sens - spec|`.
    pub threshold: f64,
    pub sensitivity: f64,
    pub specificity: f64,
    /// `|sens - spec|` at `threshold`.
    pub tolerance: f64,
    /// Thresholds in decreasing order, starting at `+inf`.
    pub roc: Vec<RocPoint>,
}

pub fn compute_eer(scores: &[f64], labels: &[Label]) -> Result<EerResult> {
    compute_eer_with(scores, labels, EerMethod::Staircase)
}

pub fn compute_eer_with(scores: &[f64], labels: &[Label], method: EerMethod) -> Result<EerResult> {
    if scores.len() != labels.len() {
        return Err(Error::Shape(format!(
            "{} scores, {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::InvalidParameter("NaN score".into()));
    }
    let n_s = labels.iter().filter(|l| l.is_skilled()).count();
    let n_n = labels.len() - n_s;
    if n_s == 0 || n_n == 0 {
        return Err(Error::OneClass);
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut roc = vec![RocPoint {
        threshold: f64::INFINITY,
        sensitivity: 0.0,
        specificity: 1.0,
    }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut k = 0;
    while k < order.len() {
        let t = scores[order[k]];
        while k < order.len() && scores[order[k]] == t {
            if labels[order[k]].is_skilled() {
                tp += 1;
            } else {
                fp += 1;
            }
            k += 1;
        }
        roc.push(RocPoint {
            threshold: t,
            sensitivity: tp as f64 / n_s as f64,
            specificity: 1.0 - fp as f64 / n_n as f64,
        });
    }

    let gap = |p: &RocPoint| p.sensitivity - p.specificity;
    let crisp = roc[1..]
        .iter()
        .min_by(|a, b| gap(a).abs().total_cmp(&gap(b).abs()))
        .copied()
        .expect("at least one finite threshold");

    let eer = match method {
        EerMethod::Staircase => staircase(&roc),
        EerMethod::ConvexHull => hull(&roc),
    };
    Ok(EerResult {
        eer,
        threshold: crisp.threshold,
        sensitivity: crisp.sensitivity,
        specificity: crisp.specificity,
        tolerance: gap(&crisp).abs(),
        roc,
    })
}

// sens - spec is non-decreasing along the sweep, from -1 to +1
fn staircase(roc: &[RocPoint]) -> f64 {
    let k = roc
        .iter()
        .position(|p| p.sensitivity >= p.specificity)
        .expect("sweep ends at sens = 1, spec = 0");
    let b = roc[k];
    let db = b.sensitivity - b.specificity;
    if db == 0.0 {
        return 1.0 - b.sensitivity;
    }
    let a = roc[k - 1];
    let da = a.sensitivity - a.specificity;
    let lambda = -da / (db - da);
    1.0 - (a.sensitivity + lambda * (b.sensitivity - a.sensitivity))
}

fn hull(roc: &[RocPoint]) -> f64 {
    // (false positive rate, true positive rate), both non-decreasing
    let pts: Vec<(f64, f64)> = roc
        .iter()
        .map(|p| (1.0 - p.specificity, p.sensitivity))
        .collect();
    let mut h: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
    for p in pts {
        while h.len() >= 2 {
            let (o, a) = (h[h.len() - 2], h[h.len() - 1]);
            let cross = (a.0 - o.0) * (p.1 - o.1) - (a.1 - o.1) * (p.0 - o.0);
            if cross >= 0.0 {
                h.pop();
            } else {
                break;
            }
        }
        h.push(p);
    }
    let g = |p: (f64, f64)| p.0 + p.1 - 1.0;
    let k = h.iter().position(|&p| g(p) >= 0.0).expect("hull ends at (1, 1)");
    if g(h[k]) == 0.0 || k == 0 {
        return h[k].0;
    }
    let (a, b) = (h[k - 1], h[k]);
    let lambda = -g(a) / (g(b) - g(a));
    a.0 + lambda * (b.0 - a.0)
}
