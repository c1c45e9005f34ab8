//! Two-stage feature selection: a per-feature two-sample t-test filter, then
//! greedy forward selection on a classifier-independent separability score.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

use crate::error::{Error, Result};
use crate::features::{FeatureId, FeatureMatrix};
use crate::signal::Label;

pub const DEFAULT_ALPHA: f64 = 0.05;

/// Subset sizes reported by [`premier_subsets`].
pub const PREMIER_SIZES: [usize; 6] = [5, 10, 15, 20, 25, 30];

/// Ridge added to the within-class scatter before solving.
pub const FISHER_RIDGE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TTestVariant {
    /// Unequal variances, Welch-Satterthwaite degrees of freedom.
    #[default]
    Welch,
    /// Pooled variance.
    Student,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TTest {
    pub t: f64,
    pub df: f64,
    /// Two-sided p-value.
    pub p: f64,
    /// Zero standard error; `p` is 1 by convention.
    pub degenerate: bool,
}

fn mean_var(x: &[f64]) -> (f64, f64) {
    (crate::stats::mean(x), crate::stats::variance(x))
}

/// Two-sided two-sample t-test. Both samples need at least two values.
pub fn two_sample_ttest(a: &[f64], b: &[f64], variant: TTestVariant) -> TTest {
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let (m1, v1) = mean_var(a);
    let (m2, v2) = mean_var(b);
    let (se, df) = match variant {
        TTestVariant::Welch => {
            let (q1, q2) = (v1 / n1, v2 / n2);
            let se2 = q1 + q2;
            let df = se2 * se2 / (q1 * q1 / (n1 - 1.0) + q2 * q2 / (n2 - 1.0));
            (se2.sqrt(), df)
        }
        TTestVariant::Student => {
            let df = n1 + n2 - 2.0;
            let pooled = ((n1 - 1.0) * v1 + (n2 - 1.0) * v2) / df;
            ((pooled * (1.0 / n1 + 1.0 / n2)).sqrt(), df)
        }
    };
    if !(se > 0.0) {
        return TTest {
            t: 0.0,
            df,
            p: 1.0,
            degenerate: true,
        };
    }
    let t = (m1 - m2) / se;
    // P(|T| > t) = I_{df / (df + t^2)}(df / 2, 1 / 2)
    let p = beta_reg(df / 2.0, 0.5, df / (df + t * t)).clamp(0.0, 1.0);
    TTest {
        t,
        df,
        p,
        degenerate: false,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionResult {
    pub alpha: f64,
    /// One p-value per feature, indexed by catalog order.
    pub p_values: Vec<f64>,
    /// Features with zero standard error (p forced to 1).
    pub degenerate: Vec<FeatureId>,
    /// Features with p < alpha, ascending id.
    pub filtered_ids: Vec<FeatureId>,
    pub forward_ranking: Vec<FeatureId>,
    /// Separability after each greedy addition.
    pub criterion_trace: Vec<f64>,
}

fn split_by_label(values: &[f64], labels: &[Label]) -> (Vec<f64>, Vec<f64>) {
    let mut skilled = Vec::new();
    let mut novice = Vec::new();
    for (&v, &l) in values.iter().zip(labels) {
        match l {
            Label::Skilled => skilled.push(v),
            Label::Novice => novice.push(v),
        }
    }
    (skilled, novice)
}

fn check_classes(matrix: &FeatureMatrix) -> Result<()> {
    for (label, name) in [(Label::Skilled, "skilled"), (Label::Novice, "novice")] {
        let got = matrix.count(label);
        if got < 2 {
            return Err(Error::TooFewRows {
                class: name,
                need: 2,
                got,
            });
        }
    }
    Ok(())
}

/// Filter stage: a t-test per feature, keeping those with `p < alpha`.
pub fn ttest_filter(
    matrix: &FeatureMatrix,
    alpha: f64,
    variant: TTestVariant,
) -> Result<SelectionResult> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidParameter(format!("alpha {alpha} outside (0, 1]")));
    }
    check_classes(matrix)?;
    let mut p_values = Vec::with_capacity(matrix.n_features());
    let mut degenerate = Vec::new();
    let mut filtered_ids = Vec::new();
    for j in 0..matrix.n_features() {
        let id = FeatureId::from_index(j);
        let (s, n) = split_by_label(&matrix.column(id), &matrix.labels);
        let test = two_sample_ttest(&s, &n, variant);
        if test.degenerate {
            degenerate.push(id);
        } else if test.p < alpha {
            filtered_ids.push(id);
        }
        p_values.push(test.p);
    }
    Ok(SelectionResult {
        alpha,
        p_values,
        degenerate,
        filtered_ids,
        forward_ranking: Vec::new(),
        criterion_trace: Vec::new(),
    })
}

/// Class statistics needed to score any feature subset with the Fisher
/// criterion `trace(S_W^-1 S_B)`.
///
/// With two classes `S_B = (n_s n_n / n) d d^T`, so the trace reduces to
/// `(n_s n_n / n) d^T (S_W + ridge I)^-1 d` on the subset's rows and columns.
pub struct FisherScatter {
    mean_diff: Vec<f64>,
    within: DMatrix<f64>,
    weight: f64,
}

impl FisherScatter {
    pub fn new(matrix: &FeatureMatrix) -> Result<Self> {
        check_classes(matrix)?;
        let p = matrix.n_features();
        let mut sums = [vec![0.0; p], vec![0.0; p]];
        let mut counts = [0usize; 2];
        let class = |l: Label| usize::from(l == Label::Novice);
        for (row, &l) in matrix.rows.iter().zip(&matrix.labels) {
            counts[class(l)] += 1;
            for (s, v) in sums[class(l)].iter_mut().zip(&row.values) {
                *s += v;
            }
        }
        let means: Vec<Vec<f64>> = (0..2)
            .map(|c| sums[c].iter().map(|s| s / counts[c] as f64).collect())
            .collect();
        let mut within = DMatrix::zeros(p, p);
        let mut centered = vec![0.0; p];
        for (row, &l) in matrix.rows.iter().zip(&matrix.labels) {
            let mu = &means[class(l)];
            for j in 0..p {
                centered[j] = row.values[j] - mu[j];
            }
            for a in 0..p {
                for b in a..p {
                    within[(a, b)] += centered[a] * centered[b];
                }
            }
        }
        for a in 0..p {
            for b in 0..a {
                within[(a, b)] = within[(b, a)];
            }
        }
        let n = (counts[0] + counts[1]) as f64;
        Ok(Self {
            mean_diff: (0..p).map(|j| means[0][j] - means[1][j]).collect(),
            within,
            weight: counts[0] as f64 * counts[1] as f64 / n,
        })
    }

    pub fn criterion(&self, subset: &[FeatureId]) -> f64 {
        let k = subset.len();
        if k == 0 {
            return 0.0;
        }
        let sw = DMatrix::from_fn(k, k, |a, b| {
            self.within[(subset[a].index(), subset[b].index())]
                + if a == b { FISHER_RIDGE } else { 0.0 }
        });
        let d = DVector::from_fn(k, |a, _| self.mean_diff[subset[a].index()]);
        let solved = match sw.clone().cholesky() {
            Some(ch) => Some(ch.solve(&d)),
            None => sw.lu().solve(&d),
        };
        match solved {
            Some(x) => self.weight * d.dot(&x),
            None => f64::NEG_INFINITY,
        }
    }
}

/// Fisher criterion of `subset` on `matrix`.
pub fn fisher_criterion(matrix: &FeatureMatrix, subset: &[FeatureId]) -> Result<f64> {
    Ok(FisherScatter::new(matrix)?.criterion(subset))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForwardRanking {
    pub ranking: Vec<FeatureId>,
    pub criterion_trace: Vec<f64>,
}

/// Greedy forward selection of `k` features from `candidates`: each step adds
/// the candidate that maximizes the criterion of the grown subset, lower id
/// first on ties.
pub fn forward_select(
    matrix: &FeatureMatrix,
    k: usize,
    candidates: &[FeatureId],
) -> Result<ForwardRanking> {
    let mut pool = candidates.to_vec();
    pool.sort_unstable();
    pool.dedup();
    if k > pool.len() {
        return Err(Error::KTooLarge {
            k,
            available: pool.len(),
            what: "candidate features",
        });
    }
    let scatter = FisherScatter::new(matrix)?;
    let mut ranking = Vec::with_capacity(k);
    let mut trace = Vec::with_capacity(k);
    let mut trial = Vec::with_capacity(k);
    for _ in 0..k {
        let mut best: Option<(usize, f64)> = None;
        for (pos, &cand) in pool.iter().enumerate() {
            trial.clear();
            trial.extend_from_slice(&ranking);
            trial.push(cand);
            let score = scatter.criterion(&trial);
            let score = if score.is_nan() { f64::NEG_INFINITY } else { score };
            if best.is_none_or(|(_, b)| score > b) {
                best = Some((pos, score));
            }
        }
        let (pos, score) = best.expect("pool is non-empty while k <= pool size");
        ranking.push(pool.remove(pos));
        trace.push(score);
    }
    Ok(ForwardRanking {
        ranking,
        criterion_trace: trace,
    })
}

/// Filter then rank: the full two-stage selection on one matrix.
pub fn select(
    matrix: &FeatureMatrix,
    alpha: f64,
    k_max: usize,
    variant: TTestVariant,
) -> Result<SelectionResult> {
    let mut result = ttest_filter(matrix, alpha, variant)?;
    let k = k_max.min(result.filtered_ids.len());
    let ranked = forward_select(matrix, k, &result.filtered_ids)?;
    result.forward_ranking = ranked.ranking;
    result.criterion_trace = ranked.criterion_trace;
    Ok(result)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PremierSubsets {
    pub subsets: BTreeMap<usize, Vec<FeatureId>>,
    /// Set when fewer features passed the filter than the largest size.
    pub warning: Option<String>,
}

/// Nested best-5 .. best-30 subsets: prefixes of one forward ranking over
/// the filtered features.
pub fn premier_subsets(
    matrix: &FeatureMatrix,
    alpha: f64,
    variant: TTestVariant,
) -> Result<PremierSubsets> {
    let largest = PREMIER_SIZES[PREMIER_SIZES.len() - 1];
    let result = select(matrix, alpha, largest, variant)?;
    let available = result.forward_ranking.len();
    let subsets = PREMIER_SIZES
        .iter()
        .filter(|&&s| s <= available)
        .map(|&s| (s, result.forward_ranking[..s].to_vec()))
        .collect();
    let warning = (available < largest).then(|| {
        format!("only {available} features passed the t-test filter; larger subsets omitted")
    });
    if let Some(w) = &warning {
        log::warn!("{w}");
    }
    Ok(PremierSubsets { subsets, warning })
}

/// Candidate pool of at least `size` features: those passing the filter,
/// topped up with the remaining features in increasing p-value order
/// (ties by id).
pub fn candidates_with_top_up(filter: &SelectionResult, size: usize) -> Vec<FeatureId> {
    let mut pool = filter.filtered_ids.clone();
    if pool.len() >= size {
        return pool;
    }
    let mut rest: Vec<FeatureId> = (0..filter.p_values.len())
        .map(FeatureId::from_index)
        .filter(|id| !pool.contains(id))
        .collect();
    rest.sort_by(|a, b| {
        filter.p_values[a.index()]
            .total_cmp(&filter.p_values[b.index()])
            .then(a.cmp(b))
    });
    pool.extend(rest.into_iter().take(size - pool.len()));
    pool
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fid(i: u8) -> FeatureId {
        FeatureId::new(i).unwrap()
    }

    #[test]
    fn welch_matches_reference_value() {
        // scipy.stats.ttest_ind(a, b, equal_var=False)
        let a = [27.5, 21.0, 19.0, 23.6, 17.0, 17.9, 16.9, 20.1, 21.9, 22.6, 23.1, 19.6, 19.0, 21.7, 21.4];
        let b = [27.1, 22.0, 20.8, 23.4, 23.4, 23.5, 25.8, 22.0, 24.8, 20.2, 21.9, 22.1, 22.9, 20.5, 24.4];
        let w = two_sample_ttest(&a, &b, TTestVariant::Welch);
        assert!((w.t - -2.455356398286006).abs() < 1e-9, "{}", w.t);
        assert!((w.p - 0.021378001462866985).abs() < 1e-9, "{}", w.p);
        let s = two_sample_ttest(&a, &b, TTestVariant::Student);
        assert_eq!(s.df, 28.0);
        assert!((w.df - 24.988529290231416).abs() < 1e-9);
        assert!((s.p - 0.020544522734125933).abs() < 1e-9, "{}", s.p);
    }

    #[test]
    fn constant_feature_gets_p_one() {
        let t = two_sample_ttest(&[2.0, 2.0, 2.0], &[2.0, 2.0], TTestVariant::Welch);
        assert!(t.degenerate);
        assert_eq!(t.p, 1.0);
    }

    #[test]
    fn filter_needs_two_per_class() {
        let m = FeatureMatrix::from_values(
            vec![vec![1.0], vec![2.0], vec![3.0]],
            vec![Label::Skilled, Label::Novice, Label::Novice],
        )
        .unwrap();
        assert!(matches!(
            ttest_filter(&m, 0.05, TTestVariant::Welch),
            Err(Error::TooFewRows { class: "skilled", .. })
        ));
    }

    #[test]
    fn forward_select_rejects_large_k() {
        let m = FeatureMatrix::from_values(
            vec![vec![1.0, 0.0], vec![2.0, 1.0], vec![3.0, 0.0], vec![5.0, 1.0]],
            vec![Label::Skilled, Label::Skilled, Label::Novice, Label::Novice],
        )
        .unwrap();
        assert!(matches!(
            forward_select(&m, 3, &[fid(1), fid(2)]),
            Err(Error::KTooLarge { k: 3, available: 2, .. })
        ));
        let r = forward_select(&m, 2, &[fid(2), fid(1)]).unwrap();
        assert_eq!(r.ranking.len(), 2);
    }

    #[test]
    fn top_up_follows_p_values() {
        let filter = SelectionResult {
            alpha: 0.05,
            p_values: vec![0.5, 0.01, 0.2, 0.2, 0.9],
            degenerate: vec![],
            filtered_ids: vec![fid(2)],
            forward_ranking: vec![],
            criterion_trace: vec![],
        };
        assert_eq!(candidates_with_top_up(&filter, 1), vec![fid(2)]);
        assert_eq!(
            candidates_with_top_up(&filter, 4),
            vec![fid(2), fid(3), fid(4), fid(1)]
        );
    }
}
