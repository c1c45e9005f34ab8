//! Fisher criterion from explicit scatter matrices.

use skillgrade::selection::FISHER_RIDGE;
use skillgrade::{FeatureId, FeatureMatrix, Label};

/// Inverse by Gauss-Jordan elimination with partial pivoting.
fn invert(mut a: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut inv: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs())).unwrap();
        a.swap(col, piv);
        inv.swap(col, piv);
        let d = a[col][col];
        for j in 0..n {
            a[col][j] /= d;
            inv[col][j] /= d;
        }
        for r in 0..n {
            if r != col {
                let f = a[r][col];
                for j in 0..n {
                    a[r][j] -= f * a[col][j];
                    inv[r][j] -= f * inv[col][j];
                }
            }
        }
    }
    inv
}

/// trace(S_W^-1 S_B) from explicit scatter matrices.
pub fn fisher_oracle(m: &FeatureMatrix, subset: &[FeatureId]) -> f64 {
    let k = subset.len();
    let rows: Vec<Vec<f64>> = m.project(subset);
    let mean_of = |pick: &dyn Fn(usize) -> bool| -> (Vec<f64>, usize) {
        let idx: Vec<usize> = (0..rows.len()).filter(|&i| pick(i)).collect();
        let mu = (0..k).map(|a| idx.iter().map(|&i| rows[i][a]).sum::<f64>() / idx.len() as f64).collect();
        (mu, idx.len())
    };
    let (mu_s, n_s) = mean_of(&|i| m.labels[i] == Label::Skilled);
    let (mu_n, n_n) = mean_of(&|i| m.labels[i] == Label::Novice);
    let (mu, _) = mean_of(&|_| true);
    let mut sw = vec![vec![0.0; k]; k];
    let mut sb = vec![vec![0.0; k]; k];
    for (i, r) in rows.iter().enumerate() {
        let c = if m.labels[i] == Label::Skilled { &mu_s } else { &mu_n };
        for a in 0..k {
            for b in 0..k {
                sw[a][b] += (r[a] - c[a]) * (r[b] - c[b]);
            }
        }
    }
    for (c, n) in [(&mu_s, n_s), (&mu_n, n_n)] {
        for a in 0..k {
            for b in 0..k {
                sb[a][b] += n as f64 * (c[a] - mu[a]) * (c[b] - mu[b]);
            }
        }
    }
    for (a, row) in sw.iter_mut().enumerate() {
        row[a] += FISHER_RIDGE;
    }
    let inv = invert(sw);
    (0..k).map(|a| (0..k).map(|b| inv[a][b] * sb[b][a]).sum::<f64>()).sum()
}

