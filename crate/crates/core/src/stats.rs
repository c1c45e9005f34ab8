//! Small descriptive statistics over sample slices.

pub fn mean(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.iter().sum::<f64>() / x.len() as f64
}

/// Sample variance (n - 1 denominator); 0 for fewer than two values.
pub fn variance(x: &[f64]) -> f64 {
    if x.len() < 2 {
        return 0.0;
    }
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() - 1) as f64
}

pub fn std_dev(x: &[f64]) -> f64 {
    variance(x).sqrt()
}

/// Quantile with linear interpolation between order statistics
/// (position `p * (n - 1)` in the sorted sample).
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 0 {
        return 0.0;
    }
    let pos = p * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

pub fn iqr(x: &[f64]) -> f64 {
    let mut s = x.to_vec();
    s.sort_by(f64::total_cmp);
    quantile_sorted(&s, 0.75) - quantile_sorted(&s, 0.25)
}

pub fn max(x: &[f64]) -> f64 {
    x.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

pub fn min(x: &[f64]) -> f64 {
    x.iter().copied().fold(f64::INFINITY, f64::min)
}

pub fn range(x: &[f64]) -> f64 {
    max(x) - min(x)
}

/// Index of the first occurrence of the maximum.
pub fn argmax(x: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in x.iter().enumerate() {
        if v > x[best] {
            best = i;
        }
    }
    best
}

/// Index of the first occurrence of the minimum.
pub fn argmin(x: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in x.iter().enumerate() {
        if v < x[best] {
            best = i;
        }
    }
    best
}

/// Strict local maxima and minima counts `(maxima, minima)`. A plateau counts
/// once when the values on both sides of it are lower (maximum) or higher
/// (minimum). End points are never extrema.
pub fn local_extrema(x: &[f64]) -> (usize, usize) {
    let mut maxima = 0;
    let mut minima = 0;
    // previous distinct value and the value of the current run
    let mut prev: Option<f64> = None;
    let mut cur = match x.first() {
        Some(&v) => v,
        None => return (0, 0),
    };
    for &v in &x[1..] {
        if v == cur {
            continue;
        }
        if let Some(p) = prev {
            if cur > p && cur > v {
                maxima += 1;
            } else if cur < p && cur < v {
                minima += 1;
            }
        }
        prev = Some(cur);
        cur = v;
    }
    (maxima, minima)
}

/// Number of sign changes. A zero carries the sign of the last nonzero
/// value before it; leading zeros carry no sign.
pub fn zero_crossings(x: &[f64]) -> usize {
    let mut sign = 0i8;
    let mut count = 0;
    for &v in x {
        let s = if v > 0.0 {
            1
        } else if v < 0.0 {
            -1
        } else {
            0
        };
        if s == 0 {
            continue;
        }
        if sign != 0 && s != sign {
            count += 1;
        }
        sign = s;
    }
    count
}

/// Sum of signed successive differences.
pub fn sum_of_differences(x: &[f64]) -> f64 {
    x.windows(2).map(|w| w[1] - w[0]).sum()
}

/// Trapezoidal integral of `y` sampled every `h` seconds, restarted at each
/// segment boundary so the gaps between segments contribute nothing.
pub fn trapezoid_segments(y: &[f64], segments: &[usize], h: f64) -> f64 {
    let mut total = 0.0;
    let mut start = 0;
    for &len in segments {
        total += trapezoid(&y[start..start + len], h);
        start += len;
    }
    total
}

pub fn trapezoid(y: &[f64], h: f64) -> f64 {
    if y.len() < 2 {
        return 0.0;
    }
    let inner: f64 = y.iter().sum::<f64>() - 0.5 * (y[0] + y[y.len() - 1]);
    inner * h
}
