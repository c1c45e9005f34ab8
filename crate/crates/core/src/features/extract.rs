use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::catalog::{FeatureId, N_FEATURES};
use super::derived::Derived;
use super::metrics::{force_consistency_of, Metric};
use crate::error::{Error, Result};
use crate::signal::{validate_trial, Region, Trial};
use crate::stats::{
    argmax, argmin, iqr, local_extrema, max, mean, min, range, std_dev, sum_of_differences,
    trapezoid, zero_crossings,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtractOptions {
    /// Boundary between the low and high band of the force spectrum (row 17).
    pub spectral_cutoff_hz: f64,
    /// Force level counted by row 2, in N.
    pub contact_threshold_n: f64,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        Self {
            spectral_cutoff_hz: 2.0,
            contact_threshold_n: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub trial_id: String,
    /// Values ordered by catalog id.
    pub values: Vec<f64>,
    /// Features that fell back to a degenerate-input rule.
    pub degenerate: Vec<FeatureId>,
}

pub fn extract_features(trial: &Trial) -> Result<FeatureVector> {
    extract_features_with(trial, &ExtractOptions::default())
}

pub fn extract_features_with(trial: &Trial, options: &ExtractOptions) -> Result<FeatureVector> {
    validate_trial(trial).into_result(&trial.id)?;
    let d = Derived::new(trial);
    let mut values = Vec::with_capacity(N_FEATURES);
    let mut degenerate = Vec::new();
    for id in FeatureId::all() {
        let m = compute(&d, id, options);
        if !m.value.is_finite() {
            return Err(Error::Feature {
                id,
                reason: format!("non-finite value {} on trial `{}`", m.value, trial.id),
            });
        }
        if m.degenerate {
            degenerate.push(id);
        }
        values.push(m.value);
    }
    Ok(FeatureVector {
        trial_id: trial.id.clone(),
        values,
        degenerate,
    })
}

fn ratio(num: f64, den: f64) -> Metric {
    if den == 0.0 {
        Metric::degenerate()
    } else {
        Metric::ok(num / den)
    }
}

fn extrema(x: &[f64]) -> usize {
    let (hi, lo) = local_extrema(x);
    hi + lo
}

fn maxima(x: &[f64]) -> usize {
    local_extrema(x).0
}

fn minima(x: &[f64]) -> usize {
    local_extrema(x).1
}

fn count(n: usize) -> Metric {
    Metric::ok(n as f64)
}

fn region_sum(d: &Derived, region: Region) -> f64 {
    d.force()
        .iter()
        .zip(&d.trial.region)
        .filter(|(_, &r)| r == region)
        .map(|(f, _)| f)
        .sum()
}

fn pedal_rate(d: &Derived) -> f64 {
    let mut prev = false;
    let mut edges = 0usize;
    for &p in &d.trial.pedal {
        if p && !prev {
            edges += 1;
        }
        prev = p;
    }
    edges as f64 / d.duration
}

/// Integral of the force over the half-maximum interval around its peak.
fn peak_integral(d: &Derived) -> Metric {
    let f = d.force();
    let top = argmax(f);
    let half = f[top] / 2.0;
    if f[top] <= 0.0 {
        return Metric::degenerate();
    }
    let mut lo = top;
    while lo > 0 && f[lo - 1] > half {
        lo -= 1;
    }
    let mut hi = top;
    while hi + 1 < f.len() && f[hi + 1] > half {
        hi += 1;
    }
    Metric::ok(trapezoid(&f[lo..=hi], d.h))
}

/// Power of the mean-removed force below the cutoff divided by the power at
/// or above it, from the one-sided periodogram (bins 1..=n/2).
fn spectral_ratio(d: &Derived, cutoff_hz: f64) -> Metric {
    let f = d.force();
    let n = f.len();
    let m = mean(f);
    let mut buf: Vec<Complex<f64>> = f.iter().map(|&v| Complex::new(v - m, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let rate = d.trial.sample_rate_hz;
    let (mut low, mut high) = (0.0, 0.0);
    for (k, c) in buf.iter().enumerate().take(n / 2 + 1).skip(1) {
        let freq = k as f64 * rate / n as f64;
        if freq < cutoff_hz {
            low += c.norm_sqr();
        } else {
            high += c.norm_sqr();
        }
    }
    ratio(low, high)
}

fn compute(d: &Derived, id: FeatureId, options: &ExtractOptions) -> Metric {
    let t = d.duration;
    let f = d.force();
    let (x, y, z) = (d.pos(0), d.pos(1), d.pos(2));
    let (roll, pitch, yaw) = (d.angle(0), d.angle(1), d.angle(2));
    let [vx, vy, vz] = &d.vel;
    let [ax, ay, az] = &d.acc;
    let [v_roll, v_pitch, v_yaw] = &d.ang_vel;
    let j_pitch = &d.ang_jerk[1];
    let (vf, af) = (&d.force_vel, &d.force_acc);
    let n = f.len() as f64;

    match id.get() {
        1 => Metric::ok(d.jerk[0].iter().filter(|&&v| v <= 0.0).count() as f64 / n),
        2 => count(f.iter().filter(|&&v| v > options.contact_threshold_n).count()),
        3 => ratio(std_dev(f), std_dev(vx)),
        4 => Metric::ok(range(vx) * range(vy) * range(vz)),
        5 => Metric::ok(iqr(f)),
        6 => force_metric(d, |m| m.d2f),
        7 => Metric::ok(sum_of_differences(f) / t),
        8 => ratio(sum_of_differences(&d.speed), t * std_dev(f)),
        9 => Metric::ok(d.time_fraction(argmax(ax))),
        10 => count(zero_crossings(vx)),
        11 => Metric::ok(d.time_fraction(argmin(ay))),
        12 => Metric::ok(d.time_fraction(argmax(az))),
        13 | 29 => count(extrema(pitch)),
        14 => Metric::ok(d.time_fraction(argmin(af))),
        15 => Metric::ok(mean(&d.speed)),
        16 => ratio(std_dev(f), std_dev(vz)),
        17 => spectral_ratio(d, options.spectral_cutoff_hz),
        18 => Metric::ok(d.time_fraction(argmax(z))),
        19 => count(extrema(vf)),
        20 => count(minima(ax)),
        21 => count(minima(ay)),
        22 => count(maxima(x) + maxima(y) + maxima(z)),
        23 => count(extrema(x)),
        24 => count(extrema(z)),
        25 => Metric::ok(sum_of_differences(pitch) / t),
        26 => Metric::ok(sum_of_differences(v_roll) / t),
        27 => ratio(mean(roll) * t, range(v_roll)),
        28 => count(minima(yaw) + minima(pitch) + minima(roll)),
        30 => count(extrema(v_yaw)),
        31 => count(extrema(v_roll)),
        32 => Metric::ok(d.time_fraction(argmax(pitch)) - d.time_fraction(argmin(pitch))),
        33 => Metric::ok(pedal_rate(d)),
        34 => Metric::ok(region_sum(d, Region::R3)),
        35 => count(extrema(f)),
        36 => Metric::ok(region_sum(d, Region::R4)),
        37 => Metric::ok(max(f) - min(f)),
        38 => Metric::ok(std_dev(f)),
        39 => Metric::ok(iqr(x) * iqr(y) * iqr(z)),
        40 => force_metric(d, |m| m.df),
        41 => Metric::ok(d.acc_mag.iter().sum()),
        42 => Metric::ok(sum_of_differences(&d.acc_mag) / t),
        43 => peak_integral(d),
        44 => Metric::ok(d.time_fraction(argmin(ax))),
        45 => Metric::ok(d.time_fraction(argmax(ay))),
        46 => count(zero_crossings(vy)),
        47 => Metric::ok(d.time_fraction(argmin(az))),
        48 => Metric::ok(d.time_fraction(argmax(af))),
        49 => Metric::ok(max(&d.speed)),
        50 => force_metric(d, |m| m.d3f),
        51 => ratio(std_dev(f), std_dev(vy)),
        52 => count(minima(x)),
        53 => count(minima(vx)),
        54 => Metric::ok((argmax(f) + 1) as f64 / (argmin(f) + 1) as f64),
        55 => count(extrema(af)),
        56 => ratio(
            vf.iter().filter(|&&v| v >= 0.0).count() as f64,
            vf.iter().filter(|&&v| v <= 0.0).count() as f64,
        ),
        57 => count(minima(x) + minima(y) + minima(z)),
        58 => count(extrema(y)),
        59 => Metric::ok(sum_of_differences(yaw)),
        60 => Metric::ok(sum_of_differences(v_pitch) / t),
        61 => ratio(mean(pitch) * t, range(v_pitch)),
        62 => count(maxima(yaw) + maxima(pitch) + maxima(roll)),
        63 => count(extrema(yaw)),
        64 => count(extrema(roll)),
        65 => count(extrema(v_pitch)),
        66 => ratio(sum_of_differences(j_pitch), mean(j_pitch)),
        67 => Metric::ok(d.time_fraction(argmax(yaw)) - d.time_fraction(argmin(yaw))),
        68 => Metric::ok(region_sum(d, Region::R1)),
        other => unreachable!("feature id {other} outside the catalog"),
    }
}

fn force_metric(d: &Derived, pick: impl Fn(&super::metrics::ForceConsistency) -> f64) -> Metric {
    let m = force_consistency_of(d);
    Metric {
        value: pick(&m),
        degenerate: m.degenerate,
    }
}
