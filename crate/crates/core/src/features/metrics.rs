//! Effort and smoothness metrics: integrated acceleration, normalized jerk
//! and the force consistency metrics.

use serde::Serialize;

use super::derived::Derived;
use crate::error::Result;
use crate::signal::{validate_trial, Trial};
use crate::stats;

/// A metric value plus whether a degenerate-input rule produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metric {
    pub value: f64,
    pub degenerate: bool,
}

impl Metric {
    pub(crate) fn ok(value: f64) -> Self {
        Metric {
            value,
            degenerate: false,
        }
    }

    pub(crate) fn degenerate() -> Self {
        Metric {
            value: 0.0,
            degenerate: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ForceConsistency {
    pub df: f64,
    pub d2f: f64,
    pub d3f: f64,
    /// Set when the force interquartile range is zero and all three are 0.
    pub degenerate: bool,
}

/// Time integral of the acceleration magnitude, in mm/s.
pub fn iav(trial: &Trial) -> Result<f64> {
    validate_trial(trial).into_result(&trial.id)?;
    Ok(iav_of(&Derived::new(trial)))
}

/// Acceleration-magnitude integral over samples `range`. Adjacent windows
/// that share their boundary sample sum to [`iav`].
pub fn iav_window(trial: &Trial, range: std::ops::Range<usize>) -> Result<f64> {
    validate_trial(trial).into_result(&trial.id)?;
    let d = Derived::new(trial);
    let mut total = 0.0;
    let mut start = 0;
    for &len in &d.segments {
        let lo = range.start.max(start);
        let hi = range.end.min(start + len);
        if hi > lo {
            total += stats::trapezoid(&d.acc_mag[lo..hi], d.h);
        }
        start += len;
    }
    Ok(total)
}

pub(crate) fn iav_of(d: &Derived) -> f64 {
    stats::trapezoid_segments(&d.acc_mag, &d.segments, d.h)
}

/// Dimensionless jerk `sqrt(T^5 / (2 A^2) * integral |j|^2 dt)` with `A` the
/// tool tip path length. Zero path length yields a degenerate 0.
pub fn normalized_jerk(trial: &Trial) -> Result<Metric> {
    validate_trial(trial).into_result(&trial.id)?;
    Ok(normalized_jerk_of(&Derived::new(trial)))
}

pub(crate) fn path_length(d: &Derived) -> f64 {
    let mut total = 0.0;
    let mut start = 0;
    for &len in &d.segments {
        for i in start + 1..start + len {
            let dx = d.pos(0)[i] - d.pos(0)[i - 1];
            let dy = d.pos(1)[i] - d.pos(1)[i - 1];
            let dz = d.pos(2)[i] - d.pos(2)[i - 1];
            total += (dx * dx + dy * dy + dz * dz).sqrt();
        }
        start += len;
    }
    total
}

pub(crate) fn normalized_jerk_of(d: &Derived) -> Metric {
    let amplitude = path_length(d);
    if amplitude == 0.0 {
        return Metric::degenerate();
    }
    let sq: Vec<f64> = (0..d.speed.len())
        .map(|i| d.jerk[0][i].powi(2) + d.jerk[1][i].powi(2) + d.jerk[2][i].powi(2))
        .collect();
    let integral = stats::trapezoid_segments(&sq, &d.segments, d.h);
    let t = d.duration;
    Metric::ok((t.powi(5) / (2.0 * amplitude * amplitude) * integral).sqrt())
}

/// The three force consistency metrics, using the interquartile range of the
/// force samples as the amplitude scale.
pub fn force_consistency_metrics(trial: &Trial) -> Result<ForceConsistency> {
    validate_trial(trial).into_result(&trial.id)?;
    Ok(force_consistency_of(&Derived::new(trial)))
}

pub(crate) fn force_consistency_of(d: &Derived) -> ForceConsistency {
    let f_iqr = stats::iqr(d.force());
    if f_iqr == 0.0 {
        return ForceConsistency {
            df: 0.0,
            d2f: 0.0,
            d3f: 0.0,
            degenerate: true,
        };
    }
    let t = d.duration;
    let energy = |x: &[f64]| {
        let sq: Vec<f64> = x.iter().map(|v| v * v).collect();
        stats::trapezoid_segments(&sq, &d.segments, d.h)
    };
    let scale = 2.0 * f_iqr * f_iqr;
    ForceConsistency {
        df: (t / scale * energy(&d.force_vel)).sqrt(),
        d2f: (t.powi(3) / scale * energy(&d.force_acc)).sqrt(),
        d3f: (t.powi(5) / scale * energy(&d.force_jerk)).sqrt(),
        degenerate: false,
    }
}
