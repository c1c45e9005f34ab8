//! Trial data model and numerical differentiation.
//!
//! A [`Trial`] is one participant's attempt at one scenario: up to three
//! tumor segments recorded back to back at a uniform sample rate, with the
//! rest intervals between them removed. Derivatives are always taken per
//! segment so that the joins never produce spurious spikes.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum number of samples a channel (or a segment) needs for third derivatives.
pub const MIN_SAMPLES: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    pub name: String,
    pub sample_rate_hz: f64,
    pub samples: Vec<f64>,
}

impl Channel {
    pub fn new(name: impl Into<String>, sample_rate_hz: f64, samples: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            sample_rate_hz,
            samples,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    fn check(&self) -> Result<()> {
        if self.samples.len() < MIN_SAMPLES {
            return Err(Error::TooShort {
                name: self.name.clone(),
                len: self.samples.len(),
                min: MIN_SAMPLES,
            });
        }
        if !(self.sample_rate_hz > 0.0) || !self.sample_rate_hz.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "channel `{}` has sample rate {}",
                self.name, self.sample_rate_hz
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "skilled")]
    Skilled,
    #[serde(rename = "novice")]
    Novice,
}

impl Label {
    pub fn is_skilled(self) -> bool {
        self == Label::Skilled
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Skilled => "skilled",
            Label::Novice => "novice",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "skilled" => Some(Label::Skilled),
            "novice" => Some(Label::Novice),
            _ => None,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Anatomical region the tool tip is in at a given sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    R1,
    R2,
    R3,
    /// Beneath the tumor bulk.
    R4,
    Background,
}

impl Region {
    pub fn as_str(self) -> &'static str {
        match self {
            Region::R1 => "R1",
            Region::R2 => "R2",
            Region::R3 => "R3",
            Region::R4 => "R4",
            Region::Background => "BG",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "R1" => Some(Region::R1),
            "R2" => Some(Region::R2),
            "R3" => Some(Region::R3),
            "R4" => Some(Region::R4),
            "BG" => Some(Region::Background),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TumorColor {
    Black,
    Glioma,
    White,
}

impl TumorColor {
    pub const ALL: [TumorColor; 3] = [TumorColor::Black, TumorColor::Glioma, TumorColor::White];
}

/// Tumor stiffness values used by the scenarios, in kPa (soft, medium, hard).
pub const STIFFNESS_KPA: [u32; 3] = [3, 9, 15];

/// Color and stiffness of the three tumors of a scenario, ordered by tumor id.
///
/// Scenarios 1-3 hold one color at three stiffnesses, scenarios 4-6 one
/// stiffness in three colors.
pub fn scenario_tumors(scenario_id: u8) -> Option<[(TumorColor, u32); 3]> {
    let by_color = |c: TumorColor| {
        [
            (c, STIFFNESS_KPA[0]),
            (c, STIFFNESS_KPA[1]),
            (c, STIFFNESS_KPA[2]),
        ]
    };
    let by_stiffness = |s: u32| {
        [
            (TumorColor::Black, s),
            (TumorColor::Glioma, s),
            (TumorColor::White, s),
        ]
    };
    match scenario_id {
        1 => Some(by_color(TumorColor::Black)),
        2 => Some(by_color(TumorColor::Glioma)),
        3 => Some(by_color(TumorColor::White)),
        4 => Some(by_stiffness(STIFFNESS_KPA[0])),
        5 => Some(by_stiffness(STIFFNESS_KPA[1])),
        6 => Some(by_stiffness(STIFFNESS_KPA[2])),
        _ => None,
    }
}

/// One tumor resection inside a trial; `len` consecutive samples.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TumorSegment {
    pub tumor_id: u8,
    pub color: TumorColor,
    pub stiffness_kpa: u32,
    pub len: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    pub id: String,
    pub scenario_id: u8,
    pub label: Label,
    pub sample_rate_hz: f64,
    /// x, y, z in mm.
    pub position: [Channel; 3],
    /// roll, pitch, yaw in rad.
    pub angles: [Channel; 3],
    /// Tool-tissue contact force in N.
    pub force: Channel,
    pub pedal: Vec<bool>,
    pub region: Vec<Region>,
    pub segments: Vec<TumorSegment>,
}

impl Trial {
    pub fn len(&self) -> usize {
        self.force.len()
    }

    pub fn is_empty(&self) -> bool {
        self.force.is_empty()
    }

    pub fn segment_lengths(&self) -> Vec<usize> {
        self.segments.iter().map(|s| s.len).collect()
    }

    /// Active task time in seconds, summed over segments.
    pub fn duration_s(&self) -> f64 {
        duration_s(&self.segment_lengths(), self.sample_rate_hz)
    }

    /// Single-segment trial from raw sample vectors. Intended for tests and
    /// small experiments; the tumor is the first one of the scenario.
    #[allow(clippy::too_many_arguments)]
    pub fn from_samples(
        id: impl Into<String>,
        scenario_id: u8,
        label: Label,
        sample_rate_hz: f64,
        position: [Vec<f64>; 3],
        angles: [Vec<f64>; 3],
        force: Vec<f64>,
        pedal: Vec<bool>,
        region: Vec<Region>,
    ) -> Self {
        let len = force.len();
        let (color, stiffness_kpa) =
            scenario_tumors(scenario_id).map_or((TumorColor::Black, 3), |t| t[0]);
        let [x, y, z] = position;
        let [roll, pitch, yaw] = angles;
        Trial {
            id: id.into(),
            scenario_id,
            label,
            sample_rate_hz,
            position: [
                Channel::new("x", sample_rate_hz, x),
                Channel::new("y", sample_rate_hz, y),
                Channel::new("z", sample_rate_hz, z),
            ],
            angles: [
                Channel::new("roll", sample_rate_hz, roll),
                Channel::new("pitch", sample_rate_hz, pitch),
                Channel::new("yaw", sample_rate_hz, yaw),
            ],
            force: Channel::new("force", sample_rate_hz, force),
            pedal,
            region,
            segments: vec![TumorSegment {
                tumor_id: 1,
                color,
                stiffness_kpa,
                len,
            }],
        }
    }

    /// Trial whose only moving channels are the position; angles, force,
    /// pedal are zero and every sample is background.
    pub fn from_positions(sample_rate_hz: f64, position: [Vec<f64>; 3]) -> Self {
        let n = position[0].len();
        Trial::from_samples(
            "motion",
            1,
            Label::Skilled,
            sample_rate_hz,
            position,
            [vec![0.0; n], vec![0.0; n], vec![0.0; n]],
            vec![0.0; n],
            vec![false; n],
            vec![Region::Background; n],
        )
    }

    /// Trial whose only nonzero channel is the force.
    pub fn from_force(sample_rate_hz: f64, force: Vec<f64>) -> Self {
        let n = force.len();
        Trial::from_samples(
            "force",
            1,
            Label::Skilled,
            sample_rate_hz,
            [vec![0.0; n], vec![0.0; n], vec![0.0; n]],
            [vec![0.0; n], vec![0.0; n], vec![0.0; n]],
            force,
            vec![false; n],
            vec![Region::Background; n],
        )
    }
}

pub(crate) fn duration_s(segment_lengths: &[usize], sample_rate_hz: f64) -> f64 {
    segment_lengths
        .iter()
        .map(|&n| n.saturating_sub(1) as f64)
        .sum::<f64>()
        / sample_rate_hz
}

#[derive(Debug, Clone, Default)]
pub struct Dataset {
    pub trials: Vec<Trial>,
}

impl Dataset {
    pub fn new(trials: Vec<Trial>) -> Result<Self> {
        let ds = Dataset { trials };
        ds.check()?;
        Ok(ds)
    }

    pub fn count(&self, label: Label) -> usize {
        self.trials.iter().filter(|t| t.label == label).count()
    }

    fn check(&self) -> Result<()> {
        let mut ids = HashSet::new();
        for t in &self.trials {
            if !ids.insert(t.id.as_str()) {
                return Err(Error::InvalidParameter(format!("duplicate trial id `{}`", t.id)));
            }
        }
        for (label, name) in [(Label::Skilled, "skilled"), (Label::Novice, "novice")] {
            let got = self.count(label);
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
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Shape(String),
    Rate(String),
    Value(String),
    Metadata(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Shape(m) => write!(f, "shape: {m}"),
            Violation::Rate(m) => write!(f, "rate: {m}"),
            Violation::Value(m) => write!(f, "value: {m}"),
            Violation::Metadata(m) => write!(f, "metadata: {m}"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self, id: &str) -> Result<()> {
        if self.is_empty() {
            return Ok(());
        }
        let violations = self
            .violations
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join("; ");
        Err(Error::InvalidTrial {
            id: id.to_string(),
            violations,
        })
    }
}

/// Lists every invariant violation of `trial`. An empty report means the
/// trial is well formed.
pub fn validate_trial(trial: &Trial) -> ValidationReport {
    let mut out = Vec::new();
    let rate = trial.sample_rate_hz;
    if !(rate > 0.0) || !rate.is_finite() {
        out.push(Violation::Rate(format!("sample rate {rate} is not positive")));
    }

    // the x channel sets the expected length
    let n = trial.position[0].len();
    let channels = trial
        .position
        .iter()
        .chain(trial.angles.iter())
        .chain(std::iter::once(&trial.force));
    for c in channels {
        if c.len() != n {
            out.push(Violation::Shape(format!(
                "channel `{}` has {} samples, expected {n}",
                c.name,
                c.len()
            )));
        }
        if c.sample_rate_hz != rate {
            out.push(Violation::Rate(format!(
                "channel `{}` sampled at {} Hz, trial at {rate} Hz",
                c.name, c.sample_rate_hz
            )));
        }
        if let Some(i) = c.samples.iter().position(|v| !v.is_finite()) {
            out.push(Violation::Value(format!(
                "channel `{}` has a missing or non-finite value at sample {i}",
                c.name
            )));
        }
    }
    if trial.pedal.len() != n {
        out.push(Violation::Shape(format!(
            "pedal has {} samples, expected {n}",
            trial.pedal.len()
        )));
    }
    if trial.region.len() != n {
        out.push(Violation::Shape(format!(
            "region has {} samples, expected {n}",
            trial.region.len()
        )));
    }

    if trial.segments.is_empty() {
        out.push(Violation::Shape("trial has no tumor segments".into()));
    }
    let total: usize = trial.segments.iter().map(|s| s.len).sum();
    if !trial.segments.is_empty() && total != n {
        out.push(Violation::Shape(format!(
            "segments cover {total} samples, channels have {n}"
        )));
    }
    for s in &trial.segments {
        if s.len < MIN_SAMPLES {
            out.push(Violation::Shape(format!(
                "tumor {} segment has {} samples, need at least {MIN_SAMPLES}",
                s.tumor_id, s.len
            )));
        }
    }

    match scenario_tumors(trial.scenario_id) {
        None => out.push(Violation::Metadata(format!(
            "scenario id {} outside 1-6",
            trial.scenario_id
        ))),
        Some(table) => {
            let mut seen = HashSet::new();
            for s in &trial.segments {
                if !(1..=3).contains(&s.tumor_id) {
                    out.push(Violation::Metadata(format!(
                        "tumor id {} outside 1-3",
                        s.tumor_id
                    )));
                    continue;
                }
                if !seen.insert(s.tumor_id) {
                    out.push(Violation::Metadata(format!(
                        "tumor {} appears twice",
                        s.tumor_id
                    )));
                }
                let (color, stiffness) = table[usize::from(s.tumor_id) - 1];
                if s.color != color {
                    out.push(Violation::Metadata(format!(
                        "scenario {} tumor {} must be {:?}, tagged {:?}",
                        trial.scenario_id, s.tumor_id, color, s.color
                    )));
                }
                if s.stiffness_kpa != stiffness {
                    out.push(Violation::Metadata(format!(
                        "scenario {} tumor {} must be {stiffness} kPa, tagged {} kPa",
                        trial.scenario_id, s.tumor_id, s.stiffness_kpa
                    )));
                }
            }
        }
    }

    ValidationReport { violations: out }
}

/// First derivative with second-order accurate stencils: central in the
/// interior, three-point one-sided at both ends.
pub(crate) fn first_derivative_into(x: &[f64], h: f64, out: &mut Vec<f64>) {
    let n = x.len();
    debug_assert!(n >= 3);
    out.push((-3.0 * x[0] + 4.0 * x[1] - x[2]) / (2.0 * h));
    for i in 1..n - 1 {
        out.push((x[i + 1] - x[i - 1]) / (2.0 * h));
    }
    out.push((3.0 * x[n - 1] - 4.0 * x[n - 2] + x[n - 3]) / (2.0 * h));
}

/// Differentiates `x` `order` times, restarting the stencils at each segment.
pub(crate) fn differentiate_segments(x: &[f64], segments: &[usize], h: f64, order: u8) -> Vec<f64> {
    let mut cur = x.to_vec();
    for _ in 0..order {
        let mut next = Vec::with_capacity(cur.len());
        let mut start = 0;
        for &len in segments {
            first_derivative_into(&cur[start..start + len], h, &mut next);
            start += len;
        }
        cur = next;
    }
    cur
}

/// `order`-th derivative of a channel. Higher orders compose the first
/// derivative. Units are divided by s^order.
pub fn differentiate(channel: &Channel, order: u8) -> Result<Channel> {
    if !(1..=3).contains(&order) {
        return Err(Error::InvalidOrder(order));
    }
    channel.check()?;
    let h = 1.0 / channel.sample_rate_hz;
    let samples = differentiate_segments(&channel.samples, &[channel.len()], h, order);
    let suffix = ["", "'", "''", "'''"][usize::from(order)];
    Ok(Channel::new(
        format!("{}{suffix}", channel.name),
        channel.sample_rate_hz,
        samples,
    ))
}

/// Pointwise magnitude of the velocity of three position channels.
pub fn speed(position: &[Channel; 3]) -> Result<Channel> {
    let n = position[0].len();
    let rate = position[0].sample_rate_hz;
    for c in &position[1..] {
        if c.len() != n {
            return Err(Error::Shape(format!(
                "position channel `{}` has {} samples, `{}` has {n}",
                c.name,
                c.len(),
                position[0].name
            )));
        }
        if c.sample_rate_hz != rate {
            return Err(Error::Shape(format!(
                "position channel `{}` sampled at {} Hz, `{}` at {rate} Hz",
                c.name, c.sample_rate_hz, position[0].name
            )));
        }
    }
    let v = position
        .iter()
        .map(|c| differentiate(c, 1))
        .collect::<Result<Vec<_>>>()?;
    Ok(Channel::new(
        "speed",
        rate,
        magnitude(&v[0].samples, &v[1].samples, &v[2].samples),
    ))
}

pub(crate) fn magnitude(a: &[f64], b: &[f64], c: &[f64]) -> Vec<f64> {
    a.iter()
        .zip(b)
        .zip(c)
        .map(|((x, y), z)| (x * x + y * y + z * z).sqrt())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn ch(rate: f64, samples: Vec<f64>) -> Channel {
        Channel::new("c", rate, samples)
    }

    fn sampled(rate: f64, n: usize, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..n).map(|i| f(i as f64 / rate)).collect()
    }

    #[test]
    fn constant_has_zero_derivative() {
        for order in 1..=3 {
            let d = differentiate(&ch(37.0, vec![5.0; 5]), order).unwrap();
            assert_eq!(d.samples, vec![0.0; 5]);
        }
    }

    #[test]
    fn ramp_has_unit_slope() {
        let d = differentiate(&ch(1.0, vec![0.0, 1.0, 2.0, 3.0, 4.0]), 1).unwrap();
        assert_eq!(d.samples, vec![1.0; 5]);
    }

    #[test]
    fn sine_matches_analytic_derivative() {
        let rate = 100.0;
        let c = ch(rate, sampled(rate, 201, |t| (2.0 * PI * t).sin()));
        let d = differentiate(&c, 1).unwrap();
        let worst = d
            .samples
            .iter()
            .enumerate()
            .map(|(i, v)| (v - 2.0 * PI * (2.0 * PI * i as f64 / rate).cos()).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-2, "max deviation {worst}");
    }

    #[test]
    fn short_channel_is_rejected() {
        let err = differentiate(&ch(10.0, vec![1.0, 2.0, 3.0]), 1).unwrap_err();
        assert!(matches!(err, Error::TooShort { len: 3, .. }));
        assert!(matches!(
            differentiate(&ch(10.0, vec![0.0; 8]), 4),
            Err(Error::InvalidOrder(4))
        ));
    }

    #[test]
    fn composition_matches_higher_order() {
        let c = ch(50.0, sampled(50.0, 40, |t| 2.0 * t * t * t - t * t + 3.0));
        let twice = differentiate(&differentiate(&c, 1).unwrap(), 1).unwrap();
        let direct = differentiate(&c, 2).unwrap();
        for (a, b) in twice.samples.iter().zip(&direct.samples) {
            assert!((a - b).abs() <= 1e-6 * b.abs().max(1.0));
        }
    }

    #[test]
    fn speed_of_3_4_5_motion() {
        let rate = 10.0;
        let pos = [
            ch(rate, sampled(rate, 20, |t| 3.0 * t)),
            ch(rate, sampled(rate, 20, |t| 4.0 * t)),
            ch(rate, vec![0.0; 20]),
        ];
        for v in speed(&pos).unwrap().samples {
            assert!((v - 5.0).abs() < 1e-12);
        }
        let still = [ch(rate, vec![1.0; 6]), ch(rate, vec![2.0; 6]), ch(rate, vec![3.0; 6])];
        assert!(speed(&still).unwrap().samples.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn speed_rejects_mismatched_lengths() {
        let pos = [ch(1.0, vec![0.0; 6]), ch(1.0, vec![0.0; 6]), ch(1.0, vec![0.0; 5])];
        assert!(matches!(speed(&pos), Err(Error::Shape(_))));
    }

    #[test]
    fn segments_restart_stencils() {
        // Two ramps with a jump between them: per-segment differentiation
        // sees no jump.
        let x = vec![0.0, 1.0, 2.0, 3.0, 100.0, 101.0, 102.0, 103.0];
        let d = differentiate_segments(&x, &[4, 4], 1.0, 1);
        assert_eq!(d, vec![1.0; 8]);
    }

    fn good_trial() -> Trial {
        let n = 10;
        Trial::from_samples(
            "t",
            1,
            Label::Skilled,
            10.0,
            [vec![0.0; n], vec![1.0; n], vec![2.0; n]],
            [vec![0.0; n], vec![0.0; n], vec![0.0; n]],
            vec![0.1; n],
            vec![false; n],
            vec![Region::R1; n],
        )
    }

    #[test]
    fn validation_accepts_well_formed_trial() {
        let t = good_trial();
        assert!(validate_trial(&t).is_empty());
        assert!((t.duration_s() - 0.9).abs() < 1e-12);
    }

    #[test]
    fn validation_lists_short_force() {
        let mut t = good_trial();
        t.force.samples.pop();
        let report = validate_trial(&t);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::Shape(m) if m.contains("force"))));
    }

    #[test]
    fn validation_lists_wrong_tumor_color() {
        let mut t = good_trial();
        t.segments[0].color = TumorColor::White;
        let report = validate_trial(&t);
        assert_eq!(report.violations.len(), 1);
        assert!(matches!(report.violations[0], Violation::Metadata(_)));
    }

    #[test]
    fn validation_lists_gaps() {
        let mut t = good_trial();
        t.position[1].samples[3] = f64::NAN;
        assert!(validate_trial(&t)
            .violations
            .iter()
            .any(|v| matches!(v, Violation::Value(_))));
    }

    #[test]
    fn scenario_table_shape() {
        assert!(scenario_tumors(1).unwrap().iter().all(|t| t.0 == TumorColor::Black));
        assert!(scenario_tumors(6).unwrap().iter().all(|t| t.1 == 15));
        assert!(scenario_tumors(0).is_none());
        assert!(scenario_tumors(7).is_none());
    }
}
