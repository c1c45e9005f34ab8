//! Seeded two-population trial generator with a separability knob.
//!
//! Skilled and novice trials share one generative model: tool-tip and
//! orientation paths made of minimum-jerk submovements inside an ellipsoidal
//! workspace, a force trace of smooth contact episodes, pedal presses and
//! small sensor noise. Novice trials add perturbations whose size grows with
//! `delta`: position and orientation tremor, extra shorter submovements,
//! force tremor and pedal chatter. At `delta = 0` both classes are drawn
//! from the same distribution.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{extract_features_with, ExtractOptions, FeatureId, FeatureMatrix};
use crate::signal::{
    scenario_tumors, Channel, Dataset, Label, Region, TumorSegment, Trial, MIN_SAMPLES,
};

/// Workspace ellipsoid semi-axes in mm.
pub const SEMI_AXES_MM: [f64; 3] = [30.0, 20.0, 15.0];

const POSITION_NOISE_MM: f64 = 0.002;
const ANGLE_NOISE_DEG: f64 = 0.005;
const FORCE_NOISE_N: f64 = 0.002;
const POSITION_TREMOR_MM: f64 = 0.25;
const ANGLE_TREMOR_DEG: f64 = 0.4;
const FORCE_TREMOR_N: f64 = 0.03;
const PEDAL_RATE_HZ: f64 = 0.08;
const CHATTER_RATE_HZ: f64 = 0.12;

/// Which novice perturbations are active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Perturbations {
    pub jitter: bool,
    pub submovements: bool,
    pub force_tremor: bool,
    pub pedal_chatter: bool,
}

impl Default for Perturbations {
    fn default() -> Self {
        Self::ALL
    }
}

impl Perturbations {
    pub const ALL: Perturbations = Perturbations {
        jitter: true,
        submovements: true,
        force_tremor: true,
        pedal_chatter: true,
    };
    pub const NONE: Perturbations = Perturbations {
        jitter: false,
        submovements: false,
        force_tremor: false,
        pedal_chatter: false,
    };
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorConfig {
    pub n_skilled: usize,
    pub n_novice: usize,
    /// Separability, >= 0.
    pub delta: f64,
    pub sample_rate_hz: f64,
    pub segment_duration_s: f64,
    pub scenarios: Vec<u8>,
    pub seed: u64,
    pub perturbations: Perturbations,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            n_skilled: 23,
            n_novice: 92,
            delta: 0.0,
            sample_rate_hz: 100.0,
            segment_duration_s: 180.0,
            scenarios: (1..=6).collect(),
            seed: 0,
            perturbations: Perturbations::ALL,
        }
    }
}

/// Identity of one generated trial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialSpec {
    /// Zero-based participant index; the first `n_skilled` are skilled.
    pub participant: usize,
    pub scenario_id: u8,
    pub label: Label,
    pub id: String,
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.delta >= 0.0) || !self.delta.is_finite() {
            return bad(format!("delta must be finite and >= 0, got {}", self.delta));
        }
        if self.n_skilled < 2 || self.n_novice < 2 {
            return bad("each class needs at least 2 participants".into());
        }
        if !(self.sample_rate_hz > 0.0) || !self.sample_rate_hz.is_finite() {
            return bad(format!("sample rate {} must be positive", self.sample_rate_hz));
        }
        if !(self.segment_duration_s > 0.0) || self.samples_per_segment() < MIN_SAMPLES {
            return bad(format!(
                "segment of {} s at {} Hz is shorter than {MIN_SAMPLES} samples",
                self.segment_duration_s, self.sample_rate_hz
            ));
        }
        if self.scenarios.is_empty() {
            return bad("no scenarios".into());
        }
        let mut s = self.scenarios.clone();
        s.sort_unstable();
        s.dedup();
        if s.len() != self.scenarios.len() {
            return bad("duplicate scenario".into());
        }
        if let Some(x) = s.iter().find(|&&x| scenario_tumors(x).is_none()) {
            return bad(format!("unknown scenario {x}"));
        }
        Ok(())
    }

    /// `rate * duration + 1`: both end points are sampled.
    pub fn samples_per_segment(&self) -> usize {
        (self.sample_rate_hz * self.segment_duration_s).round() as usize + 1
    }

    pub fn n_participants(&self) -> usize {
        self.n_skilled + self.n_novice
    }

    /// Every trial in dataset order: participant-major, then scenario.
    pub fn trial_specs(&self) -> Vec<TrialSpec> {
        let width = self.n_participants().to_string().len().max(3);
        let mut specs = Vec::with_capacity(self.n_participants() * self.scenarios.len());
        for p in 0..self.n_participants() {
            for &s in &self.scenarios {
                specs.push(TrialSpec {
                    participant: p,
                    scenario_id: s,
                    label: if p < self.n_skilled { Label::Skilled } else { Label::Novice },
                    id: format!("P{:0width$}-S{s}", p + 1),
                });
            }
        }
        specs
    }
}

fn splitmix64(z: u64) -> u64 {
    let mut z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

// Independent streams per concern, so toggling a perturbation leaves the
// other draws of the trial untouched.
#[derive(Clone, Copy)]
enum Stream {
    Motion = 0,
    Noise = 1,
    Force = 2,
    Pedal = 3,
    Jitter = 4,
    Corrective = 5,
    ForceTremor = 6,
    Chatter = 7,
}

fn rng_for(config: &GeneratorConfig, spec: &TrialSpec, segment: usize, stream: Stream) -> ChaCha8Rng {
    let key = [spec.participant as u64, spec.scenario_id as u64, segment as u64]
        .iter()
        .fold(splitmix64(config.seed), |acc, &v| splitmix64(acc ^ v));
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(stream as u64);
    rng
}

fn min_jerk(s: f64) -> f64 {
    let s = s.clamp(0.0, 1.0);
    s * s * s * (10.0 - 15.0 * s + 6.0 * s * s)
}

/// Pose: x, y, z in mm then roll, pitch, yaw in degrees.
type Pose = [f64; 6];

fn random_pose(rng: &mut ChaCha8Rng) -> Pose {
    // uniform in the unit ball by rejection, then stretched to the ellipsoid
    let u = loop {
        let u: [f64; 3] = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        if u.iter().map(|v| v * v).sum::<f64>() <= 1.0 {
            break u;
        }
    };
    [
        u[0] * SEMI_AXES_MM[0],
        u[1] * SEMI_AXES_MM[1],
        u[2] * SEMI_AXES_MM[2],
        rng.random_range(-30.0..30.0),
        rng.random_range(30.0..60.0),
        rng.random_range(-30.0..30.0),
    ]
}

/// Straight minimum-jerk move from `from` to `to` over `[t0, t0 + dur)`.
struct Piece {
    t0: f64,
    dur: f64,
    from: Pose,
    to: Pose,
}

fn motion_pieces(
    rng: &mut ChaCha8Rng,
    corrective: &mut ChaCha8Rng,
    total: f64,
    novice_delta: Option<f64>,
) -> (Pose, Vec<Piece>) {
    let start = random_pose(rng);
    let mut pose = start;
    let mut t = rng.random_range(0.0..0.5);
    let mut pieces = Vec::new();
    let speedup = 1.0 + 0.25 * novice_delta.unwrap_or(0.0);
    let p_correct = (0.3 * novice_delta.unwrap_or(0.0)).min(1.0);
    while t < total {
        let dur = rng.random_range(1.5..3.0) / speedup;
        let target = random_pose(rng);
        pieces.push(Piece { t0: t, dur, from: pose, to: target });
        pose = target;
        t += dur;
        if novice_delta.is_some() && p_correct > 0.0 && corrective.random_bool(p_correct) {
            let mut to = pose;
            for (k, v) in to.iter_mut().enumerate() {
                let scale = if k < 3 { 0.15 * SEMI_AXES_MM[k] } else { 5.0 };
                *v += corrective.random_range(-scale..scale);
            }
            let dur = corrective.random_range(0.3..0.6);
            pieces.push(Piece { t0: t, dur, from: pose, to });
            pose = to;
            t += dur;
        }
        t += rng.random_range(0.1..0.6);
    }
    (start, pieces)
}

fn sample_motion(start: Pose, pieces: &[Piece], n: usize, h: f64) -> [Vec<f64>; 6] {
    let mut out: [Vec<f64>; 6] = std::array::from_fn(|_| Vec::with_capacity(n));
    let mut k = 0;
    let mut pose = start;
    for i in 0..n {
        let t = i as f64 * h;
        while k < pieces.len() && t >= pieces[k].t0 + pieces[k].dur {
            pose = pieces[k].to;
            k += 1;
        }
        let p = match pieces.get(k) {
            Some(pc) if t >= pc.t0 => {
                let s = min_jerk((t - pc.t0) / pc.dur);
                std::array::from_fn(|d| pc.from[d] + (pc.to[d] - pc.from[d]) * s)
            }
            _ => pose,
        };
        for d in 0..6 {
            out[d].push(p[d]);
        }
    }
    out
}

fn add_tremor(x: &mut [f64], rng: &mut ChaCha8Rng, amplitude: f64, band: (f64, f64), h: f64) {
    let comps: Vec<(f64, f64)> = (0..3)
        .map(|_| (rng.random_range(band.0..band.1), rng.random_range(0.0..2.0 * PI)))
        .collect();
    let a = amplitude / 3f64.sqrt();
    for (i, v) in x.iter_mut().enumerate() {
        let t = i as f64 * h;
        *v += comps.iter().map(|(f, ph)| a * (2.0 * PI * f * t + ph).sin()).sum::<f64>();
    }
}

fn add_noise(x: &mut [f64], rng: &mut ChaCha8Rng, sigma: f64) {
    let normal = Normal::new(0.0, sigma).expect("positive sigma");
    for v in x.iter_mut() {
        *v += normal.sample(rng);
    }
}

/// Contact force of one segment and its contact envelope in [0, 1].
fn force_trace(
    rng: &mut ChaCha8Rng,
    tremor: Option<(&mut ChaCha8Rng, f64)>,
    n: usize,
    h: f64,
    stiffness_kpa: u32,
) -> Vec<f64> {
    let total = (n - 1) as f64 * h;
    let scale = 0.6 + 0.04 * stiffness_kpa as f64;
    let ramp = 0.4;
    let mut f = vec![0.0; n];
    let mut tremor = tremor;
    let mut t = rng.random_range(0.5..2.0);
    while t < total {
        let len = rng.random_range(3.0..10.0);
        let level = rng.random_range(0.3..1.2) * scale;
        let drift_f = rng.random_range(0.1..0.3);
        let drift_ph = rng.random_range(0.0..2.0 * PI);
        let tr = tremor
            .as_mut()
            .map(|(r, amp)| (*amp, r.random_range(6.0..10.0), r.random_range(0.0..2.0 * PI)));
        let i0 = (t / h).ceil() as usize;
        let i1 = (((t + len) / h).floor() as usize).min(n - 1);
        for (i, v) in f.iter_mut().enumerate().take(i1 + 1).skip(i0) {
            let s = i as f64 * h - t;
            let env = min_jerk(s / ramp).min(min_jerk((len - s) / ramp));
            let drift = 1.0 + 0.1 * (2.0 * PI * drift_f * s + drift_ph).sin();
            let mut x = level * drift * env;
            if let Some((amp, freq, ph)) = tr {
                x += amp * env * (2.0 * PI * freq * s + ph).sin();
            }
            *v = x;
        }
        t += len + rng.random_range(1.0..3.0);
    }
    f
}

fn press(pedal: &mut [bool], rng: &mut ChaCha8Rng, rate: f64, dur: (f64, f64), h: f64) {
    if rate <= 0.0 {
        return;
    }
    let gap = Exp::new(rate).expect("positive rate");
    let total = (pedal.len() - 1) as f64 * h;
    let mut t = gap.sample(rng);
    while t < total {
        let d = rng.random_range(dur.0..dur.1);
        let i0 = (t / h).ceil() as usize;
        let i1 = (((t + d) / h).floor() as usize).min(pedal.len() - 1);
        for p in pedal.iter_mut().take(i1 + 1).skip(i0) {
            *p = true;
        }
        t += d + gap.sample(rng);
    }
}

/// Radial band of a position inside the workspace ellipsoid.
pub fn region_of(x: f64, y: f64, z: f64) -> Region {
    let [a, b, c] = SEMI_AXES_MM;
    if z < -0.6 * c {
        return Region::R4;
    }
    let r = ((x / a).powi(2) + (y / b).powi(2) + (z / c).powi(2)).sqrt();
    if r < 0.4 {
        Region::R1
    } else if r < 0.7 {
        Region::R2
    } else if r < 1.0 {
        Region::R3
    } else {
        Region::Background
    }
}

/// Generates one trial; depends only on `config` and `spec`.
pub fn generate_trial(config: &GeneratorConfig, spec: &TrialSpec) -> Result<Trial> {
    let tumors = scenario_tumors(spec.scenario_id)
        .ok_or_else(|| Error::InvalidParameter(format!("unknown scenario {}", spec.scenario_id)))?;
    let n = config.samples_per_segment();
    let h = 1.0 / config.sample_rate_hz;
    let total = (n - 1) as f64 * h;
    let novice = !spec.label.is_skilled() && config.delta > 0.0;
    let pert = config.perturbations;
    let delta = config.delta;

    let cap = 3 * n;
    let mut pose: [Vec<f64>; 6] = std::array::from_fn(|_| Vec::with_capacity(cap));
    let mut force = Vec::with_capacity(cap);
    let mut pedal = Vec::with_capacity(cap);
    let mut segments = Vec::with_capacity(3);

    for (seg, &(color, stiffness)) in tumors.iter().enumerate() {
        let mut motion = rng_for(config, spec, seg, Stream::Motion);
        let mut corrective = rng_for(config, spec, seg, Stream::Corrective);
        let novice_delta = (novice && pert.submovements).then_some(delta);
        let (start, pieces) = motion_pieces(&mut motion, &mut corrective, total, novice_delta);
        let mut p = sample_motion(start, &pieces, n, h);

        if novice && pert.jitter {
            let mut jr = rng_for(config, spec, seg, Stream::Jitter);
            for (d, ch) in p.iter_mut().enumerate() {
                let amp = if d < 3 { POSITION_TREMOR_MM } else { ANGLE_TREMOR_DEG };
                add_tremor(ch, &mut jr, amp * delta, (3.0, 8.0), h);
            }
        }
        let mut noise = rng_for(config, spec, seg, Stream::Noise);
        for (d, ch) in p.iter_mut().enumerate() {
            add_noise(ch, &mut noise, if d < 3 { POSITION_NOISE_MM } else { ANGLE_NOISE_DEG });
        }

        let mut fr = rng_for(config, spec, seg, Stream::Force);
        let mut tr = rng_for(config, spec, seg, Stream::ForceTremor);
        let tremor = (novice && pert.force_tremor).then_some((&mut tr, FORCE_TREMOR_N * delta));
        let mut f = force_trace(&mut fr, tremor, n, h, stiffness);
        add_noise(&mut f, &mut noise, FORCE_NOISE_N);

        let mut pd = vec![false; n];
        let mut pr = rng_for(config, spec, seg, Stream::Pedal);
        press(&mut pd, &mut pr, PEDAL_RATE_HZ, (1.0, 4.0), h);
        if novice && pert.pedal_chatter {
            let mut cr = rng_for(config, spec, seg, Stream::Chatter);
            press(&mut pd, &mut cr, CHATTER_RATE_HZ * delta, (0.1, 0.4), h);
        }

        for (dst, src) in pose.iter_mut().zip(p) {
            dst.extend(src);
        }
        force.extend(f);
        pedal.extend(pd);
        segments.push(TumorSegment {
            tumor_id: seg as u8 + 1,
            color,
            stiffness_kpa: stiffness,
            len: n,
        });
    }

    let region = (0..pose[0].len())
        .map(|i| region_of(pose[0][i], pose[1][i], pose[2][i]))
        .collect();
    let rate = config.sample_rate_hz;
    let [x, y, z, roll, pitch, yaw] = pose;
    Ok(Trial {
        id: spec.id.clone(),
        scenario_id: spec.scenario_id,
        label: spec.label,
        sample_rate_hz: rate,
        position: [
            Channel::new("x", rate, x),
            Channel::new("y", rate, y),
            Channel::new("z", rate, z),
        ],
        angles: [
            Channel::new("roll", rate, roll),
            Channel::new("pitch", rate, pitch),
            Channel::new("yaw", rate, yaw),
        ],
        force: Channel::new("force", rate, force),
        pedal,
        region,
        segments,
    })
}

/// Generates the whole dataset in memory. Trials are built in parallel and
/// are identical to a serial run.
pub fn generate(config: &GeneratorConfig) -> Result<Dataset> {
    config.validate()?;
    let trials = config
        .trial_specs()
        .par_iter()
        .map(|s| generate_trial(config, s))
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(trials)
}

/// Generates and extracts trial by trial, keeping only the features.
pub fn generate_features(config: &GeneratorConfig, options: &ExtractOptions) -> Result<FeatureMatrix> {
    config.validate()?;
    let specs = config.trial_specs();
    let rows = specs
        .par_iter()
        .map(|s| extract_features_with(&generate_trial(config, s)?, options))
        .collect::<Result<Vec<_>>>()?;
    FeatureMatrix::new(
        rows,
        specs.iter().map(|s| s.label).collect(),
        specs.iter().map(|s| s.scenario_id).collect(),
    )
}

fn ids(list: &[u8]) -> Vec<FeatureId> {
    list.iter().map(|&i| FeatureId::new(i).expect("catalog id")).collect()
}

// Features each perturbation shifts between the classes.
const JITTER: &[u8] = &[
    3, 4, 13, 15, 16, 20, 21, 22, 23, 24, 28, 29, 30, 31, 41, 49, 51, 52, 53, 57, 58, 61, 62, 63,
    64, 65,
];
const SUBMOVEMENTS: &[u8] = &[
    3, 4, 10, 13, 15, 16, 20, 21, 22, 23, 29, 30, 31, 39, 41, 46, 49, 51, 52, 53, 57, 61, 63, 64,
    65,
];
const FORCE_TREMOR: &[u8] = &[6, 17, 19, 35, 37, 40, 50, 55];
const PEDAL_CHATTER: &[u8] = &[33];

/// Catalog features whose class distributions the active perturbations
/// separate, ascending. Empty at `delta = 0`.
pub fn describe_ground_truth(config: &GeneratorConfig) -> Vec<FeatureId> {
    if config.delta <= 0.0 {
        return Vec::new();
    }
    let p = config.perturbations;
    let mut out: Vec<u8> = [
        (p.jitter, JITTER),
        (p.submovements, SUBMOVEMENTS),
        (p.force_tremor, FORCE_TREMOR),
        (p.pedal_chatter, PEDAL_CHATTER),
    ]
    .iter()
    .filter(|(on, _)| *on)
    .flat_map(|(_, l)| l.iter().copied())
    .collect();
    out.sort_unstable();
    out.dedup();
    ids(&out)
}
