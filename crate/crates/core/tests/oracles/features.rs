//! Every catalog feature recomputed from its textual definition with naive
//! code: sorting, run-length compression and an O(n^2) DFT.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use skillgrade::datagen::{generate_trial, GeneratorConfig};
use skillgrade::features::ExtractOptions;
use skillgrade::{Region, Trial};

struct Sig {
    segs: Vec<usize>,
    h: f64,
    t: f64,
}

impl Sig {
    fn new(trial: &Trial) -> Self {
        let segs: Vec<usize> = trial.segments.iter().map(|s| s.len).collect();
        let h = 1.0 / trial.sample_rate_hz;
        let t = segs.iter().map(|&n| (n - 1) as f64 * h).sum();
        Sig { segs, h, t }
    }

    /// One derivative, one segment at a time: one-sided second-order
    /// stencils at the ends, central differences inside.
    fn d(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        let mut s = 0;
        for &n in &self.segs {
            let y = &x[s..s + n];
            for i in 0..n {
                out[s + i] = if i == 0 {
                    (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * self.h)
                } else if i == n - 1 {
                    (3.0 * y[n - 1] - 4.0 * y[n - 2] + y[n - 3]) / (2.0 * self.h)
                } else {
                    (y[i + 1] - y[i - 1]) / (2.0 * self.h)
                };
            }
            s += n;
        }
        out
    }

    fn integral_sq(&self, x: &[f64]) -> f64 {
        let mut total = 0.0;
        let mut s = 0;
        for &n in &self.segs {
            for i in s + 1..s + n {
                total += 0.5 * (x[i - 1] * x[i - 1] + x[i] * x[i]) * self.h;
            }
            s += n;
        }
        total
    }

    fn tf(&self, i: usize) -> f64 {
        i as f64 * self.h / self.t
    }
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn std(x: &[f64]) -> f64 {
    let m = mean(x);
    (x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() - 1) as f64).sqrt()
}

fn quantile(x: &[f64], p: f64) -> f64 {
    let mut s = x.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let pos = p * (s.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    s[lo] + (pos - lo as f64) * (s[hi] - s[lo])
}

fn iqr(x: &[f64]) -> f64 {
    quantile(x, 0.75) - quantile(x, 0.25)
}

fn hi(x: &[f64]) -> f64 {
    x.iter().cloned().fold(f64::MIN, f64::max)
}

fn lo(x: &[f64]) -> f64 {
    x.iter().cloned().fold(f64::MAX, f64::min)
}

fn first_max(x: &[f64]) -> usize {
    let m = hi(x);
    x.iter().position(|&v| v == m).unwrap()
}

fn first_min(x: &[f64]) -> usize {
    let m = lo(x);
    x.iter().position(|&v| v == m).unwrap()
}

/// (maxima, minima) after collapsing runs of equal values.
fn peaks(x: &[f64]) -> (usize, usize) {
    let mut runs = x.to_vec();
    runs.dedup();
    let mut out = (0, 0);
    for w in runs.windows(3) {
        if w[1] > w[0] && w[1] > w[2] {
            out.0 += 1;
        }
        if w[1] < w[0] && w[1] < w[2] {
            out.1 += 1;
        }
    }
    out
}

fn ext(x: &[f64]) -> f64 {
    let (a, b) = peaks(x);
    (a + b) as f64
}

fn maxima(x: &[f64]) -> f64 {
    peaks(x).0 as f64
}

fn minima(x: &[f64]) -> f64 {
    peaks(x).1 as f64
}

fn crossings(x: &[f64]) -> f64 {
    let signs: Vec<bool> = x.iter().filter(|&&v| v != 0.0).map(|&v| v > 0.0).collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count() as f64
}

fn sum_diff(x: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 1..x.len() {
        s += x[i] - x[i - 1];
    }
    s
}

fn safe_div(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        0.0
    } else {
        a / b
    }
}

fn naive_spectral_ratio(f: &[f64], rate: f64, cutoff: f64) -> f64 {
    let n = f.len();
    let m = mean(f);
    let (mut low, mut high) = (0.0, 0.0);
    for k in 1..=n / 2 {
        let (mut re, mut im) = (0.0, 0.0);
        for (i, &v) in f.iter().enumerate() {
            let ang = -2.0 * std::f64::consts::PI * (k * i % n) as f64 / n as f64;
            re += (v - m) * ang.cos();
            im += (v - m) * ang.sin();
        }
        let p = re * re + im * im;
        if (k as f64) * rate / (n as f64) < cutoff {
            low += p;
        } else {
            high += p;
        }
    }
    safe_div(low, high)
}

pub fn oracle(trial: &Trial, opt: &ExtractOptions) -> Vec<f64> {
    let g = Sig::new(trial);
    let t = g.t;
    let p = |k: usize| trial.position[k].samples.clone();
    let a = |k: usize| trial.angles[k].samples.clone();
    let (x, y, z) = (p(0), p(1), p(2));
    let (roll, pitch, yaw) = (a(0), a(1), a(2));
    let f = trial.force.samples.clone();
    let n = f.len();
    let (vx, vy, vz) = (g.d(&x), g.d(&y), g.d(&z));
    let (ax, ay, az) = (g.d(&vx), g.d(&vy), g.d(&vz));
    let jx = g.d(&ax);
    let (v_roll, v_pitch, v_yaw) = (g.d(&roll), g.d(&pitch), g.d(&yaw));
    let j_pitch = g.d(&g.d(&v_pitch));
    let vf = g.d(&f);
    let af = g.d(&vf);
    let jf = g.d(&af);
    let speed: Vec<f64> = (0..n).map(|i| (vx[i].powi(2) + vy[i].powi(2) + vz[i].powi(2)).sqrt()).collect();
    let amag: Vec<f64> = (0..n).map(|i| (ax[i].powi(2) + ay[i].powi(2) + az[i].powi(2)).sqrt()).collect();
    let f_iqr = iqr(&f);
    let consistency = |power: i32, sig: &[f64]| {
        if f_iqr == 0.0 {
            0.0
        } else {
            (t.powi(power) / (2.0 * f_iqr * f_iqr) * g.integral_sq(sig)).sqrt()
        }
    };
    let region = |r: Region| -> f64 { (0..n).filter(|&i| trial.region[i] == r).map(|i| f[i]).sum() };
    let rising = (0..n).filter(|&i| trial.pedal[i] && (i == 0 || !trial.pedal[i - 1])).count();
    let half_max = {
        let top = first_max(&f);
        let m = f[top];
        if m <= 0.0 {
            0.0
        } else {
            let mut l = top;
            while l > 0 && f[l - 1] > m / 2.0 {
                l -= 1;
            }
            let mut r = top;
            while r + 1 < n && f[r + 1] > m / 2.0 {
                r += 1;
            }
            (l..r).map(|i| 0.5 * (f[i] + f[i + 1]) * g.h).sum()
        }
    };

    vec![
        jx.iter().filter(|&&v| v <= 0.0).count() as f64 / n as f64,
        f.iter().filter(|&&v| v > opt.contact_threshold_n).count() as f64,
        safe_div(std(&f), std(&vx)),
        (hi(&vx) - lo(&vx)) * (hi(&vy) - lo(&vy)) * (hi(&vz) - lo(&vz)),
        f_iqr,
        consistency(3, &af),
        sum_diff(&f) / t,
        safe_div(sum_diff(&speed), t * std(&f)),
        g.tf(first_max(&ax)),
        crossings(&vx),
        g.tf(first_min(&ay)),
        g.tf(first_max(&az)),
        ext(&pitch),
        g.tf(first_min(&af)),
        mean(&speed),
        safe_div(std(&f), std(&vz)),
        naive_spectral_ratio(&f, trial.sample_rate_hz, opt.spectral_cutoff_hz),
        g.tf(first_max(&z)),
        ext(&vf),
        minima(&ax),
        minima(&ay),
        maxima(&x) + maxima(&y) + maxima(&z),
        ext(&x),
        ext(&z),
        sum_diff(&pitch) / t,
        sum_diff(&v_roll) / t,
        safe_div(mean(&roll) * t, hi(&v_roll) - lo(&v_roll)),
        minima(&yaw) + minima(&pitch) + minima(&roll),
        ext(&pitch),
        ext(&v_yaw),
        ext(&v_roll),
        g.tf(first_max(&pitch)) - g.tf(first_min(&pitch)),
        rising as f64 / t,
        region(Region::R3),
        ext(&f),
        region(Region::R4),
        hi(&f) - lo(&f),
        std(&f),
        iqr(&x) * iqr(&y) * iqr(&z),
        consistency(1, &vf),
        amag.iter().sum(),
        sum_diff(&amag) / t,
        half_max,
        g.tf(first_min(&ax)),
        g.tf(first_max(&ay)),
        crossings(&vy),
        g.tf(first_min(&az)),
        g.tf(first_max(&af)),
        hi(&speed),
        consistency(5, &jf),
        safe_div(std(&f), std(&vy)),
        minima(&x),
        minima(&vx),
        (first_max(&f) + 1) as f64 / (first_min(&f) + 1) as f64,
        ext(&af),
        safe_div(
            vf.iter().filter(|&&v| v >= 0.0).count() as f64,
            vf.iter().filter(|&&v| v <= 0.0).count() as f64,
        ),
        minima(&x) + minima(&y) + minima(&z),
        ext(&y),
        sum_diff(&yaw),
        sum_diff(&v_pitch) / t,
        safe_div(mean(&pitch) * t, hi(&v_pitch) - lo(&v_pitch)),
        maxima(&yaw) + maxima(&pitch) + maxima(&roll),
        ext(&yaw),
        ext(&roll),
        ext(&v_pitch),
        safe_div(sum_diff(&j_pitch), mean(&j_pitch)),
        g.tf(first_max(&yaw)) - g.tf(first_min(&yaw)),
        region(Region::R1),
    ]
}

/// Random small multi-segment trial. Odd cases come from the generator;
/// even cases overwrite every channel with a quantized random walk so that
/// plateaus, ties and exact zeros occur.
pub fn random_trial(case: u64) -> Trial {
    let mut rng = ChaCha8Rng::seed_from_u64(1000 + case);
    let config = GeneratorConfig {
        n_skilled: 2,
        n_novice: 2,
        delta: rng.random_range(0.0..3.0),
        sample_rate_hz: [20.0, 50.0, 100.0][rng.random_range(0..3)],
        segment_duration_s: rng.random_range(0.3..1.5),
        scenarios: vec![rng.random_range(1..=6)],
        seed: case,
        ..GeneratorConfig::default()
    };
    let specs = config.trial_specs();
    let spec = &specs[rng.random_range(0..specs.len())];
    let mut trial = generate_trial(&config, spec).unwrap();
    if case.is_multiple_of(2) {
        let n = trial.len();
        let mut walk = |step: f64| {
            let mut v = 0.0;
            (0..n)
                .map(|_| {
                    v += (rng.random_range(-2i32..=2) as f64) * step;
                    v
                })
                .collect::<Vec<f64>>()
        };
        for k in 0..3 {
            trial.position[k].samples = walk(0.5);
            trial.angles[k].samples = walk(0.01);
        }
        trial.force.samples = walk(0.1);
        trial.pedal = (0..n).map(|_| rng.random_bool(0.3)).collect();
        let regions = [Region::R1, Region::R2, Region::R3, Region::R4, Region::Background];
        trial.region = (0..n).map(|_| regions[rng.random_range(0..5)]).collect();
    }
    trial
}

pub fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

