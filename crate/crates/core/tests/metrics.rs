use std::f64::consts::PI;

use proptest::prelude::*;
use skillgrade::features::{
    extract_features, force_consistency_metrics, iav, iav_window, normalize, normalized_jerk,
};
use skillgrade::signal::{differentiate, speed};
use skillgrade::{Channel, FeatureMatrix, Label, Trial};

fn sample(rate: f64, duration: f64, f: impl Fn(f64) -> [f64; 3]) -> [Vec<f64>; 3] {
    let n = (duration * rate).round() as usize + 1;
    let mut out = [Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n)];
    for i in 0..n {
        let p = f(i as f64 / rate);
        for k in 0..3 {
            out[k].push(p[k]);
        }
    }
    out
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Minimum-jerk reach of amplitude `a` over `t` seconds.
fn min_jerk(a: f64, t: f64) -> impl Fn(f64) -> [f64; 3] {
    move |s| {
        let u = s / t;
        let x = a * (10.0 * u.powi(3) - 15.0 * u.powi(4) + 6.0 * u.powi(5));
        [x, 0.5 * x, 0.0]
    }
}

/// Composite Simpson rule on `n` (even) panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn iav_of_uniform_circular_motion() {
    let (r, w, t) = (25.0, 2.0, 3.0);
    let trial = Trial::from_positions(100.0, sample(100.0, t, |s| [r * (w * s).cos(), r * (w * s).sin(), 4.0]));
    let got = iav(&trial).unwrap();
    assert!(rel(got, r * w * w * t) < 0.01, "{got}");
}

#[test]
fn normalized_jerk_of_minimum_jerk_reach() {
    // One reach spanning a default-length segment. The composed boundary
    // stencils bias the value by roughly 6 / (number of samples).
    let (amp, t) = (40.0, 180.0);
    let trial = Trial::from_positions(100.0, sample(100.0, t, min_jerk(amp, t)));
    // the reach is straight, so the path length is its amplitude
    let path = amp * (1.25f64).sqrt();
    let jerk = |s: f64| {
        let u = s / t;
        path * (60.0 - 360.0 * u + 360.0 * u * u) / t.powi(3)
    };
    let oracle = (t.powi(5) / (2.0 * path * path) * simpson(|s| jerk(s).powi(2), 0.0, t, 20_000)).sqrt();
    assert!(rel(oracle, 360f64.sqrt()) < 1e-9);
    let got = normalized_jerk(&trial).unwrap().value;
    assert!(rel(got, oracle) < 1e-3, "{got} vs {oracle}");
}

#[test]
fn force_metric_of_unit_ramp() {
    let f: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
    let m = force_consistency_metrics(&Trial::from_force(100.0, f)).unwrap();
    assert!(rel(m.df, 2f64.sqrt()) < 0.01, "{}", m.df);
}

#[test]
fn normalization_three_point_example() {
    let m = FeatureMatrix::from_values(
        vec![vec![1.0], vec![2.0], vec![4.0]],
        vec![Label::Skilled, Label::Novice, Label::Novice],
    )
    .unwrap();
    let z = normalize(&m, &[0, 1, 2]).unwrap();
    let want = [(-0.25f64).exp(), (-0.5f64).exp(), (-1.0f64).exp()];
    for (row, w) in z.rows.iter().zip(want) {
        assert!((row.values[0] - w).abs() < 1e-12);
    }
}

fn smooth_motion(scale: f64, stretch: f64) -> impl Fn(f64) -> [f64; 3] {
    move |s| {
        let u = s / stretch;
        [
            scale * (10.0 * (0.7 * u).sin() + 3.0 * (1.9 * u).cos()),
            scale * (8.0 * (0.45 * u).cos() + 0.5 * u * u),
            scale * (2.0 * (1.3 * u + 0.4).sin()),
        ]
    }
}

#[test]
fn normalized_jerk_ignores_spatial_and_time_scale() {
    let base = normalized_jerk(&Trial::from_positions(100.0, sample(100.0, 6.0, smooth_motion(1.0, 1.0))))
        .unwrap()
        .value;
    let scaled = normalized_jerk(&Trial::from_positions(100.0, sample(100.0, 12.0, smooth_motion(3.0, 2.0))))
        .unwrap()
        .value;
    assert!(rel(scaled, base) < 1e-3, "{scaled} vs {base}");
}

#[test]
fn iav_adds_over_halves() {
    let trial = Trial::from_positions(100.0, sample(100.0, 4.0, smooth_motion(2.0, 1.0)));
    let n = trial.len();
    let mid = n / 2;
    let whole = iav(&trial).unwrap();
    let parts = iav_window(&trial, 0..mid + 1).unwrap() + iav_window(&trial, mid..n).unwrap();
    assert!(rel(parts, whole) < 1e-6);
}

#[test]
fn second_derivative_composes_on_cubics() {
    let c = Channel::new("c", 50.0, (0..200).map(|i| {
        let t = i as f64 / 50.0;
        2.0 - t + 0.5 * t * t - 0.3 * t * t * t
    }).collect());
    let once = differentiate(&differentiate(&c, 1).unwrap(), 1).unwrap();
    let twice = differentiate(&c, 2).unwrap();
    for (a, b) in once.samples.iter().zip(&twice.samples) {
        assert!((a - b).abs() <= 1e-6 * b.abs().max(1.0));
    }
    // interior second derivative is exact up to the stencil's O(h^2) term
    let t = 1.0;
    let exact = 1.0 - 1.8 * t;
    assert!((twice.samples[50] - exact).abs() < 1e-2);
}

fn force_trial(force: Vec<f64>) -> Trial {
    Trial::from_force(100.0, force)
}

prop_compose! {
    fn force_signal()(len in 8usize..200, seed in any::<u64>()) -> Vec<f64> {
        let mut state = seed | 1;
        (0..len).map(|i| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            0.5 + (i as f64 * 0.1).sin() + (state % 1000) as f64 / 2000.0
        }).collect()
    }
}

proptest! {
    #[test]
    fn force_metrics_ignore_force_scale(f in force_signal(), s in 0.01f64..50.0) {
        let a = force_consistency_metrics(&force_trial(f.clone())).unwrap();
        let b = force_consistency_metrics(&force_trial(f.iter().map(|v| v * s).collect())).unwrap();
        for (x, y) in [(a.df, b.df), (a.d2f, b.d2f), (a.d3f, b.d3f)] {
            prop_assert!((x - y).abs() <= 1e-9 * x.abs().max(1e-300), "{} vs {}", x, y);
        }
    }

    #[test]
    fn differentiation_is_linear(
        u in prop::collection::vec(-100.0f64..100.0, 5..60),
        a in -5.0f64..5.0,
        b in -5.0f64..5.0,
    ) {
        let v: Vec<f64> = u.iter().enumerate().map(|(i, x)| x * 0.3 - i as f64).collect();
        let w: Vec<f64> = u.iter().zip(&v).map(|(x, y)| a * x + b * y).collect();
        let d = |x: &[f64]| differentiate(&Channel::new("c", 20.0, x.to_vec()), 1).unwrap().samples;
        let (du, dv, dw) = (d(&u), d(&v), d(&w));
        for i in 0..u.len() {
            let want = a * du[i] + b * dv[i];
            prop_assert!((dw[i] - want).abs() <= 1e-9 * (a.abs() * du[i].abs() + b.abs() * dv[i].abs()).max(1.0));
        }
    }

    #[test]
    fn speed_ignores_rigid_rotation(
        yaw in 0.0f64..(2.0 * PI),
        pitch in 0.0f64..PI,
        shift in prop::array::uniform3(-50.0f64..50.0),
    ) {
        let pos = sample(50.0, 2.0, smooth_motion(1.0, 1.0));
        let (cy, sy, cp, sp) = (yaw.cos(), yaw.sin(), pitch.cos(), pitch.sin());
        let rot = |p: [f64; 3]| {
            let x1 = cy * p[0] - sy * p[1];
            let y1 = sy * p[0] + cy * p[1];
            [cp * x1 + sp * p[2] + shift[0], y1 + shift[1], -sp * x1 + cp * p[2] + shift[2]]
        };
        let mut moved = [Vec::new(), Vec::new(), Vec::new()];
        for ((x, y), z) in pos[0].iter().zip(&pos[1]).zip(&pos[2]) {
            for (axis, v) in moved.iter_mut().zip(rot([*x, *y, *z])) {
                axis.push(v);
            }
        }
        let ch = |p: &[Vec<f64>; 3]| [
            Channel::new("x", 50.0, p[0].clone()),
            Channel::new("y", 50.0, p[1].clone()),
            Channel::new("z", 50.0, p[2].clone()),
        ];
        let a = speed(&ch(&pos)).unwrap().samples;
        let b = speed(&ch(&moved)).unwrap().samples;
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-9 * x.max(1.0));
        }
    }

    #[test]
    fn normalization_is_decreasing(values in prop::collection::vec(-1e3f64..1e3, 2..40)) {
        let n = values.len();
        let labels = (0..n).map(|i| if i % 2 == 0 { Label::Skilled } else { Label::Novice }).collect();
        let m = FeatureMatrix::from_values(values.iter().map(|&v| vec![v]).collect(), labels).unwrap();
        let train: Vec<usize> = (0..n).collect();
        let z = normalize(&m, &train).unwrap();
        for a in 0..n {
            for b in 0..n {
                if values[a] < values[b] {
                    prop_assert!(z.rows[a].values[0] > z.rows[b].values[0]);
                }
            }
        }
    }
}

#[test]
fn extraction_is_deterministic() {
    let pos = sample(100.0, 3.0, smooth_motion(1.5, 1.0));
    let trial = Trial::from_positions(100.0, pos);
    let a = extract_features(&trial).unwrap();
    let b = extract_features(&trial.clone()).unwrap();
    let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&a.values), bits(&b.values));
}
