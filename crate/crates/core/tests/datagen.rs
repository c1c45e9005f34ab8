use skillgrade::datagen::{describe_ground_truth, generate, generate_features, GeneratorConfig, Perturbations};
use skillgrade::evaluation::{mean_eer_by_classifier, run_grid_with_workers, ExperimentConfig};
use skillgrade::features::{normalize, normalized_jerk, ExtractOptions};
use skillgrade::selection::{premier_subsets, TTestVariant};
use skillgrade::{FeatureId, FeatureMatrix, Label};

fn short(delta: f64, seed: u64, seconds: f64) -> GeneratorConfig {
    GeneratorConfig {
        delta,
        seed,
        segment_duration_s: seconds,
        scenarios: vec![1],
        ..GeneratorConfig::default()
    }
}

fn features(config: &GeneratorConfig) -> FeatureMatrix {
    generate_features(config, &ExtractOptions::default()).unwrap()
}

/// Two-sample Kolmogorov-Smirnov statistic.
fn ks(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

#[test]
fn classes_are_indistinguishable_without_separation() {
    let (mut rejected, mut total) = (0usize, 0usize);
    for seed in 0..10 {
        let m = features(&short(0.0, seed, 8.0));
        for f in FeatureId::all() {
            let col = m.column(f);
            let pick = |l: Label| -> Vec<f64> { (0..m.len()).filter(|&i| m.labels[i] == l).map(|i| col[i]).collect() };
            let (s, n) = (pick(Label::Skilled), pick(Label::Novice));
            let (ns, nn) = (s.len() as f64, n.len() as f64);
            // asymptotic 5% critical value
            if ks(&s, &n) > 1.358 * ((ns + nn) / (ns * nn)).sqrt() {
                rejected += 1;
            }
            total += 1;
        }
    }
    let rate = rejected as f64 / total as f64;
    // the test is conservative on count-valued features, so only the upper
    // side is bounded: 5% plus three binomial standard deviations
    let upper = 0.05 + 3.0 * (0.05f64 * 0.95 / total as f64).sqrt();
    assert!(rate <= upper, "rejection rate {rate}");
}

#[test]
fn working_point_eer_falls_with_separation() {
    let config = ExperimentConfig {
        iterations: 5,
        ..ExperimentConfig::default()
    }
    .working_point_only();
    let mut means = Vec::new();
    for delta in [0.0, 1.0, 3.0] {
        let mut total = 0.0;
        for seed in 0..10 {
            let m = features(&short(delta, seed, 20.0));
            let report = run_grid_with_workers(&m, &config, 1).unwrap();
            let by = mean_eer_by_classifier(&report.cells, config.working_point);
            total += by.values().sum::<f64>() / by.len() as f64;
        }
        means.push(total / 10.0);
    }
    assert!(means[0] >= means[1] && means[1] >= means[2], "{means:?}");
    assert!(means[0] > 0.4, "{means:?}");
}

#[test]
fn strongest_feature_is_a_ground_truth_feature() {
    for seed in 0..10 {
        let config = GeneratorConfig {
            perturbations: Perturbations {
                force_tremor: true,
                ..Perturbations::NONE
            },
            ..short(3.0, seed, 20.0)
        };
        let truth = describe_ground_truth(&config);
        let m = features(&config);
        let all: Vec<usize> = (0..m.len()).collect();
        let p = premier_subsets(&normalize(&m, &all).unwrap(), 0.05, TTestVariant::Welch).unwrap();
        assert!(truth.contains(&p.subsets[&5][0]), "seed {seed}: {:?}", p.subsets[&5]);
    }
}

#[test]
fn novices_move_less_smoothly_at_high_separation() {
    let mut wins = 0;
    for seed in 0..20 {
        let config = GeneratorConfig {
            n_skilled: 4,
            n_novice: 4,
            ..short(3.0, seed, 10.0)
        };
        let ds = generate(&config).unwrap();
        let mean_jerk = |l: Label| {
            let v: Vec<f64> = ds.trials.iter().filter(|t| t.label == l).map(|t| normalized_jerk(t).unwrap().value).collect();
            v.iter().sum::<f64>() / v.len() as f64
        };
        if mean_jerk(Label::Novice) > mean_jerk(Label::Skilled) {
            wins += 1;
        }
    }
    assert!(wins >= 19, "{wins} of 20 seeds");
}

#[test]
fn ground_truth_follows_the_perturbations() {
    let only = |p: Perturbations| describe_ground_truth(&GeneratorConfig { delta: 1.0, perturbations: p, ..GeneratorConfig::default() });
    let id = |i: u8| FeatureId::new(i).unwrap();
    let jitter = only(Perturbations { jitter: true, ..Perturbations::NONE });
    for f in [23, 52, 64] {
        assert!(jitter.contains(&id(f)));
    }
    for f in [34, 36, 68] {
        assert!(!jitter.contains(&id(f)));
    }
    let tremor = only(Perturbations { force_tremor: true, ..Perturbations::NONE });
    for f in [6, 40, 50] {
        assert!(tremor.contains(&id(f)));
    }
    assert!(describe_ground_truth(&GeneratorConfig::default()).is_empty());
}

#[test]
fn same_seed_same_features() {
    let a = features(&short(1.0, 42, 3.0));
    let b = features(&short(1.0, 42, 3.0));
    assert_eq!(a, b);
    let c = features(&short(1.0, 43, 3.0));
    assert_ne!(a.rows[0].values, c.rows[0].values);
}
