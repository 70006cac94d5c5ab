//! Monte Carlo invariants of the harness that are not part of the
//! acceptance criteria.

use barstat::harness::{self, aggregate, run_experiment, run_trial, ExperimentConfig, ExperimentKind, Statistic};

#[test]
fn sampled_circles_stabilize_and_cvtsi_is_noisier() {
    let cfg = ExperimentConfig::new(ExperimentKind::SampledCircles, 100, 2024);
    let points = run_experiment(&cfg).unwrap();
    let last_two = |stat| {
        let c = harness::curve(&points, stat);
        let (a, b) = (c[c.len() - 2].1.unwrap(), c[c.len() - 1].1.unwrap());
        (b - a).abs() / a
    };
    let (dt, de) = (last_two(Statistic::Tsi), last_two(Statistic::Entropy));
    assert!(dt <= 0.05, "tsi changes by {dt}");
    assert!(de <= 0.05, "entropy changes by {de}");

    // relative dispersion at every grid point where both are defined
    for cp in points.iter().filter(|cp| cp.statistic == Statistic::Cvtsi) {
        let ent = points
            .iter()
            .find(|e| e.statistic == Statistic::Entropy && e.parameter == cp.parameter)
            .unwrap();
        let rel = |p: &barstat::CurvePoint| p.std.unwrap() / p.mean.unwrap();
        assert!(rel(cp) > rel(ent), "n = {}: cvtsi {} vs entropy {}", cp.parameter, rel(cp), rel(ent));
    }
}

#[test]
fn trial_order_does_not_change_aggregates() {
    let mut cfg = ExperimentConfig::new(ExperimentKind::UniformNoise, 30, 11);
    cfg.parameter_grid = vec![0.4];
    let values: Vec<Vec<Option<f64>>> = (0..cfg.trials).map(|t| run_trial(&cfg, 0.4, t)).collect();
    for (s, _) in cfg.statistics.iter().enumerate() {
        let forward: Vec<f64> = values.iter().filter_map(|v| v[s]).collect();
        let backward: Vec<f64> = forward.iter().rev().copied().collect();
        let (a, b) = (aggregate(&forward).unwrap(), aggregate(&backward).unwrap());
        assert!((a.0 - b.0).abs() <= 1e-12 * a.0.abs() && (a.1 - b.1).abs() <= 1e-12 * a.1.abs().max(1e-300));
        assert_eq!(a.2, b.2);
    }
    let points = run_experiment(&cfg).unwrap();
    let direct: Vec<f64> = values.iter().filter_map(|v| v[0]).collect();
    assert_eq!(points[0].mean, Some(aggregate(&direct).unwrap().0));
}

#[test]
fn uniform_outliers_wash_out_the_signal() {
    let cfg = ExperimentConfig::new(ExperimentKind::UniformNoise, 40, 5);
    let points = run_experiment(&cfg).unwrap();
    let t: Vec<f64> = harness::curve(&points, Statistic::Tsi).into_iter().map(|(_, m)| m.unwrap()).collect();
    let e: Vec<f64> = harness::curve(&points, Statistic::Entropy).into_iter().map(|(_, m)| m.unwrap()).collect();
    assert!(t.first() > t.last() && e.first() < e.last(), "tsi {t:?}, entropy {e:?}");
}

#[test]
fn intertwined_circles_show_three_loops() {
    let mut cfg = ExperimentConfig::new(ExperimentKind::IntertwinedCircles, 1, 0);
    cfg.parameter_grid = vec![96.0];
    let b = harness::trial_barcode(&cfg, 96.0, 0).unwrap();
    let big = b.lifetimes().iter().filter(|&&l| l > 0.2).count();
    assert_eq!(big, 3, "{:?}", b.lifetimes());
}
