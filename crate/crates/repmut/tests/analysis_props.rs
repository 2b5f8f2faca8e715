//! Statistical properties of the analysis layer: the martingale identity for
//! the generator, escape from unstable equilibria under switching, phase-map
//! monotonicity, and censoring behavior of hitting-time estimates.

use repmut::analysis::{classify_basin, estimate_hitting_time, generator_apply, BasinLabel, Direction, HittingSpec};
use repmut::ctmc::{GeneratorQ, Regime, RngStream};
use repmut::dynamics::{fixed_points, MutationRate, TwoTypeGame};
use repmut::hybrid::{SimConfig, SwitchedModel};

fn fig_model(q12: f64, q21: f64) -> SwitchedModel {
    SwitchedModel::new(
        TwoTypeGame::new(0.2, 0.3).unwrap(),
        MutationRate::new(0.01).unwrap(),
        MutationRate::new(0.26).unwrap(),
        GeneratorQ::new(q12, q21).unwrap(),
    )
    .unwrap()
}

/// Dynkin check: V(X_T, r_T) - V(x0, i0) - integral of LV along the path has
/// zero mean. Sampling at every integrator step makes the trapezoid quadrature
/// error unbiased at regime jumps, so the empirical mean should sit within a
/// few standard errors of zero.
#[test]
fn generator_satisfies_martingale_identity() {
    let m = fig_model(10.0, 10.0);
    let config = SimConfig::new(1e-3, 10.0, 1e-3, 1e-12).unwrap();
    let v = |x: f64, r: Regime| {
        let w = match r {
            Regime::R1 => 1.0,
            Regime::R2 => 1.5,
        };
        (w * x * x, 2.0 * w * x)
    };
    let n_paths = 400u64;
    let x0 = 0.3;
    let (v0, _) = v(x0, Regime::R1);
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    for k in 0..n_paths {
        let mut stream = RngStream::new(2024, k);
        let traj = m.simulate(&config, x0, Regime::R1, &mut stream).unwrap();
        let last = traj.samples.last().unwrap();
        let (v_end, _) = v(last.x, last.regime);
        let mut integral = 0.0;
        for pair in traj.samples.windows(2) {
            let g0 = generator_apply(&m, v, pair[0].x, pair[0].regime);
            let g1 = generator_apply(&m, v, pair[1].x, pair[1].regime);
            integral += 0.5 * (pair[1].t - pair[0].t) * (g0 + g1);
        }
        let residual = v_end - v0 - integral;
        sum += residual;
        sumsq += residual * residual;
    }
    let n = n_paths as f64;
    let mean = sum / n;
    let var = ((sumsq - sum * sum / n) / (n - 1.0)).max(0.0);
    let se = (var / n).sqrt();
    assert!(
        mean.abs() <= 3.0 * se + 2e-3,
        "martingale residual mean {mean} exceeds 3 x SE {se}"
    );
}

/// With both regimes active neither a1 nor a3 survives as an equilibrium: the
/// ensemble started next to either one should be pushed well away.
#[test]
fn ensembles_escape_unstable_equilibria() {
    let m = fig_model(10.0, 10.0);
    let game = TwoTypeGame::new(0.2, 0.3).unwrap();
    let fps = fixed_points(&game, MutationRate::new(0.01).unwrap()).unwrap();
    let (a1, a3) = (fps.a1().unwrap(), fps.a3().unwrap());
    let config = SimConfig::new(1e-3, 50.0, 0.5, 1e-12).unwrap();
    for (start, anchor) in [(a1 + 1e-4, a1), (a3 - 1e-4, a3)] {
        let summary = m.ensemble(&config, start, Regime::R1, 200, 99).unwrap();
        let stayed = summary
            .final_x
            .iter()
            .filter(|&&x| (x - anchor).abs() <= 1e-3)
            .count();
        assert!(
            stayed <= 10,
            "{stayed}/200 paths still within 1e-3 of {anchor} after t = 50"
        );
    }
}

/// Scanning initial conditions from low to high, the classifier should never
/// report a lower-basin point above an upper-basin point.
#[test]
fn basin_labels_are_monotone_in_initial_condition() {
    let m = fig_model(10.0, 10.0);
    let config = SimConfig::new(2e-3, 50.0, 0.1, 1e-12).unwrap();
    let grid: Vec<f64> = (1..=19).map(|k| 0.05 * k as f64).collect();
    let report = classify_basin(&m, &config, &grid, Regime::R1, 50, 11).unwrap();
    assert_eq!(report.entries.first().unwrap().label, BasinLabel::LowerBasin);
    assert_eq!(report.entries.last().unwrap().label, BasinLabel::UpperBasin);
    let first_upper = report
        .entries
        .iter()
        .position(|e| e.label == BasinLabel::UpperBasin)
        .unwrap();
    for entry in &report.entries[first_upper..] {
        assert_ne!(
            entry.label,
            BasinLabel::LowerBasin,
            "lower basin at x0 = {} above an upper-basin point",
            entry.x0
        );
    }
}

/// A threshold the dynamics cannot reach within the horizon must be reported
/// as censoring, not silently dropped.
#[test]
fn unreachable_threshold_reports_censoring() {
    let m = fig_model(10.0, 10.0);
    let config = SimConfig::new(1e-3, 100.0, 0.1, 1e-12).unwrap();
    let spec = HittingSpec::new(0.9, Direction::FromLeft, 5.0).unwrap();
    let est = estimate_hitting_time(&m, &config, 0.2, Regime::R1, &spec, 100, 5).unwrap();
    assert!(
        est.fraction_censored >= 0.9,
        "censored fraction {}",
        est.fraction_censored
    );
    assert_eq!(est.n_hits + (est.fraction_censored * 100.0).round() as usize, 100);

    let quick = HittingSpec::new(0.9, Direction::FromRight, 100.0).unwrap();
    let est2 = estimate_hitting_time(&m, &config, 0.99, Regime::R2, &quick, 100, 5).unwrap();
    assert_eq!(est2.fraction_censored, 0.0);
    assert!(est2.mean.unwrap() > 0.0);
    assert!(est2.std_error.unwrap() >= 0.0);
}
