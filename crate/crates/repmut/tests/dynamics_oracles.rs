//! Cross-checks of the closed-form drift algebra against independently coded
//! oracles: polynomial expansion by convolution, synthetic division plus the
//! quadratic formula, and root counting on a dense grid.

use repmut::ctmc::RngStream;
use repmut::dynamics::{
    critical_mu, drift2, drift_n, drift_poly, fixed_points, MutationRate, PayoffMatrix, RootKind,
    SimplexState, TwoTypeGame,
};

fn conv(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    out
}

/// Expand the two factored drift terms with generic polynomial arithmetic.
/// Coefficients ascending in degree.
fn expanded_coeffs(b1: f64, b2: f64, mu: f64) -> [f64; 4] {
    let t1 = conv(&[0.0, b1, 1.0 - b1], &[1.0 - mu, -1.0]);
    let t2 = conv(&conv(&[1.0, -1.0], &[1.0, b2 - 1.0]), &[mu, -1.0]);
    let mut c = [0.0; 4];
    for (k, slot) in c.iter_mut().enumerate() {
        *slot = t1.get(k).copied().unwrap_or(0.0) + t2.get(k).copied().unwrap_or(0.0);
    }
    c
}

#[test]
fn poly_matches_factored_expansion() {
    let mut rng = RngStream::new(0xD15C0, 0);
    for _ in 0..200 {
        let b1 = 0.95 * rng.uniform();
        let b2 = 0.95 * rng.uniform();
        let mu = rng.uniform();
        let game = TwoTypeGame::new(b1, b2).unwrap();
        let cubic = drift_poly(&game, MutationRate::new(mu).unwrap());
        let oracle = expanded_coeffs(b1, b2, mu);
        for k in 0..4 {
            assert!(
                (cubic.c[k] - oracle[k]).abs() <= 1e-12,
                "coefficient {k} mismatch: {} vs oracle {}",
                cubic.c[k],
                oracle[k]
            );
        }
    }
}

#[test]
fn poly_agrees_with_direct_drift() {
    let mut rng = RngStream::new(0xD15C1, 0);
    for _ in 0..100 {
        let game = TwoTypeGame::new(0.95 * rng.uniform(), 0.95 * rng.uniform()).unwrap();
        let mu = MutationRate::new(rng.uniform()).unwrap();
        let cubic = drift_poly(&game, mu);
        for _ in 0..50 {
            let x = rng.uniform();
            let direct = drift2(&game, mu, x);
            assert!(
                (cubic.eval(x) - direct).abs() <= 1e-12,
                "poly/direct mismatch at x = {x}"
            );
        }
    }
}

#[test]
fn boundary_identities_hold_for_random_draws() {
    let mut rng = RngStream::new(0xB0DA2, 0);
    for _ in 0..1000 {
        let game = TwoTypeGame::new(0.999 * rng.uniform(), 0.999 * rng.uniform()).unwrap();
        let mu_val = rng.uniform();
        let mu = MutationRate::new(mu_val).unwrap();
        assert!((drift2(&game, mu, 0.0) - mu_val).abs() <= 1e-14);
        assert!((drift2(&game, mu, 1.0) + mu_val).abs() <= 1e-14);
    }
}

#[test]
fn swap_reflection_antisymmetry() {
    let mut rng = RngStream::new(0x5AFE, 0);
    for _ in 0..500 {
        let game = TwoTypeGame::new(0.95 * rng.uniform(), 0.95 * rng.uniform()).unwrap();
        let swapped = game.swapped();
        let mu = MutationRate::new(rng.uniform()).unwrap();
        let x = rng.uniform();
        let forward = drift2(&game, mu, x);
        let mirrored = drift2(&swapped, mu, 1.0 - x);
        assert!(
            (forward + mirrored).abs() <= 1e-14,
            "reflection broke at x = {x}: {forward} vs {mirrored}"
        );
    }
}

/// A synthetic-division oracle for symmetric games, where x = 1/2 is always an
/// equilibrium: divide the cubic out by (x - 1/2) and solve the remaining
/// quadratic with the cancellation-safe formula.
fn symmetric_outer_roots(b: f64, mu: f64) -> (f64, f64) {
    let c = expanded_coeffs(b, b, mu);
    let r = 0.5;
    let q2 = c[3];
    let q1 = c[2] + r * q2;
    let q0 = c[1] + r * q1;
    let rem = c[0] + r * q0;
    assert!(rem.abs() <= 1e-13, "1/2 should be a root, remainder {rem}");
    let disc = q1 * q1 - 4.0 * q2 * q0;
    assert!(disc > 0.0, "expected two further real roots");
    let sq = disc.sqrt();
    let qq = -0.5 * (q1 + q1.signum() * sq);
    let ra = qq / q2;
    let rb = q0 / qq;
    (ra.min(rb), ra.max(rb))
}

#[test]
fn symmetric_roots_match_quadratic_oracle() {
    let mut rng = RngStream::new(0x0DDB, 0);
    for _ in 0..200 {
        let b = 0.9 * rng.uniform();
        let mu_c = (1.0 - b) / 4.0;
        let mu_val = (0.05 + 0.75 * rng.uniform()) * mu_c;
        let game = TwoTypeGame::new(b, b).unwrap();
        let fps = fixed_points(&game, MutationRate::new(mu_val).unwrap()).unwrap();
        assert_eq!(fps.kind, RootKind::ThreeReal);
        let (lo, hi) = symmetric_outer_roots(b, mu_val);
        assert!((fps.a1().unwrap() - lo).abs() <= 1e-9);
        assert!((fps.a2().unwrap() - 0.5).abs() <= 1e-12);
        assert!((fps.a3().unwrap() - hi).abs() <= 1e-9);
    }
}

/// Count interior equilibria by sign changes of the drift on a dense grid.
fn count_interior_roots(game: &TwoTypeGame, mu_val: f64) -> usize {
    let mu = MutationRate::new(mu_val).unwrap();
    let n = 10_000usize;
    let mut prev = drift2(game, mu, 0.0);
    let mut count = 0;
    for k in 1..=n {
        let x = k as f64 / n as f64;
        let val = drift2(game, mu, x);
        if (prev > 0.0 && val <= 0.0) || (prev < 0.0 && val >= 0.0) {
            count += 1;
        }
        prev = val;
    }
    count
}

#[test]
fn critical_mu_matches_root_count_bisection() {
    let games = [
        (0.2, 0.3),
        (0.2, 0.2),
        (0.0, 0.0),
        (0.5, 0.5),
        (0.35, 0.15),
        (0.05, 0.6),
        (0.7, 0.1),
    ];
    for (b1, b2) in games {
        let game = TwoTypeGame::new(b1, b2).unwrap();
        let mu_c = critical_mu(&game).unwrap();
        let mut lo = 0.25 * mu_c;
        let mut hi = (2.0 * mu_c).min(0.5);
        assert_eq!(count_interior_roots(&game, lo), 3, "bracket low end");
        assert_eq!(count_interior_roots(&game, hi), 1, "bracket high end");
        for _ in 0..40 {
            let mid = 0.5 * (lo + hi);
            if count_interior_roots(&game, mid) >= 3 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let oracle = 0.5 * (lo + hi);
        assert!(
            (oracle - mu_c).abs() <= 5e-6,
            "game ({b1}, {b2}): oracle {oracle} vs {mu_c}"
        );
    }
}

#[test]
fn bifurcation_root_count_consistency() {
    let mut rng = RngStream::new(0xB1F, 0);
    for _ in 0..100 {
        let b1 = 0.05 + 0.85 * rng.uniform();
        let b2 = 0.05 + 0.85 * rng.uniform();
        let game = TwoTypeGame::new(b1, b2).unwrap();
        let mu_c = critical_mu(&game).unwrap();
        let below = fixed_points(&game, MutationRate::new(0.5 * mu_c).unwrap()).unwrap();
        assert_eq!(below.kind, RootKind::ThreeReal, "game ({b1}, {b2})");
        let above = fixed_points(&game, MutationRate::new(1.5 * mu_c).unwrap()).unwrap();
        assert_eq!(above.kind, RootKind::OneReal, "game ({b1}, {b2})");
    }
}

#[test]
fn single_equilibrium_sits_between_outer_roots_of_low_mu_regime() {
    let game = TwoTypeGame::new(0.2, 0.3).unwrap();
    let low = fixed_points(&game, MutationRate::new(0.01).unwrap()).unwrap();
    let high = fixed_points(&game, MutationRate::new(0.26).unwrap()).unwrap();
    let (a1, a2) = (low.a1().unwrap(), low.a2().unwrap());
    let ahat = high.ahat().unwrap();
    assert!(a1 < ahat && ahat < a2, "expected {a1} < {ahat} < {a2}");

    let mirror = game.swapped();
    let low_m = fixed_points(&mirror, MutationRate::new(0.01).unwrap()).unwrap();
    let high_m = fixed_points(&mirror, MutationRate::new(0.26).unwrap()).unwrap();
    let (a2m, a3m) = (low_m.a2().unwrap(), low_m.a3().unwrap());
    let ahat_m = high_m.ahat().unwrap();
    assert!(
        a2m < ahat_m && ahat_m < a3m,
        "expected {a2m} < {ahat_m} < {a3m}"
    );
}

#[test]
fn two_type_reduction_of_general_drift() {
    let mut rng = RngStream::new(0x2D, 0);
    for _ in 0..100 {
        let b1 = 0.05 + 0.9 * rng.uniform();
        let b2 = 0.05 + 0.9 * rng.uniform();
        let game = TwoTypeGame::new(b1, b2).unwrap();
        let payoffs = PayoffMatrix::from_two_type(game);
        let mu = MutationRate::new(rng.uniform()).unwrap();
        let x = 0.01 + 0.98 * rng.uniform();
        let state = SimplexState::new(vec![x, 1.0 - x]).unwrap();
        let vec_drift = drift_n(&payoffs, mu, &state).unwrap();
        let scalar = drift2(&game, mu, x);
        assert!((vec_drift[0] - scalar).abs() <= 1e-12);
        assert!((vec_drift[1] + scalar).abs() <= 1e-12);
    }
}

#[test]
fn simplex_drift_conserves_total_mass() {
    let mut rng = RngStream::new(0x51417, 0);
    for n in 2..=5usize {
        for _ in 0..50 {
            let mut entries = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..n {
                    entries[i * n + j] = if i == j {
                        1.0
                    } else {
                        0.05 + 0.95 * rng.uniform()
                    };
                }
            }
            let payoffs = PayoffMatrix::new(n, entries).unwrap();
            let mut raw: Vec<f64> = (0..n).map(|_| 0.05 + rng.uniform()).collect();
            let total: f64 = raw.iter().sum();
            raw.iter_mut().for_each(|v| *v /= total);
            let shortfall = 1.0 - raw.iter().sum::<f64>();
            raw[0] += shortfall;
            let state = SimplexState::new(raw).unwrap();
            let mu = MutationRate::new(rng.uniform()).unwrap();
            let drift = drift_n(&payoffs, mu, &state).unwrap();
            let sum: f64 = drift.iter().sum();
            assert!(sum.abs() <= 1e-12, "n = {n}: drift sum {sum}");
        }
    }
}
