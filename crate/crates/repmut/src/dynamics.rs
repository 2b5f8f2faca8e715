//! Deterministic replicator-mutator vector fields.
//!
//! The population state lives on the probability simplex. Selection acts through a
//! payoff matrix with unit diagonal and off-diagonal entries in [0, 1); mutation
//! redistributes offspring according to a row-stochastic matrix derived from the
//! payoffs and a mutation rate `mu`. For two types the dynamic collapses to a
//! scalar ODE on [0, 1] whose right-hand side is an exact cubic in the frequency
//! of the first type. Fixed points come from the closed-form cubic solution plus a
//! Newton polish against the factored drift; the saddle-node threshold in `mu` is
//! located by bisection on the sign of the cubic discriminant.

use serde::Serialize;
use std::fmt;

/// Discriminant magnitudes below this are treated as a degenerate (coincident-root)
/// cubic rather than classified.
pub const DEGENERATE_DISCRIMINANT_TOL: f64 = 1e-10;
/// Roots within this distance outside [0, 1] are admitted and clamped onto the interval.
pub const ROOT_INCLUSION_TOL: f64 = 1e-9;
/// A fixed-point derivative smaller than this cannot be classified as stable/unstable.
pub const STABILITY_DERIV_TOL: f64 = 1e-9;
/// Residual target for the Newton polish of cubic roots.
const NEWTON_RESIDUAL_TOL: f64 = 1e-12;
const NEWTON_MAX_STEPS: usize = 10;
/// Absolute tolerance on the bisection locating the critical mutation rate.
const CRITICAL_MU_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum DynamicsError {
    /// A constructor argument violated its numeric constraint.
    InvalidParam {
        field: &'static str,
        value: f64,
        requirement: &'static str,
    },
    /// State vector length does not match the payoff matrix dimension.
    DimensionMismatch { expected: usize, got: usize },
    /// The drift cubic has (numerically) coincident roots, so fixed points cannot
    /// be counted or classified. Carries the offending discriminant.
    DegenerateBifurcation { mu: f64, discriminant: f64 },
    /// Internal failure: the root finder produced an impossible root count in [0, 1].
    NoRootInUnitInterval,
    /// The discriminant has the same sign at both ends of the search interval.
    BisectionBracketFailure { lo: f64, hi: f64 },
}

impl fmt::Display for DynamicsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DynamicsError::InvalidParam {
                field,
                value,
                requirement,
            } => write!(f, "invalid {field}: {requirement} (got {value})"),
            DynamicsError::DimensionMismatch { expected, got } => {
                write!(f, "state has {got} components, payoff matrix expects {expected}")
            }
            DynamicsError::DegenerateBifurcation { mu, discriminant } => write!(
                f,
                "drift cubic is degenerate at mu = {mu} (discriminant {discriminant:e}); \
                 fixed points cannot be classified"
            ),
            DynamicsError::NoRootInUnitInterval => {
                write!(f, "internal error: no admissible root of the drift cubic in [0, 1]")
            }
            DynamicsError::BisectionBracketFailure { lo, hi } => write!(
                f,
                "cannot bracket the critical mutation rate: discriminant has the same sign \
                 at mu = {lo} and mu = {hi}"
            ),
        }
    }
}

impl std::error::Error for DynamicsError {}

/// Mutation probability, constrained to [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MutationRate(f64);

impl MutationRate {
    pub fn new(mu: f64) -> Result<Self, DynamicsError> {
        if !(0.0..=1.0).contains(&mu) || !mu.is_finite() {
            return Err(DynamicsError::InvalidParam {
                field: "mu",
                value: mu,
                requirement: "mutation rate must lie in [0, 1]",
            });
        }
        Ok(MutationRate(mu))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Two-type normalized payoffs: both diagonal entries are 1, `b1` is the payoff of
/// type 1 against type 2 and `b2` the payoff of type 2 against type 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoTypeGame {
    b1: f64,
    b2: f64,
}

impl TwoTypeGame {
    pub fn new(b1: f64, b2: f64) -> Result<Self, DynamicsError> {
        for (field, v) in [("b1", b1), ("b2", b2)] {
            if !(0.0..1.0).contains(&v) || !v.is_finite() {
                return Err(DynamicsError::InvalidParam {
                    field,
                    value: v,
                    requirement: "off-diagonal payoff must lie in [0, 1)",
                });
            }
        }
        Ok(TwoTypeGame { b1, b2 })
    }

    pub fn b1(self) -> f64 {
        self.b1
    }

    pub fn b2(self) -> f64 {
        self.b2
    }

    /// Game with the two types' roles exchanged.
    pub fn swapped(self) -> TwoTypeGame {
        TwoTypeGame {
            b1: self.b2,
            b2: self.b1,
        }
    }
}

/// Square payoff matrix with unit diagonal and off-diagonal entries in [0, 1).
/// Stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PayoffMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl PayoffMatrix {
    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self, DynamicsError> {
        if n < 2 {
            return Err(DynamicsError::InvalidParam {
                field: "n",
                value: n as f64,
                requirement: "payoff matrix needs at least 2 types",
            });
        }
        if entries.len() != n * n {
            return Err(DynamicsError::DimensionMismatch {
                expected: n * n,
                got: entries.len(),
            });
        }
        for i in 0..n {
            for j in 0..n {
                let v = entries[i * n + j];
                if i == j {
                    if v != 1.0 {
                        return Err(DynamicsError::InvalidParam {
                            field: "diagonal",
                            value: v,
                            requirement: "diagonal payoffs must equal 1",
                        });
                    }
                } else if !(0.0..1.0).contains(&v) || !v.is_finite() {
                    return Err(DynamicsError::InvalidParam {
                        field: "off-diagonal",
                        value: v,
                        requirement: "off-diagonal payoff must lie in [0, 1)",
                    });
                }
            }
        }
        Ok(PayoffMatrix { n, entries })
    }

    /// The 2x2 matrix [[1, b1], [b2, 1]] of a two-type game.
    pub fn from_two_type(game: TwoTypeGame) -> PayoffMatrix {
        PayoffMatrix {
            n: 2,
            entries: vec![1.0, game.b1, game.b2, 1.0],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }
}

/// Point on the probability simplex: components in [0, 1] summing to 1 within 1e-12.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexState(Vec<f64>);

impl SimplexState {
    pub fn new(x: Vec<f64>) -> Result<Self, DynamicsError> {
        for &v in &x {
            if !(0.0..=1.0).contains(&v) || !v.is_finite() {
                return Err(DynamicsError::InvalidParam {
                    field: "x",
                    value: v,
                    requirement: "simplex components must lie in [0, 1]",
                });
            }
        }
        let sum: f64 = x.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(DynamicsError::InvalidParam {
                field: "x",
                value: sum,
                requirement: "simplex components must sum to 1 within 1e-12",
            });
        }
        Ok(SimplexState(x))
    }

    pub fn components(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Row-stochastic mutation kernel built from a payoff matrix. Rows whose
/// off-diagonal payoffs are all zero carry no outward mutation pressure and are
/// replaced by identity rows; their indices are reported in `identity_rows`.
#[derive(Debug, Clone, PartialEq)]
pub struct MutationMatrix {
    n: usize,
    p: Vec<f64>,
    pub identity_rows: Vec<usize>,
}

impl MutationMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.p[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.p[i * self.n..(i + 1) * self.n]
    }
}

/// Mutation kernel: off-diagonal mass `mu` split proportionally to the payoffs
/// against the other types, `1 - mu` retained on the diagonal.
pub fn mutation_matrix(payoffs: &PayoffMatrix, mu: MutationRate) -> MutationMatrix {
    let n = payoffs.n;
    let mu = mu.value();
    let mut p = vec![0.0; n * n];
    let mut identity_rows = Vec::new();
    for i in 0..n {
        let denom: f64 = (0..n)
            .filter(|&k| k != i)
            .map(|k| payoffs.get(i, k))
            .sum();
        if denom == 0.0 {
            p[i * n + i] = 1.0;
            identity_rows.push(i);
        } else {
            for j in 0..n {
                p[i * n + j] = if i == j {
                    1.0 - mu
                } else {
                    mu * payoffs.get(i, j) / denom
                };
            }
        }
    }
    MutationMatrix {
        n,
        p,
        identity_rows,
    }
}

/// Replicator-mutator vector field on the n-simplex:
/// `dx_i = sum_j p_ji x_j f_j - x_i phi` with fitness `f_j = (Bx)_j` and mean
/// fitness `phi = sum_j x_j f_j`. Components sum to zero, so the simplex is
/// preserved.
pub fn drift_n(
    payoffs: &PayoffMatrix,
    mu: MutationRate,
    x: &SimplexState,
) -> Result<Vec<f64>, DynamicsError> {
    let n = payoffs.n;
    if x.len() != n {
        return Err(DynamicsError::DimensionMismatch {
            expected: n,
            got: x.len(),
        });
    }
    let p = mutation_matrix(payoffs, mu);
    let xs = x.components();
    let fitness: Vec<f64> = (0..n)
        .map(|j| (0..n).map(|k| payoffs.get(j, k) * xs[k]).sum())
        .collect();
    let mean_fitness: f64 = (0..n).map(|j| xs[j] * fitness[j]).sum();
    Ok((0..n)
        .map(|i| {
            let inflow: f64 = (0..n).map(|j| p.get(j, i) * xs[j] * fitness[j]).sum();
            inflow - xs[i] * mean_fitness
        })
        .collect())
}

/// Scalar two-type drift in the frequency `x` of type 1. Exactly `mu` at `x = 0`
/// and `-mu` at `x = 1`, so the boundary always flows inward for `mu > 0`.
pub fn drift2(game: &TwoTypeGame, mu: MutationRate, x: f64) -> f64 {
    let mu = mu.value();
    x * (game.b1 + x * (1.0 - game.b1)) * ((1.0 - mu) - x)
        + (1.0 - x) * (1.0 + x * (game.b2 - 1.0)) * (mu - x)
}

/// The two-type drift written as a cubic `c0 + c1 x + c2 x^2 + c3 x^3`.
/// Always `c0 = mu` and `c3 = b1 + b2 - 2 < 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftCubic {
    pub c: [f64; 4],
}

impl DriftCubic {
    pub fn eval(&self, x: f64) -> f64 {
        let [c0, c1, c2, c3] = self.c;
        c0 + x * (c1 + x * (c2 + x * c3))
    }

    pub fn deriv(&self, x: f64) -> f64 {
        let [_, c1, c2, c3] = self.c;
        c1 + x * (2.0 * c2 + x * 3.0 * c3)
    }

    /// Discriminant of the full cubic; positive iff three distinct real roots.
    pub fn discriminant(&self) -> f64 {
        let [d, c, b, a] = self.c;
        18.0 * a * b * c * d - 4.0 * b * b * b * d + b * b * c * c
            - 4.0 * a * c * c * c
            - 27.0 * a * a * d * d
    }
}

/// Expand the two-type drift into its cubic coefficients.
pub fn drift_poly(game: &TwoTypeGame, mu: MutationRate) -> DriftCubic {
    let (b1, b2) = (game.b1, game.b2);
    let mu = mu.value();
    DriftCubic {
        c: [
            mu,
            b1 * (1.0 - mu) + mu * (b2 - 2.0) - 1.0,
            (1.0 - b1) * (1.0 - mu) - b1 - (mu + 1.0) * (b2 - 1.0) + 1.0,
            b1 + b2 - 2.0,
        ],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Stability {
    Stable,
    Unstable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RootKind {
    /// Bistable regime: three interior equilibria, outer two stable.
    ThreeReal,
    /// Past the fold: a single globally attracting equilibrium.
    OneReal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FixedPoint {
    pub location: f64,
    pub stability: Stability,
}

/// Equilibria of the two-type drift inside [0, 1], sorted by location.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPointSet {
    pub kind: RootKind,
    pub points: Vec<FixedPoint>,
}

impl FixedPointSet {
    /// Lower stable equilibrium (three-root regime only).
    pub fn a1(&self) -> Option<f64> {
        match self.kind {
            RootKind::ThreeReal => Some(self.points[0].location),
            RootKind::OneReal => None,
        }
    }

    /// Interior unstable separator (three-root regime only).
    pub fn a2(&self) -> Option<f64> {
        match self.kind {
            RootKind::ThreeReal => Some(self.points[1].location),
            RootKind::OneReal => None,
        }
    }

    /// Upper stable equilibrium (three-root regime only).
    pub fn a3(&self) -> Option<f64> {
        match self.kind {
            RootKind::ThreeReal => Some(self.points[2].location),
            RootKind::OneReal => None,
        }
    }

    /// The unique equilibrium past the fold.
    pub fn ahat(&self) -> Option<f64> {
        match self.kind {
            RootKind::OneReal => Some(self.points[0].location),
            RootKind::ThreeReal => None,
        }
    }
}

/// Real roots of a cubic with nonzero leading coefficient, via the trigonometric
/// form (three real) or a cancellation-safe Cardano (one real). Callers are
/// expected to have screened out near-zero discriminants.
fn cubic_roots(c: &DriftCubic) -> Vec<f64> {
    let [d, cc, b, a] = c.c;
    let bb = b / a;
    let ccc = cc / a;
    let dd = d / a;
    // depressed form t^3 + p t + q, x = t - bb/3
    let p = ccc - bb * bb / 3.0;
    let q = 2.0 * bb * bb * bb / 27.0 - bb * ccc / 3.0 + dd;
    let shift = -bb / 3.0;
    let depressed_disc = -4.0 * p * p * p - 27.0 * q * q;
    if depressed_disc > 0.0 {
        // three real roots; p < 0 is implied
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (2.0 * p)) * (-3.0 / p).sqrt();
        let phi = arg.clamp(-1.0, 1.0).acos();
        (0..3)
            .map(|k| m * ((phi - 2.0 * std::f64::consts::PI * k as f64) / 3.0).cos() + shift)
            .collect()
    } else {
        let s = (q * q / 4.0 + p * p * p / 27.0).max(0.0).sqrt();
        let u = -(q / 2.0 + s.copysign(q));
        let uc = u.cbrt();
        let t = if uc == 0.0 { 0.0 } else { uc - p / (3.0 * uc) };
        vec![t + shift]
    }
}

/// All equilibria of the two-type drift in [0, 1] with stability labels.
///
/// Roots come from the closed-form cubic solution, are polished by at most 10
/// Newton steps against the factored drift (residual target 1e-12), admitted if
/// within 1e-9 of [0, 1], and clamped onto it. Stability is the sign of the
/// analytic cubic derivative; derivatives within 1e-9 of zero, like discriminants
/// within 1e-10 of zero, are reported as a degenerate bifurcation.
pub fn fixed_points(game: &TwoTypeGame, mu: MutationRate) -> Result<FixedPointSet, DynamicsError> {
    let cubic = drift_poly(game, mu);
    let disc = cubic.discriminant();
    if disc.abs() < DEGENERATE_DISCRIMINANT_TOL {
        return Err(DynamicsError::DegenerateBifurcation {
            mu: mu.value(),
            discriminant: disc,
        });
    }
    let mut roots: Vec<f64> = cubic_roots(&cubic)
        .into_iter()
        .map(|r| polish_root(game, mu, &cubic, r))
        .filter(|r| (-ROOT_INCLUSION_TOL..=1.0 + ROOT_INCLUSION_TOL).contains(r))
        .map(|r| r.clamp(0.0, 1.0))
        .collect();
    roots.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let kind = match roots.len() {
        3 => RootKind::ThreeReal,
        1 => RootKind::OneReal,
        _ => return Err(DynamicsError::NoRootInUnitInterval),
    };
    let mut points = Vec::with_capacity(roots.len());
    for r in roots {
        let deriv = cubic.deriv(r);
        if deriv.abs() < STABILITY_DERIV_TOL {
            return Err(DynamicsError::DegenerateBifurcation {
                mu: mu.value(),
                discriminant: disc,
            });
        }
        points.push(FixedPoint {
            location: r,
            stability: if deriv < 0.0 {
                Stability::Stable
            } else {
                Stability::Unstable
            },
        });
    }
    Ok(FixedPointSet { kind, points })
}

fn polish_root(game: &TwoTypeGame, mu: MutationRate, cubic: &DriftCubic, mut x: f64) -> f64 {
    for _ in 0..NEWTON_MAX_STEPS {
        let f = drift2(game, mu, x);
        if f.abs() < NEWTON_RESIDUAL_TOL {
            break;
        }
        let df = cubic.deriv(x);
        if df == 0.0 {
            break;
        }
        x -= f / df;
    }
    x
}

/// Mutation rate at which the bistable regime collapses to a single equilibrium.
///
/// Symmetric games (`b1 == b2`, bitwise) take the exact pitchfork value
/// `(1 - b1) / 4`; otherwise the fold is located by bisection on the sign of the
/// cubic discriminant over mu in [0, 1], to absolute tolerance 1e-10.
pub fn critical_mu(game: &TwoTypeGame) -> Result<f64, DynamicsError> {
    if game.b1 == game.b2 {
        return Ok((1.0 - game.b1) * 0.25);
    }
    let disc_at = |mu: f64| drift_poly(game, MutationRate(mu)).discriminant();
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let d_lo = disc_at(lo);
    let d_hi = disc_at(hi);
    if d_lo.signum() == d_hi.signum() {
        return Err(DynamicsError::BisectionBracketFailure { lo, hi });
    }
    while hi - lo > CRITICAL_MU_TOL {
        let mid = 0.5 * (lo + hi);
        if disc_at(mid).signum() == d_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
