//! Estimators and drift certificates built on top of the hybrid simulator.
//!
//! The extended generator of the switched process acts on a function V(x, i) as
//! LV(x,i) = V'(x,i) f_i(x) + q_i (V(x,j) - V(x,i)), with f_i the active drift
//! and q_i the exit rate of regime i. `generator_apply` evaluates this for any
//! closure supplying (V, V'); `LyapunovSpec` packages the handful of closed
//! families used to certify negative drift near the fixed points, and
//! `find_negative_drift_region` / `find_certificate` search for regions where
//! max_i LV < 0 with a certified margin kappa.
//!
//! The Monte Carlo estimators (hitting times, occupation histograms, moment
//! curves, basin classification) are pure reductions over seeded ensembles, so
//! their output is bit-identical for any worker count.

use crate::ctmc::Regime;
use crate::dynamics::{fixed_points, DynamicsError, RootKind};
use crate::format_g17;
use crate::hybrid::{fold_paths, HybridError, SimConfig, SwitchedModel};
use serde::Serialize;
use std::fmt;
use std::io::{self, Write};

/// Default Lyapunov weights; the searches below fall back to a log grid around
/// them when these fail.
pub const DEFAULT_C1: f64 = 1.01;
pub const DEFAULT_C2: f64 = 1.0;
pub const DEFAULT_ALPHA: f64 = 0.5;

/// A path counts as confined to one side of the separator when all of its
/// post-burn-in samples are there; a basin label needs this fraction of paths.
pub const BASIN_CONFINEMENT_THRESHOLD: f64 = 0.95;
/// Transit needs a majority of paths starting above the separator and ending below.
pub const BASIN_TRANSIT_MAJORITY: f64 = 0.5;
/// Classification discards the first half of every path.
pub const BASIN_BURN_IN_FRACTION: f64 = 0.5;

#[derive(Debug)]
pub enum AnalysisError {
    InvalidParam {
        field: &'static str,
        value: f64,
        requirement: &'static str,
    },
    /// Evaluation point outside the Lyapunov family's domain.
    DomainError { x: f64, requirement: &'static str },
    /// Initial state on the wrong side of the hitting threshold.
    WrongSide {
        x0: f64,
        threshold: f64,
        direction: Direction,
    },
    /// The regime-1 cubic has no unstable interior separator.
    NoSeparator { mu: f64 },
    Hybrid(HybridError),
    Dynamics(DynamicsError),
}

impl fmt::Display for AnalysisError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnalysisError::InvalidParam {
                field,
                value,
                requirement,
            } => write!(f, "invalid {field}: {requirement} (got {value})"),
            AnalysisError::DomainError { x, requirement } => {
                write!(f, "x = {x} outside the function's domain: {requirement}")
            }
            AnalysisError::WrongSide {
                x0,
                threshold,
                direction,
            } => write!(
                f,
                "x0 = {x0} is on the wrong side of threshold {threshold} for direction {direction}"
            ),
            AnalysisError::NoSeparator { mu } => write!(
                f,
                "no separator: the cubic at mu = {mu} does not have three interior roots"
            ),
            AnalysisError::Hybrid(e) => write!(f, "{e}"),
            AnalysisError::Dynamics(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for AnalysisError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            AnalysisError::Hybrid(e) => Some(e),
            AnalysisError::Dynamics(e) => Some(e),
            _ => None,
        }
    }
}

impl From<HybridError> for AnalysisError {
    fn from(e: HybridError) -> Self {
        AnalysisError::Hybrid(e)
    }
}

impl From<DynamicsError> for AnalysisError {
    fn from(e: DynamicsError) -> Self {
        AnalysisError::Dynamics(e)
    }
}

/// Shape of the test function V(x, i) around an anchor point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LyapunovFamily {
    /// V_i = -c_i ln(x - a); blows up as x decreases to a.
    NegLogX,
    /// V_i = -c_i ln(a - x); blows up as x increases to a.
    NegLogOneMinusX,
    /// V_i = w_i (x - a)^(-alpha) on x > a.
    PowerLowerBlowup,
    /// V_i = w_i (a - x)^(-alpha) on x < a.
    PowerUpperBlowup,
    /// V_i = w_i |x - a|^alpha, vanishing at the anchor.
    PowerContact,
}

/// Sign in the power-family weights w_i = 1 +/- alpha c_i. Both conventions
/// appear in practice; Minus additionally needs 1 - alpha c_i > 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum WeightSign {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LyapunovSpec {
    family: LyapunovFamily,
    anchor: f64,
    alpha: f64,
    c1: f64,
    c2: f64,
    weight_sign: WeightSign,
}

impl LyapunovSpec {
    pub fn new(
        family: LyapunovFamily,
        anchor: f64,
        alpha: f64,
        c1: f64,
        c2: f64,
        weight_sign: WeightSign,
    ) -> Result<Self, AnalysisError> {
        if !anchor.is_finite() {
            return Err(AnalysisError::InvalidParam {
                field: "anchor",
                value: anchor,
                requirement: "anchor must be finite",
            });
        }
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(AnalysisError::InvalidParam {
                field: "alpha",
                value: alpha,
                requirement: "exponent must be finite and > 0",
            });
        }
        for (field, c) in [("c1", c1), ("c2", c2)] {
            if !c.is_finite() || c <= 0.0 {
                return Err(AnalysisError::InvalidParam {
                    field,
                    value: c,
                    requirement: "weight must be finite and > 0",
                });
            }
        }
        match family {
            LyapunovFamily::NegLogX | LyapunovFamily::NegLogOneMinusX => {
                // the switching term at the drift's zero is negative only when c1 > c2
                if c1 <= c2 {
                    return Err(AnalysisError::InvalidParam {
                        field: "c1",
                        value: c1,
                        requirement: "log families need c1 > c2 > 0",
                    });
                }
            }
            _ => {
                if weight_sign == WeightSign::Minus && 1.0 - alpha * c1.max(c2) <= 0.0 {
                    return Err(AnalysisError::InvalidParam {
                        field: "alpha",
                        value: alpha,
                        requirement: "Minus weights need 1 - alpha*c_i > 0 for both states",
                    });
                }
            }
        }
        Ok(LyapunovSpec {
            family,
            anchor,
            alpha,
            c1,
            c2,
            weight_sign,
        })
    }

    /// The default weights (c1, c2, alpha) = (1.01, 1.0, 0.5) with Plus sign.
    pub fn with_defaults(family: LyapunovFamily, anchor: f64) -> Result<Self, AnalysisError> {
        LyapunovSpec::new(
            family,
            anchor,
            DEFAULT_ALPHA,
            DEFAULT_C1,
            DEFAULT_C2,
            WeightSign::Plus,
        )
    }

    pub fn family(&self) -> LyapunovFamily {
        self.family
    }

    pub fn anchor(&self) -> f64 {
        self.anchor
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn c(&self, regime: Regime) -> f64 {
        match regime {
            Regime::R1 => self.c1,
            Regime::R2 => self.c2,
        }
    }

    pub fn weight_sign(&self) -> WeightSign {
        self.weight_sign
    }

    fn weight(&self, regime: Regime) -> f64 {
        match self.weight_sign {
            WeightSign::Plus => 1.0 + self.alpha * self.c(regime),
            WeightSign::Minus => 1.0 - self.alpha * self.c(regime),
        }
    }

    /// Value and spatial derivative of V(., regime) at x.
    pub fn eval(&self, x: f64, regime: Regime) -> Result<(f64, f64), AnalysisError> {
        let c = self.c(regime);
        let a = self.alpha;
        let (v, dv) = match self.family {
            LyapunovFamily::NegLogX => {
                let s = x - self.anchor;
                if s <= 0.0 {
                    return Err(AnalysisError::DomainError {
                        x,
                        requirement: "log family needs x > anchor",
                    });
                }
                (-c * s.ln(), -c / s)
            }
            LyapunovFamily::NegLogOneMinusX => {
                let s = self.anchor - x;
                if s <= 0.0 {
                    return Err(AnalysisError::DomainError {
                        x,
                        requirement: "log family needs x < anchor",
                    });
                }
                (-c * s.ln(), c / s)
            }
            LyapunovFamily::PowerLowerBlowup => {
                let s = x - self.anchor;
                if s <= 0.0 {
                    return Err(AnalysisError::DomainError {
                        x,
                        requirement: "blow-up family needs x > anchor",
                    });
                }
                let w = self.weight(regime);
                (w * s.powf(-a), -a * w * s.powf(-a - 1.0))
            }
            LyapunovFamily::PowerUpperBlowup => {
                let s = self.anchor - x;
                if s <= 0.0 {
                    return Err(AnalysisError::DomainError {
                        x,
                        requirement: "blow-up family needs x < anchor",
                    });
                }
                let w = self.weight(regime);
                (w * s.powf(-a), a * w * s.powf(-a - 1.0))
            }
            LyapunovFamily::PowerContact => {
                let s = x - self.anchor;
                if s == 0.0 {
                    return Err(AnalysisError::DomainError {
                        x,
                        requirement: "contact family is singular at the anchor",
                    });
                }
                let w = self.weight(regime);
                let r = s.abs();
                (w * r.powf(a), a * w * r.powf(a - 1.0) * s.signum())
            }
        };
        if !v.is_finite() || !dv.is_finite() {
            return Err(AnalysisError::DomainError {
                x,
                requirement: "evaluation overflowed next to the anchor",
            });
        }
        Ok((v, dv))
    }
}

/// Apply the extended generator to an arbitrary test function given as a
/// closure returning (V, V') for a state and regime.
pub fn generator_apply<V>(model: &SwitchedModel, v: V, x: f64, regime: Regime) -> f64
where
    V: Fn(f64, Regime) -> (f64, f64),
{
    let (v_here, dv) = v(x, regime);
    let (v_other, _) = v(x, regime.other());
    dv * model.drift(x, regime) + model.q().rate_out(regime) * (v_other - v_here)
}

/// Generator applied to a Lyapunov family member.
pub fn generator_lv(
    model: &SwitchedModel,
    spec: &LyapunovSpec,
    x: f64,
    regime: Regime,
) -> Result<f64, AnalysisError> {
    let (v_here, dv) = spec.eval(x, regime)?;
    let (v_other, _) = spec.eval(x, regime.other())?;
    Ok(dv * model.drift(x, regime) + model.q().rate_out(regime) * (v_other - v_here))
}

/// Largest grid run with max_i LV < 0 inside a search interval.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NegativeDriftRegion {
    pub model: SwitchedModel,
    pub spec: LyapunovSpec,
    pub search_lo: f64,
    pub search_hi: f64,
    pub grid_n: usize,
    /// Endpoints (grid values) of the largest contiguous run; None when no grid
    /// point is negative.
    pub region: Option<(f64, f64)>,
    /// Certified margin: max_i LV <= -kappa everywhere on the region.
    pub kappa: Option<f64>,
    /// True when the run covers every grid point.
    pub full_interval: bool,
}

/// Scan a uniform grid of `grid_n` points over [search_lo, search_hi] and
/// return the largest contiguous run where the worse of the two regimes'
/// generator values is still negative. An empty result is a valid answer.
pub fn find_negative_drift_region(
    model: &SwitchedModel,
    spec: &LyapunovSpec,
    search_lo: f64,
    search_hi: f64,
    grid_n: usize,
) -> Result<NegativeDriftRegion, AnalysisError> {
    if grid_n < 100 {
        return Err(AnalysisError::InvalidParam {
            field: "grid_n",
            value: grid_n as f64,
            requirement: "grid must have at least 100 points",
        });
    }
    if !search_lo.is_finite() || !search_hi.is_finite() || search_lo >= search_hi {
        return Err(AnalysisError::InvalidParam {
            field: "search_interval",
            value: search_lo,
            requirement: "need finite search_lo < search_hi",
        });
    }
    let step = (search_hi - search_lo) / (grid_n - 1) as f64;
    let grid_x = |k: usize| search_lo + k as f64 * step;
    let mut worst = Vec::with_capacity(grid_n);
    for k in 0..grid_n {
        let x = grid_x(k);
        let g1 = generator_lv(model, spec, x, Regime::R1)?;
        let g2 = generator_lv(model, spec, x, Regime::R2)?;
        worst.push(g1.max(g2));
    }
    // largest run of strictly negative values; first one wins ties
    let mut best: Option<(usize, usize)> = None;
    let mut run_start: Option<usize> = None;
    for k in 0..=grid_n {
        let neg = k < grid_n && worst[k] < 0.0;
        match (neg, run_start) {
            (true, None) => run_start = Some(k),
            (false, Some(s)) => {
                let len = k - s;
                if best.map_or(true, |(bs, be)| len > be - bs + 1) {
                    best = Some((s, k - 1));
                }
                run_start = None;
            }
            _ => {}
        }
    }
    let (region, kappa, full) = match best {
        Some((s, e)) => {
            let max_on_run = worst[s..=e].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            (
                Some((grid_x(s), grid_x(e))),
                Some(-max_on_run),
                s == 0 && e == grid_n - 1,
            )
        }
        None => (None, None, false),
    };
    Ok(NegativeDriftRegion {
        model: *model,
        spec: *spec,
        search_lo,
        search_hi,
        grid_n,
        region,
        kappa,
        full_interval: full,
    })
}

/// What a certificate search must achieve on the search interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Coverage {
    /// Every grid point negative.
    FullInterval,
    /// A run of at least two grid points starting at the interval's left end
    /// (the end adjacent to the anchor).
    LeftAttached,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateReport {
    pub region: NegativeDriftRegion,
    pub candidates_tried: usize,
    pub used_defaults: bool,
}

/// Search for weights that certify negative drift: the defaults first (both
/// weight signs), then a fixed log grid of gaps delta, exponents alpha, signs
/// and weight orderings. Candidates that fail validation or hit a domain error
/// on the grid are skipped. The first candidate meeting the coverage target is
/// returned, so the report is reproducible.
pub fn find_certificate(
    model: &SwitchedModel,
    family: LyapunovFamily,
    anchor: f64,
    search_lo: f64,
    search_hi: f64,
    grid_n: usize,
    coverage: Coverage,
) -> Result<Option<CertificateReport>, AnalysisError> {
    const DELTAS: [f64; 5] = [0.01, 0.0316, 0.1, 0.316, 1.0];
    const ALPHAS: [f64; 3] = [0.25, 0.5, 1.0];
    const SIGNS: [WeightSign; 2] = [WeightSign::Plus, WeightSign::Minus];

    let mut candidates: Vec<(f64, f64, f64, WeightSign)> = vec![
        (DEFAULT_C1, DEFAULT_C2, DEFAULT_ALPHA, WeightSign::Plus),
        (DEFAULT_C1, DEFAULT_C2, DEFAULT_ALPHA, WeightSign::Minus),
    ];
    for delta in DELTAS {
        for alpha in ALPHAS {
            for sign in SIGNS {
                candidates.push((1.0 + delta, 1.0, alpha, sign));
                candidates.push((1.0, 1.0 + delta, alpha, sign));
            }
        }
    }

    let mut tried = 0usize;
    for (idx, (c1, c2, alpha, sign)) in candidates.into_iter().enumerate() {
        let spec = match LyapunovSpec::new(family, anchor, alpha, c1, c2, sign) {
            Ok(s) => s,
            Err(AnalysisError::InvalidParam { .. }) => continue,
            Err(e) => return Err(e),
        };
        tried += 1;
        let region = match find_negative_drift_region(model, &spec, search_lo, search_hi, grid_n) {
            Ok(r) => r,
            Err(AnalysisError::DomainError { .. }) => continue,
            Err(e) => return Err(e),
        };
        let ok = match coverage {
            Coverage::FullInterval => region.full_interval,
            Coverage::LeftAttached => {
                region.region.is_some_and(|(lo, hi)| lo == search_lo && hi > lo)
            }
        };
        if ok {
            return Ok(Some(CertificateReport {
                region,
                candidates_tried: tried,
                used_defaults: idx < 2,
            }));
        }
    }
    Ok(None)
}

/// Which side the process approaches the threshold from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    /// Start at or below the threshold, stop on reaching it from below.
    FromLeft,
    /// Start at or above the threshold, stop on reaching it from above.
    FromRight,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Direction::FromLeft => write!(f, "from-left"),
            Direction::FromRight => write!(f, "from-right"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HittingSpec {
    threshold: f64,
    direction: Direction,
    max_horizon: f64,
}

impl HittingSpec {
    pub fn new(threshold: f64, direction: Direction, max_horizon: f64) -> Result<Self, AnalysisError> {
        if !threshold.is_finite() || !(threshold > 0.0 && threshold < 1.0) {
            return Err(AnalysisError::InvalidParam {
                field: "threshold",
                value: threshold,
                requirement: "threshold must lie strictly inside (0, 1)",
            });
        }
        if !max_horizon.is_finite() || max_horizon <= 0.0 {
            return Err(AnalysisError::InvalidParam {
                field: "max_horizon",
                value: max_horizon,
                requirement: "censoring horizon must be finite and > 0",
            });
        }
        Ok(HittingSpec {
            threshold,
            direction,
            max_horizon,
        })
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn max_horizon(&self) -> f64 {
        self.max_horizon
    }
}

/// Hitting-time estimate over the paths that reached the threshold; censored
/// paths are counted, never imputed, so `mean` is None when nothing hit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HittingEstimate {
    pub model: SwitchedModel,
    pub config: SimConfig,
    pub seed: u64,
    pub x0: f64,
    pub i0: Regime,
    pub n_paths: usize,
    pub spec: HittingSpec,
    pub n_hits: usize,
    pub fraction_censored: f64,
    pub mean: Option<f64>,
    pub std_error: Option<f64>,
}

impl HittingEstimate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("estimate serializes")
    }
}

/// First-crossing times against `spec.threshold`, censored at `spec.max_horizon`
/// (which overrides the config horizon). The crossing time is linearly
/// interpolated between the two bracketing grid samples.
pub fn estimate_hitting_time(
    model: &SwitchedModel,
    config: &SimConfig,
    x0: f64,
    i0: Regime,
    spec: &HittingSpec,
    n_paths: usize,
    master_seed: u64,
) -> Result<HittingEstimate, AnalysisError> {
    let wrong = match spec.direction {
        Direction::FromLeft => x0 > spec.threshold,
        Direction::FromRight => x0 < spec.threshold,
    };
    if wrong {
        return Err(AnalysisError::WrongSide {
            x0,
            threshold: spec.threshold,
            direction: spec.direction,
        });
    }
    let run_config = config.with_horizon(spec.max_horizon)?;
    let threshold = spec.threshold;
    let crossed = move |x: f64| match spec.direction {
        Direction::FromLeft => x >= threshold,
        Direction::FromRight => x <= threshold,
    };
    struct Acc {
        sum: f64,
        sumsq: f64,
        hits: usize,
    }
    let acc = fold_paths(
        model,
        &run_config,
        x0,
        i0,
        n_paths,
        master_seed,
        || Acc {
            sum: 0.0,
            sumsq: 0.0,
            hits: 0,
        },
        |acc, _, traj| {
            let s = &traj.samples;
            let hit = s.iter().position(|p| crossed(p.x)).map(|k| {
                if k == 0 {
                    0.0
                } else {
                    let (p0, p1) = (&s[k - 1], &s[k]);
                    p0.t + (threshold - p0.x) * (p1.t - p0.t) / (p1.x - p0.x)
                }
            });
            if let Some(t) = hit {
                acc.sum += t;
                acc.sumsq += t * t;
                acc.hits += 1;
            }
        },
        |mut a, b| {
            a.sum += b.sum;
            a.sumsq += b.sumsq;
            a.hits += b.hits;
            a
        },
    )?;
    let (mean, std_error) = if acc.hits == 0 {
        (None, None)
    } else {
        let n = acc.hits as f64;
        let mean = acc.sum / n;
        let se = if acc.hits >= 2 {
            let var = ((acc.sumsq - acc.sum * acc.sum / n) / (n - 1.0)).max(0.0);
            Some((var / n).sqrt())
        } else {
            None
        };
        (Some(mean), se)
    };
    Ok(HittingEstimate {
        model: *model,
        config: run_config,
        seed: master_seed,
        x0,
        i0,
        n_paths,
        spec: *spec,
        n_hits: acc.hits,
        fraction_censored: (n_paths - acc.hits) as f64 / n_paths as f64,
        mean,
        std_error,
    })
}

/// Pooled post-burn-in histogram of the frequency over [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OccupationHistogram {
    pub model: SwitchedModel,
    pub config: SimConfig,
    pub seed: u64,
    pub x0: f64,
    pub i0: Regime,
    pub n_paths: usize,
    pub burn_in_fraction: f64,
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub mass: Vec<f64>,
    pub n_samples: u64,
}

impl OccupationHistogram {
    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    /// Index of the bin containing x (the last bin is closed at 1).
    pub fn bin_of(&self, x: f64) -> usize {
        let b = self.bins();
        ((x * b as f64).floor() as usize).min(b - 1)
    }

    /// Total mass of the bins lying entirely inside [lo, hi]. A lower bound on
    /// the mass of the interval, so threshold checks against it are conservative.
    pub fn mass_within(&self, lo: f64, hi: f64) -> f64 {
        (0..self.bins())
            .filter(|&k| self.bin_edges[k] >= lo && self.bin_edges[k + 1] <= hi)
            .map(|k| self.mass[k])
            .sum()
    }

    /// CSV export: `bin_left,bin_right,mass`, floats with 17 significant digits.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "bin_left,bin_right,mass")?;
        for k in 0..self.bins() {
            writeln!(
                w,
                "{},{},{}",
                format_g17(self.bin_edges[k]),
                format_g17(self.bin_edges[k + 1]),
                format_g17(self.mass[k])
            )?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("histogram serializes")
    }
}

/// Histogram of all samples with t >= burn_in_fraction * horizon, pooled over
/// the ensemble and normalized to unit mass.
pub fn occupation_measure(
    model: &SwitchedModel,
    config: &SimConfig,
    x0: f64,
    i0: Regime,
    n_paths: usize,
    bins: usize,
    burn_in_fraction: f64,
    master_seed: u64,
) -> Result<OccupationHistogram, AnalysisError> {
    if bins < 10 {
        return Err(AnalysisError::InvalidParam {
            field: "bins",
            value: bins as f64,
            requirement: "histogram needs at least 10 bins",
        });
    }
    if !burn_in_fraction.is_finite() || !(0.0..1.0).contains(&burn_in_fraction) {
        return Err(AnalysisError::InvalidParam {
            field: "burn_in_fraction",
            value: burn_in_fraction,
            requirement: "burn-in fraction must lie in [0, 1)",
        });
    }
    // small slack so a grid time equal to the cutoff is kept despite rounding
    let cutoff = burn_in_fraction * config.horizon() - 1e-9;
    let counts = fold_paths(
        model,
        config,
        x0,
        i0,
        n_paths,
        master_seed,
        || vec![0u64; bins],
        |counts, _, traj| {
            for s in &traj.samples {
                if s.t >= cutoff {
                    let k = ((s.x * bins as f64).floor() as usize).min(bins - 1);
                    counts[k] += 1;
                }
            }
        },
        |mut a, b| {
            for (x, y) in a.iter_mut().zip(&b) {
                *x += y;
            }
            a
        },
    )?;
    let n_samples: u64 = counts.iter().sum();
    let mass: Vec<f64> = counts
        .iter()
        .map(|&c| c as f64 / n_samples as f64)
        .collect();
    let bin_edges: Vec<f64> = (0..=bins).map(|k| k as f64 / bins as f64).collect();
    Ok(OccupationHistogram {
        model: *model,
        config: *config,
        seed: master_seed,
        x0,
        i0,
        n_paths,
        burn_in_fraction,
        bin_edges,
        counts,
        mass,
        n_samples,
    })
}

/// Ensemble estimates of E[x^p(t)] on the output grid for several exponents,
/// all computed in a single pass over the paths.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentCurves {
    pub model: SwitchedModel,
    pub config: SimConfig,
    pub seed: u64,
    pub x0: f64,
    pub i0: Regime,
    pub n_paths: usize,
    pub ps: Vec<f64>,
    pub grid: Vec<f64>,
    /// mean[j][k] is the estimate of E[x^ps[j]] at grid[k].
    pub mean: Vec<Vec<f64>>,
    pub std_error: Vec<Vec<f64>>,
}

impl MomentCurves {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("curves serialize")
    }
}

/// Single-exponent view of [`MomentCurves`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentCurve {
    pub model: SwitchedModel,
    pub config: SimConfig,
    pub seed: u64,
    pub x0: f64,
    pub i0: Regime,
    pub n_paths: usize,
    pub p: f64,
    pub grid: Vec<f64>,
    pub mean: Vec<f64>,
    pub std_error: Vec<f64>,
}

impl MomentCurve {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("curve serializes")
    }
}

pub fn moment_curves(
    model: &SwitchedModel,
    config: &SimConfig,
    x0: f64,
    i0: Regime,
    ps: &[f64],
    n_paths: usize,
    master_seed: u64,
) -> Result<MomentCurves, AnalysisError> {
    if ps.is_empty() {
        return Err(AnalysisError::InvalidParam {
            field: "p",
            value: f64::NAN,
            requirement: "at least one exponent is required",
        });
    }
    for &p in ps {
        if !p.is_finite() || p <= 0.0 {
            return Err(AnalysisError::InvalidParam {
                field: "p",
                value: p,
                requirement: "moment exponent must be finite and > 0",
            });
        }
    }
    let grid = config.grid();
    let g = grid.len();
    let np = ps.len();
    struct Acc {
        sum: Vec<Vec<f64>>,
        sumsq: Vec<Vec<f64>>,
    }
    let acc = fold_paths(
        model,
        config,
        x0,
        i0,
        n_paths,
        master_seed,
        || Acc {
            sum: vec![vec![0.0; g]; np],
            sumsq: vec![vec![0.0; g]; np],
        },
        |acc, _, traj| {
            for (k, s) in traj.samples.iter().enumerate() {
                for (j, &p) in ps.iter().enumerate() {
                    let v = s.x.powf(p);
                    acc.sum[j][k] += v;
                    acc.sumsq[j][k] += v * v;
                }
            }
        },
        |mut a, b| {
            for j in 0..np {
                for k in 0..g {
                    a.sum[j][k] += b.sum[j][k];
                    a.sumsq[j][k] += b.sumsq[j][k];
                }
            }
            a
        },
    )?;
    let n = n_paths as f64;
    let mut mean = Vec::with_capacity(np);
    let mut std_error = Vec::with_capacity(np);
    for j in 0..np {
        let m: Vec<f64> = acc.sum[j].iter().map(|s| s / n).collect();
        let se: Vec<f64> = acc.sum[j]
            .iter()
            .zip(&acc.sumsq[j])
            .map(|(s, ss)| {
                if n_paths < 2 {
                    0.0
                } else {
                    let var = ((ss - s * s / n) / (n - 1.0)).max(0.0);
                    (var / n).sqrt()
                }
            })
            .collect();
        mean.push(m);
        std_error.push(se);
    }
    Ok(MomentCurves {
        model: *model,
        config: *config,
        seed: master_seed,
        x0,
        i0,
        n_paths,
        ps: ps.to_vec(),
        grid,
        mean,
        std_error,
    })
}

pub fn moment_curve(
    model: &SwitchedModel,
    config: &SimConfig,
    x0: f64,
    i0: Regime,
    p: f64,
    n_paths: usize,
    master_seed: u64,
) -> Result<MomentCurve, AnalysisError> {
    let mut curves = moment_curves(model, config, x0, i0, &[p], n_paths, master_seed)?;
    Ok(MomentCurve {
        model: curves.model,
        config: curves.config,
        seed: curves.seed,
        x0: curves.x0,
        i0: curves.i0,
        n_paths: curves.n_paths,
        p,
        grid: std::mem::take(&mut curves.grid),
        mean: curves.mean.swap_remove(0),
        std_error: curves.std_error.swap_remove(0),
    })
}

/// Long-run verdict for one initial condition relative to the separator a2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BasinLabel {
    /// Nearly all paths confined below a2 after burn-in.
    LowerBasin,
    /// Nearly all paths confined above a2 after burn-in.
    UpperBasin,
    /// Majority of paths started above a2 and ended below it.
    Transit,
    /// Paths visit both sides without a clear verdict.
    Mixed,
}

impl fmt::Display for BasinLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BasinLabel::LowerBasin => "LowerBasin",
            BasinLabel::UpperBasin => "UpperBasin",
            BasinLabel::Transit => "Transit",
            BasinLabel::Mixed => "Mixed",
        };
        write!(f, "{s}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BasinEntry {
    pub x0: f64,
    pub label: BasinLabel,
    /// Fraction of paths with every post-burn-in sample below the separator.
    pub fraction_lower: f64,
    /// Fraction of paths with every post-burn-in sample above the separator.
    pub fraction_upper: f64,
    /// Fraction of paths starting above the separator and ending below it.
    pub fraction_transit: f64,
}

/// Basin map over a grid of initial conditions, with the separator and decision
/// thresholds recorded next to the labels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BasinClassification {
    pub model: SwitchedModel,
    pub config: SimConfig,
    pub seed: u64,
    pub i0: Regime,
    pub n_paths: usize,
    pub separator: f64,
    pub a1: f64,
    pub a3: f64,
    /// Regime-2 equilibrium when that cubic has a single root.
    pub ahat: Option<f64>,
    pub confinement_threshold: f64,
    pub transit_majority: f64,
    pub burn_in_fraction: f64,
    pub entries: Vec<BasinEntry>,
}

impl BasinClassification {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("classification serializes")
    }
}

/// Classify each initial condition by where its ensemble settles relative to
/// the unstable point a2 of the regime-1 drift. All initial conditions share
/// the same path seeds (common random numbers), which keeps the map smooth in
/// x0 and fully reproducible.
pub fn classify_basin(
    model: &SwitchedModel,
    config: &SimConfig,
    x0_grid: &[f64],
    i0: Regime,
    n_paths: usize,
    master_seed: u64,
) -> Result<BasinClassification, AnalysisError> {
    if x0_grid.is_empty() {
        return Err(AnalysisError::InvalidParam {
            field: "x0_grid",
            value: f64::NAN,
            requirement: "at least one initial condition is required",
        });
    }
    for &x0 in x0_grid {
        if !(x0 > 0.0 && x0 < 1.0) {
            return Err(AnalysisError::InvalidParam {
                field: "x0_grid",
                value: x0,
                requirement: "initial frequencies must lie strictly inside (0, 1)",
            });
        }
    }
    let fps1 = fixed_points(&model.game(), model.mu(Regime::R1))?;
    let separator = match fps1.kind {
        RootKind::ThreeReal => fps1.a2().unwrap(),
        RootKind::OneReal => {
            return Err(AnalysisError::NoSeparator {
                mu: model.mu(Regime::R1).value(),
            })
        }
    };
    let fps2 = fixed_points(&model.game(), model.mu(Regime::R2))?;
    let cutoff = BASIN_BURN_IN_FRACTION * config.horizon() - 1e-9;
    let mut entries = Vec::with_capacity(x0_grid.len());
    for &x0 in x0_grid {
        struct Acc {
            lower: usize,
            upper: usize,
            transit: usize,
        }
        let acc = fold_paths(
            model,
            config,
            x0,
            i0,
            n_paths,
            master_seed,
            || Acc {
                lower: 0,
                upper: 0,
                transit: 0,
            },
            |acc, _, traj| {
                let mut all_below = true;
                let mut all_above = true;
                for s in &traj.samples {
                    if s.t >= cutoff {
                        all_below &= s.x < separator;
                        all_above &= s.x > separator;
                    }
                }
                if all_below {
                    acc.lower += 1;
                }
                if all_above {
                    acc.upper += 1;
                }
                let first = traj.samples.first().unwrap().x;
                let last = traj.samples.last().unwrap().x;
                if first > separator && last < separator {
                    acc.transit += 1;
                }
            },
            |mut a, b| {
                a.lower += b.lower;
                a.upper += b.upper;
                a.transit += b.transit;
                a
            },
        )?;
        let n = n_paths as f64;
        let fraction_lower = acc.lower as f64 / n;
        let fraction_upper = acc.upper as f64 / n;
        let fraction_transit = acc.transit as f64 / n;
        let label = if fraction_lower >= BASIN_CONFINEMENT_THRESHOLD {
            BasinLabel::LowerBasin
        } else if fraction_upper >= BASIN_CONFINEMENT_THRESHOLD {
            BasinLabel::UpperBasin
        } else if fraction_transit > BASIN_TRANSIT_MAJORITY {
            BasinLabel::Transit
        } else {
            BasinLabel::Mixed
        };
        entries.push(BasinEntry {
            x0,
            label,
            fraction_lower,
            fraction_upper,
            fraction_transit,
        });
    }
    Ok(BasinClassification {
        model: *model,
        config: *config,
        seed: master_seed,
        i0,
        n_paths,
        separator,
        a1: fps1.a1().unwrap(),
        a3: fps1.a3().unwrap(),
        ahat: match fps2.kind {
            RootKind::OneReal => fps2.ahat(),
            RootKind::ThreeReal => None,
        },
        confinement_threshold: BASIN_CONFINEMENT_THRESHOLD,
        transit_majority: BASIN_TRANSIT_MAJORITY,
        burn_in_fraction: BASIN_BURN_IN_FRACTION,
        entries,
    })
}
