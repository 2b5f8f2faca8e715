//! Two-state continuous-time Markov chain driving the regime switches, plus the
//! seeded stream scheme used for reproducible parallel sampling.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum CtmcError {
    InvalidParam {
        field: &'static str,
        value: f64,
        requirement: &'static str,
    },
}

impl fmt::Display for CtmcError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CtmcError::InvalidParam {
                field,
                value,
                requirement,
            } => write!(f, "invalid {field}: {requirement} (got {value})"),
        }
    }
}

impl std::error::Error for CtmcError {}

/// Chain state. Regime 1 carries the low mutation rate, regime 2 the high one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    R1,
    R2,
}

impl Regime {
    pub fn other(self) -> Regime {
        match self {
            Regime::R1 => Regime::R2,
            Regime::R2 => Regime::R1,
        }
    }

    /// 1-based label as used in trajectory output.
    pub fn label(self) -> u8 {
        match self {
            Regime::R1 => 1,
            Regime::R2 => 2,
        }
    }

    pub fn from_label(label: u8) -> Option<Regime> {
        match label {
            1 => Some(Regime::R1),
            2 => Some(Regime::R2),
            _ => None,
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

impl Serialize for Regime {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_u8(self.label())
    }
}

/// Conservative two-state generator: off-diagonal rates q12 (out of state 1) and
/// q21 (out of state 2), both strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeneratorQ {
    q12: f64,
    q21: f64,
}

impl GeneratorQ {
    pub fn new(q12: f64, q21: f64) -> Result<Self, CtmcError> {
        for (field, v) in [("q12", q12), ("q21", q21)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(CtmcError::InvalidParam {
                    field,
                    value: v,
                    requirement: "switching rate must be finite and > 0",
                });
            }
        }
        Ok(GeneratorQ { q12, q21 })
    }

    pub fn q12(self) -> f64 {
        self.q12
    }

    pub fn q21(self) -> f64 {
        self.q21
    }

    /// Exit rate of the given state.
    pub fn rate_out(self, state: Regime) -> f64 {
        match state {
            Regime::R1 => self.q12,
            Regime::R2 => self.q21,
        }
    }

    /// Generator with the state labels exchanged.
    pub fn relabeled(self) -> GeneratorQ {
        GeneratorQ {
            q12: self.q21,
            q21: self.q12,
        }
    }

    /// Stationary law (pi1, pi2) = (q21, q12) / (q12 + q21).
    pub fn stationary(self) -> (f64, f64) {
        let total = self.q12 + self.q21;
        (self.q21 / total, self.q12 / total)
    }

    /// One exponential holding time for the given state. Consumes exactly one
    /// uniform draw.
    pub fn sample_holding_time(self, state: Regime, rng: &mut RngStream) -> f64 {
        holding_time_from_uniform(rng.uniform(), self.rate_out(state))
    }

    /// Jump path of the chain over [0, horizon].
    pub fn simulate(
        self,
        initial_state: Regime,
        horizon: f64,
        rng: &mut RngStream,
    ) -> RegimePath {
        let mut jump_times = Vec::new();
        let mut t = 0.0;
        let mut state = initial_state;
        loop {
            t += self.sample_holding_time(state, rng);
            if t >= horizon {
                break;
            }
            jump_times.push(t);
            state = state.other();
        }
        RegimePath {
            initial_state,
            jump_times,
            horizon,
        }
    }
}

/// Inverse-transform exponential sampler. The uniform draw is forced into the
/// open interval (0, 1): a draw of exactly 0 or 1 is re-mapped to the nearest
/// representable interior value, so holding times are always finite and positive.
pub fn holding_time_from_uniform(u: f64, rate: f64) -> f64 {
    let u = if u <= 0.0 {
        f64::from_bits(1) // smallest positive value
    } else if u >= 1.0 {
        1.0 - f64::EPSILON / 2.0 // largest value below 1
    } else {
        u
    };
    -u.ln() / rate
}

/// Piecewise-constant regime trajectory: right-continuous, switching at each
/// jump time, truncated at `horizon`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimePath {
    pub initial_state: Regime,
    pub jump_times: Vec<f64>,
    pub horizon: f64,
}

impl RegimePath {
    pub fn n_jumps(&self) -> usize {
        self.jump_times.len()
    }

    /// State at time t (right-continuous: at a jump time the new state applies).
    pub fn state_at(&self, t: f64) -> Regime {
        let jumps_before = self.jump_times.partition_point(|&jt| jt <= t);
        if jumps_before % 2 == 0 {
            self.initial_state
        } else {
            self.initial_state.other()
        }
    }

    /// Fraction of [0, horizon] spent in `state`.
    pub fn occupation_fraction(&self, state: Regime) -> f64 {
        let mut acc = 0.0;
        let mut prev = 0.0;
        let mut current = self.initial_state;
        for &jt in &self.jump_times {
            if current == state {
                acc += jt - prev;
            }
            prev = jt;
            current = current.other();
        }
        if current == state {
            acc += self.horizon - prev;
        }
        acc / self.horizon
    }
}

/// Reproducible random stream: ChaCha8 keyed by a master seed, with one
/// independent stream per index. The same (master_seed, stream_index) pair
/// always reproduces the same draws; distinct indices give streams that are
/// independent for all practical purposes.
#[derive(Debug, Clone)]
pub struct RngStream {
    rng: ChaCha8Rng,
    master_seed: u64,
    stream_index: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(stream_index);
        RngStream {
            rng,
            master_seed,
            stream_index,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    /// Uniform draw in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        self.rng.random()
    }
}
