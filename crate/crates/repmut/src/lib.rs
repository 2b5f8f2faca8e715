//! Replicator-mutator dynamics with a mutation rate switched by a two-state
//! Markov chain.
//!
//! `dynamics` holds the deterministic layer: the frequency drift, its cubic
//! interior-equilibrium structure, and the critical mutation rate where the
//! bistable pair collapses. `ctmc` provides the switching chain and seeded
//! random streams. `hybrid` couples the two into a piecewise-deterministic
//! simulator with deterministic parallel ensembles, and `analysis` builds
//! estimators (hitting times, occupation histograms, moments, basin
//! classification) and Lyapunov drift certificates on top. `config` reads the
//! TOML run files used by the command-line tool.

pub mod analysis;
pub mod config;
pub mod ctmc;
pub mod dynamics;
pub mod hybrid;

/// Format a float with 17 significant digits so the decimal text round-trips
/// to the exact same bits.
pub fn format_g17(x: f64) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::format_g17;

    #[test]
    fn g17_round_trips_bits() {
        for &x in &[0.1, 1.0 / 3.0, 2.0_f64.sqrt(), 1e-300, -7.25, 0.0] {
            let s = format_g17(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
    }
}
