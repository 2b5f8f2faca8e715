//! Command-line front end.
//!
//! Resolution order for every run parameter: built-in defaults, then the
//! `figure1` preset when requested, then the TOML config file, then flags.
//! The merged configuration is echoed to stderr as one JSON line so every
//! artifact can be traced back to its inputs. Exit codes: 0 success, 2 input
//! validation, 3 numerical or runtime failure.

use clap::{Args, Parser, Subcommand, ValueEnum};
use repmut::analysis::{
    classify_basin, estimate_hitting_time, moment_curves, occupation_measure, AnalysisError,
    Direction, HittingSpec,
};
use repmut::config::{self, FileConfig};
use repmut::ctmc::{CtmcError, GeneratorQ, Regime, RngStream};
use repmut::dynamics::{
    critical_mu, fixed_points, DynamicsError, MutationRate, RootKind, TwoTypeGame,
};
use repmut::format_g17;
use repmut::hybrid::{HybridError, SimConfig, SwitchedModel};
use serde_json::json;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process;

#[derive(Parser)]
#[command(
    name = "repmut",
    version,
    about = "Replicator-mutator dynamics with a Markov-switched mutation rate"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Equilibria and stability of the two-type drift at one mutation rate
    FixedPoints(FixedPointsArgs),
    /// Critical mutation rate plus a root-count scan table over mu
    Bifurcation(BifurcationArgs),
    /// One seeded hybrid path as CSV (t,x,regime)
    Simulate(SimulateArgs),
    /// Seeded ensemble statistics as JSON
    Ensemble(EnsembleArgs),
    /// Basin labels over a grid of initial conditions
    Classify(ClassifyArgs),
    /// First-passage time to a threshold
    Hitting(HittingArgs),
    /// Post-burn-in occupation histogram
    Occupation(OccupationArgs),
    /// Moment curves E[x^p(t)]
    Moments(MomentsArgs),
}

#[derive(Args)]
struct FixedPointsArgs {
    #[arg(long)]
    b1: f64,
    #[arg(long)]
    b2: f64,
    #[arg(long)]
    mu: f64,
}

#[derive(Args)]
struct BifurcationArgs {
    #[arg(long)]
    b1: f64,
    #[arg(long)]
    b2: f64,
    /// Lower end of the scan range
    #[arg(long, default_value_t = 0.0)]
    mu_min: f64,
    /// Upper end of the scan range
    #[arg(long, default_value_t = 0.5)]
    mu_max: f64,
    /// Number of scan points
    #[arg(long, default_value_t = 101)]
    mu_steps: usize,
    /// Scan table destination ("-" for stdout)
    #[arg(long, default_value = "-")]
    out: String,
}

/// Model and run parameters shared by the simulation commands.
#[derive(Args, Clone)]
struct ModelArgs {
    /// TOML run file; flags override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    /// Named parameter preset (available: figure1)
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    b1: Option<f64>,
    #[arg(long)]
    b2: Option<f64>,
    /// Regime-1 mutation rate
    #[arg(long)]
    mu1: Option<f64>,
    /// Regime-2 mutation rate
    #[arg(long)]
    mu2: Option<f64>,
    /// Switching rate out of regime 1
    #[arg(long)]
    q12: Option<f64>,
    /// Switching rate out of regime 2
    #[arg(long)]
    q21: Option<f64>,
    /// Integration step
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    horizon: Option<f64>,
    /// Output grid spacing
    #[arg(long)]
    sample_every: Option<f64>,
    /// Distance kept from the interval ends when clamping
    #[arg(long)]
    boundary_guard: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Ensemble size
    #[arg(long)]
    paths: Option<usize>,
    /// Initial frequency of type 1
    #[arg(long)]
    x0: Option<f64>,
    /// Initial regime label (1 or 2)
    #[arg(long)]
    i0: Option<u8>,
    /// Worker threads for ensembles (default: all cores); results do not depend on it
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// CSV destination ("-" for stdout)
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Args)]
struct EnsembleArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// JSON destination ("-" for stdout)
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Args)]
struct ClassifyArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Inclusive grid of initial conditions, "start:end:step"
    #[arg(long)]
    x0_grid: Option<String>,
    /// JSON destination ("-" for stdout)
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Args)]
struct HittingArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Numeric value or auto-a1/auto-a2/auto-a3/auto-ahat
    #[arg(long)]
    threshold: Option<String>,
    #[arg(long, value_enum)]
    direction: Option<DirectionArg>,
    /// Censoring horizon (default: the simulation horizon)
    #[arg(long)]
    max_horizon: Option<f64>,
    /// JSON destination ("-" for stdout)
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Args)]
struct OccupationArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Histogram bins over [0, 1]
    #[arg(long)]
    bins: Option<usize>,
    /// Fraction of each path discarded before pooling
    #[arg(long)]
    burn_in: Option<f64>,
    /// Also write the histogram as CSV to this path
    #[arg(long)]
    csv: Option<PathBuf>,
    /// JSON destination ("-" for stdout)
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Args)]
struct MomentsArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Moment exponent; repeat for several curves in one pass
    #[arg(long = "p")]
    p: Vec<f64>,
    /// JSON destination ("-" for stdout)
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(ValueEnum, Clone, Copy)]
enum DirectionArg {
    FromLeft,
    FromRight,
}

impl From<DirectionArg> for Direction {
    fn from(d: DirectionArg) -> Self {
        match d {
            DirectionArg::FromLeft => Direction::FromLeft,
            DirectionArg::FromRight => Direction::FromRight,
        }
    }
}

struct Failure {
    code: i32,
    message: String,
}

fn fail2(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

fn dynamics_code(e: &DynamicsError) -> i32 {
    match e {
        DynamicsError::InvalidParam { .. } | DynamicsError::DimensionMismatch { .. } => 2,
        _ => 3,
    }
}

fn hybrid_code(e: &HybridError) -> i32 {
    match e {
        HybridError::InvalidParam { .. } => 2,
        HybridError::NonFiniteState { .. } => 3,
        HybridError::Path { source, .. } => hybrid_code(source),
        HybridError::Dynamics(d) => dynamics_code(d),
        HybridError::Ctmc(_) => 2,
    }
}

impl From<DynamicsError> for Failure {
    fn from(e: DynamicsError) -> Self {
        Failure {
            code: dynamics_code(&e),
            message: e.to_string(),
        }
    }
}

impl From<CtmcError> for Failure {
    fn from(e: CtmcError) -> Self {
        fail2(e.to_string())
    }
}

impl From<HybridError> for Failure {
    fn from(e: HybridError) -> Self {
        Failure {
            code: hybrid_code(&e),
            message: e.to_string(),
        }
    }
}

impl From<AnalysisError> for Failure {
    fn from(e: AnalysisError) -> Self {
        let code = match &e {
            AnalysisError::InvalidParam { .. }
            | AnalysisError::DomainError { .. }
            | AnalysisError::WrongSide { .. }
            | AnalysisError::NoSeparator { .. } => 2,
            AnalysisError::Hybrid(h) => hybrid_code(h),
            AnalysisError::Dynamics(d) => dynamics_code(d),
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<config::ConfigError> for Failure {
    fn from(e: config::ConfigError) -> Self {
        fail2(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure {
            code: 3,
            message: format!("i/o failure: {e}"),
        }
    }
}

/// Fully resolved run parameters. The defaults equal the `figure1` preset.
#[derive(Clone, Copy)]
struct Merged {
    b1: f64,
    b2: f64,
    mu1: f64,
    mu2: f64,
    q12: f64,
    q21: f64,
    dt: f64,
    horizon: f64,
    sample_every: f64,
    boundary_guard: f64,
    seed: u64,
    paths: usize,
    x0: f64,
    i0: u8,
}

impl Default for Merged {
    fn default() -> Self {
        Merged {
            b1: 0.2,
            b2: 0.3,
            mu1: 0.01,
            mu2: 0.26,
            q12: 10.0,
            q21: 10.0,
            dt: 1e-3,
            horizon: 100.0,
            sample_every: 0.1,
            boundary_guard: 1e-12,
            seed: 42,
            paths: 100,
            x0: 0.7,
            i0: 1,
        }
    }
}

fn resolve(args: &ModelArgs) -> Result<(Merged, Option<FileConfig>), Failure> {
    let mut m = Merged::default();
    if let Some(p) = &args.preset {
        if p != "figure1" {
            return Err(fail2(format!("unknown preset '{p}'; available: figure1")));
        }
        // figure1 is also the default parameter set, so nothing to change
    }
    let file = match &args.config {
        Some(path) => Some(config::load(path)?),
        None => None,
    };
    if let Some(fc) = &file {
        macro_rules! take {
            ($dst:expr, $src:expr) => {
                if let Some(v) = $src {
                    $dst = v;
                }
            };
        }
        take!(m.b1, fc.game.b1);
        take!(m.b2, fc.game.b2);
        take!(m.mu1, fc.mutation.mu1);
        take!(m.mu2, fc.mutation.mu2);
        take!(m.q12, fc.generator.q12);
        take!(m.q21, fc.generator.q21);
        take!(m.dt, fc.sim.dt);
        take!(m.horizon, fc.sim.horizon);
        take!(m.sample_every, fc.sim.sample_every);
        take!(m.boundary_guard, fc.sim.boundary_guard);
        take!(m.seed, fc.sim.seed);
        take!(m.paths, fc.sim.paths);
        take!(m.x0, fc.run.x0);
        take!(m.i0, fc.run.i0);
    }
    macro_rules! take {
        ($dst:expr, $src:expr) => {
            if let Some(v) = $src {
                $dst = v;
            }
        };
    }
    take!(m.b1, args.b1);
    take!(m.b2, args.b2);
    take!(m.mu1, args.mu1);
    take!(m.mu2, args.mu2);
    take!(m.q12, args.q12);
    take!(m.q21, args.q21);
    take!(m.dt, args.dt);
    take!(m.horizon, args.horizon);
    take!(m.sample_every, args.sample_every);
    take!(m.boundary_guard, args.boundary_guard);
    take!(m.seed, args.seed);
    take!(m.paths, args.paths);
    take!(m.x0, args.x0);
    take!(m.i0, args.i0);
    Ok((m, file))
}

fn mu_arg(v: f64, name: &str) -> Result<MutationRate, Failure> {
    MutationRate::new(v)
        .map_err(|_| fail2(format!("invalid {name}: mutation rate must lie in [0, 1] (got {v})")))
}

fn init_workers(args: &ModelArgs) -> Result<(), Failure> {
    if let Some(w) = args.workers {
        if w == 0 {
            return Err(fail2("invalid workers: thread count must be at least 1 (got 0)"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .map_err(|e| Failure {
                code: 3,
                message: format!("cannot size the worker pool: {e}"),
            })?;
    }
    Ok(())
}

struct Prepared {
    merged: Merged,
    file: Option<FileConfig>,
    model: SwitchedModel,
    config: SimConfig,
    i0: Regime,
}

fn prepare(args: &ModelArgs, command: &str) -> Result<Prepared, Failure> {
    let (merged, file) = resolve(args)?;
    init_workers(args)?;
    let game = TwoTypeGame::new(merged.b1, merged.b2)?;
    let mu1 = mu_arg(merged.mu1, "mu1")?;
    let mu2 = mu_arg(merged.mu2, "mu2")?;
    let q = GeneratorQ::new(merged.q12, merged.q21)?;
    let config = SimConfig::new(
        merged.dt,
        merged.horizon,
        merged.sample_every,
        merged.boundary_guard,
    )?;
    let model = SwitchedModel::new(game, mu1, mu2, q)?;
    let i0 = Regime::from_label(merged.i0).ok_or_else(|| {
        fail2(format!(
            "invalid i0: regime label must be 1 or 2 (got {})",
            merged.i0
        ))
    })?;
    if model.relabeled() {
        eprintln!("warning: mu1 > mu2; regimes relabeled so regime 1 carries the lower rate");
    }
    if model.mu_band_warning() {
        eprintln!(
            "warning: mutation rates do not straddle the critical rate {}",
            format_g17(model.critical_mu())
        );
    }
    let echo = json!({
        "command": command,
        "b1": merged.b1,
        "b2": merged.b2,
        "mu1": merged.mu1,
        "mu2": merged.mu2,
        "q12": merged.q12,
        "q21": merged.q21,
        "dt": merged.dt,
        "horizon": merged.horizon,
        "sample_every": merged.sample_every,
        "boundary_guard": merged.boundary_guard,
        "seed": merged.seed,
        "paths": merged.paths,
        "x0": merged.x0,
        "i0": merged.i0,
        "workers": args.workers,
    });
    eprintln!("config: {echo}");
    Ok(Prepared {
        merged,
        file,
        model,
        config,
        i0,
    })
}

fn open_out(path: &str) -> Result<Box<dyn Write>, Failure> {
    if path == "-" {
        Ok(Box::new(io::stdout().lock()))
    } else {
        let f = File::create(path).map_err(|e| Failure {
            code: 3,
            message: format!("cannot write {path}: {e}"),
        })?;
        Ok(Box::new(BufWriter::new(f)))
    }
}

fn resolve_threshold(token: &str, model: &SwitchedModel) -> Result<f64, Failure> {
    match token {
        "auto-a1" | "auto-a2" | "auto-a3" => {
            let fps = fixed_points(&model.game(), model.mu(Regime::R1))?;
            let v = match token {
                "auto-a1" => fps.a1(),
                "auto-a2" => fps.a2(),
                _ => fps.a3(),
            };
            v.ok_or_else(|| {
                fail2(format!(
                    "{token} is undefined: the regime-1 drift has a single equilibrium"
                ))
            })
        }
        "auto-ahat" => {
            let fps = fixed_points(&model.game(), model.mu(Regime::R2))?;
            fps.ahat().ok_or_else(|| {
                fail2("auto-ahat is undefined: the regime-2 drift has three equilibria")
            })
        }
        other => other.parse::<f64>().map_err(|_| {
            fail2(format!(
                "invalid threshold '{other}': expected a number or auto-a1/auto-a2/auto-a3/auto-ahat"
            ))
        }),
    }
}

fn parse_x0_grid(s: &str) -> Result<Vec<f64>, Failure> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || fail2(format!("invalid x0 grid '{s}': expected start:end:step"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| p.parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| bad())?;
    let (start, end, step) = (nums[0], nums[1], nums[2]);
    if !step.is_finite() || step <= 0.0 || end < start {
        return Err(bad());
    }
    let n = ((end - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| start + k as f64 * step).collect())
}

fn cmd_fixed_points(a: FixedPointsArgs) -> Result<(), Failure> {
    let game = TwoTypeGame::new(a.b1, a.b2)?;
    let mu = MutationRate::new(a.mu)?;
    let fps = fixed_points(&game, mu)?;
    let names: &[&str] = match fps.kind {
        RootKind::ThreeReal => &["a1", "a2", "a3"],
        RootKind::OneReal => &["ahat"],
    };
    println!("kind = {:?}", fps.kind);
    for (name, point) in names.iter().zip(&fps.points) {
        println!(
            "{name} = {} ({})",
            format_g17(point.location),
            match point.stability {
                repmut::dynamics::Stability::Stable => "stable",
                repmut::dynamics::Stability::Unstable => "unstable",
            }
        );
    }
    let doc = json!({
        "b1": a.b1,
        "b2": a.b2,
        "mu": a.mu,
        "fixed_points": fps,
    });
    println!("{}", serde_json::to_string_pretty(&doc).expect("serializes"));
    Ok(())
}

fn cmd_bifurcation(a: BifurcationArgs) -> Result<(), Failure> {
    let game = TwoTypeGame::new(a.b1, a.b2)?;
    if !(0.0..=1.0).contains(&a.mu_min) || !(0.0..=1.0).contains(&a.mu_max) || a.mu_min >= a.mu_max
    {
        return Err(fail2(format!(
            "invalid scan range: need 0 <= mu_min < mu_max <= 1 (got {}..{})",
            a.mu_min, a.mu_max
        )));
    }
    if a.mu_steps < 2 {
        return Err(fail2(format!(
            "invalid mu_steps: need at least 2 scan points (got {})",
            a.mu_steps
        )));
    }
    let mc = critical_mu(&game)?;
    println!("critical_mu = {}", format_g17(mc));
    let mut w = open_out(&a.out)?;
    writeln!(w, "mu,num_roots,a1,a2,a3_or_ahat")?;
    for k in 0..a.mu_steps {
        let mu_val =
            a.mu_min + k as f64 * (a.mu_max - a.mu_min) / (a.mu_steps - 1) as f64;
        let mu = MutationRate::new(mu_val)?;
        match fixed_points(&game, mu) {
            Ok(fps) => match fps.kind {
                RootKind::ThreeReal => writeln!(
                    w,
                    "{},3,{},{},{}",
                    format_g17(mu_val),
                    format_g17(fps.a1().unwrap()),
                    format_g17(fps.a2().unwrap()),
                    format_g17(fps.a3().unwrap())
                )?,
                RootKind::OneReal => writeln!(
                    w,
                    "{},1,,,{}",
                    format_g17(mu_val),
                    format_g17(fps.ahat().unwrap())
                )?,
            },
            // a coincident pair at the fold: record the count, leave roots blank
            Err(DynamicsError::DegenerateBifurcation { .. }) => {
                writeln!(w, "{},2,,,", format_g17(mu_val))?
            }
            Err(e) => return Err(e.into()),
        }
    }
    w.flush()?;
    Ok(())
}

fn cmd_simulate(a: SimulateArgs) -> Result<(), Failure> {
    let p = prepare(&a.model, "simulate")?;
    let mut stream = RngStream::new(p.merged.seed, 0);
    let traj = p.model.simulate(&p.config, p.merged.x0, p.i0, &mut stream)?;
    let mut w = open_out(&a.out)?;
    traj.write_csv(&mut w)?;
    w.flush()?;
    Ok(())
}

fn cmd_ensemble(a: EnsembleArgs) -> Result<(), Failure> {
    let p = prepare(&a.model, "ensemble")?;
    let summary = p
        .model
        .ensemble(&p.config, p.merged.x0, p.i0, p.merged.paths, p.merged.seed)?;
    let mut w = open_out(&a.out)?;
    writeln!(w, "{}", summary.to_json())?;
    w.flush()?;
    Ok(())
}

fn cmd_classify(a: ClassifyArgs) -> Result<(), Failure> {
    let p = prepare(&a.model, "classify")?;
    let grid_spec = a
        .x0_grid
        .clone()
        .or_else(|| p.file.as_ref().and_then(|f| f.run.x0_grid.clone()));
    let grid = match grid_spec {
        Some(s) => parse_x0_grid(&s)?,
        None => vec![p.merged.x0],
    };
    let map = classify_basin(&p.model, &p.config, &grid, p.i0, p.merged.paths, p.merged.seed)?;
    let mut w = open_out(&a.out)?;
    writeln!(w, "{}", map.to_json())?;
    w.flush()?;
    Ok(())
}

fn cmd_hitting(a: HittingArgs) -> Result<(), Failure> {
    let p = prepare(&a.model, "hitting")?;
    let token = a
        .threshold
        .clone()
        .or_else(|| p.file.as_ref().and_then(|f| f.run.threshold.clone()))
        .ok_or_else(|| fail2("--threshold is required (number or auto-a1/auto-a2/auto-a3/auto-ahat)"))?;
    let threshold = resolve_threshold(&token, &p.model)?;
    let direction: Direction = match a.direction {
        Some(d) => d.into(),
        None => {
            let from_file = p.file.as_ref().and_then(|f| f.run.direction.clone());
            match from_file.as_deref() {
                Some("from-left") => Direction::FromLeft,
                Some("from-right") => Direction::FromRight,
                Some(other) => {
                    return Err(fail2(format!(
                        "invalid direction '{other}': expected from-left or from-right"
                    )))
                }
                None => return Err(fail2("--direction is required (from-left or from-right)")),
            }
        }
    };
    let max_horizon = a
        .max_horizon
        .or_else(|| p.file.as_ref().and_then(|f| f.run.max_horizon))
        .unwrap_or_else(|| p.config.horizon());
    let spec = HittingSpec::new(threshold, direction, max_horizon)?;
    let est = estimate_hitting_time(
        &p.model,
        &p.config,
        p.merged.x0,
        p.i0,
        &spec,
        p.merged.paths,
        p.merged.seed,
    )?;
    let mut w = open_out(&a.out)?;
    writeln!(w, "{}", est.to_json())?;
    w.flush()?;
    Ok(())
}

fn cmd_occupation(a: OccupationArgs) -> Result<(), Failure> {
    let p = prepare(&a.model, "occupation")?;
    let bins = a
        .bins
        .or_else(|| p.file.as_ref().and_then(|f| f.run.bins))
        .unwrap_or(50);
    let burn_in = a
        .burn_in
        .or_else(|| p.file.as_ref().and_then(|f| f.run.burn_in))
        .unwrap_or(0.5);
    let hist = occupation_measure(
        &p.model,
        &p.config,
        p.merged.x0,
        p.i0,
        p.merged.paths,
        bins,
        burn_in,
        p.merged.seed,
    )?;
    if let Some(path) = &a.csv {
        let f = File::create(path).map_err(|e| Failure {
            code: 3,
            message: format!("cannot write {}: {e}", path.display()),
        })?;
        let mut w = BufWriter::new(f);
        hist.write_csv(&mut w)?;
        w.flush()?;
    }
    let mut w = open_out(&a.out)?;
    writeln!(w, "{}", hist.to_json())?;
    w.flush()?;
    Ok(())
}

fn cmd_moments(a: MomentsArgs) -> Result<(), Failure> {
    let p = prepare(&a.model, "moments")?;
    let ps: Vec<f64> = if !a.p.is_empty() {
        a.p.clone()
    } else if let Some(p1) = p.file.as_ref().and_then(|f| f.run.p) {
        vec![p1]
    } else {
        vec![1.0]
    };
    let curves = moment_curves(
        &p.model,
        &p.config,
        p.merged.x0,
        p.i0,
        &ps,
        p.merged.paths,
        p.merged.seed,
    )?;
    let mut w = open_out(&a.out)?;
    writeln!(w, "{}", curves.to_json())?;
    w.flush()?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::FixedPoints(a) => cmd_fixed_points(a),
        Command::Bifurcation(a) => cmd_bifurcation(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Ensemble(a) => cmd_ensemble(a),
        Command::Classify(a) => cmd_classify(a),
        Command::Hitting(a) => cmd_hitting(a),
        Command::Occupation(a) => cmd_occupation(a),
        Command::Moments(a) => cmd_moments(a),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(f) = run(cli) {
        eprintln!("error: {}", f.message);
        process::exit(f.code);
    }
}
