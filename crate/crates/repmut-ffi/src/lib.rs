//! C interface to the switching-replicator toolkit: opaque handles, status
//! codes, and JSON bridges for the ensemble estimators.
//!
//! Conventions shared by every entry point:
//! - The return value is an [`RmStatus`]; out-pointers are written only on
//!   [`RmStatus::Ok`].
//! - On any other status a thread-local message is stored and can be read with
//!   [`rm_last_error_message`].
//! - Handles are created behind `*mut` out-pointers and released with the
//!   matching `*_free` function; strings with [`rm_string_free`].
//! - Panics never unwind across the boundary; they are reported as
//!   [`RmStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{CString, c_char, c_int};
use std::panic::{AssertUnwindSafe, catch_unwind};

use repmut::analysis::{
    AnalysisError, Direction, HittingSpec, estimate_hitting_time, occupation_measure,
};
use repmut::ctmc::{GeneratorQ, Regime, RngStream};
use repmut::dynamics::{DynamicsError, MutationRate, TwoTypeGame, fixed_points};
use repmut::hybrid::{HybridError, SimConfig, SwitchedModel};

/// Status code returned by every interface call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RmStatus {
    Ok = 0,
    /// A parameter failed validation.
    InvalidInput = 2,
    /// The computation failed numerically.
    NumericalFailure = 3,
    /// A required pointer argument was NULL.
    NullPointer = 4,
    /// A panic was caught at the boundary; memory stays valid.
    Panic = 5,
}

/// Opaque handle: two-type game, two mutation regimes, switching generator.
pub struct RmModel {
    inner: SwitchedModel,
}

/// Opaque handle: one sampled path in column layout, exposed through the
/// `rm_trajectory_*` accessors.
pub struct RmTrajectory {
    t: Vec<f64>,
    x: Vec<f64>,
    regime: Vec<u8>,
    clamp_events: u64,
}

/// Integration settings. `dt` is the integrator step, `sample_every` the
/// output grid spacing, `boundary_guard` the clamp distance kept from 0 and 1.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct RmSimConfig {
    pub dt: f64,
    pub horizon: f64,
    pub sample_every: f64,
    pub boundary_guard: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let sanitized = msg.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).expect("NUL bytes stripped above");
    });
}

fn dynamics_status(e: &DynamicsError) -> RmStatus {
    match e {
        DynamicsError::InvalidParam { .. } | DynamicsError::DimensionMismatch { .. } => {
            RmStatus::InvalidInput
        }
        _ => RmStatus::NumericalFailure,
    }
}

fn hybrid_status(e: &HybridError) -> RmStatus {
    match e {
        HybridError::InvalidParam { .. } | HybridError::Ctmc(_) => RmStatus::InvalidInput,
        HybridError::NonFiniteState { .. } => RmStatus::NumericalFailure,
        HybridError::Path { source, .. } => hybrid_status(source),
        HybridError::Dynamics(d) => dynamics_status(d),
    }
}

fn analysis_status(e: &AnalysisError) -> RmStatus {
    match e {
        AnalysisError::InvalidParam { .. }
        | AnalysisError::DomainError { .. }
        | AnalysisError::WrongSide { .. }
        | AnalysisError::NoSeparator { .. } => RmStatus::InvalidInput,
        AnalysisError::Hybrid(h) => hybrid_status(h),
        AnalysisError::Dynamics(d) => dynamics_status(d),
    }
}

fn guarded(f: impl FnOnce() -> RmStatus) -> RmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic caught at the interface boundary".to_string());
            RmStatus::Panic
        }
    }
}

fn null_pointer(name: &str) -> RmStatus {
    set_error(format!("{name} must not be NULL"));
    RmStatus::NullPointer
}

fn regime_from(label: c_int) -> Result<Regime, RmStatus> {
    u8::try_from(label)
        .ok()
        .and_then(Regime::from_label)
        .ok_or_else(|| {
            set_error(format!("regime label must be 1 or 2 (got {label})"));
            RmStatus::InvalidInput
        })
}

fn sim_config(raw: &RmSimConfig) -> Result<SimConfig, RmStatus> {
    SimConfig::new(raw.dt, raw.horizon, raw.sample_every, raw.boundary_guard).map_err(|e| {
        set_error(e.to_string());
        hybrid_status(&e)
    })
}

/// Build a model handle. The lower of the two mutation rates always drives
/// regime 1; inputs arriving in the other order are relabeled internally.
///
/// # Safety
/// `out` must be a valid pointer. The returned handle is owned by the caller
/// and must be released with [`rm_model_free`].
#[unsafe(no_mangle)]
pub unsafe extern "C" fn rm_model_new(
    b1: f64,
    b2: f64,
    mu1: f64,
    mu2: f64,
    q12: f64,
    q21: f64,
    out: *mut *mut RmModel,
) -> RmStatus {
    guarded(|| {
        if out.is_null() {
            return null_pointer("out");
        }
        let build = || -> Result<SwitchedModel, RmStatus> {
            let game = TwoTypeGame::new(b1, b2).map_err(|e| {
                set_error(e.to_string());
                dynamics_status(&e)
            })?;
            let mu_a = MutationRate::new(mu1).map_err(|e| {
                set_error(e.to_string());
                dynamics_status(&e)
            })?;
            let mu_b = MutationRate::new(mu2).map_err(|e| {
                set_error(e.to_string());
                dynamics_status(&e)
            })?;
            let q = GeneratorQ::new(q12, q21).map_err(|e| {
                set_error(e.to_string());
                RmStatus::InvalidInput
            })?;
            SwitchedModel::new(game, mu_a, mu_b, q).map_err(|e| {
                set_error(e.to_string());
                hybrid_status(&e)
            })
        };
        match build() {
            Ok(inner) => {
                unsafe { *out = Box::into_raw(Box::new(RmModel { inner })) };
                RmStatus::Ok
            }
            Err(status) => status,
        }
    })
}

/// Release a model handle. NULL is accepted and ignored.
///
/// # Safety
/// `model` must be NULL or a pointer obtained from [`rm_model_new`] that has
/// not been freed yet.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn rm_model_free(model: *mut RmModel) {
    guarded(|| {
        if !model.is_null() {
            drop(unsafe { Box::from_raw(model) });
        }
        RmStatus::Ok
    });
}

/// Critical mutation rate of the model's game.
///
/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn rm_critical_mu(model: *const RmModel, out: *mut f64) -> RmStatus {
    guarded(|| {
        if model.is_null() {
            return null_pointer("model");
        }
        if out.is_null() {
            return null_pointer("out");
        }
        unsafe { *out = (*model).inner.critical_mu() };
        RmStatus::Ok
    })
}

/// Scalar drift of type-1 frequency `x` under the given regime (1 or 2).
///
/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn rm_drift(
    model: *const RmModel,
    x: f64,
    regime: c_int,
    out: *mut f64,
) -> RmStatus {
    guarded(|| {
        if model.is_null() {
            return null_pointer("model");
        }
        if out.is_null() {
            return null_pointer("out");
        }
        if !x.is_finite() {
            set_error(format!("x must be finite (got {x})"));
            return RmStatus::InvalidInput;
        }
        let r = match regime_from(regime) {
            Ok(r) => r,
            Err(status) => return status,
        };
        unsafe { *out = (*model).inner.drift(x, r) };
        RmStatus::Ok
    })
}

/// Equilibria of the drift under the mutation rate of `regime` (1 or 2),
/// ascending. Three locations mean stable/unstable/stable; one means a single
/// stable equilibrium. `capacity` is the length of `out_locations` and must be
/// at least 3.
///
/// # Safety
/// `model` must be a live handle, `out_locations` must point to at least
/// `capacity` doubles, and `out_count` must be a valid pointer.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn rm_fixed_points(
    model: *const RmModel,
    regime: c_int,
    out_locations: *mut f64,
    capacity: usize,
    out_count: *mut usize,
) -> RmStatus {
    guarded(|| {
        if model.is_null() {
            return null_pointer("model");
        }
        if out_locations.is_null() {
            return null_pointer("out_locations");
        }
        if out_count.is_null() {
            return null_pointer("out_count");
        }
        if capacity < 3 {
            set_error(format!("capacity must be at least 3 (got {capacity})"));
            return RmStatus::InvalidInput;
        }
        let r = match regime_from(regime) {
            Ok(r) => r,
            Err(status) => return status,
        };
        let inner = unsafe { &(*model).inner };
        match fixed_points(&inner.game(), inner.mu(r)) {
            Ok(set) => {
                unsafe {
                    *out_count = set.points.len();
                    for (k, p) in set.points.iter().enumerate() {
                        *out_locations.add(k) = p.location;
                    }
                }
                RmStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                dynamics_status(&e)
            }
        }
    })
}

/// Default integration settings: dt 1e-3, horizon 100, one sample every 0.1,
/// boundary guard 1e-12.
#[unsafe(no_mangle)]
pub extern "C" fn rm_sim_config_default() -> RmSimConfig {
    RmSimConfig {
        dt: 1e-3,
        horizon: 100.0,
        sample_every: 0.1,
        boundary_guard: 1e-12,
    }
}

/// Simulate one path from `x0` in regime `i0`, driven by the seeded stream
/// (`master_seed`, `stream_index`). Identical inputs give identical output.
///
/// # Safety
/// `model` and `config` must be valid pointers and `out` a valid pointer. The
/// returned handle must be released with [`rm_trajectory_free`].
#[unsafe(no_mangle)]
pub unsafe extern "C" fn rm_simulate(
    model: *const RmModel,
    config: *const RmSimConfig,
    x0: f64,
    i0: c_int,
    master_seed: u64,
    stream_index: u64,
    out: *mut *mut RmTrajectory,
) -> RmStatus {
    guarded(|| {
        if model.is_null() {
            return null_pointer("model");
        }
        if config.is_null() {
            return null_pointer("config");
        }
        if out.is_null() {
            return null_pointer("out");
        }
        let cfg = match sim_config(unsafe { &*config }) {
            Ok(c) => c,
            Err(status) => return status,
        };
        let regime = match regime_from(i0) {
            Ok(r) => r,
            Err(status) => return status,
        };
        let mut stream = RngStream::new(master_seed, stream_index);
        match unsafe { &(*model).inner }.simulate(&cfg, x0, regime, &mut stream) {
            Ok(traj) => {
                let handle = RmTrajectory {
                    t: traj.samples.iter().map(|s| s.t).collect(),
                    x: traj.samples.iter().map(|s| s.x).collect(),
                    regime: traj.samples.iter().map(|s| s.regime.label()).collect(),
                    clamp_events: traj.clamp_events,
                };
                unsafe { *out = Box::into_raw(Box::new(handle)) };
                RmStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                hybrid_status(&e)
            }
        }
    })
}

/// Number of samples in the trajectory (0 for NULL).
///
/// # Safety
/// `traj` must be NULL or a live trajectory handle.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn rm_trajectory_len(traj: *const RmTrajectory) -> usize {
    if traj.is_null() {
        return 0;
    }
    unsafe { (*traj).t.len() }
}

/// Sample times, one per sample; valid while the handle is alive.
///
/// # Safety
/// `traj` must be NULL or a live trajectory handle.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn rm_trajectory_times(traj: *const RmTrajectory) -> *const f64 {
    if traj.is_null() {
        return std::ptr::null();
    }
    unsafe { (*traj).t.as_ptr() }
}

/// Type-1 frequencies, one per sample; valid while the handle is alive.
///
/// # Safety
/// `traj` must be NULL or a live trajectory handle.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn rm_trajectory_states(traj: *const RmTrajectory) -> *const f64 {
    if traj.is_null() {
        return std::ptr::null();
    }
    unsafe { (*traj).x.as_ptr() }
}

/// Regime labels (1 or 2), one per sample; valid while the handle is alive.
///
/// # Safety
/// `traj` must be NULL or a live trajectory handle.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn rm_trajectory_regimes(traj: *const RmTrajectory) -> *const u8 {
    if traj.is_null() {
        return std::ptr::null();
    }
    unsafe { (*traj).regime.as_ptr() }
}

/// Number of integrator steps that had to be clamped back into [0, 1].
///
/// # Safety
/// `traj` must be NULL or a live trajectory handle.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn rm_trajectory_clamp_events(traj: *const RmTrajectory) -> u64 {
    if traj.is_null() {
        return 0;
    }
    unsafe { (*traj).clamp_events }
}

/// Release a trajectory handle. NULL is accepted and ignored.
///
/// # Safety
/// `traj` must be NULL or a pointer obtained from [`rm_simulate`] that has not
/// been freed yet.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn rm_trajectory_free(traj: *mut RmTrajectory) {
    guarded(|| {
        if !traj.is_null() {
            drop(unsafe { Box::from_raw(traj) });
        }
        RmStatus::Ok
    });
}

fn string_out(out: *mut *mut c_char, json: String) -> RmStatus {
    match CString::new(json) {
        Ok(s) => {
            unsafe { *out = s.into_raw() };
            RmStatus::Ok
        }
        Err(_) => {
            set_error("serialized output contained a NUL byte".to_string());
            RmStatus::NumericalFailure
        }
    }
}

/// Ensemble statistics over `n_paths` seeded paths, serialized as JSON.
///
/// # Safety
/// `model` and `config` must be valid pointers and `out` a valid pointer. The
/// string is released with [`rm_string_free`].
#[unsafe(no_mangle)]
pub unsafe extern "C" fn rm_ensemble_json(
    model: *const RmModel,
    config: *const RmSimConfig,
    x0: f64,
    i0: c_int,
    n_paths: usize,
    master_seed: u64,
    out: *mut *mut c_char,
) -> RmStatus {
    guarded(|| {
        if model.is_null() {
            return null_pointer("model");
        }
        if config.is_null() {
            return null_pointer("config");
        }
        if out.is_null() {
            return null_pointer("out");
        }
        let cfg = match sim_config(unsafe { &*config }) {
            Ok(c) => c,
            Err(status) => return status,
        };
        let regime = match regime_from(i0) {
            Ok(r) => r,
            Err(status) => return status,
        };
        match unsafe { &(*model).inner }.ensemble(&cfg, x0, regime, n_paths, master_seed) {
            Ok(summary) => string_out(out, summary.to_json()),
            Err(e) => {
                set_error(e.to_string());
                hybrid_status(&e)
            }
        }
    })
}

/// First-passage estimate to `threshold`, serialized as JSON. `from_right`
/// zero means the threshold is approached from below, nonzero from above.
/// `max_horizon` censors paths and overrides the config horizon.
///
/// # Safety
/// `model` and `config` must be valid pointers and `out` a valid pointer. The
/// string is released with [`rm_string_free`].
#[unsafe(no_mangle)]
pub unsafe extern "C" fn rm_hitting_json(
    model: *const RmModel,
    config: *const RmSimConfig,
    x0: f64,
    i0: c_int,
    threshold: f64,
    from_right: c_int,
    max_horizon: f64,
    n_paths: usize,
    master_seed: u64,
    out: *mut *mut c_char,
) -> RmStatus {
    guarded(|| {
        if model.is_null() {
            return null_pointer("model");
        }
        if config.is_null() {
            return null_pointer("config");
        }
        if out.is_null() {
            return null_pointer("out");
        }
        let cfg = match sim_config(unsafe { &*config }) {
            Ok(c) => c,
            Err(status) => return status,
        };
        let regime = match regime_from(i0) {
            Ok(r) => r,
            Err(status) => return status,
        };
        let direction = if from_right == 0 {
            Direction::FromLeft
        } else {
            Direction::FromRight
        };
        let run = || -> Result<String, AnalysisError> {
            let spec = HittingSpec::new(threshold, direction, max_horizon)?;
            let est = estimate_hitting_time(
                unsafe { &(*model).inner },
                &cfg,
                x0,
                regime,
                &spec,
                n_paths,
                master_seed,
            )?;
            Ok(est.to_json())
        };
        match run() {
            Ok(json) => string_out(out, json),
            Err(e) => {
                set_error(e.to_string());
                analysis_status(&e)
            }
        }
    })
}

/// Post-burn-in occupation histogram over [0, 1], serialized as JSON.
///
/// # Safety
/// `model` and `config` must be valid pointers and `out` a valid pointer. The
/// string is released with [`rm_string_free`].
#[unsafe(no_mangle)]
pub unsafe extern "C" fn rm_occupation_json(
    model: *const RmModel,
    config: *const RmSimConfig,
    x0: f64,
    i0: c_int,
    n_paths: usize,
    bins: usize,
    burn_in_fraction: f64,
    master_seed: u64,
    out: *mut *mut c_char,
) -> RmStatus {
    guarded(|| {
        if model.is_null() {
            return null_pointer("model");
        }
        if config.is_null() {
            return null_pointer("config");
        }
        if out.is_null() {
            return null_pointer("out");
        }
        let cfg = match sim_config(unsafe { &*config }) {
            Ok(c) => c,
            Err(status) => return status,
        };
        let regime = match regime_from(i0) {
            Ok(r) => r,
            Err(status) => return status,
        };
        match occupation_measure(
            unsafe { &(*model).inner },
            &cfg,
            x0,
            regime,
            n_paths,
            bins,
            burn_in_fraction,
            master_seed,
        ) {
            Ok(hist) => string_out(out, hist.to_json()),
            Err(e) => {
                set_error(e.to_string());
                analysis_status(&e)
            }
        }
    })
}

/// Release a string returned by one of the `*_json` calls. NULL is accepted.
///
/// # Safety
/// `s` must be NULL or a pointer obtained from a `*_json` call that has not
/// been freed yet.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn rm_string_free(s: *mut c_char) {
    guarded(|| {
        if !s.is_null() {
            drop(unsafe { CString::from_raw(s) });
        }
        RmStatus::Ok
    });
}

/// Message describing the last failure on this thread, empty if none. The
/// pointer stays valid until the next failing call on the same thread.
#[unsafe(no_mangle)]
pub extern "C" fn rm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}
