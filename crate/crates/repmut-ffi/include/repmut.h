#ifndef REPMUT_H
#define REPMUT_H

/* Generated by cbindgen from repmut-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status code returned by every interface call.
typedef enum {
  RM_STATUS_OK = 0,
  // A parameter failed validation.
  RM_STATUS_INVALID_INPUT = 2,
  // The computation failed numerically.
  RM_STATUS_NUMERICAL_FAILURE = 3,
  // A required pointer argument was NULL.
  RM_STATUS_NULL_POINTER = 4,
  // A panic was caught at the boundary; memory stays valid.
  RM_STATUS_PANIC = 5,
} RmStatus;

// Opaque handle: two-type game, two mutation regimes, switching generator.
typedef struct RmModel RmModel;

// Opaque handle: one sampled path in column layout, exposed through the
// `rm_trajectory_*` accessors.
typedef struct RmTrajectory RmTrajectory;

// Integration settings. `dt` is the integrator step, `sample_every` the
// output grid spacing, `boundary_guard` the clamp distance kept from 0 and 1.
typedef struct {
  double dt;
  double horizon;
  double sample_every;
  double boundary_guard;
} RmSimConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Build a model handle. The lower of the two mutation rates always drives
// regime 1; inputs arriving in the other order are relabeled internally.
//
// # Safety
// `out` must be a valid pointer. The returned handle is owned by the caller
// and must be released with [`rm_model_free`].
RmStatus rm_model_new(double b1,
                      double b2,
                      double mu1,
                      double mu2,
                      double q12,
                      double q21,
                      RmModel **out);

// Release a model handle. NULL is accepted and ignored.
//
// # Safety
// `model` must be NULL or a pointer obtained from [`rm_model_new`] that has
// not been freed yet.
void rm_model_free(RmModel *model);

// Critical mutation rate of the model's game.
//
// # Safety
// `model` must be a live handle and `out` a valid pointer.
RmStatus rm_critical_mu(const RmModel *model, double *out);

// Scalar drift of type-1 frequency `x` under the given regime (1 or 2).
//
// # Safety
// `model` must be a live handle and `out` a valid pointer.
RmStatus rm_drift(const RmModel *model, double x, int regime, double *out);

// Equilibria of the drift under the mutation rate of `regime` (1 or 2),
// ascending. Three locations mean stable/unstable/stable; one means a single
// stable equilibrium. `capacity` is the length of `out_locations` and must be
// at least 3.
//
// # Safety
// `model` must be a live handle, `out_locations` must point to at least
// `capacity` doubles, and `out_count` must be a valid pointer.
RmStatus rm_fixed_points(const RmModel *model,
                         int regime,
                         double *out_locations,
                         size_t capacity,
                         size_t *out_count);

// Default integration settings: dt 1e-3, horizon 100, one sample every 0.1,
// boundary guard 1e-12.
RmSimConfig rm_sim_config_default(void);

// Simulate one path from `x0` in regime `i0`, driven by the seeded stream
// (`master_seed`, `stream_index`). Identical inputs give identical output.
//
// # Safety
// `model` and `config` must be valid pointers and `out` a valid pointer. The
// returned handle must be released with [`rm_trajectory_free`].
RmStatus rm_simulate(const RmModel *model,
                     const RmSimConfig *config,
                     double x0,
                     int i0,
                     uint64_t master_seed,
                     uint64_t stream_index,
                     RmTrajectory **out);

// Number of samples in the trajectory (0 for NULL).
//
// # Safety
// `traj` must be NULL or a live trajectory handle.
size_t rm_trajectory_len(const RmTrajectory *traj);

// Sample times, one per sample; valid while the handle is alive.
//
// # Safety
// `traj` must be NULL or a live trajectory handle.
const double *rm_trajectory_times(const RmTrajectory *traj);

// Type-1 frequencies, one per sample; valid while the handle is alive.
//
// # Safety
// `traj` must be NULL or a live trajectory handle.
const double *rm_trajectory_states(const RmTrajectory *traj);

// Regime labels (1 or 2), one per sample; valid while the handle is alive.
//
// # Safety
// `traj` must be NULL or a live trajectory handle.
const uint8_t *rm_trajectory_regimes(const RmTrajectory *traj);

// Number of integrator steps that had to be clamped back into [0, 1].
//
// # Safety
// `traj` must be NULL or a live trajectory handle.
uint64_t rm_trajectory_clamp_events(const RmTrajectory *traj);

// Release a trajectory handle. NULL is accepted and ignored.
//
// # Safety
// `traj` must be NULL or a pointer obtained from [`rm_simulate`] that has not
// been freed yet.
void rm_trajectory_free(RmTrajectory *traj);

// Ensemble statistics over `n_paths` seeded paths, serialized as JSON.
//
// # Safety
// `model` and `config` must be valid pointers and `out` a valid pointer. The
// string is released with [`rm_string_free`].
RmStatus rm_ensemble_json(const RmModel *model,
                          const RmSimConfig *config,
                          double x0,
                          int i0,
                          size_t n_paths,
                          uint64_t master_seed,
                          char **out);

// First-passage estimate to `threshold`, serialized as JSON. `from_right`
// zero means the threshold is approached from below, nonzero from above.
// `max_horizon` censors paths and overrides the config horizon.
//
// # Safety
// `model` and `config` must be valid pointers and `out` a valid pointer. The
// string is released with [`rm_string_free`].
RmStatus rm_hitting_json(const RmModel *model,
                         const RmSimConfig *config,
                         double x0,
                         int i0,
                         double threshold,
                         int from_right,
                         double max_horizon,
                         size_t n_paths,
                         uint64_t master_seed,
                         char **out);

// Post-burn-in occupation histogram over [0, 1], serialized as JSON.
//
// # Safety
// `model` and `config` must be valid pointers and `out` a valid pointer. The
// string is released with [`rm_string_free`].
RmStatus rm_occupation_json(const RmModel *model,
                            const RmSimConfig *config,
                            double x0,
                            int i0,
                            size_t n_paths,
                            size_t bins,
                            double burn_in_fraction,
                            uint64_t master_seed,
                            char **out);

// Release a string returned by one of the `*_json` calls. NULL is accepted.
//
// # Safety
// `s` must be NULL or a pointer obtained from a `*_json` call that has not
// been freed yet.
void rm_string_free(char *s);

// Message describing the last failure on this thread, empty if none. The
// pointer stays valid until the next failing call on the same thread.
const char *rm_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* REPMUT_H */
