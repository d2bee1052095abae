#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "wqed/hilbert.hpp"
#include "wqed/model.hpp"

namespace wqed {

// One photon detection.  Times are step-quantized to the end of the step in which
// the jump fired, so two events in a trajectory never coincide.
struct DetectionEvent {
    std::int64_t trajectory_id = 0;
    double time = 0.0;
    Channel channel = Channel::Right;
};

struct TrajectoryConfig {
    double dt = 0.005;
    double t_end = 100.0;
    Scheme scheme = Scheme::Exp;
    bool record_population = false;
    int population_stride = 1;  // steps between samples when recording
    std::uint64_t master_seed = 0;
    std::int64_t trajectory_id = 0;

    // Whole steps fitting in [0, t_end]; the simulated horizon is n_steps() * dt.
    std::int64_t n_steps() const;
    double horizon() const;
    // The step must resolve every rate in the model: dt <= 0.01 / max(gamma, nbar, |g alpha|).
    void validate(const ModelOperators& m) const;
};

struct PopulationSample {
    double time = 0.0;
    std::vector<double> populations;  // |amp_i|^2 per basis state, post-step
};

struct TrajectoryRecord {
    std::int64_t trajectory_id = 0;
    std::vector<DetectionEvent> events;
    std::vector<PopulationSample> population_samples;  // empty unless requested
    StateVector final_state;

    TrajectoryRecord() : final_state(StateVector::ground(2)) {}
};

// Runs one Monte-Carlo trajectory from psi0 (default: ground state).  Each step
// draws one uniform number against (P_R, P_R + P_L) computed from the pre-step
// state; a hit collapses the pre-step state and stamps the step's end time, a miss
// evolves under h_eff and renormalizes.  The result is a pure function of
// (m, cfg, psi0) through the counter RNG stream (cfg.master_seed,
// cfg.trajectory_id).  Errors carry the trajectory id.
TrajectoryRecord run_trajectory(const ModelOperators& m, const TrajectoryConfig& cfg);
TrajectoryRecord run_trajectory(const ModelOperators& m, const TrajectoryConfig& cfg,
                                const StateVector& psi0);

// Runs trajectory ids 0..n_traj-1 and hands each record to sink in id order,
// regardless of worker count (workers <= 0 picks the OpenMP default).  Memory is
// bounded by one block of records.  The serial variant is the reference the
// parallel path must match byte for byte.
void run_ensemble(const ModelOperators& m, const TrajectoryConfig& cfg, std::int64_t n_traj,
                  const std::function<void(TrajectoryRecord&&)>& sink, int workers = 0);
void run_ensemble_serial(const ModelOperators& m, const TrajectoryConfig& cfg,
                         std::int64_t n_traj,
                         const std::function<void(TrajectoryRecord&&)>& sink);

// Convenience: all records in id order.
std::vector<TrajectoryRecord> run_ensemble_collect(const ModelOperators& m,
                                                   const TrajectoryConfig& cfg,
                                                   std::int64_t n_traj, int workers = 0);

// Average of |psi(t_end)><psi(t_end)| over n_traj trajectories from the ground
// state: the Monte-Carlo estimate of the master-equation state.
DensityMatrix ensemble_density(const ModelOperators& m, const TrajectoryConfig& cfg,
                               std::int64_t n_traj, int workers = 0);

// Closed-form no-jump evolution for the one-qubit model: the unnormalized state
// elapsed after psi0 under h_eff, from the two-level solution of the effective
// Schroedinger equation.  Oracle for the numeric propagation.
StateVector conditional_state_analytics(const ModelOperators& m, const StateVector& psi0,
                                        double elapsed);

}  // namespace wqed
