#include "wqed/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <string>
#include <utility>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "wqed/errors.hpp"
#include "wqed/philox.hpp"

namespace wqed {

namespace {

// One trajectory on fixed-size state vectors; D is the Hilbert-space dimension.
// Semantics are locked to the public-operation sequence jump_probability /
// collapse / evolve_nonhermitian by tests/test_trajectory.cpp.
template <int D>
TrajectoryRecord run_fixed(const ModelOperators& m, const TrajectoryConfig& cfg,
                           const StateVector& psi0) {
    using Vec = Eigen::Matrix<Complex, D, 1>;
    using Mat = Eigen::Matrix<Complex, D, D>;

    const std::int64_t n_steps = cfg.n_steps();
    const double dt = cfg.dt;
    const Mat prop = propagator(m.h_eff, dt, cfg.scheme).matrix();
    const Mat rate_r = m.jump_rate(Channel::Right);
    const Mat rate_l = m.jump_rate(Channel::Left);
    const Mat jump_r = m.j_right.matrix();
    const Mat jump_l = m.j_left.matrix();

    Vec psi = psi0.amps();
    RngStream rng(cfg.master_seed, static_cast<std::uint64_t>(cfg.trajectory_id));

    TrajectoryRecord rec;
    rec.trajectory_id = cfg.trajectory_id;
    auto sample = [&](double t) {
        PopulationSample s;
        s.time = t;
        s.populations.resize(D);
        for (int i = 0; i < D; ++i) s.populations[i] = std::norm(psi(i));
        rec.population_samples.push_back(std::move(s));
    };
    if (cfg.record_population) sample(0.0);

    for (std::int64_t step = 0; step < n_steps; ++step) {
        double p_r = dt * std::real(psi.dot(rate_r * psi));
        double p_l = dt * std::real(psi.dot(rate_l * psi));
        if (p_r > 0.1 || p_l > 0.1 || p_r + p_l > 0.1)
            throw EngineError("probability-step violation: P_R + P_L = " +
                              std::to_string(p_r + p_l) + " at step " + std::to_string(step));
        p_r = std::max(p_r, 0.0);
        p_l = std::max(p_l, 0.0);

        const double r = rng.uniform();
        const double t_next = static_cast<double>(step + 1) * dt;
        if (r < p_r + p_l) {
            const Vec phi = (r < p_r) ? Vec(jump_r * psi) : Vec(jump_l * psi);
            const double n2 = phi.squaredNorm();
            if (n2 < 1e-24)
                throw EngineError("dark-state collapse reached in the jump branch");
            psi = phi / std::sqrt(n2);
            rec.events.push_back(
                {cfg.trajectory_id, t_next, r < p_r ? Channel::Right : Channel::Left});
        } else {
            const Vec evolved = prop * psi;
            const double n2 = evolved.squaredNorm();
            if (!(n2 > 0.0) || !std::isfinite(n2))
                throw EngineError("no-jump norm collapsed at step " + std::to_string(step));
            psi = evolved / std::sqrt(n2);
        }
        if (cfg.record_population && (step + 1) % cfg.population_stride == 0) sample(t_next);
    }

    rec.final_state = StateVector(CVector(psi));
    return rec;
}

TrajectoryRecord dispatch(const ModelOperators& m, const TrajectoryConfig& cfg,
                          const StateVector& psi0) {
    try {
        switch (m.dim) {
            case 2: return run_fixed<2>(m, cfg, psi0);
            case 4: return run_fixed<4>(m, cfg, psi0);
            default: throw EngineError("unsupported dimension " + std::to_string(m.dim));
        }
    } catch (const EngineError& e) {
        throw EngineError("trajectory " + std::to_string(cfg.trajectory_id) + ": " + e.what());
    }
}

}  // namespace

std::int64_t TrajectoryConfig::n_steps() const {
    return static_cast<std::int64_t>(std::floor(t_end / dt + 1e-9));
}

double TrajectoryConfig::horizon() const { return static_cast<double>(n_steps()) * dt; }

void TrajectoryConfig::validate(const ModelOperators& m) const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be positive");
    if (!std::isfinite(t_end) || t_end < dt)
        throw ConfigError("t_end must cover at least one step");
    const double scale = std::max({m.gamma_max, m.nbar, m.drive_rate});
    if (dt * scale > 0.01 * (1.0 + 1e-9))
        throw ConfigError("dt too coarse: dt * max rate = " + std::to_string(dt * scale) +
                          " exceeds 0.01");
    if (record_population && population_stride < 1)
        throw ConfigError("population_stride must be at least 1");
    if (trajectory_id < 0) throw ConfigError("trajectory_id must be nonnegative");
}

TrajectoryRecord run_trajectory(const ModelOperators& m, const TrajectoryConfig& cfg) {
    return run_trajectory(m, cfg, StateVector::ground(m.dim));
}

TrajectoryRecord run_trajectory(const ModelOperators& m, const TrajectoryConfig& cfg,
                                const StateVector& psi0) {
    cfg.validate(m);
    if (psi0.dim() != m.dim) throw EngineError("initial state dimension does not match model");
    if (!psi0.is_normalized()) throw EngineError("initial state must be normalized");
    return dispatch(m, cfg, psi0);
}

void run_ensemble_serial(const ModelOperators& m, const TrajectoryConfig& cfg,
                         std::int64_t n_traj,
                         const std::function<void(TrajectoryRecord&&)>& sink) {
    if (n_traj < 1) throw ConfigError("n_traj must be at least 1");
    TrajectoryConfig c = cfg;
    for (std::int64_t i = 0; i < n_traj; ++i) {
        c.trajectory_id = i;
        sink(run_trajectory(m, c));
    }
}

void run_ensemble(const ModelOperators& m, const TrajectoryConfig& cfg, std::int64_t n_traj,
                  const std::function<void(TrajectoryRecord&&)>& sink, int workers) {
#ifndef _OPENMP
    (void)workers;
    run_ensemble_serial(m, cfg, n_traj, sink);
#else
    if (n_traj < 1) throw ConfigError("n_traj must be at least 1");
    cfg.validate(m);
    const int threads = workers > 0 ? workers : omp_get_max_threads();
    // Records are produced in parallel one block at a time but always handed to the
    // sink in trajectory order, so output is independent of the worker count.
    const std::int64_t block = std::max<std::int64_t>(16, 4LL * threads);
    for (std::int64_t start = 0; start < n_traj; start += block) {
        const std::int64_t end = std::min(start + block, n_traj);
        std::vector<TrajectoryRecord> buf(static_cast<std::size_t>(end - start));
        std::vector<std::exception_ptr> errs(static_cast<std::size_t>(end - start));
#pragma omp parallel for schedule(dynamic) num_threads(threads)
        for (std::int64_t i = start; i < end; ++i) {
            try {
                TrajectoryConfig c = cfg;
                c.trajectory_id = i;
                buf[static_cast<std::size_t>(i - start)] = run_trajectory(m, c);
            } catch (...) {
                errs[static_cast<std::size_t>(i - start)] = std::current_exception();
            }
        }
        for (auto& e : errs)
            if (e) std::rethrow_exception(e);
        for (auto& r : buf) sink(std::move(r));
    }
#endif
}

std::vector<TrajectoryRecord> run_ensemble_collect(const ModelOperators& m,
                                                   const TrajectoryConfig& cfg,
                                                   std::int64_t n_traj, int workers) {
    std::vector<TrajectoryRecord> out;
    out.reserve(static_cast<std::size_t>(n_traj));
    run_ensemble(m, cfg, n_traj, [&](TrajectoryRecord&& r) { out.push_back(std::move(r)); },
                 workers);
    return out;
}

DensityMatrix ensemble_density(const ModelOperators& m, const TrajectoryConfig& cfg,
                               std::int64_t n_traj, int workers) {
    CMatrix acc = CMatrix::Zero(m.dim, m.dim);
    run_ensemble(m, cfg, n_traj,
                 [&](TrajectoryRecord&& r) {
                     acc.noalias() += r.final_state.amps() * r.final_state.amps().adjoint();
                 },
                 workers);
    return DensityMatrix{acc / static_cast<double>(n_traj)};
}

StateVector conditional_state_analytics(const ModelOperators& m, const StateVector& psi0,
                                        double elapsed) {
    if (!m.one_qubit) throw EngineError("closed-form no-jump evolution needs the one-qubit model");
    if (psi0.dim() != 2) throw EngineError("state dimension does not match model");
    if (elapsed < 0.0 || !std::isfinite(elapsed))
        throw EngineError("elapsed time must be nonnegative");
    const OneQubitParams& p = *m.one_qubit;
    const Complex ga = p.coupling() * p.alpha;
    const double nbar = p.nbar();
    // Amplitude equations under h_eff: c_g decays at nbar/2 with detuning phase,
    // c_e at (gamma+nbar)/2 while fed by the drive from c_g.
    const Complex a(-0.5 * (p.gamma + nbar), -0.5 * p.delta);
    const Complex b(-0.5 * nbar, 0.5 * p.delta);
    const Complex ea = std::exp(a * elapsed);
    const Complex eb = std::exp(b * elapsed);
    const Complex cg0 = psi0.amp(0);
    const Complex ce0 = psi0.amp(1);
    CVector out(2);
    out(0) = cg0 * eb;
    out(1) = ce0 * ea - Complex(0.0, 1.0) * ga * cg0 * (eb - ea) / (b - a);
    return StateVector(out);
}

}  // namespace wqed
