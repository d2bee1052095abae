#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "wqed/master.hpp"
#include "wqed/model.hpp"
#include "wqed/philox.hpp"
#include "wqed/stats.hpp"
#include "wqed/trajectory.hpp"

using namespace wqed;
using namespace std::complex_literals;

namespace {

// Frozen one-qubit constants (gamma = 1, alpha = 1): g alpha = 0.2820947917738781,
// so the no-jump fixed-point amplitude ratio is -2 i g alpha.
constexpr double kGAlpha = 0.2820947917738781;
constexpr double kNbar = 0.15915494309189535;

TrajectoryConfig fig3_run(double t_end, std::int64_t id = 0) {
    TrajectoryConfig cfg;
    cfg.dt = 0.005;
    cfg.t_end = t_end;
    cfg.master_seed = 20240817;
    cfg.trajectory_id = id;
    return cfg;
}

bool same_events(const std::vector<DetectionEvent>& a, const std::vector<DetectionEvent>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i].trajectory_id != b[i].trajectory_id || a[i].time != b[i].time ||
            a[i].channel != b[i].channel)
            return false;
    return true;
}

}  // namespace

TEST_CASE("an undriven excited qubit emits exactly one photon at rate gamma") {
    OneQubitParams p;
    p.alpha = Complex(0.0, 0.0);
    const ModelOperators m = build_one_qubit(p);
    TrajectoryConfig cfg;
    cfg.dt = 0.002;
    cfg.t_end = 15.0;
    cfg.master_seed = 42;
    const StateVector excited = StateVector::basis(2, 1);

    std::vector<double> first_times;
    std::int64_t right = 0, total = 0;
    for (std::int64_t id = 0; id < 3000; ++id) {
        cfg.trajectory_id = id;
        const TrajectoryRecord rec = run_trajectory(m, cfg, excited);
        REQUIRE(rec.events.size() == 1);
        first_times.push_back(rec.events[0].time);
        total += 1;
        if (rec.events[0].channel == Channel::Right) ++right;
        // After the emission the qubit sits in the ground state for good.
        CHECK(std::abs(rec.final_state.amp(0) - Complex(1.0)) < 1e-14);
    }
    // Emission times follow Exp(gamma); detection sides split evenly.
    CHECK(ks_test_exponential(first_times, 1.0) > 1e-3);
    const double frac = double(right) / double(total);
    CHECK(std::abs(frac - 0.5) < 3.0 * 0.5 / std::sqrt(double(total)));
}

TEST_CASE("the closed-form no-jump state matches the stepped propagation") {
    const ModelOperators m = build_one_qubit(OneQubitParams{});
    for (const StateVector& psi0 : {StateVector::ground(2), StateVector::basis(2, 1)}) {
        StateVector psi = psi0;
        double survival = 1.0;  // squared norm of the unnormalized state
        const double dt = 0.01;
        double worst = 0.0, worst_norm = 0.0;
        for (int step = 1; step <= 1000; ++step) {  // ten lifetimes
            const StateVector out = evolve_nonhermitian(m.h_eff, psi, dt, Scheme::Exp);
            survival *= out.norm2();
            psi = out.normalized();
            const StateVector exact = conditional_state_analytics(m, psi0, step * dt);
            worst_norm = std::max(worst_norm, std::abs(survival - exact.norm2()));
            const CVector gap = psi.amps() - exact.normalized().amps();
            worst = std::max(worst, gap.cwiseAbs().maxCoeff());
        }
        CHECK(worst < 1e-8);
        CHECK(worst_norm < 1e-8);
    }
}

TEST_CASE("without jumps the qubit funnels into the frozen fixed point") {
    const ModelOperators m = build_one_qubit(OneQubitParams{});
    // The transient dies off at gamma/2, so by t = 60 it is below 1e-13.
    const StateVector late = conditional_state_analytics(m, StateVector::ground(2), 60.0);
    const Complex ratio = late.amp(1) / late.amp(0);
    CHECK(std::abs(ratio - Complex(0.0, -2.0 * kGAlpha)) < 1e-10);
    // The ground amplitude decays at nbar/2.
    CHECK(std::abs(late.amp(0)) ==
          doctest::Approx(std::exp(-0.5 * kNbar * 60.0)).epsilon(1e-12));
}

TEST_CASE("closed-form evolution rejects what it cannot describe") {
    const ModelOperators m2 = build_two_qubit(
        TwoQubitParams::identical(1.0, Complex{1.0, 0.0}, std::numbers::pi / 2));
    CHECK_THROWS_AS(conditional_state_analytics(m2, StateVector::ground(2), 1.0),
                    EngineError);
    const ModelOperators m = build_one_qubit(OneQubitParams{});
    CHECK_THROWS_AS(conditional_state_analytics(m, StateVector::ground(2), -1.0),
                    EngineError);
}

TEST_CASE("the engine is the public-operation loop run fast") {
    const ModelOperators m = build_one_qubit(OneQubitParams{});
    TrajectoryConfig cfg = fig3_run(20.0, 5);
    cfg.record_population = true;
    const TrajectoryRecord rec = run_trajectory(m, cfg);

    // Replay with jump_probability / collapse / evolve_nonhermitian and the same
    // uniform draws.
    RngStream rng(cfg.master_seed, 5);
    StateVector psi = StateVector::ground(2);
    std::vector<DetectionEvent> events;
    std::size_t sample_index = 1;  // sample 0 is the initial state
    REQUIRE(rec.population_samples.size() == 4001);
    double worst_pop = 0.0;
    for (std::int64_t step = 0; step < cfg.n_steps(); ++step) {
        const double p_r = jump_probability(m, psi, Channel::Right, cfg.dt);
        const double p_l = jump_probability(m, psi, Channel::Left, cfg.dt);
        const double r = rng.uniform();
        const double t_next = double(step + 1) * cfg.dt;
        if (r < p_r) {
            psi = collapse(m, psi, Channel::Right);
            events.push_back({5, t_next, Channel::Right});
        } else if (r < p_r + p_l) {
            psi = collapse(m, psi, Channel::Left);
            events.push_back({5, t_next, Channel::Left});
        } else {
            psi = evolve_nonhermitian(m.h_eff, psi, cfg.dt, cfg.scheme).normalized();
        }
        const PopulationSample& s = rec.population_samples[sample_index++];
        CHECK(s.time == t_next);
        for (int i = 0; i < 2; ++i)
            worst_pop = std::max(worst_pop,
                                 std::abs(s.populations[i] - std::norm(psi.amp(i))));
    }
    CHECK(worst_pop < 1e-12);
    CHECK(same_events(rec.events, events));
    CHECK(!rec.events.empty());
    CHECK((rec.final_state.amps() - psi.amps()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("population recording honors its stride") {
    const ModelOperators m = build_one_qubit(OneQubitParams{});
    TrajectoryConfig cfg = fig3_run(1.0);
    cfg.record_population = true;
    cfg.population_stride = 50;
    const TrajectoryRecord rec = run_trajectory(m, cfg);
    REQUIRE(rec.population_samples.size() == 5);  // t = 0 plus 200/50 samples
    CHECK(rec.population_samples[0].time == 0.0);
    CHECK(rec.population_samples[1].time == doctest::Approx(0.25));
    CHECK(rec.population_samples[4].time == doctest::Approx(1.0));
    // Populations are probabilities of a normalized state.
    for (const PopulationSample& s : rec.population_samples) {
        double sum = 0.0;
        for (double v : s.populations) sum += v;
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("worker count never changes the ensemble output") {
    const ModelOperators m = build_one_qubit(OneQubitParams{});
    const TrajectoryConfig cfg = fig3_run(20.0);
    const std::int64_t n = 64;
    std::vector<TrajectoryRecord> serial;
    run_ensemble_serial(m, cfg, n, [&](TrajectoryRecord&& r) { serial.push_back(std::move(r)); });
    REQUIRE(serial.size() == std::size_t(n));
    for (int workers : {1, 3}) {
        const std::vector<TrajectoryRecord> par = run_ensemble_collect(m, cfg, n, workers);
        REQUIRE(par.size() == serial.size());
        for (std::size_t i = 0; i < par.size(); ++i) {
            CHECK(par[i].trajectory_id == serial[i].trajectory_id);
            CHECK(same_events(par[i].events, serial[i].events));
            CHECK(par[i].final_state.amps() == serial[i].final_state.amps());
        }
    }
}

TEST_CASE("reruns replay bit for bit and reseeding changes the draw") {
    const ModelOperators m = build_one_qubit(OneQubitParams{});
    const TrajectoryConfig cfg = fig3_run(50.0, 3);
    const TrajectoryRecord a = run_trajectory(m, cfg);
    const TrajectoryRecord b = run_trajectory(m, cfg);
    CHECK(same_events(a.events, b.events));
    CHECK(a.final_state.amps() == b.final_state.amps());
    TrajectoryConfig other = cfg;
    other.master_seed = 20240818;
    CHECK_FALSE(same_events(a.events, run_trajectory(m, other).events));
}

TEST_CASE("the trajectory average converges to the integrated state") {
    const ModelOperators m = build_one_qubit(OneQubitParams{});
    TrajectoryConfig cfg = fig3_run(2.0);
    const DensityMatrix ens = ensemble_density(m, cfg, 2000);
    const DensityMatrix ref = integrate(m.generator,
                                        DensityMatrix::pure(StateVector::ground(2)),
                                        2.0, cfg.dt);
    CHECK_NOTHROW(ens.validate());
    const double gap = (ens.matrix() - ref.matrix()).cwiseAbs().maxCoeff();
    CHECK(gap < 0.05);  // estimator noise at N = 2000 is ~0.01
}

TEST_CASE("unusable run configurations are rejected up front") {
    const ModelOperators m = build_one_qubit(OneQubitParams{});
    TrajectoryConfig cfg = fig3_run(10.0);
    cfg.dt = 0.02;  // dt * max rate = 0.02 > 0.01
    CHECK_THROWS_AS(run_trajectory(m, cfg), ConfigError);
    cfg = fig3_run(0.001);  // shorter than one step
    CHECK_THROWS_AS(run_trajectory(m, cfg), ConfigError);
    cfg = fig3_run(10.0);
    cfg.trajectory_id = -1;
    CHECK_THROWS_AS(run_trajectory(m, cfg), ConfigError);
    cfg = fig3_run(10.0);
    cfg.record_population = true;
    cfg.population_stride = 0;
    CHECK_THROWS_AS(run_trajectory(m, cfg), ConfigError);
    cfg = fig3_run(10.0);
    CHECK_THROWS_AS(run_trajectory(m, cfg, StateVector::ground(4)), EngineError);
    CVector v(2);
    v << 1.0, 1.0;
    CHECK_THROWS_AS(run_trajectory(m, cfg, StateVector{CVector(v)}), EngineError);
    CHECK_THROWS_AS(run_ensemble_collect(m, cfg, 0), ConfigError);
}

TEST_CASE("step counting floors to whole steps with a tolerance for rounding") {
    TrajectoryConfig cfg;
    cfg.dt = 0.005;
    cfg.t_end = 2000.0;
    CHECK(cfg.n_steps() == 400000);
    CHECK(cfg.horizon() == doctest::Approx(2000.0).epsilon(1e-12));
    cfg.t_end = 0.0149;  // floor(2.98) = 2 steps
    CHECK(cfg.n_steps() == 2);
    cfg.t_end = 0.015;  // 3 steps despite 0.015/0.005 rounding to 2.9999...
    CHECK(cfg.n_steps() == 3);
}

TEST_CASE("event times are strictly increasing multiples of the step") {
    const ModelOperators m = build_one_qubit(OneQubitParams{});
    const TrajectoryConfig cfg = fig3_run(200.0, 11);
    const TrajectoryRecord rec = run_trajectory(m, cfg);
    REQUIRE(rec.events.size() > 10);
    double prev = 0.0;
    for (const DetectionEvent& e : rec.events) {
        CHECK(e.time > prev);
        const double steps = e.time / cfg.dt;
        CHECK(std::abs(steps - std::round(steps)) < 1e-9);
        CHECK(e.trajectory_id == 11);
        prev = e.time;
    }
}
