#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "wqed/master.hpp"
#include "wqed/model.hpp"
#include "wqed/philox.hpp"

using namespace wqed;

namespace {

// Closed forms for gamma = 1, alpha = 1, delta = 0 (nbar = 1/2pi):
//   rho_ee    = 2 nbar / (gamma + 4 nbar) = 0.19449226482417136
//   flux_L    = rho_ee / 2                = 0.09724613241208568
//   flux_R    = nbar - flux_L             = 0.06190881067980966
constexpr double kNbar = 0.15915494309189535;
constexpr double kRhoEe = 0.19449226482417136;
constexpr double kFluxL = 0.09724613241208568;
constexpr double kFluxR = 0.06190881067980966;

double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("the driven qubit settles into the closed-form steady state") {
    const ModelOperators m = build_one_qubit(OneQubitParams{});
    const DensityMatrix ss = steady_state(m.generator);
    CHECK(ss.matrix()(1, 1).real() == doctest::Approx(kRhoEe).epsilon(1e-12));
    CHECK(std::abs(ss.trace() - Complex(1.0)) < 1e-12);
    CHECK_NOTHROW(ss.validate());
    // The generator annihilates it.
    CHECK(max_abs(generator_action(m.generator, ss.matrix())) < 1e-12);
    // Long-time integration reaches the same state.
    const DensityMatrix late = integrate(m.generator,
                                         DensityMatrix::pure(StateVector::ground(2)),
                                         80.0, 0.005);
    CHECK(max_abs(late.matrix() - ss.matrix()) < 1e-9);
}

TEST_CASE("steady fluxes take their frozen values and conserve the input") {
    const ModelOperators m = build_one_qubit(OneQubitParams{});
    const DensityMatrix ss = steady_state(m.generator);
    const double fr = channel_flux(m.j_right, ss);
    const double fl = channel_flux(m.j_left, ss);
    CHECK(fr == doctest::Approx(kFluxR).epsilon(1e-10));
    CHECK(fl == doctest::Approx(kFluxL).epsilon(1e-10));
    CHECK(fr + fl == doctest::Approx(kNbar).epsilon(1e-12));
    CHECK(fl == doctest::Approx(0.5 * ss.matrix()(1, 1).real()).epsilon(1e-12));
}

TEST_CASE("every photon in is a photon out across random models") {
    RngStream rng(11, 0);
    const double two_pi = 2.0 * std::numbers::pi;
    for (int t = 0; t < 6; ++t) {
        OneQubitParams p1;
        p1.gamma = 0.5 + rng.uniform();
        p1.alpha = Complex(2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0);
        p1.delta = rng.uniform() - 0.5;
        const ModelOperators m1 = build_one_qubit(p1);
        const DensityMatrix s1 = steady_state(m1.generator);
        CHECK(channel_flux(m1.j_right, s1) + channel_flux(m1.j_left, s1) ==
              doctest::Approx(p1.nbar()).epsilon(1e-11));

        TwoQubitParams p2;
        p2.gamma1 = 0.5 + rng.uniform();
        p2.gamma2 = 0.5 + rng.uniform();
        p2.alpha = Complex(2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0);
        p2.delta1 = rng.uniform() - 0.5;
        p2.delta2 = rng.uniform() - 0.5;
        p2.phase_k = p2.phase_eg1 = p2.phase_eg2 = two_pi * rng.uniform();
        const ModelOperators m2 = build_two_qubit(p2);
        const DensityMatrix s2 = steady_state(m2.generator);
        CHECK(channel_flux(m2.j_right, s2) + channel_flux(m2.j_left, s2) ==
              doctest::Approx(p2.nbar()).epsilon(1e-11));
    }
}

TEST_CASE("an undriven excited qubit decays exponentially") {
    OneQubitParams p;
    p.alpha = Complex(0.0, 0.0);
    p.gamma = 1.0;
    const ModelOperators m = build_one_qubit(p);
    const DensityMatrix rho0 = DensityMatrix::pure(StateVector::basis(2, 1));
    for (double t : {0.5, 1.0, 2.0}) {
        const DensityMatrix rho = integrate(m.generator, rho0, t, 0.002);
        CHECK(rho.matrix()(1, 1).real() == doctest::Approx(std::exp(-t)).epsilon(1e-10));
    }
}

TEST_CASE("integration composes over time and lands on fractional horizons") {
    const ModelOperators m = build_one_qubit(OneQubitParams{});
    const DensityMatrix rho0 = DensityMatrix::pure(StateVector::ground(2));
    const DensityMatrix direct = integrate(m.generator, rho0, 3.7, 0.005);
    const DensityMatrix split =
        integrate(m.generator, integrate(m.generator, rho0, 1.3, 0.005), 2.4, 0.005);
    CHECK(max_abs(direct.matrix() - split.matrix()) < 1e-12);
    // 3.7 is not a multiple of 0.005 * 2^k; a shorter final step must still land
    // exactly (agreement with a much finer step).
    const DensityMatrix fine = integrate(m.generator, rho0, 3.7, 0.0005);
    CHECK(max_abs(direct.matrix() - fine.matrix()) < 1e-10);
    CHECK_NOTHROW(direct.validate());
}

TEST_CASE("integration rejects steps the generator cannot resolve") {
    const ModelOperators m = build_one_qubit(OneQubitParams{});
    const DensityMatrix rho0 = DensityMatrix::pure(StateVector::ground(2));
    CHECK_THROWS_AS(integrate(m.generator, rho0, 1.0, 0.05), EngineError);
    CHECK_THROWS_AS(integrate(m.generator, rho0, -1.0, 0.005), EngineError);
    CHECK_THROWS_AS(integrate(m.generator, rho0, 1.0, 0.0), EngineError);
    CHECK_THROWS_AS(integrate(m.generator,
                              DensityMatrix::pure(StateVector::ground(4)), 1.0, 0.005),
                    EngineError);
}

TEST_CASE("a generator with no dissipation has no unique stationary state") {
    LindbladGenerator free{Operator::zero(2), {}};
    CHECK_THROWS_AS(steady_state(free), EngineError);
}

TEST_CASE("g2 at zero delay matches the direct two-photon formula") {
    const ModelOperators m = build_one_qubit(OneQubitParams{});
    const DensityMatrix ss = steady_state(m.generator);
    const CMatrix j = m.j_right.matrix();
    const double f = channel_flux(m.j_right, ss);
    const double direct =
        (j * (j * ss.matrix() * j.adjoint()) * j.adjoint()).trace().real() / (f * f);
    const CorrelationCurve curve =
        g2_master(m.generator, m.j_right, Channel::Right, {0.0});
    CHECK(curve.values[0] == doctest::Approx(direct).epsilon(1e-12));
    // Frozen value for the default parameters.
    CHECK(curve.values[0] == doctest::Approx(6.608994).epsilon(2e-6));
}

TEST_CASE("g2 decorrelates to one at long delays") {
    const ModelOperators m = build_one_qubit(OneQubitParams{});
    const CorrelationCurve curve =
        g2_master(m.generator, m.j_right, Channel::Right, {0.0, 30.0});
    CHECK(std::abs(curve.values[1] - 1.0) < 1e-6);
    const CorrelationCurve left =
        g2_master(m.generator, m.j_left, Channel::Left, {0.0, 30.0});
    CHECK(std::abs(left.values[1] - 1.0) < 1e-6);
}

TEST_CASE("one qubit can never emit two reflected photons at once") {
    const ModelOperators m = build_one_qubit(OneQubitParams{});
    const CorrelationCurve left = g2_master(m.generator, m.j_left, Channel::Left, {0.0});
    // sigma_minus squared vanishes identically, so this is exact.
    CHECK(left.values[0] == 0.0);
}

TEST_CASE("two qubits at quarter wavelength bunch their reflected light") {
    const ModelOperators m = build_two_qubit(
        TwoQubitParams::identical(1.0, Complex{1.0, 0.0}, std::numbers::pi / 2));
    const DensityMatrix ss = steady_state(m.generator);
    const double fr = channel_flux(m.j_right, ss);
    const double fl = channel_flux(m.j_left, ss);
    // Frozen fluxes for this workload; they still conserve the input.
    CHECK(fr == doctest::Approx(4.085197e-02).epsilon(1e-6));
    CHECK(fl == doctest::Approx(1.183030e-01).epsilon(1e-6));
    CHECK(fr + fl == doctest::Approx(m.nbar).epsilon(1e-12));
    const CorrelationCurve g2 = g2_master(m.generator, m.j_left, Channel::Left, {0.0});
    CHECK(g2.values[0] == doctest::Approx(1.410104).epsilon(2e-6));
}

TEST_CASE("a dark channel cannot define a correlation function") {
    OneQubitParams p;
    p.alpha = Complex(0.0, 0.0);  // no drive: steady state is the ground state
    const ModelOperators m = build_one_qubit(p);
    CHECK_THROWS_WITH_AS(g2_master(m.generator, m.j_left, Channel::Left, {0.0}),
                         doctest::Contains("dark channel"), EngineError);
}

TEST_CASE("g2 grids must be nonempty, nonnegative, and strictly increasing") {
    const ModelOperators m = build_one_qubit(OneQubitParams{});
    CHECK_THROWS_AS(g2_master(m.generator, m.j_right, Channel::Right, {}), EngineError);
    CHECK_THROWS_AS(g2_master(m.generator, m.j_right, Channel::Right, {-1.0, 0.0}),
                    EngineError);
    CHECK_THROWS_AS(g2_master(m.generator, m.j_right, Channel::Right, {0.0, 0.0}),
                    EngineError);
}

TEST_CASE("correlation curves enforce their own invariants") {
    CorrelationCurve c;
    c.taus = {0.0, 1.0};
    c.values = {1.0, 2.0};
    CHECK_NOTHROW(c.validate());
    c.values = {1.0};
    CHECK_THROWS_AS(c.validate(), StatsError);
    c.values = {1.0, -2.0};
    CHECK_THROWS_AS(c.validate(), StatsError);
    c.taus = {1.0, 1.0};
    c.values = {1.0, 2.0};
    CHECK_THROWS_AS(c.validate(), StatsError);
    CHECK(source_name(CurveSource::TrajectoryHistogram) == "trajectory-histogram");
    CHECK(source_name(CurveSource::MasterEquation) == "master-equation");
}

TEST_CASE("positivity survives integration from random pure states") {
    RngStream rng(12, 0);
    const ModelOperators m = build_two_qubit(
        TwoQubitParams::identical(1.0, Complex{1.0, 0.0}, std::numbers::pi / 2));
    CVector v(4);
    for (int i = 0; i < 4; ++i)
        v(i) = Complex(2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0);
    const DensityMatrix rho0 = DensityMatrix::pure(StateVector{CVector(v)}.normalized());
    const DensityMatrix rho = integrate(m.generator, rho0, 3.0, 0.005);
    CHECK_NOTHROW(rho.validate());
    CHECK(rho.min_eigenvalue() > -1e-10);
}
