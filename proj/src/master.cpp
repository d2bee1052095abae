#include "wqed/master.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>

#include "wqed/errors.hpp"

namespace wqed {

namespace {

constexpr double kMaxStepScale = 0.01;  // dt * rate_scale bound for RK4 accuracy

void check_step(const LindbladGenerator& gen, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw EngineError("integration step must be positive");
    if (dt * gen.rate_scale() > kMaxStepScale * (1.0 + 1e-9))
        throw EngineError("step-size violation: dt * rate_scale = " +
                          std::to_string(dt * gen.rate_scale()) + " exceeds " +
                          std::to_string(kMaxStepScale));
}

// One RK4 step of size h on the raw matrix.
void rk4_step(const LindbladGenerator& gen, CMatrix& rho, double h) {
    const CMatrix k1 = generator_action(gen, rho);
    const CMatrix k2 = generator_action(gen, rho + (0.5 * h) * k1);
    const CMatrix k3 = generator_action(gen, rho + (0.5 * h) * k2);
    const CMatrix k4 = generator_action(gen, rho + h * k3);
    rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Advances rho in place by t using full steps of dt plus one shorter final step.
void propagate(const LindbladGenerator& gen, CMatrix& rho, double t, double dt) {
    const auto n_full = static_cast<long long>(std::floor(t / dt + 1e-12));
    for (long long i = 0; i < n_full; ++i) rk4_step(gen, rho, dt);
    const double rem = t - static_cast<double>(n_full) * dt;
    if (rem > 1e-12 * std::max(1.0, t)) rk4_step(gen, rho, rem);
    if (!all_finite(rho)) throw EngineError("non-finite intermediate during integration");
}

}  // namespace

DensityMatrix integrate(const LindbladGenerator& gen, const DensityMatrix& rho0,
                        double t_end, double dt) {
    check_step(gen, dt);
    if (t_end < 0.0 || !std::isfinite(t_end)) throw EngineError("t_end must be nonnegative");
    if (rho0.dim() != gen.h.dim()) throw EngineError("state dimension does not match generator");
    const double trace0 = rho0.matrix().trace().real();
    CMatrix rho = rho0.matrix();
    propagate(gen, rho, t_end, dt);
    if (std::abs(rho.trace().real() - trace0) > 1e-9 || std::abs(rho.trace().imag()) > 1e-9)
        throw EngineError("integration failed to preserve trace");
    if ((rho - rho.adjoint().eval()).cwiseAbs().maxCoeff() > 1e-9)
        throw EngineError("integration failed to preserve Hermiticity");
    DensityMatrix out{rho};
    out.validate(1e-9, 1e-9, -1e-9);
    return out;
}

DensityMatrix steady_state(const LindbladGenerator& gen) {
    const int d = gen.h.dim();
    const int d2 = d * d;
    const CMatrix h = gen.h.matrix();
    const CMatrix id = CMatrix::Identity(d, d);

    // Column-major vectorization: vec(A X B) = (B^T kron A) vec(X).
    CMatrix lv = Complex(0.0, -1.0) * (kron(id, h) - kron(h.transpose(), id));
    for (std::size_t k = 0; k < gen.jumps.size(); ++k) {
        const CMatrix& j = gen.jumps[k].matrix();
        const CMatrix& a = gen.jdagj[k];
        lv += kron(j.conjugate(), j);
        lv -= 0.5 * kron(id, a);
        lv -= 0.5 * kron(a.transpose(), id);
    }

    Eigen::FullPivLU<CMatrix> lu(lv);
    lu.setThreshold(1e-10);
    const auto kernel_dim = lu.dimensionOfKernel();
    if (kernel_dim != 1)
        throw EngineError("non-unique steady state: kernel dimension " +
                          std::to_string(kernel_dim));
    const CVector v = lu.kernel().col(0);

    CMatrix rho(d, d);
    for (int col = 0; col < d; ++col) rho.col(col) = v.segment(col * d, d);
    rho = 0.5 * (rho + rho.adjoint().eval());
    const Complex tr = rho.trace();
    if (std::abs(tr) < 1e-12 * rho.norm())
        throw EngineError("steady-state candidate has vanishing trace");
    rho /= tr;

    const double residual = generator_action(gen, rho).cwiseAbs().maxCoeff();
    if (residual > 1e-10)
        throw EngineError("steady-state residual " + std::to_string(residual) +
                          " exceeds 1e-10");
    DensityMatrix out{rho};
    out.validate(1e-10, 1e-10, -1e-9);
    return out;
}

double channel_flux(const Operator& j, const DensityMatrix& rho) {
    if (j.dim() != rho.dim()) throw EngineError("operator dimension does not match state");
    return (j.matrix() * rho.matrix() * j.matrix().adjoint()).trace().real();
}

CorrelationCurve g2_master(const LindbladGenerator& gen, const Operator& j, Channel label,
                           const std::vector<double>& taus, double dt) {
    if (taus.empty()) throw EngineError("g2 needs at least one tau");
    if (!(taus.front() >= 0.0)) throw EngineError("g2 taus must start at or after 0");
    for (std::size_t i = 0; i + 1 < taus.size(); ++i)
        if (!(taus[i] < taus[i + 1])) throw EngineError("g2 taus must increase strictly");
    if (j.dim() != gen.h.dim()) throw EngineError("operator dimension does not match generator");
    if (dt == 0.0) dt = 0.005 / std::max(gen.rate_scale(), 1e-12);
    check_step(gen, dt);

    const DensityMatrix rho_ss = steady_state(gen);
    const double flux = channel_flux(j, rho_ss);
    if (flux <= 1e-15)
        throw EngineError("dark channel " + std::string(1, channel_code(label)) +
                          ": steady-state flux " + std::to_string(flux));

    // Conditioned state right after a detection, then one forward pass over the grid.
    CMatrix rho_c = (j.matrix() * rho_ss.matrix() * j.matrix().adjoint()) / flux;
    CorrelationCurve curve;
    curve.channel = label;
    curve.source = CurveSource::MasterEquation;
    curve.taus = taus;
    curve.values.reserve(taus.size());
    double reached = 0.0;
    for (double tau : taus) {
        propagate(gen, rho_c, tau - reached, dt);
        reached = tau;
        double v = (j.matrix() * rho_c * j.matrix().adjoint()).trace().real() / flux;
        if (!std::isfinite(v)) throw EngineError("non-finite g2 value");
        if (v < 0.0) {
            if (v < -1e-9) throw EngineError("negative g2 value " + std::to_string(v));
            v = 0.0;
        }
        curve.values.push_back(v);
    }
    curve.validate();
    return curve;
}

std::string source_name(CurveSource s) {
    return s == CurveSource::TrajectoryHistogram ? "trajectory-histogram" : "master-equation";
}

void CorrelationCurve::validate() const {
    if (taus.empty()) throw StatsError("correlation curve has no grid points");
    if (taus.size() != values.size())
        throw StatsError("correlation curve grid and values differ in length");
    if (!(taus.front() >= 0.0)) throw StatsError("correlation curve grid starts before 0");
    for (std::size_t i = 0; i < taus.size(); ++i) {
        if (!std::isfinite(taus[i]) || !std::isfinite(values[i]))
            throw StatsError("correlation curve has non-finite entries");
        if (values[i] < 0.0) throw StatsError("correlation curve has negative values");
        if (i + 1 < taus.size() && !(taus[i] < taus[i + 1]))
            throw StatsError("correlation curve grid must increase strictly");
    }
}

}  // namespace wqed
