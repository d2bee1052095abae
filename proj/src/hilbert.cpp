#include "wqed/hilbert.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace wqed {

bool all_finite(const CMatrix& m) { return m.allFinite(); }
bool all_finite(const CVector& v) { return v.allFinite(); }

CMatrix kron(const CMatrix& a, const CMatrix& b) {
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

std::string basis_label(int dim, int index) {
    if (index < 0 || index >= dim) throw ConfigError("basis_label: index out of range");
    if (dim == 2) return index == 0 ? "g" : "e";
    if (dim == 4) {
        static const char* names[4] = {"gg", "ge", "eg", "ee"};
        return names[index];
    }
    return "state" + std::to_string(index);
}

StateVector::StateVector(CVector amps) : amps_(std::move(amps)) {
    if (amps_.size() == 0) throw ConfigError("StateVector: empty amplitude vector");
    if (!all_finite(amps_)) throw ConfigError("StateVector: non-finite amplitudes");
    normalized_ = std::abs(amps_.squaredNorm() - 1.0) <= 1e-12;
}

StateVector StateVector::basis(int dim, int index) {
    if (dim <= 0 || index < 0 || index >= dim)
        throw ConfigError("StateVector::basis: index out of range");
    CVector v = CVector::Zero(dim);
    v(index) = 1.0;
    return StateVector(std::move(v));
}

StateVector StateVector::ground(int dim) { return basis(dim, 0); }

StateVector StateVector::normalized() const {
    const double n2 = norm2();
    if (n2 < 1e-24) throw EngineError("StateVector::normalized: zero-norm state");
    return StateVector(amps_ / std::sqrt(n2));
}

Operator::Operator(CMatrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols() || m_.rows() == 0)
        throw ConfigError("Operator: matrix must be square and non-empty");
    if (!all_finite(m_)) throw ConfigError("Operator: non-finite entries");
    hermitian_ = (m_ - m_.adjoint()).cwiseAbs().maxCoeff() <= 1e-12;
}

Operator Operator::identity(int dim) { return Operator(CMatrix::Identity(dim, dim)); }
Operator Operator::zero(int dim) { return Operator(CMatrix::Zero(dim, dim)); }

DensityMatrix::DensityMatrix(CMatrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols() || m_.rows() == 0)
        throw ConfigError("DensityMatrix: matrix must be square and non-empty");
    if (!all_finite(m_)) throw ConfigError("DensityMatrix: non-finite entries");
    trace_normalized_ = std::abs(m_.trace() - Complex(1.0, 0.0)) <= 1e-10;
}

DensityMatrix DensityMatrix::pure(const StateVector& psi) {
    return DensityMatrix(psi.amps() * psi.amps().adjoint());
}

double DensityMatrix::min_eigenvalue() const {
    const CMatrix herm = 0.5 * (m_ + m_.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(herm, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

void DensityMatrix::validate(double herm_tol, double trace_tol, double eig_floor) const {
    const double herm_dev = (m_ - m_.adjoint()).cwiseAbs().maxCoeff();
    if (herm_dev > herm_tol)
        throw EngineError("density matrix not Hermitian: deviation " + std::to_string(herm_dev));
    const double trace_dev = std::abs(m_.trace() - Complex(1.0, 0.0));
    if (trace_dev > trace_tol)
        throw EngineError("density matrix trace off unity by " + std::to_string(trace_dev));
    const double lo = min_eigenvalue();
    if (lo < eig_floor)
        throw EngineError("density matrix not positive: min eigenvalue " + std::to_string(lo));
}

LindbladGenerator::LindbladGenerator(Operator h_in, std::vector<Operator> jumps_in)
    : h(std::move(h_in)), jumps(std::move(jumps_in)) {
    if (!h.hermitian())
        throw ConfigError("LindbladGenerator: coherent part is not Hermitian");
    jdagj.reserve(jumps.size());
    for (const auto& j : jumps) {
        if (j.dim() != h.dim())
            throw ConfigError("LindbladGenerator: jump operator dimension mismatch");
        jdagj.push_back(j.matrix().adjoint() * j.matrix());
    }
}

double LindbladGenerator::rate_scale() const {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h.matrix(), Eigen::EigenvaluesOnly);
    double scale = es.eigenvalues().cwiseAbs().maxCoeff();
    for (const auto& a : jdagj) {
        Eigen::SelfAdjointEigenSolver<CMatrix> ea(a, Eigen::EigenvaluesOnly);
        scale = std::max(scale, ea.eigenvalues().cwiseAbs().maxCoeff());
    }
    return scale;
}

Scheme parse_scheme(const std::string& name) {
    if (name == "euler") return Scheme::Euler;
    if (name == "exp") return Scheme::Exp;
    throw ConfigError("unknown evolution scheme '" + name + "' (expected euler or exp)");
}

const char* scheme_name(Scheme s) { return s == Scheme::Euler ? "euler" : "exp"; }

StateVector apply(const Operator& op, const StateVector& psi) {
    if (op.dim() != psi.dim())
        throw ConfigError("apply: operator dim " + std::to_string(op.dim()) +
                          " vs state dim " + std::to_string(psi.dim()));
    return StateVector(op.matrix() * psi.amps());
}

Complex expectation(const Operator& op, const StateVector& psi) {
    if (op.dim() != psi.dim()) throw ConfigError("expectation: dimension mismatch");
    if (!psi.is_normalized()) throw ConfigError("expectation: state is not normalized");
    return psi.amps().dot(op.matrix() * psi.amps());
}

CMatrix expm(const CMatrix& a) {
    if (a.rows() != a.cols() || a.rows() == 0)
        throw ConfigError("expm: matrix must be square and non-empty");
    if (!all_finite(a)) throw ConfigError("expm: non-finite entries");

    // Scale to 1-norm <= 0.5; [7/7] Padé truncation is then far below double roundoff.
    const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
    int s = 0;
    if (norm1 > 0.5) s = static_cast<int>(std::ceil(std::log2(norm1 / 0.5)));
    const CMatrix x = a / std::ldexp(1.0, s);

    static const double b[8] = {17297280.0, 8648640.0, 1995840.0, 277200.0,
                                25200.0,    1512.0,    56.0,      1.0};
    const Eigen::Index n = a.rows();
    const CMatrix eye = CMatrix::Identity(n, n);
    const CMatrix x2 = x * x;
    const CMatrix x4 = x2 * x2;
    const CMatrix x6 = x4 * x2;
    const CMatrix u = x * (b[1] * eye + b[3] * x2 + b[5] * x4 + b[7] * x6);
    const CMatrix v = b[0] * eye + b[2] * x2 + b[4] * x4 + b[6] * x6;
    CMatrix r = (v - u).partialPivLu().solve(v + u);
    for (int i = 0; i < s; ++i) r = r * r;
    return r;
}

Operator propagator(const Operator& h_eff, double dt, Scheme scheme) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("propagator: dt must be positive");
    const Complex mi(0.0, -1.0);
    if (scheme == Scheme::Euler) {
        const Eigen::Index n = h_eff.dim();
        return Operator(CMatrix::Identity(n, n) + mi * dt * h_eff.matrix());
    }
    return Operator(expm(mi * dt * h_eff.matrix()));
}

StateVector evolve_nonhermitian(const Operator& h_eff, const StateVector& psi, double dt,
                                Scheme scheme) {
    if (h_eff.dim() != psi.dim()) throw ConfigError("evolve_nonhermitian: dimension mismatch");
    if (!psi.is_normalized())
        throw ConfigError("evolve_nonhermitian: state is not normalized");
    return apply(propagator(h_eff, dt, scheme), psi);
}

CMatrix generator_action(const LindbladGenerator& gen, const CMatrix& r) {
    if (gen.dim() != r.rows() || r.rows() != r.cols())
        throw ConfigError("generator_action: dimension mismatch");
    const CMatrix& h = gen.h.matrix();
    CMatrix out = Complex(0.0, -1.0) * (h * r - r * h);
    for (std::size_t k = 0; k < gen.jumps.size(); ++k) {
        const CMatrix& j = gen.jumps[k].matrix();
        const CMatrix& a = gen.jdagj[k];
        out.noalias() += j * r * j.adjoint();
        out.noalias() -= 0.5 * (a * r + r * a);
    }
    return out;
}

DensityMatrix superoperator_apply(const LindbladGenerator& gen, const DensityMatrix& rho) {
    return DensityMatrix(generator_action(gen, rho.matrix()));
}

}  // namespace wqed
