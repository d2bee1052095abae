#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <vector>

#include "wqed/errors.hpp"

namespace wqed {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

bool all_finite(const CMatrix& m);
bool all_finite(const CVector& v);

// Kronecker product with the left factor on the slow index:
// (kron(A,B))[(i1,i2),(j1,j2)] = A(i1,j1) B(i2,j2), row index = i1*rows(B) + i2.
CMatrix kron(const CMatrix& a, const CMatrix& b);

// Basis labels for the supported spaces: dim 2 -> g,e; dim 4 -> gg,ge,eg,ee
// (first letter = qubit 1).  Index order matches the amplitude layout everywhere.
std::string basis_label(int dim, int index);

// Pure state.  Values are immutable once built; the normalized flag is measured at
// construction (|norm^2 - 1| <= 1e-12) so it can never disagree with the amplitudes.
class StateVector {
  public:
    explicit StateVector(CVector amps);

    static StateVector basis(int dim, int index);
    static StateVector ground(int dim);

    int dim() const { return static_cast<int>(amps_.size()); }
    const CVector& amps() const { return amps_; }
    Complex amp(int i) const { return amps_(i); }
    double norm2() const { return amps_.squaredNorm(); }
    bool is_normalized() const { return normalized_; }

    // Unit-norm copy; EngineError on (numerically) zero norm.
    StateVector normalized() const;

  private:
    CVector amps_;
    bool normalized_;
};

// Dense operator.  Hermiticity is measured at construction (entrywise, 1e-12).
class Operator {
  public:
    explicit Operator(CMatrix m);

    static Operator identity(int dim);
    static Operator zero(int dim);

    int dim() const { return static_cast<int>(m_.rows()); }
    const CMatrix& matrix() const { return m_; }
    Operator adjoint() const { return Operator(m_.adjoint()); }
    bool hermitian() const { return hermitian_; }

  private:
    CMatrix m_;
    bool hermitian_;
};

// Mixed state with the trace-normalized flag measured at construction (1e-10).
class DensityMatrix {
  public:
    explicit DensityMatrix(CMatrix m);

    static DensityMatrix pure(const StateVector& psi);

    int dim() const { return static_cast<int>(m_.rows()); }
    const CMatrix& matrix() const { return m_; }
    Complex trace() const { return m_.trace(); }
    bool trace_normalized() const { return trace_normalized_; }

    // Smallest eigenvalue of the Hermitian part; used for positivity checks.
    double min_eigenvalue() const;

    // Physical-state check: Hermitian within herm_tol, trace 1 within trace_tol,
    // eigenvalues above eig_floor.  Throws EngineError naming the violated bound.
    void validate(double herm_tol = 1e-10, double trace_tol = 1e-10,
                  double eig_floor = -1e-9) const;

  private:
    CMatrix m_;
    bool trace_normalized_;
};

// Lindblad generator data: dρ/dt = -i[h, ρ] + Σ_k (J_k ρ J_k† - ½{J_k†J_k, ρ}).
// h must be Hermitian (1e-12); J_k†J_k products are cached at construction.
struct LindbladGenerator {
    LindbladGenerator(Operator h_in, std::vector<Operator> jumps_in);

    Operator h;
    std::vector<Operator> jumps;
    std::vector<CMatrix> jdagj;

    int dim() const { return h.dim(); }

    // Fastest rate in the generator: max spectral norm over {h, J_k†J_k}.
    // Step-size preconditions are expressed against this scale.
    double rate_scale() const;
};

enum class Scheme { Euler, Exp };
Scheme parse_scheme(const std::string& name);  // "euler" | "exp"
const char* scheme_name(Scheme s);

// J|psi>; result is generally unnormalized.
StateVector apply(const Operator& op, const StateVector& psi);

// <psi|A|psi>; psi must carry the normalized flag.
Complex expectation(const Operator& op, const StateVector& psi);

// Matrix exponential, fixed-order [7/7] Padé with scaling-and-squaring
// (input scaled to 1-norm <= 0.5).  Sized for dim <= 16.
CMatrix expm(const CMatrix& a);

// One-step propagator for i d|psi>/dt = h_eff |psi>:
// Euler -> 1 - i h_eff dt,  Exp -> expm(-i h_eff dt).
Operator propagator(const Operator& h_eff, double dt, Scheme scheme);

// Single no-jump step; returns the unnormalized propagated state.
StateVector evolve_nonhermitian(const Operator& h_eff, const StateVector& psi, double dt,
                                Scheme scheme = Scheme::Exp);

// Action of the generator on a raw matrix: dρ/dt.  Integrators work on this form
// since Runge-Kutta intermediates are not physical states.
CMatrix generator_action(const LindbladGenerator& gen, const CMatrix& r);
// Same action wrapped for physical states (traceless result, not a state itself).
DensityMatrix superoperator_apply(const LindbladGenerator& gen, const DensityMatrix& rho);

}  // namespace wqed
