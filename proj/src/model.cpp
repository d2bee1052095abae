#include "wqed/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "wqed/errors.hpp"

namespace wqed {

namespace {

constexpr double kPi = std::numbers::pi;
const Complex kI{0.0, 1.0};

// Pauli blocks in the (g,e) basis.
CMatrix sigma_minus2() {
    CMatrix m = CMatrix::Zero(2, 2);
    m(0, 1) = 1.0;
    return m;
}

CMatrix sigma_z2() {
    CMatrix m = CMatrix::Zero(2, 2);
    m(0, 0) = -1.0;
    m(1, 1) = 1.0;
    return m;
}

void require_finite(double v, const char* name) {
    if (!std::isfinite(v)) throw ConfigError(std::string(name) + " must be finite");
}

void require_finite(Complex v, const char* name) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
        throw ConfigError(std::string(name) + " must be finite");
}

// Assembles the pieces shared by both models once the jump operators and the
// coherent Hamiltonian are fixed.
ModelOperators assemble(int dim, CMatrix jr, CMatrix jl, CMatrix h_coh, double nbar,
                        double gamma_max, double drive_rate) {
    Operator j_right(std::move(jr));
    Operator j_left(std::move(jl));
    Operator h(std::move(h_coh));
    if (!h.hermitian())
        throw EngineError("coherent Hamiltonian assembly lost Hermiticity");
    CMatrix heff = h.matrix() -
                   Complex(0.0, 0.5) * (j_right.matrix().adjoint() * j_right.matrix() +
                                        j_left.matrix().adjoint() * j_left.matrix());
    LindbladGenerator generator(h, {j_right, j_left});
    return ModelOperators{dim,
                          std::move(j_right),
                          std::move(j_left),
                          std::move(h),
                          Operator(std::move(heff)),
                          std::move(generator),
                          nbar,
                          gamma_max,
                          drive_rate,
                          std::nullopt,
                          std::nullopt};
}

}  // namespace

char channel_code(Channel c) { return c == Channel::Right ? 'R' : 'L'; }

Channel parse_channel(const std::string& name) {
    if (name == "R") return Channel::Right;
    if (name == "L") return Channel::Left;
    throw ConfigError("unknown channel '" + name + "' (expected R or L)");
}

double OneQubitParams::coupling() const { return std::sqrt(gamma / (4.0 * kPi)); }

double OneQubitParams::nbar() const { return std::norm(alpha) / (2.0 * kPi); }

void OneQubitParams::validate() const {
    require_finite(gamma, "gamma");
    require_finite(alpha, "alpha");
    require_finite(delta, "delta");
    if (gamma <= 0.0) throw ConfigError("gamma must be positive");
}

TwoQubitParams TwoQubitParams::identical(double gamma, Complex alpha, double phase_k) {
    TwoQubitParams p;
    p.gamma1 = p.gamma2 = gamma;
    p.alpha = alpha;
    p.delta1 = p.delta2 = 0.0;
    p.phase_k = phase_k;
    p.phase_eg1 = p.phase_eg2 = phase_k;
    return p;
}

TwoQubitParams TwoQubitParams::with_delay(double gamma1, double gamma2, Complex alpha,
                                          double delta1, double delta2, double phase_k,
                                          double delay) {
    require_finite(delay, "delay");
    if (delay < 0.0) throw ConfigError("delay must be nonnegative");
    TwoQubitParams p;
    p.gamma1 = gamma1;
    p.gamma2 = gamma2;
    p.alpha = alpha;
    p.delta1 = delta1;
    p.delta2 = delta2;
    p.phase_k = phase_k;
    p.phase_eg1 = phase_k + delta1 * delay;
    p.phase_eg2 = phase_k + delta2 * delay;
    return p;
}

double TwoQubitParams::coupling1() const { return std::sqrt(gamma1 / (4.0 * kPi)); }

double TwoQubitParams::coupling2() const { return std::sqrt(gamma2 / (4.0 * kPi)); }

double TwoQubitParams::nbar() const { return std::norm(alpha) / (2.0 * kPi); }

void TwoQubitParams::validate() const {
    require_finite(gamma1, "gamma1");
    require_finite(gamma2, "gamma2");
    require_finite(alpha, "alpha");
    require_finite(delta1, "delta1");
    require_finite(delta2, "delta2");
    require_finite(phase_k, "phase_k");
    require_finite(phase_eg1, "phase_eg1");
    require_finite(phase_eg2, "phase_eg2");
    if (gamma1 < 0.0 || gamma2 < 0.0) throw ConfigError("emission rates must be nonnegative");
    if (gamma1 + gamma2 <= 0.0) throw ConfigError("at least one qubit must couple to the line");
}

ModelOperators build_one_qubit(const OneQubitParams& p) {
    p.validate();
    const double g = p.coupling();
    const double root_half_gamma = std::sqrt(p.gamma / 2.0);
    const Complex drive_in = kI * p.alpha / std::sqrt(2.0 * kPi);  // input field at the qubit

    const CMatrix sm = sigma_minus2();
    const CMatrix id = CMatrix::Identity(2, 2);

    CMatrix jr = root_half_gamma * sm + drive_in * id;
    CMatrix jl = root_half_gamma * sm;
    // Half of the drive lives here; the other half is carried by the input-field part
    // of j_right and reappears when the dissipators are expanded.
    CMatrix h = 0.5 * p.delta * sigma_z2();
    h += 0.5 * g * std::conj(p.alpha) * sm;
    h += (0.5 * g * std::conj(p.alpha) * sm).adjoint().eval();

    ModelOperators m = assemble(2, std::move(jr), std::move(jl), std::move(h), p.nbar(),
                                p.gamma, g * std::abs(p.alpha));
    m.one_qubit = p;
    return m;
}

ModelOperators build_two_qubit(const TwoQubitParams& p) {
    p.validate();
    const double g1 = p.coupling1();
    const double g2 = p.coupling2();
    const Complex drive_in = kI * (p.alpha / std::sqrt(2.0 * kPi)) *
                             std::exp(kI * p.phase_k);  // input field at the right output

    const CMatrix sm = sigma_minus2();
    const CMatrix id2 = CMatrix::Identity(2, 2);
    const CMatrix id4 = CMatrix::Identity(4, 4);
    const CMatrix sm1 = kron(sm, id2);
    const CMatrix sm2 = kron(id2, sm);
    const CMatrix sz1 = kron(sigma_z2(), id2);
    const CMatrix sz2 = kron(id2, sigma_z2());

    // Emission from qubit 1 reaches the right output retarded by its own phase;
    // emission from qubit 2 reaches the left output likewise.
    CMatrix jr = std::sqrt(p.gamma1 / 2.0) * std::exp(kI * p.phase_eg1) * sm1 +
                 std::sqrt(p.gamma2 / 2.0) * sm2 + drive_in * id4;
    CMatrix jl = std::sqrt(p.gamma1 / 2.0) * sm1 +
                 std::sqrt(p.gamma2 / 2.0) * std::exp(kI * p.phase_eg2) * sm2;

    CMatrix h = 0.5 * p.delta1 * sz1 + 0.5 * p.delta2 * sz2;
    // Drive as seen after splitting off the input-field part of j_right: qubit 1 keeps
    // (1 - e^{i(phase_eg1-phase_k)}/2) of its full strength, qubit 2 keeps half with the
    // propagation phase.  Summed with the j_right contribution these restore the plain
    // driven-qubit strengths g1*alpha and g2*alpha*e^{i phase_k}.
    CMatrix drive =
        (1.0 - 0.5 * std::exp(kI * (p.phase_eg1 - p.phase_k))) * g1 * std::conj(p.alpha) * sm1 +
        0.5 * std::exp(-kI * p.phase_k) * g2 * std::conj(p.alpha) * sm2;
    h += drive + drive.adjoint().eval();
    // Photon-mediated exchange: right-movers carry qubit 1's emission to qubit 2,
    // left-movers carry qubit 2's to qubit 1, each retarded by the emitter's phase.
    CMatrix exchange = kPi * g1 * g2 *
                       (kI * std::exp(-kI * p.phase_eg2) * sm2.adjoint() * sm1 +
                        kI * std::exp(-kI * p.phase_eg1) * sm1.adjoint() * sm2);
    h += exchange + exchange.adjoint().eval();

    ModelOperators m =
        assemble(4, std::move(jr), std::move(jl), std::move(h), p.nbar(),
                 std::max(p.gamma1, p.gamma2),
                 std::max(g1 * std::abs(p.alpha), g2 * std::abs(p.alpha)));
    m.two_qubit = p;
    return m;
}

double jump_probability(const ModelOperators& m, const StateVector& psi, Channel c,
                        double dt) {
    if (psi.dim() != m.dim) throw EngineError("state dimension does not match model");
    if (!psi.is_normalized()) throw EngineError("jump probability needs a normalized state");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw EngineError("dt must be positive");
    const double raw = dt * (psi.amps().adjoint() * m.jump_rate(c) * psi.amps())(0).real();
    if (raw > 0.1)
        throw EngineError("step too coarse for one jump per step: P_" +
                          std::string(1, channel_code(c)) + " = " + std::to_string(raw));
    return std::clamp(raw, 0.0, 1.0);
}

StateVector collapse(const ModelOperators& m, const StateVector& psi, Channel c) {
    if (psi.dim() != m.dim) throw EngineError("state dimension does not match model");
    CVector phi = m.jump(c).matrix() * psi.amps();
    const double n2 = phi.squaredNorm();
    if (n2 < 1e-24)
        throw EngineError("dark-state collapse: channel " + std::string(1, channel_code(c)) +
                          " selected but the state cannot emit into it");
    return StateVector(phi / std::sqrt(n2));
}

}  // namespace wqed
