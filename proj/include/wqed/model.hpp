#pragma once

#include <optional>
#include <string>

#include "wqed/hilbert.hpp"

namespace wqed {

// Detection channel: Right = transmitted direction (carries the coherent input),
// Left = reflected direction.
enum class Channel { Right, Left };
char channel_code(Channel c);                    // 'R' / 'L'
Channel parse_channel(const std::string& name);  // "R" | "L"

// One qubit at x = 0 in a 1D waveguide, driven from the left by a coherent state of
// amplitude alpha at wavevector k, in the frame rotating at the drive frequency.
//   gamma = total emission rate (= 4 pi g^2, so g = sqrt(gamma/4pi)),
//   delta = qubit-drive detuning, nbar = |alpha|^2 / 2pi = incoming photon flux.
struct OneQubitParams {
    double gamma = 1.0;
    Complex alpha{1.0, 0.0};
    double delta = 0.0;

    double coupling() const;  // g
    double nbar() const;
    void validate() const;
};

// Two qubits separated by propagation delay dt_sep; all phases enter only through
//   phase_k   = k * dt_sep           (drive phase accumulated between the qubits)
//   phase_egi = omega_eg^(i) * dt_sep (retardation phase of qubit i's emission).
// Physical consistency ties them together: phase_egi = phase_k + deltai * dt_sep,
// which with_delay() enforces.  identical() is the resonant equal-qubit case where
// phase_eg1 = phase_eg2 = phase_k.
struct TwoQubitParams {
    double gamma1 = 1.0;
    double gamma2 = 1.0;
    Complex alpha{1.0, 0.0};
    double delta1 = 0.0;
    double delta2 = 0.0;
    double phase_k = 0.0;
    double phase_eg1 = 0.0;
    double phase_eg2 = 0.0;

    static TwoQubitParams identical(double gamma, Complex alpha, double phase_k);
    static TwoQubitParams with_delay(double gamma1, double gamma2, Complex alpha,
                                     double delta1, double delta2, double phase_k,
                                     double delay);

    double coupling1() const;
    double coupling2() const;
    double nbar() const;
    void validate() const;
};

// Everything the engines need, built once per run.  Basis order: (g,e) for one qubit,
// (gg,ge,eg,ee) for two (first letter = qubit 1).
struct ModelOperators {
    int dim = 0;
    Operator j_right;  // detection operator, right-moving output
    Operator j_left;   //   "      , left-moving output
    Operator h_coherent;
    Operator h_eff;    // h_coherent - (i/2) (J_R†J_R + J_L†J_L)
    LindbladGenerator generator;
    double nbar = 0.0;
    double gamma_max = 0.0;   // largest bare emission rate (step-size validation scale)
    double drive_rate = 0.0;  // largest |g_i alpha|   (      "       )
    std::optional<OneQubitParams> one_qubit;
    std::optional<TwoQubitParams> two_qubit;

    const Operator& jump(Channel c) const { return c == Channel::Right ? j_right : j_left; }
    // Cached J†J (these are generator.jdagj[0]/[1]; kept named for the hot paths).
    const CMatrix& jump_rate(Channel c) const {
        return c == Channel::Right ? generator.jdagj[0] : generator.jdagj[1];
    }
};

ModelOperators build_one_qubit(const OneQubitParams& p);
ModelOperators build_two_qubit(const TwoQubitParams& p);

// Per-step detection probability P = dt * <psi|J†J|psi>, clamped to [0, 1].
// Throws EngineError if the raw value exceeds 0.1 (the step is too coarse for the
// one-jump-per-step discretization to be trustworthy).
double jump_probability(const ModelOperators& m, const StateVector& psi, Channel c,
                        double dt);

// State after a detection in channel c: J|psi> renormalized.  Throws EngineError
// ("dark-state collapse") when ||J psi||^2 < 1e-24, i.e. a detection was claimed
// from a state the channel cannot see.
StateVector collapse(const ModelOperators& m, const StateVector& psi, Channel c);

}  // namespace wqed
