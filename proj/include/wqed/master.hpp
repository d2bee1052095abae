#pragma once

#include <vector>

#include "wqed/correlation.hpp"
#include "wqed/hilbert.hpp"
#include "wqed/model.hpp"

namespace wqed {

// Fixed-step 4th-order integration of rho' = gen(rho) for a time t_end.  dt is the
// full-step size; a shorter final step lands exactly on t_end.  Requires
// dt * gen.rate_scale() <= 0.01.  Trace and Hermiticity must survive within 1e-9,
// min eigenvalue within -1e-9; violations throw EngineError.
DensityMatrix integrate(const LindbladGenerator& gen, const DensityMatrix& rho0,
                        double t_end, double dt);

// Stationary state from the null space of the vectorized generator.  Throws
// EngineError if the kernel dimension is not 1 (reporting the dimension) or if the
// residual ||gen(rho_ss)||_max is not below 1e-10.
DensityMatrix steady_state(const LindbladGenerator& gen);

// Detection rate Tr[J rho J†] of the channel whose jump operator is j.
double channel_flux(const Operator& j, const DensityMatrix& rho);

// Second-order coherence from the master equation:
//   g2(tau) = Tr[J M_tau(J rho_ss J† / f) J†] / f,   f = Tr[J rho_ss J†],
// evaluated on the given increasing tau grid with one forward propagation pass.
// label names the detection channel that j belongs to.  dt = 0 picks an internal
// step from the generator's rate scale.  Throws EngineError if f <= 1e-15 (dark
// channel, named) or on propagation failure.
CorrelationCurve g2_master(const LindbladGenerator& gen, const Operator& j, Channel label,
                           const std::vector<double>& taus, double dt = 0.0);

}  // namespace wqed
