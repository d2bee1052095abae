#pragma once

#include <string>
#include <vector>

#include "wqed/model.hpp"

namespace wqed {

enum class CurveSource { TrajectoryHistogram, MasterEquation };
std::string source_name(CurveSource s);  // "trajectory-histogram" / "master-equation"

// A g2(tau) curve, either estimated from detection events or computed from the
// master equation.  taus start at or after 0 and increase strictly; values are
// finite and nonnegative.
struct CorrelationCurve {
    Channel channel = Channel::Right;
    std::vector<double> taus;
    std::vector<double> values;
    CurveSource source = CurveSource::MasterEquation;

    void validate() const;  // throws StatsError on any invariant violation
};

}  // namespace wqed
