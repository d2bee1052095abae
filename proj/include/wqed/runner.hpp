#pragma once

#include <cstddef>
#include <filesystem>

#include "wqed/config.hpp"

namespace wqed {

// Generates the event stream for cfg, writing <out>/events.csv while trajectories
// run and <out>/manifest.json last, so a manifest's presence signals a complete
// run.  An engine abort is recorded in the manifest (status = failed, with the
// trajectory id in the error text) before the error propagates.
void run_simulate(const ExperimentConfig& cfg);

// Computes the requested statistics from <out>/events.csv.  Refuses to touch data
// whose checksum or generating parameters disagree with the manifest.
void run_analyze(const ExperimentConfig& cfg);

// Master-equation reference outputs: steady-state summary (populations, fluxes,
// flux-conservation residual, always written and printed) and, when requested,
// g2 curves per selected channel.
void run_reference(const ExperimentConfig& cfg);

struct CompareResult {
    std::size_t points = 0;
    double max_abs = 0.0;
    double max_abs_tau = 0.0;
    bool has_sigma = false;  // at least one point carries a nonzero combined error
    double max_sigma = 0.0;
    double max_sigma_tau = 0.0;
};

// Overlays two curve CSVs (columns tau, value, stderr) on an identical tau grid
// and reports the worst deviation, both absolute and in combined-sigma units.
CompareResult compare_curves(const std::filesystem::path& a, const std::filesystem::path& b);

// Prints the comparison; when fail_above > 0 and the deviation (sigma units when
// available, absolute otherwise) exceeds it, throws StatsError.
void run_compare(const std::filesystem::path& a, const std::filesystem::path& b,
                 double fail_above);

}  // namespace wqed
