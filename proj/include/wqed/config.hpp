#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "wqed/hilbert.hpp"
#include "wqed/io.hpp"
#include "wqed/model.hpp"
#include "wqed/trajectory.hpp"

namespace wqed {

enum class ModelKind { OneQubit, TwoQubit };
enum class ChannelSelect { Right, Left, Both };

std::string model_kind_name(ModelKind k);
ModelKind parse_model_kind(const std::string& s);
std::string channel_select_name(ChannelSelect c);
ChannelSelect parse_channel_select(const std::string& s);

// One experiment, fully resolved.  Precedence when building one: struct defaults,
// then preset, then config file, then command-line flags.
struct ExperimentConfig {
    // model
    ModelKind model = ModelKind::OneQubit;
    double gamma = 1.0;
    double gamma2 = 1.0;
    double alpha_re = 1.0;
    double alpha_im = 0.0;
    double delta = 0.0;
    double delta2 = 0.0;
    double phase_k = 1.5707963267948966;   // pi/2, the quarter-wavelength separation
    double phase_eg = 1.5707963267948966;  // applied to both qubits
    std::optional<double> delta_t;  // when set, phase_eg follows phase_k + delta * delta_t

    // run
    double dt = 0.005;
    double t_end = 2000.0;
    std::int64_t trajectories = 1000;
    std::uint64_t seed = 20240817;
    double burn_in = 10.0;
    Scheme scheme = Scheme::Exp;
    int workers = 0;  // 0 = library default

    // stats
    ChannelSelect channel = ChannelSelect::Both;
    bool merge_channels = false;
    int bins = 100;
    int awtd_bins = 60;
    double tau_max_wtd = 4.0;   // units of tau_bar
    double tau_max_awtd = 3.0;  // units of tau_bar
    double tau_max_g2 = 30.0;   // absolute time
    std::set<std::string> outputs = {"events", "wtd", "g2"};

    // output
    std::string out_dir = "out";
    std::string preset;  // name of the preset this config started from, if any

    Complex alpha() const { return {alpha_re, alpha_im}; }
    ModelOperators build_model() const;
    TrajectoryConfig trajectory_config() const;
    std::vector<Channel> selected_channels() const;
    // Checks every downstream precondition (model, step size, stats windows)
    // before any work starts.
    void validate() const;
};

const std::set<std::string>& valid_outputs();

// Canned workload bundles fig2..fig5, named after the report figures they feed:
// fig2 = one-qubit master g2 curves, fig3 = one-qubit counting statistics,
// fig4 = two-qubit statistics at quarter-wavelength separation, fig5 = one-qubit
// trajectory-vs-master g2 comparison.
ExperimentConfig preset_config(const std::string& name);

// Strict flat INI: [section] lines, key = value pairs, # or ; comments.  Unknown
// sections or keys and duplicate keys are rejected.
void apply_config_file(ExperimentConfig& cfg, const std::filesystem::path& path);

// JSON image of the resolved config; round-trips exactly.
std::string config_to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const std::string& text);

// Flattened section.key = value pairs for CSV header comments, in file order.
Provenance config_provenance(const ExperimentConfig& cfg);

}  // namespace wqed
