#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "wqed/config.hpp"
#include "wqed/errors.hpp"
#include "wqed/runner.hpp"
#include "wqed/version.hpp"

namespace {

// The raw command line for one subcommand.  Values are only applied to the config
// when the corresponding option was actually given, preserving the precedence
// chain defaults -> preset -> config file -> flags.
struct CommonArgs {
    std::string preset;
    std::string config_file;
    std::string model;
    double gamma = 0.0;
    double gamma2 = 0.0;
    double alpha_re = 0.0;
    double alpha_im = 0.0;
    double delta = 0.0;
    double delta2 = 0.0;
    double phase_k = 0.0;
    double phase_eg = 0.0;
    double dt = 0.0;
    double t_end = 0.0;
    std::int64_t trajectories = 0;
    std::uint64_t seed = 0;
    double burn_in = 0.0;
    std::string scheme;
    std::string channel;
    int bins = 0;
    double tau_max = 0.0;
    std::string out;
    int workers = 0;

    CLI::App* cmd = nullptr;

    void attach(CLI::App* sub) {
        cmd = sub;
        sub->add_option("config", config_file, "config file (flat INI, sections in [])")
            ->check(CLI::ExistingFile);
        sub->add_option("--preset", preset, "parameter bundle: fig2, fig3, fig4, fig5");
        sub->add_option("--model", model, "one-qubit | two-qubit");
        sub->add_option("--gamma", gamma, "emission rate of qubit 1");
        sub->add_option("--gamma2", gamma2, "emission rate of qubit 2");
        sub->add_option("--alpha-re", alpha_re, "drive amplitude, real part");
        sub->add_option("--alpha-im", alpha_im, "drive amplitude, imaginary part");
        sub->add_option("--delta", delta, "detuning of qubit 1");
        sub->add_option("--delta2", delta2, "detuning of qubit 2");
        sub->add_option("--phase-k", phase_k, "drive phase between the qubits");
        sub->add_option("--phase-eg", phase_eg, "emission retardation phase (both qubits)");
        sub->add_option("--dt", dt, "integration step");
        sub->add_option("--t-end", t_end, "trajectory horizon");
        sub->add_option("--trajectories", trajectories, "ensemble size");
        sub->add_option("--seed", seed, "master seed");
        sub->add_option("--burn-in", burn_in, "events before this time are dropped");
        sub->add_option("--scheme", scheme, "no-jump propagator: euler | exp");
        sub->add_option("--channel", channel, "detection channel: R | L | both");
        sub->add_option("--bins", bins, "histogram bins (waiting times and g2)");
        sub->add_option("--tau-max", tau_max,
                        "histogram range: units of tau_bar for waiting times, "
                        "absolute for g2");
        sub->add_option("--out", out, "output directory");
        sub->add_option("--workers", workers, "worker threads (0 = all cores)");
    }

    bool given(const std::string& name) const { return cmd->count(name) > 0; }

    wqed::ExperimentConfig resolve() const {
        wqed::ExperimentConfig cfg;
        if (given("--preset")) cfg = wqed::preset_config(preset);
        if (!config_file.empty()) wqed::apply_config_file(cfg, config_file);
        if (given("--model")) cfg.model = wqed::parse_model_kind(model);
        if (given("--gamma")) cfg.gamma = gamma;
        if (given("--gamma2")) cfg.gamma2 = gamma2;
        if (given("--alpha-re")) cfg.alpha_re = alpha_re;
        if (given("--alpha-im")) cfg.alpha_im = alpha_im;
        if (given("--delta")) cfg.delta = delta;
        if (given("--delta2")) cfg.delta2 = delta2;
        if (given("--phase-k")) cfg.phase_k = phase_k;
        if (given("--phase-eg")) cfg.phase_eg = phase_eg;
        if (given("--dt")) cfg.dt = dt;
        if (given("--t-end")) cfg.t_end = t_end;
        if (given("--trajectories")) cfg.trajectories = trajectories;
        if (given("--seed")) cfg.seed = seed;
        if (given("--burn-in")) cfg.burn_in = burn_in;
        if (given("--scheme")) cfg.scheme = wqed::parse_scheme(scheme);
        if (given("--channel")) cfg.channel = wqed::parse_channel_select(channel);
        if (given("--bins")) cfg.bins = bins;
        if (given("--tau-max")) {
            // One knob, three histograms: scaled units for the waiting-time grids,
            // absolute time for g2.
            cfg.tau_max_wtd = tau_max;
            cfg.tau_max_awtd = tau_max;
            cfg.tau_max_g2 = tau_max;
        }
        if (given("--out")) cfg.out_dir = out;
        if (given("--workers")) cfg.workers = workers;
        return cfg;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{std::string(wqed::kToolName) +
                 " - photon counting statistics for qubits in a 1D waveguide"};
    app.set_version_flag("--version", wqed::kToolVersion);
    app.require_subcommand(1);

    CommonArgs sim_args, ana_args, ref_args;
    CLI::App* sim = app.add_subcommand(
        "simulate", "run a quantum-jump ensemble and write the event stream");
    sim_args.attach(sim);
    CLI::App* ana = app.add_subcommand(
        "analyze", "compute WTD / AWTD / g2 statistics from an event stream");
    ana_args.attach(ana);
    CLI::App* ref = app.add_subcommand(
        "reference", "master-equation steady state and correlation curves");
    ref_args.attach(ref);

    CLI::App* cmp = app.add_subcommand(
        "compare", "overlay two curve CSVs and report the max deviation");
    std::string curve_a, curve_b;
    double fail_above = 0.0;
    cmp->add_option("a", curve_a, "first curve CSV")->required()->check(CLI::ExistingFile);
    cmp->add_option("b", curve_b, "second curve CSV")->required()->check(CLI::ExistingFile);
    cmp->add_option("--fail-above", fail_above,
                    "exit nonzero when the deviation exceeds this many sigma");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (sim->parsed()) {
            wqed::run_simulate(sim_args.resolve());
        } else if (ana->parsed()) {
            wqed::run_analyze(ana_args.resolve());
        } else if (ref->parsed()) {
            wqed::run_reference(ref_args.resolve());
        } else if (cmp->parsed()) {
            wqed::run_compare(curve_a, curve_b, fail_above);
        }
    } catch (const wqed::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const wqed::EngineError& e) {
        std::cerr << "engine error: " << e.what() << "\n";
        return 3;
    } catch (const wqed::StatsError& e) {
        std::cerr << "statistics error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
