#include "wqed/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "wqed/errors.hpp"
#include "wqed/io.hpp"
#include "wqed/master.hpp"
#include "wqed/stats.hpp"
#include "wqed/version.hpp"

namespace wqed {

namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

constexpr const char* kRngId = "philox4x32-10";

double elapsed_seconds(Clock::time_point t0) {
    const double s = std::chrono::duration<double>(Clock::now() - t0).count();
    return std::round(s * 1000.0) / 1000.0;
}

ordered_json output_entry(const fs::path& p) {
    return ordered_json{{"checksum", checksum_string(fnv1a64_file(p))},
                        {"bytes", static_cast<std::uint64_t>(fs::file_size(p))}};
}

ordered_json manifest_skeleton(const ExperimentConfig& cfg) {
    return ordered_json{{"tool", kToolName},
                        {"version", kToolVersion},
                        {"rng", kRngId},
                        {"status", "ok"},
                        {"config", ordered_json::parse(config_to_json(cfg))},
                        {"counts", ordered_json::object()},
                        {"wall_clock_seconds", ordered_json::object()},
                        {"outputs", ordered_json::object()}};
}

fs::path manifest_path(const fs::path& dir) { return dir / "manifest.json"; }

void write_manifest(const fs::path& dir, const ordered_json& manifest) {
    const fs::path p = manifest_path(dir);
    std::ofstream out(p);
    if (!out) throw ConfigError("cannot write " + p.string());
    out << manifest.dump(2) << '\n';
    if (!out) throw ConfigError("write failed for " + p.string());
}

ordered_json load_manifest(const fs::path& dir) {
    const fs::path p = manifest_path(dir);
    std::ifstream in(p);
    if (!in)
        throw ConfigError("no manifest at " + p.string() + "; run simulate first");
    try {
        ordered_json m;
        in >> m;
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("unreadable manifest " + p.string() + ": " + e.what());
    }
}

// The model and run sections determine the event stream; statistics settings may
// differ between simulate and analyze invocations.
void require_matching_run(const ordered_json& manifest, const ExperimentConfig& cfg) {
    if (!manifest.contains("config"))
        throw ConfigError("manifest carries no config");
    const ExperimentConfig recorded = config_from_json(manifest["config"].dump());
    const ordered_json now = ordered_json::parse(config_to_json(cfg));
    const ordered_json then = ordered_json::parse(config_to_json(recorded));
    if (now["model"] != then["model"] || now["run"] != then["run"])
        throw ConfigError(
            "config does not match the manifest that produced this data; "
            "re-run simulate or point --out elsewhere");
}

std::string fmt(double v) { return format_value(v); }

std::vector<double> bin_centers(int bins, double tau_max) {
    const double w = tau_max / bins;
    std::vector<double> taus(static_cast<std::size_t>(bins));
    for (int i = 0; i < bins; ++i) taus[static_cast<std::size_t>(i)] = (i + 0.5) * w;
    return taus;
}

}  // namespace

void run_simulate(const ExperimentConfig& cfg) {
    const auto t0 = Clock::now();
    cfg.validate();
    const ModelOperators m = cfg.build_model();
    const TrajectoryConfig tcfg = cfg.trajectory_config();
    const fs::path dir(cfg.out_dir);
    fs::create_directories(dir);
    const fs::path events_path = dir / "events.csv";
    EventCsvWriter writer(events_path, config_provenance(cfg));
    ordered_json manifest = manifest_skeleton(cfg);
    std::int64_t n_right = 0;
    std::int64_t n_left = 0;
    const auto finish = [&](const std::string& status, const std::string& error) {
        writer.close();
        manifest["status"] = status;
        if (!error.empty()) manifest["error"] = error;
        manifest["counts"] = ordered_json{{"trajectories", cfg.trajectories},
                                          {"events_right", n_right},
                                          {"events_left", n_left}};
        manifest["outputs"]["events.csv"] = output_entry(events_path);
        manifest["outputs"]["events.csv"]["rows"] = writer.rows();
        manifest["wall_clock_seconds"]["simulate"] = elapsed_seconds(t0);
        write_manifest(dir, manifest);
    };
    try {
        run_ensemble(
            m, tcfg, cfg.trajectories,
            [&](TrajectoryRecord&& rec) {
                for (const auto& e : rec.events) {
                    writer.add(e);
                    (e.channel == Channel::Right ? n_right : n_left) += 1;
                }
            },
            cfg.workers);
    } catch (const EngineError& e) {
        finish("failed", e.what());
        throw;
    }
    finish("ok", "");
    std::cout << "simulate: " << cfg.trajectories << " trajectories, " << n_right
              << " R + " << n_left << " L events -> " << events_path.string() << "\n";
}

void run_analyze(const ExperimentConfig& cfg) {
    const auto t0 = Clock::now();
    cfg.validate();
    const fs::path dir(cfg.out_dir);
    ordered_json manifest = load_manifest(dir);
    if (manifest.value("status", std::string()) != "ok")
        throw ConfigError("manifest records a failed run; re-run simulate");
    require_matching_run(manifest, cfg);
    const fs::path events_path = dir / "events.csv";
    if (!manifest["outputs"].contains("events.csv"))
        throw ConfigError("manifest lists no events.csv; run simulate first");
    const std::string recorded =
        manifest["outputs"]["events.csv"].value("checksum", std::string());
    if (checksum_string(fnv1a64_file(events_path)) != recorded)
        throw ConfigError(events_path.string() +
                          " does not match the manifest checksum (stale or foreign "
                          "data); re-run simulate");
    const std::vector<DetectionEvent> events = read_events_csv(events_path);
    const Provenance prov = config_provenance(cfg);
    const double horizon = cfg.trajectory_config().horizon();
    const bool want_wtd = cfg.outputs.count("wtd") != 0;
    const bool want_awtd = cfg.outputs.count("awtd") != 0;
    const bool want_g2 = cfg.outputs.count("g2") != 0;
    const bool want_master = cfg.outputs.count("g2_master") != 0;
    std::optional<ModelOperators> m;
    if (want_master) m = cfg.build_model();
    std::vector<std::string> written;
    const auto record = [&](const fs::path& p) {
        manifest["outputs"][p.filename().string()] = output_entry(p);
        written.push_back(p.filename().string());
    };
    for (Channel ch : cfg.selected_channels()) {
        const std::string code(1, channel_code(ch));
        if (want_wtd || want_awtd) {
            const WaitingTimeSeries series = waiting_times(events, ch, cfg.burn_in);
            if (want_wtd) {
                const WtdEstimate est = wtd(series, cfg.bins, cfg.tau_max_wtd, cfg.dt);
                const fs::path p = dir / ("wtd_" + code + ".csv");
                write_wtd_csv(p, est, prov);
                record(p);
            }
            if (want_awtd) {
                const AwtdEstimate est =
                    awtd(series, cfg.awtd_bins, cfg.tau_max_awtd, cfg.dt);
                const fs::path p = dir / ("awtd_" + code + ".csv");
                write_awtd_csv(p, est, prov);
                record(p);
            }
        }
        if (want_g2) {
            const G2Estimate est =
                g2_histogram(events, ch, cfg.bins, cfg.tau_max_g2, cfg.burn_in,
                             horizon, cfg.trajectories);
            const fs::path p = dir / ("g2_" + code + ".csv");
            write_g2_csv(p, est.curve, est.stderr_values, prov);
            record(p);
        }
        if (want_master) {
            const CorrelationCurve curve = g2_master(
                m->generator, m->jump(ch), ch, bin_centers(cfg.bins, cfg.tau_max_g2));
            const fs::path p = dir / ("g2_master_" + code + ".csv");
            write_g2_csv(p, curve, {}, prov);
            record(p);
        }
    }
    if (cfg.merge_channels && want_wtd) {
        const WaitingTimeSeries series = waiting_times(events, std::nullopt, cfg.burn_in);
        const WtdEstimate est = wtd(series, cfg.bins, cfg.tau_max_wtd, cfg.dt);
        const fs::path p = dir / "wtd_merged.csv";
        write_wtd_csv(p, est, prov);
        record(p);
    }
    manifest["config"] = ordered_json::parse(config_to_json(cfg));
    manifest["wall_clock_seconds"]["analyze"] = elapsed_seconds(t0);
    write_manifest(dir, manifest);
    std::cout << "analyze: " << events.size() << " events -> ";
    for (std::size_t i = 0; i < written.size(); ++i)
        std::cout << (i ? ", " : "") << written[i];
    std::cout << "\n";
}

void run_reference(const ExperimentConfig& cfg) {
    const auto t0 = Clock::now();
    cfg.validate();
    const ModelOperators m = cfg.build_model();
    const DensityMatrix rho = steady_state(m.generator);
    const double flux_r = channel_flux(m.j_right, rho);
    const double flux_l = channel_flux(m.j_left, rho);
    const double residual = std::abs(flux_r + flux_l - m.nbar);
    const fs::path dir(cfg.out_dir);
    fs::create_directories(dir);
    const Provenance prov = config_provenance(cfg);

    Provenance rows;
    for (int i = 0; i < m.dim; ++i)
        rows.emplace_back("population_" + basis_label(m.dim, i),
                          fmt(rho.matrix()(i, i).real()));
    rows.emplace_back("flux_right", fmt(flux_r));
    rows.emplace_back("flux_left", fmt(flux_l));
    rows.emplace_back("nbar", fmt(m.nbar));
    rows.emplace_back("flux_residual", fmt(residual));
    const fs::path steady_path = dir / "steady.csv";
    write_summary_csv(steady_path, rows, prov);
    std::cout << "steady state: flux_R = " << fmt(flux_r) << ", flux_L = " << fmt(flux_l)
              << ", nbar = " << fmt(m.nbar) << ", flux_residual = " << fmt(residual)
              << "\n";

    ordered_json manifest;
    if (fs::exists(manifest_path(dir))) {
        manifest = load_manifest(dir);
        require_matching_run(manifest, cfg);
        manifest["config"] = ordered_json::parse(config_to_json(cfg));
    } else {
        manifest = manifest_skeleton(cfg);
    }
    manifest["outputs"]["steady.csv"] = output_entry(steady_path);

    if (cfg.outputs.count("g2_master")) {
        const std::vector<double> taus = bin_centers(cfg.bins, cfg.tau_max_g2);
        for (Channel ch : cfg.selected_channels()) {
            const CorrelationCurve curve = g2_master(m.generator, m.jump(ch), ch, taus);
            std::string extra_name;
            std::vector<double> extra;
            if (m.one_qubit && ch == Channel::Right) {
                // Pure exponential at the correlation-decay rate Gamma/2 + nbar;
                // g2(tau)/g2(0) overlays this column while the agreement holds.
                const double rate = 0.5 * m.one_qubit->gamma + m.nbar;
                extra_name = "exponential_decay";
                extra.reserve(taus.size());
                for (double tau : taus) extra.push_back(std::exp(-rate * tau));
            }
            const fs::path p =
                dir / ("g2_master_" + std::string(1, channel_code(ch)) + ".csv");
            write_g2_csv(p, curve, {}, prov, extra_name, extra);
            manifest["outputs"][p.filename().string()] = output_entry(p);
        }
    }
    manifest["wall_clock_seconds"]["reference"] = elapsed_seconds(t0);
    write_manifest(dir, manifest);
}

CompareResult compare_curves(const fs::path& a, const fs::path& b) {
    const auto cols_a = read_csv_columns(a, {"tau", "value", "stderr"});
    const auto cols_b = read_csv_columns(b, {"tau", "value", "stderr"});
    if (cols_a[0].size() != cols_b[0].size())
        throw ConfigError("curves have different lengths (" +
                          std::to_string(cols_a[0].size()) + " vs " +
                          std::to_string(cols_b[0].size()) + ")");
    if (cols_a[0].empty()) throw ConfigError("curves are empty");
    CompareResult r;
    r.points = cols_a[0].size();
    for (std::size_t i = 0; i < r.points; ++i) {
        const double ta = cols_a[0][i];
        const double tb = cols_b[0][i];
        if (std::abs(ta - tb) > 1e-9 * std::max(1.0, std::abs(ta)))
            throw ConfigError("tau grids differ at row " + std::to_string(i) + " (" +
                              fmt(ta) + " vs " + fmt(tb) + ")");
        const double diff = std::abs(cols_a[1][i] - cols_b[1][i]);
        if (diff >= r.max_abs) {
            r.max_abs = diff;
            r.max_abs_tau = ta;
        }
        const double denom = std::hypot(cols_a[2][i], cols_b[2][i]);
        if (denom > 0.0) {
            const double sigma = diff / denom;
            if (!r.has_sigma || sigma > r.max_sigma) {
                r.max_sigma = sigma;
                r.max_sigma_tau = ta;
            }
            r.has_sigma = true;
        }
    }
    return r;
}

void run_compare(const fs::path& a, const fs::path& b, double fail_above) {
    const CompareResult r = compare_curves(a, b);
    std::cout << "points: " << r.points << "\n";
    std::cout << "max_abs_deviation: " << fmt(r.max_abs) << " at tau = " << fmt(r.max_abs_tau)
              << "\n";
    if (r.has_sigma)
        std::cout << "max_sigma_deviation: " << fmt(r.max_sigma)
                  << " at tau = " << fmt(r.max_sigma_tau) << "\n";
    else
        std::cout << "max_sigma_deviation: n/a (no per-bin errors)\n";
    if (fail_above > 0.0) {
        const double metric = r.has_sigma ? r.max_sigma : r.max_abs;
        if (metric > fail_above)
            throw StatsError("deviation " + fmt(metric) + " exceeds --fail-above " +
                             fmt(fail_above));
    }
}

}  // namespace wqed
