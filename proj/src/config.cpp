#include "wqed/config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <functional>
#include <map>
#include <sstream>

#include "json.hpp"
#include "wqed/errors.hpp"

namespace wqed {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

double to_double(const std::string& s) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(v))
        throw ConfigError("not a finite number: '" + s + "'");
    return v;
}

long long to_int(const std::string& s) {
    errno = 0;
    char* end = nullptr;
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE)
        throw ConfigError("not an integer: '" + s + "'");
    return v;
}

std::uint64_t to_uint64(const std::string& s) {
    errno = 0;
    char* end = nullptr;
    if (!s.empty() && s[0] == '-') throw ConfigError("not a non-negative integer: '" + s + "'");
    const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
    if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE)
        throw ConfigError("not a non-negative integer: '" + s + "'");
    return v;
}

bool to_bool(const std::string& s) {
    if (s == "true") return true;
    if (s == "false") return false;
    throw ConfigError("expected true or false, got '" + s + "'");
}

std::set<std::string> parse_output_list(const std::string& s) {
    std::set<std::string> out;
    std::stringstream ss(s);
    std::string token;
    while (std::getline(ss, token, ',')) {
        token = trim(token);
        if (token.empty()) throw ConfigError("empty entry in output list '" + s + "'");
        if (!valid_outputs().count(token))
            throw ConfigError("unknown output '" + token + "'");
        out.insert(token);
    }
    if (out.empty()) throw ConfigError("output list is empty");
    return out;
}

std::string join_outputs(const std::set<std::string>& outputs) {
    std::string s;
    for (const auto& o : outputs) {
        if (!s.empty()) s += ',';
        s += o;
    }
    return s;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

const std::map<std::string, Setter>& ini_setters() {
    static const std::map<std::string, Setter> table = {
        {"model.type", [](ExperimentConfig& c, const std::string& v) { c.model = parse_model_kind(v); }},
        {"model.gamma", [](ExperimentConfig& c, const std::string& v) { c.gamma = to_double(v); }},
        {"model.gamma2", [](ExperimentConfig& c, const std::string& v) { c.gamma2 = to_double(v); }},
        {"model.alpha_re", [](ExperimentConfig& c, const std::string& v) { c.alpha_re = to_double(v); }},
        {"model.alpha_im", [](ExperimentConfig& c, const std::string& v) { c.alpha_im = to_double(v); }},
        {"model.delta", [](ExperimentConfig& c, const std::string& v) { c.delta = to_double(v); }},
        {"model.delta2", [](ExperimentConfig& c, const std::string& v) { c.delta2 = to_double(v); }},
        {"model.phase_k", [](ExperimentConfig& c, const std::string& v) { c.phase_k = to_double(v); }},
        {"model.phase_eg", [](ExperimentConfig& c, const std::string& v) { c.phase_eg = to_double(v); }},
        {"model.delta_t", [](ExperimentConfig& c, const std::string& v) { c.delta_t = to_double(v); }},
        {"run.dt", [](ExperimentConfig& c, const std::string& v) { c.dt = to_double(v); }},
        {"run.t_end", [](ExperimentConfig& c, const std::string& v) { c.t_end = to_double(v); }},
        {"run.trajectories", [](ExperimentConfig& c, const std::string& v) { c.trajectories = to_int(v); }},
        {"run.seed", [](ExperimentConfig& c, const std::string& v) { c.seed = to_uint64(v); }},
        {"run.burn_in", [](ExperimentConfig& c, const std::string& v) { c.burn_in = to_double(v); }},
        {"run.scheme", [](ExperimentConfig& c, const std::string& v) { c.scheme = parse_scheme(v); }},
        {"run.workers", [](ExperimentConfig& c, const std::string& v) { c.workers = static_cast<int>(to_int(v)); }},
        {"stats.channel", [](ExperimentConfig& c, const std::string& v) { c.channel = parse_channel_select(v); }},
        {"stats.merge_channels", [](ExperimentConfig& c, const std::string& v) { c.merge_channels = to_bool(v); }},
        {"stats.bins", [](ExperimentConfig& c, const std::string& v) { c.bins = static_cast<int>(to_int(v)); }},
        {"stats.awtd_bins", [](ExperimentConfig& c, const std::string& v) { c.awtd_bins = static_cast<int>(to_int(v)); }},
        {"stats.tau_max_wtd", [](ExperimentConfig& c, const std::string& v) { c.tau_max_wtd = to_double(v); }},
        {"stats.tau_max_awtd", [](ExperimentConfig& c, const std::string& v) { c.tau_max_awtd = to_double(v); }},
        {"stats.tau_max_g2", [](ExperimentConfig& c, const std::string& v) { c.tau_max_g2 = to_double(v); }},
        {"stats.outputs", [](ExperimentConfig& c, const std::string& v) { c.outputs = parse_output_list(v); }},
        {"output.dir", [](ExperimentConfig& c, const std::string& v) {
             if (v.empty()) throw ConfigError("output directory must not be empty");
             c.out_dir = v;
         }},
    };
    return table;
}

ordered_json to_json_tree(const ExperimentConfig& c) {
    ordered_json model = {
        {"type", model_kind_name(c.model)}, {"gamma", c.gamma},   {"gamma2", c.gamma2},
        {"alpha_re", c.alpha_re},           {"alpha_im", c.alpha_im},
        {"delta", c.delta},                 {"delta2", c.delta2},
        {"phase_k", c.phase_k},             {"phase_eg", c.phase_eg},
    };
    if (c.delta_t) model["delta_t"] = *c.delta_t;
    // workers is an execution knob with no effect on any output, so it stays out
    // of the persisted image: files produced at different worker counts must be
    // byte-identical, and a manifest must match regardless of it.
    ordered_json run = {
        {"dt", c.dt},       {"t_end", c.t_end},   {"trajectories", c.trajectories},
        {"seed", c.seed},   {"burn_in", c.burn_in},
        {"scheme", scheme_name(c.scheme)},
    };
    ordered_json stats = {
        {"channel", channel_select_name(c.channel)},
        {"merge_channels", c.merge_channels},
        {"bins", c.bins},
        {"awtd_bins", c.awtd_bins},
        {"tau_max_wtd", c.tau_max_wtd},
        {"tau_max_awtd", c.tau_max_awtd},
        {"tau_max_g2", c.tau_max_g2},
        {"outputs", std::vector<std::string>(c.outputs.begin(), c.outputs.end())},
    };
    ordered_json root = {
        {"model", model},
        {"run", run},
        {"stats", stats},
        {"output", ordered_json{{"dir", c.out_dir}}},
    };
    if (!c.preset.empty()) root["preset"] = c.preset;
    return root;
}

template <typename T>
T get_typed(const ordered_json& j, const std::string& path) {
    try {
        return j.get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError("wrong type for '" + path + "'");
    }
}

void check_keys(const ordered_json& obj, const std::string& section,
                std::initializer_list<const char*> allowed) {
    for (const auto& item : obj.items()) {
        bool found = false;
        for (const char* k : allowed)
            if (item.key() == k) { found = true; break; }
        if (!found)
            throw ConfigError("unknown key '" + section + "." + item.key() + "'");
    }
}

}  // namespace

std::string model_kind_name(ModelKind k) {
    return k == ModelKind::OneQubit ? "one-qubit" : "two-qubit";
}

ModelKind parse_model_kind(const std::string& s) {
    if (s == "one-qubit") return ModelKind::OneQubit;
    if (s == "two-qubit") return ModelKind::TwoQubit;
    throw ConfigError("unknown model '" + s + "' (expected one-qubit or two-qubit)");
}

std::string channel_select_name(ChannelSelect c) {
    switch (c) {
        case ChannelSelect::Right: return "R";
        case ChannelSelect::Left: return "L";
        default: return "both";
    }
}

ChannelSelect parse_channel_select(const std::string& s) {
    if (s == "R") return ChannelSelect::Right;
    if (s == "L") return ChannelSelect::Left;
    if (s == "both") return ChannelSelect::Both;
    throw ConfigError("unknown channel '" + s + "' (expected R, L, or both)");
}

const std::set<std::string>& valid_outputs() {
    static const std::set<std::string> v = {"events", "wtd", "awtd", "g2", "g2_master", "steady"};
    return v;
}

ModelOperators ExperimentConfig::build_model() const {
    if (model == ModelKind::OneQubit) {
        OneQubitParams p;
        p.gamma = gamma;
        p.alpha = alpha();
        p.delta = delta;
        return build_one_qubit(p);
    }
    if (delta_t) {
        return build_two_qubit(TwoQubitParams::with_delay(gamma, gamma2, alpha(), delta,
                                                          delta2, phase_k, *delta_t));
    }
    TwoQubitParams p;
    p.gamma1 = gamma;
    p.gamma2 = gamma2;
    p.alpha = alpha();
    p.delta1 = delta;
    p.delta2 = delta2;
    p.phase_k = phase_k;
    p.phase_eg1 = phase_eg;
    p.phase_eg2 = phase_eg;
    return build_two_qubit(p);
}

TrajectoryConfig ExperimentConfig::trajectory_config() const {
    TrajectoryConfig t;
    t.dt = dt;
    t.t_end = t_end;
    t.scheme = scheme;
    t.master_seed = seed;
    return t;
}

std::vector<Channel> ExperimentConfig::selected_channels() const {
    switch (channel) {
        case ChannelSelect::Right: return {Channel::Right};
        case ChannelSelect::Left: return {Channel::Left};
        default: return {Channel::Right, Channel::Left};
    }
}

void ExperimentConfig::validate() const {
    const ModelOperators m = build_model();
    trajectory_config().validate(m);
    if (trajectories < 1) throw ConfigError("trajectories must be >= 1");
    if (workers < 0) throw ConfigError("workers must be >= 0");
    if (bins < 1) throw ConfigError("bins must be >= 1");
    if (awtd_bins < 1) throw ConfigError("awtd_bins must be >= 1");
    if (!(tau_max_wtd > 0.0)) throw ConfigError("tau_max_wtd must be positive");
    if (!(tau_max_awtd > 0.0)) throw ConfigError("tau_max_awtd must be positive");
    if (!(tau_max_g2 > 0.0)) throw ConfigError("tau_max_g2 must be positive");
    if (!(burn_in >= 0.0)) throw ConfigError("burn_in must be >= 0");
    if (out_dir.empty()) throw ConfigError("output directory must not be empty");
    for (const auto& o : outputs)
        if (!valid_outputs().count(o)) throw ConfigError("unknown output '" + o + "'");
    const bool needs_events = outputs.count("wtd") || outputs.count("awtd") || outputs.count("g2");
    const double horizon = trajectory_config().horizon();
    if (needs_events && !(burn_in < horizon))
        throw ConfigError("burn_in must be smaller than the trajectory horizon");
    if (outputs.count("g2") && !(horizon - tau_max_g2 > burn_in))
        throw ConfigError(
            "tau_max_g2 leaves no anchor window: need burn_in + tau_max_g2 < horizon");
}

ExperimentConfig preset_config(const std::string& name) {
    ExperimentConfig c;
    c.preset = name;
    c.out_dir = "out-" + name;
    if (name == "fig2") {
        c.outputs = {"steady", "g2_master"};
        c.channel = ChannelSelect::Right;
        c.bins = 300;
        c.tau_max_g2 = 30.0;
    } else if (name == "fig3") {
        c.outputs = {"events", "wtd"};
        c.channel = ChannelSelect::Both;
        c.trajectories = 1000;
        c.t_end = 2000.0;
        c.bins = 100;
        c.tau_max_wtd = 4.0;
    } else if (name == "fig4") {
        c.model = ModelKind::TwoQubit;
        c.channel = ChannelSelect::Left;
        c.outputs = {"events", "wtd", "awtd", "g2_master"};
        c.trajectories = 600;
        c.t_end = 2000.0;
        c.awtd_bins = 60;
        c.tau_max_awtd = 3.0;
    } else if (name == "fig5") {
        c.outputs = {"events", "g2", "g2_master"};
        c.channel = ChannelSelect::Both;
        c.trajectories = 1000;
        c.t_end = 2000.0;
        c.bins = 100;
        c.tau_max_g2 = 30.0;
    } else {
        throw ConfigError("unknown preset '" + name + "' (expected fig2, fig3, fig4, or fig5)");
    }
    return c;
}

void apply_config_file(ExperimentConfig& cfg, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    static const std::set<std::string> sections = {"model", "run", "stats", "output"};
    std::set<std::string> seen;
    std::string section;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string where = path.string() + ":" + std::to_string(lineno);
        const auto comment = line.find_first_of("#;");
        if (comment != std::string::npos) line.erase(comment);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(where + ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            if (!sections.count(section))
                throw ConfigError(where + ": unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(where + ": expected key = value");
        if (section.empty())
            throw ConfigError(where + ": key outside any section");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError(where + ": empty key");
        const std::string full = section + "." + key;
        const auto it = ini_setters().find(full);
        if (it == ini_setters().end())
            throw ConfigError(where + ": unknown key '" + full + "'");
        if (!seen.insert(full).second)
            throw ConfigError(where + ": duplicate key '" + full + "'");
        try {
            it->second(cfg, value);
        } catch (const ConfigError& e) {
            throw ConfigError(where + ": " + e.what());
        }
    }
}

std::string config_to_json(const ExperimentConfig& cfg) {
    return to_json_tree(cfg).dump(2);
}

ExperimentConfig config_from_json(const std::string& text) {
    ordered_json root;
    try {
        root = ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid config JSON: ") + e.what());
    }
    if (!root.is_object()) throw ConfigError("config JSON root must be an object");
    for (const auto& item : root.items()) {
        const std::string& k = item.key();
        if (k != "model" && k != "run" && k != "stats" && k != "output" && k != "preset")
            throw ConfigError("unknown key '" + k + "'");
    }
    ExperimentConfig c;
    if (root.contains("model")) {
        const auto& m = root["model"];
        check_keys(m, "model",
                   {"type", "gamma", "gamma2", "alpha_re", "alpha_im", "delta", "delta2",
                    "phase_k", "phase_eg", "delta_t"});
        if (m.contains("type")) c.model = parse_model_kind(get_typed<std::string>(m["type"], "model.type"));
        if (m.contains("gamma")) c.gamma = get_typed<double>(m["gamma"], "model.gamma");
        if (m.contains("gamma2")) c.gamma2 = get_typed<double>(m["gamma2"], "model.gamma2");
        if (m.contains("alpha_re")) c.alpha_re = get_typed<double>(m["alpha_re"], "model.alpha_re");
        if (m.contains("alpha_im")) c.alpha_im = get_typed<double>(m["alpha_im"], "model.alpha_im");
        if (m.contains("delta")) c.delta = get_typed<double>(m["delta"], "model.delta");
        if (m.contains("delta2")) c.delta2 = get_typed<double>(m["delta2"], "model.delta2");
        if (m.contains("phase_k")) c.phase_k = get_typed<double>(m["phase_k"], "model.phase_k");
        if (m.contains("phase_eg")) c.phase_eg = get_typed<double>(m["phase_eg"], "model.phase_eg");
        if (m.contains("delta_t")) c.delta_t = get_typed<double>(m["delta_t"], "model.delta_t");
    }
    if (root.contains("run")) {
        const auto& r = root["run"];
        check_keys(r, "run", {"dt", "t_end", "trajectories", "seed", "burn_in", "scheme"});
        if (r.contains("dt")) c.dt = get_typed<double>(r["dt"], "run.dt");
        if (r.contains("t_end")) c.t_end = get_typed<double>(r["t_end"], "run.t_end");
        if (r.contains("trajectories"))
            c.trajectories = get_typed<std::int64_t>(r["trajectories"], "run.trajectories");
        if (r.contains("seed")) c.seed = get_typed<std::uint64_t>(r["seed"], "run.seed");
        if (r.contains("burn_in")) c.burn_in = get_typed<double>(r["burn_in"], "run.burn_in");
        if (r.contains("scheme")) c.scheme = parse_scheme(get_typed<std::string>(r["scheme"], "run.scheme"));
    }
    if (root.contains("stats")) {
        const auto& s = root["stats"];
        check_keys(s, "stats",
                   {"channel", "merge_channels", "bins", "awtd_bins", "tau_max_wtd",
                    "tau_max_awtd", "tau_max_g2", "outputs"});
        if (s.contains("channel"))
            c.channel = parse_channel_select(get_typed<std::string>(s["channel"], "stats.channel"));
        if (s.contains("merge_channels"))
            c.merge_channels = get_typed<bool>(s["merge_channels"], "stats.merge_channels");
        if (s.contains("bins")) c.bins = get_typed<int>(s["bins"], "stats.bins");
        if (s.contains("awtd_bins")) c.awtd_bins = get_typed<int>(s["awtd_bins"], "stats.awtd_bins");
        if (s.contains("tau_max_wtd")) c.tau_max_wtd = get_typed<double>(s["tau_max_wtd"], "stats.tau_max_wtd");
        if (s.contains("tau_max_awtd")) c.tau_max_awtd = get_typed<double>(s["tau_max_awtd"], "stats.tau_max_awtd");
        if (s.contains("tau_max_g2")) c.tau_max_g2 = get_typed<double>(s["tau_max_g2"], "stats.tau_max_g2");
        if (s.contains("outputs")) {
            c.outputs.clear();
            for (const auto& o : s["outputs"]) {
                const std::string token = get_typed<std::string>(o, "stats.outputs[]");
                if (!valid_outputs().count(token))
                    throw ConfigError("unknown output '" + token + "'");
                c.outputs.insert(token);
            }
            if (c.outputs.empty()) throw ConfigError("stats.outputs must not be empty");
        }
    }
    if (root.contains("output")) {
        const auto& o = root["output"];
        check_keys(o, "output", {"dir"});
        if (o.contains("dir")) c.out_dir = get_typed<std::string>(o["dir"], "output.dir");
    }
    if (root.contains("preset")) c.preset = get_typed<std::string>(root["preset"], "preset");
    return c;
}

Provenance config_provenance(const ExperimentConfig& cfg) {
    Provenance prov;
    const ordered_json root = to_json_tree(cfg);
    for (const auto& section : root.items()) {
        if (!section.value().is_object()) {
            prov.emplace_back(section.key(), section.value().is_string()
                                                 ? section.value().get<std::string>()
                                                 : section.value().dump());
            continue;
        }
        for (const auto& item : section.value().items()) {
            const std::string path = section.key() + "." + item.key();
            const auto& v = item.value();
            if (v.is_string())
                prov.emplace_back(path, v.get<std::string>());
            else if (v.is_array())
                prov.emplace_back(path, join_outputs(cfg.outputs));
            else
                prov.emplace_back(path, v.dump());
        }
    }
    return prov;
}

}  // namespace wqed
