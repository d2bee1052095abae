#include "wqed/io.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "wqed/errors.hpp"

namespace wqed {

namespace {

void open_or_throw(std::ofstream& out, const std::filesystem::path& path) {
    out.open(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open " + path.string() + " for writing");
}

void write_provenance(std::ofstream& out, const Provenance& provenance) {
    for (const auto& [k, v] : provenance) out << "# " << k << " = " << v << "\n";
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw ConfigError("write failure on " + path.string());
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::uint64_t fnv1a64_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path.string() + " for checksum");
    std::uint64_t h = 0xcbf29ce484222325ull;
    char buf[1 << 16];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        const std::streamsize n = in.gcount();
        for (std::streamsize i = 0; i < n; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ull;
        }
    }
    return h;
}

std::string checksum_string(std::uint64_t h) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "0x%016" PRIx64, h);
    return buf;
}

std::string format_time(double t) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.9f", t);
    return buf;
}

std::string format_value(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.9e", v);
    return buf;
}

EventCsvWriter::EventCsvWriter(const std::filesystem::path& path,
                               const Provenance& provenance)
    : path_(path) {
    open_or_throw(out_, path);
    write_provenance(out_, provenance);
    out_ << "id,time,chan\n";
}

void EventCsvWriter::add(const DetectionEvent& e) {
    if (e.trajectory_id < prev_id_ ||
        (e.trajectory_id == prev_id_ && e.time <= prev_time_))
        throw EngineError("event stream out of (trajectory, time) order");
    prev_id_ = e.trajectory_id;
    prev_time_ = e.time;
    out_ << e.trajectory_id << ',' << format_time(e.time) << ',' << channel_code(e.channel)
         << '\n';
    ++rows_;
}

void EventCsvWriter::close() { finish(out_, path_); out_.close(); }

std::vector<DetectionEvent> read_events_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::vector<DetectionEvent> events;
    std::string line;
    bool saw_header = false;
    std::int64_t prev_id = -1;
    double prev_time = 0.0;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        if (!saw_header) {
            if (line != "id,time,chan")
                throw ConfigError(path.string() + ": unexpected column header '" + line + "'");
            saw_header = true;
            continue;
        }
        DetectionEvent e;
        char chan = 0;
        char trail = 0;
        const int got = std::sscanf(line.c_str(), "%" SCNd64 ",%lf,%c%c", &e.trajectory_id,
                                    &e.time, &chan, &trail);
        if (got != 3)
            throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                              ": malformed event record");
        if (e.trajectory_id < 0 || !std::isfinite(e.time) || e.time <= 0.0)
            throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                              ": invalid trajectory id or time");
        if (chan != 'R' && chan != 'L')
            throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                              ": unknown channel '" + std::string(1, chan) + "'");
        e.channel = chan == 'R' ? Channel::Right : Channel::Left;
        if (e.trajectory_id < prev_id ||
            (e.trajectory_id == prev_id && e.time <= prev_time))
            throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                              ": events out of (trajectory, time) order");
        prev_id = e.trajectory_id;
        prev_time = e.time;
        events.push_back(e);
    }
    if (!saw_header) throw ConfigError(path.string() + ": missing column header");
    return events;
}

void write_wtd_csv(const std::filesystem::path& path, const WtdEstimate& est,
                   const Provenance& provenance) {
    std::ofstream out;
    open_or_throw(out, path);
    write_provenance(out, provenance);
    out << "# tau_bar = " << format_value(est.tau_bar) << "\n";
    out << "# axis = " << (est.scaled ? "tau/tau_bar" : "tau") << "\n";
    out << (est.scaled ? "tau_scaled" : "tau") << ",density,stderr\n";
    for (int i = 0; i < est.hist.bins(); ++i)
        out << format_time(est.hist.center(i)) << ',' << format_value(est.hist.density(i))
            << ',' << format_value(est.hist.density_stderr(i)) << '\n';
    finish(out, path);
}

void write_awtd_csv(const std::filesystem::path& path, const AwtdEstimate& est,
                    const Provenance& provenance) {
    std::ofstream out;
    open_or_throw(out, path);
    write_provenance(out, provenance);
    out << "# tau_bar = " << format_value(est.tau_bar) << "\n";
    out << "# axis = tau/tau_bar\n";
    out << "tau1,tau2,density\n";
    for (int i = 0; i < est.hist.bins(); ++i)
        for (int j = 0; j < est.hist.bins(); ++j)
            out << format_time(est.hist.center(i)) << ',' << format_time(est.hist.center(j))
                << ',' << format_value(est.hist.density(i, j)) << '\n';
    finish(out, path);
}

void write_g2_csv(const std::filesystem::path& path, const CorrelationCurve& curve,
                  const std::vector<double>& stderr_values, const Provenance& provenance,
                  const std::string& extra_name, const std::vector<double>& extra_values) {
    if (!stderr_values.empty() && stderr_values.size() != curve.taus.size())
        throw StatsError("stderr column length does not match curve");
    if (!extra_name.empty() && extra_values.size() != curve.taus.size())
        throw StatsError("extra column length does not match curve");
    std::ofstream out;
    open_or_throw(out, path);
    write_provenance(out, provenance);
    out << "tau,value,stderr,source";
    if (!extra_name.empty()) out << ',' << extra_name;
    out << '\n';
    for (std::size_t i = 0; i < curve.taus.size(); ++i) {
        out << format_time(curve.taus[i]) << ',' << format_value(curve.values[i]) << ','
            << format_value(stderr_values.empty() ? 0.0 : stderr_values[i]) << ','
            << source_name(curve.source);
        if (!extra_name.empty()) out << ',' << format_value(extra_values[i]);
        out << '\n';
    }
    finish(out, path);
}

void write_summary_csv(const std::filesystem::path& path, const Provenance& rows,
                       const Provenance& provenance) {
    std::ofstream out;
    open_or_throw(out, path);
    write_provenance(out, provenance);
    out << "key,value\n";
    for (const auto& [k, v] : rows) out << k << ',' << v << '\n';
    finish(out, path);
}

std::vector<std::vector<double>> read_csv_columns(const std::filesystem::path& path,
                                                  const std::vector<std::string>& names) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::string line;
    std::vector<std::string> header;
    std::vector<std::vector<double>> cols(names.size());
    std::vector<int> index(names.size(), -1);
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        std::string cell;
        if (header.empty()) {
            while (std::getline(ss, cell, ',')) header.push_back(cell);
            for (std::size_t i = 0; i < names.size(); ++i) {
                for (std::size_t j = 0; j < header.size(); ++j)
                    if (header[j] == names[i]) index[i] = static_cast<int>(j);
                if (index[i] < 0)
                    throw ConfigError(path.string() + ": missing column '" + names[i] + "'");
            }
            continue;
        }
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        for (std::size_t i = 0; i < names.size(); ++i) {
            const auto j = static_cast<std::size_t>(index[i]);
            if (j >= cells.size())
                throw ConfigError(path.string() + ": short row");
            try {
                cols[i].push_back(std::stod(cells[j]));
            } catch (const std::exception&) {
                throw ConfigError(path.string() + ": non-numeric cell '" + cells[j] + "'");
            }
        }
    }
    if (header.empty()) throw ConfigError(path.string() + ": missing column header");
    return cols;
}

}  // namespace wqed
