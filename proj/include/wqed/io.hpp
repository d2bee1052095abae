#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wqed/correlation.hpp"
#include "wqed/stats.hpp"
#include "wqed/trajectory.hpp"

namespace wqed {

// FNV-1a 64-bit, used for the output checksums recorded in the manifest.
std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t fnv1a64_file(const std::filesystem::path& path);
std::string checksum_string(std::uint64_t h);  // 0x%016x rendering

// Fixed decimal renderings so output bytes are platform-independent: times with
// nine fractional digits, dimensionless values in scientific form.
std::string format_time(double t);
std::string format_value(double v);

using Provenance = std::vector<std::pair<std::string, std::string>>;

// Streaming writer for the event serialization: header comments, a column line
// "id,time,chan", then one line per event ordered by (trajectory, time).
class EventCsvWriter {
  public:
    EventCsvWriter(const std::filesystem::path& path, const Provenance& provenance);
    void add(const DetectionEvent& e);
    std::int64_t rows() const { return rows_; }
    void close();

  private:
    std::ofstream out_;
    std::filesystem::path path_;
    std::int64_t rows_ = 0;
    std::int64_t prev_id_ = -1;
    double prev_time_ = 0.0;
};

// Reads an event file back, enforcing the serialization contract (ordering,
// channels, finite nonnegative times).  Violations throw ConfigError since they
// indicate a foreign or corrupted input file.
std::vector<DetectionEvent> read_events_csv(const std::filesystem::path& path);

void write_wtd_csv(const std::filesystem::path& path, const WtdEstimate& est,
                   const Provenance& provenance);
void write_awtd_csv(const std::filesystem::path& path, const AwtdEstimate& est,
                    const Provenance& provenance);
// Master curves carry no per-bin errors; pass stderr_values empty for those.  An
// optional named analytic column (same grid) can ride along for overlays.
void write_g2_csv(const std::filesystem::path& path, const CorrelationCurve& curve,
                  const std::vector<double>& stderr_values, const Provenance& provenance,
                  const std::string& extra_name = {},
                  const std::vector<double>& extra_values = {});
void write_summary_csv(const std::filesystem::path& path, const Provenance& rows,
                       const Provenance& provenance);

// Minimal column reader for the compare subcommand: returns the named numeric
// columns of a CSV written by the functions above (comments skipped).
std::vector<std::vector<double>> read_csv_columns(const std::filesystem::path& path,
                                                  const std::vector<std::string>& names);

}  // namespace wqed
