#include "wqed/stats.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wqed/errors.hpp"

namespace wqed {

namespace {

void check_geometry(int bins, double width) {
    if (bins < 1) throw StatsError("histogram needs at least one bin");
    if (!(width > 0.0) || !std::isfinite(width))
        throw StatsError("histogram bin width must be positive");
}

void check_sample(double x) {
    if (!std::isfinite(x)) throw StatsError("non-finite histogram sample");
    if (x < 0.0) throw StatsError("negative histogram sample");
}

// Events arrive grouped by trajectory and time-sorted within it (the engine's
// serialization order); anything else indicates a corrupted stream.
template <typename PerTrajectory>
void scan_grouped(const std::vector<DetectionEvent>& events, PerTrajectory&& handle) {
    std::size_t start = 0;
    std::int64_t prev_id = -1;
    for (std::size_t i = 0; i <= events.size(); ++i) {
        if (i < events.size()) {
            const DetectionEvent& e = events[i];
            if (e.trajectory_id < prev_id)
                throw StatsError("event stream not grouped by trajectory");
            if (e.trajectory_id == prev_id && e.time <= events[i - 1].time)
                throw StatsError("event times within a trajectory must increase strictly");
        }
        if (i == events.size() || events[i].trajectory_id != prev_id) {
            if (prev_id >= 0) handle(events.data() + start, events.data() + i);
            if (i < events.size()) {
                start = i;
                prev_id = events[i].trajectory_id;
            }
        }
    }
}

double scale_check(double tau_max, int bins, double unit, double dt_floor,
                   const char* what) {
    if (!(tau_max > 0.0) || !std::isfinite(tau_max))
        throw StatsError("tau_max must be positive");
    check_geometry(bins, tau_max);
    const double width = tau_max / bins;
    if (dt_floor > 0.0 && width * unit + 1e-12 < dt_floor)
        throw StatsError(std::string(what) + " bin width " + std::to_string(width * unit) +
                         " is below the engine step " + std::to_string(dt_floor));
    return width;
}

}  // namespace

Histogram1D::Histogram1D(int bins, double bin_width) : bin_width_(bin_width) {
    check_geometry(bins, bin_width);
    counts_.assign(static_cast<std::size_t>(bins), 0);
}

void Histogram1D::add(double x) {
    check_sample(x);
    const double upper = bin_width_ * bins();
    if (x < upper) {
        const int i = std::min(static_cast<int>(x / bin_width_), bins() - 1);
        ++counts_[static_cast<std::size_t>(i)];
    } else {
        ++overflow_;
    }
    ++total_;
}

double Histogram1D::center(int i) const {
    if (i < 0 || i >= bins()) throw StatsError("bin index out of range");
    return (i + 0.5) * bin_width_;
}

double Histogram1D::density(int i) const {
    if (total_ == 0) throw StatsError("empty histogram has no density");
    return static_cast<double>(count(i)) / (static_cast<double>(total_) * bin_width_);
}

double Histogram1D::density_stderr(int i) const {
    if (total_ == 0) throw StatsError("empty histogram has no density");
    const double c = static_cast<double>(std::max<std::int64_t>(count(i), 1));
    return std::sqrt(c) / (static_cast<double>(total_) * bin_width_);
}

void Histogram1D::check_integral() const {
    if (total_ == 0) return;
    double mass = static_cast<double>(overflow_) / static_cast<double>(total_);
    for (int i = 0; i < bins(); ++i) mass += density(i) * bin_width_;
    if (std::abs(mass - 1.0) > 1e-9)
        throw StatsError("histogram mass " + std::to_string(mass) + " is not 1");
}

Histogram2D::Histogram2D(int bins, double bin_width) : bins_(bins), bin_width_(bin_width) {
    check_geometry(bins, bin_width);
    counts_.assign(static_cast<std::size_t>(bins) * static_cast<std::size_t>(bins), 0);
}

void Histogram2D::add(double x, double y) {
    check_sample(x);
    check_sample(y);
    const double upper = bin_width_ * bins_;
    if (x < upper && y < upper) {
        const int i = std::min(static_cast<int>(x / bin_width_), bins_ - 1);
        const int j = std::min(static_cast<int>(y / bin_width_), bins_ - 1);
        ++counts_[static_cast<std::size_t>(i) * bins_ + j];
    } else {
        ++overflow_;
    }
    ++total_;
}

double Histogram2D::center(int i) const {
    if (i < 0 || i >= bins_) throw StatsError("bin index out of range");
    return (i + 0.5) * bin_width_;
}

std::int64_t Histogram2D::count(int i, int j) const {
    if (i < 0 || i >= bins_ || j < 0 || j >= bins_)
        throw StatsError("bin index out of range");
    return counts_[static_cast<std::size_t>(i) * bins_ + j];
}

double Histogram2D::density(int i, int j) const {
    if (total_ == 0) throw StatsError("empty histogram has no density");
    return static_cast<double>(count(i, j)) /
           (static_cast<double>(total_) * bin_width_ * bin_width_);
}

double Histogram2D::density_stderr(int i, int j) const {
    if (total_ == 0) throw StatsError("empty histogram has no density");
    const double c = static_cast<double>(std::max<std::int64_t>(count(i, j), 1));
    return std::sqrt(c) / (static_cast<double>(total_) * bin_width_ * bin_width_);
}

void Histogram2D::check_integral() const {
    if (total_ == 0) return;
    double mass = static_cast<double>(overflow_) / static_cast<double>(total_);
    for (int i = 0; i < bins_; ++i)
        for (int j = 0; j < bins_; ++j) mass += density(i, j) * bin_width_ * bin_width_;
    if (std::abs(mass - 1.0) > 1e-9)
        throw StatsError("histogram mass " + std::to_string(mass) + " is not 1");
}

Histogram1D merge(const Histogram1D& a, const Histogram1D& b) {
    if (a.bins() != b.bins() || a.bin_width() != b.bin_width())
        throw StatsError("histogram geometry mismatch");
    Histogram1D out = a;
    for (int i = 0; i < b.bins(); ++i)
        out.counts_[static_cast<std::size_t>(i)] += b.count(i);
    out.overflow_ += b.overflow();
    out.total_ += b.total_samples();
    return out;
}

Histogram2D merge(const Histogram2D& a, const Histogram2D& b) {
    if (a.bins() != b.bins() || a.bin_width() != b.bin_width())
        throw StatsError("histogram geometry mismatch");
    Histogram2D out = a;
    for (std::size_t i = 0; i < out.counts_.size(); ++i) out.counts_[i] += b.counts_[i];
    out.overflow_ += b.overflow();
    out.total_ += b.total_samples();
    return out;
}

std::int64_t WaitingTimeSeries::total_count() const {
    std::int64_t n = 0;
    for (const auto& v : per_trajectory) n += static_cast<std::int64_t>(v.size());
    return n;
}

std::vector<double> WaitingTimeSeries::pooled() const {
    std::vector<double> all;
    all.reserve(static_cast<std::size_t>(total_count()));
    for (const auto& v : per_trajectory) all.insert(all.end(), v.begin(), v.end());
    return all;
}

double mean_waiting_time(const WaitingTimeSeries& series) {
    double sum = 0.0;
    std::int64_t n = 0;
    for (const auto& v : series.per_trajectory)
        for (double w : v) {
            sum += w;
            ++n;
        }
    if (n == 0) throw StatsError("empty waiting-time series");
    return sum / static_cast<double>(n);
}

WaitingTimeSeries waiting_times(const std::vector<DetectionEvent>& events,
                                std::optional<Channel> channel, double burn_in) {
    if (!std::isfinite(burn_in) || burn_in < 0.0)
        throw StatsError("burn_in must be nonnegative");
    WaitingTimeSeries series;
    series.channel = channel;
    scan_grouped(events, [&](const DetectionEvent* begin, const DetectionEvent* end) {
        std::vector<double> waits;
        double prev = -1.0;
        for (const DetectionEvent* e = begin; e != end; ++e) {
            if (channel && e->channel != *channel) continue;
            if (e->time <= burn_in) continue;
            if (prev >= 0.0) {
                const double w = e->time - prev;
                if (!(w > 0.0)) throw StatsError("nonpositive waiting time");
                waits.push_back(w);
            }
            prev = e->time;
        }
        if (!waits.empty()) series.per_trajectory.push_back(std::move(waits));
    });
    return series;
}

double WtdEstimate::w(int i) const {
    return scaled ? hist.density(i) : tau_bar * hist.density(i);
}

double WtdEstimate::w_stderr(int i) const {
    return scaled ? hist.density_stderr(i) : tau_bar * hist.density_stderr(i);
}

namespace {

WtdEstimate wtd_impl(const WaitingTimeSeries& series, int bins, double tau_max,
                     double dt_floor, bool scaled) {
    const double tau_bar = mean_waiting_time(series);
    const double unit = scaled ? tau_bar : 1.0;
    const double width = scale_check(tau_max, bins, unit, dt_floor, "waiting-time");
    WtdEstimate est{Histogram1D(bins, width), tau_bar, scaled, series.channel};
    for (const auto& v : series.per_trajectory)
        for (double w : v) est.hist.add(scaled ? w / tau_bar : w);
    est.hist.check_integral();
    return est;
}

}  // namespace

WtdEstimate wtd(const WaitingTimeSeries& series, int bins, double tau_max,
                double dt_floor) {
    return wtd_impl(series, bins, tau_max, dt_floor, true);
}

WtdEstimate wtd_absolute(const WaitingTimeSeries& series, int bins, double tau_max,
                         double dt_floor) {
    return wtd_impl(series, bins, tau_max, dt_floor, false);
}

AwtdEstimate awtd(const WaitingTimeSeries& series, int bins, double tau_max,
                  double dt_floor) {
    const double tau_bar = mean_waiting_time(series);
    const double width = scale_check(tau_max, bins, tau_bar, dt_floor, "adjacent-wait");
    AwtdEstimate est{Histogram2D(bins, width), tau_bar, series.channel};
    for (const auto& v : series.per_trajectory)
        for (std::size_t i = 0; i + 1 < v.size(); ++i)
            est.hist.add(v[i] / tau_bar, v[i + 1] / tau_bar);
    est.hist.check_integral();
    return est;
}

G2Estimate g2_histogram(const std::vector<DetectionEvent>& events, Channel channel,
                        int bins, double tau_max, double burn_in, double horizon,
                        std::int64_t n_traj) {
    if (n_traj < 1) throw StatsError("n_traj must be at least 1");
    if (!(horizon > burn_in)) throw StatsError("horizon must exceed burn_in");
    if (!(tau_max > 0.0) || !std::isfinite(tau_max))
        throw StatsError("tau_max must be positive");
    if (horizon - tau_max <= burn_in)
        throw StatsError("tau_max leaves no anchor window between burn_in and horizon");
    const double width = tau_max / bins;
    check_geometry(bins, width);

    std::vector<std::int64_t> counts(static_cast<std::size_t>(bins), 0);
    std::int64_t flux_events = 0;
    std::int64_t anchors = 0;
    const double anchor_limit = horizon - tau_max;
    scan_grouped(events, [&](const DetectionEvent* begin, const DetectionEvent* end) {
        std::vector<double> ts;
        for (const DetectionEvent* e = begin; e != end; ++e)
            if (e->channel == channel && e->time > burn_in) ts.push_back(e->time);
        flux_events += static_cast<std::int64_t>(ts.size());
        for (std::size_t i = 0; i < ts.size(); ++i) {
            if (ts[i] > anchor_limit) break;
            ++anchors;
            for (std::size_t j = i + 1; j < ts.size(); ++j) {
                const double tau = ts[j] - ts[i];
                if (tau >= tau_max) break;
                ++counts[static_cast<std::size_t>(std::min(
                    static_cast<int>(tau / width), bins - 1))];
            }
        }
    });
    if (flux_events == 0)
        throw StatsError("dark channel " + std::string(1, channel_code(channel)) +
                         ": no events after burn_in");
    if (anchors == 0)
        throw StatsError("no anchor events before horizon - tau_max");

    G2Estimate est;
    est.flux = static_cast<double>(flux_events) /
               (static_cast<double>(n_traj) * (horizon - burn_in));
    est.anchors = anchors;
    const double norm = static_cast<double>(anchors) * width * est.flux;
    est.curve.channel = channel;
    est.curve.source = CurveSource::TrajectoryHistogram;
    est.curve.taus.reserve(static_cast<std::size_t>(bins));
    est.curve.values.reserve(static_cast<std::size_t>(bins));
    est.stderr_values.reserve(static_cast<std::size_t>(bins));
    for (int i = 0; i < bins; ++i) {
        est.curve.taus.push_back((i + 0.5) * width);
        const double c = static_cast<double>(counts[static_cast<std::size_t>(i)]);
        est.curve.values.push_back(c / norm);
        est.stderr_values.push_back(std::sqrt(std::max(c, 1.0)) / norm);
    }
    est.curve.validate();
    return est;
}

double kolmogorov_q(double lambda) {
    if (!(lambda > 1e-8)) return 1.0;
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += (k % 2 == 1 ? term : -term);
        if (term < 1e-16) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

double ks_test_exponential(std::vector<double> samples, double rate) {
    if (samples.empty()) throw StatsError("empty sample for KS test");
    if (!(rate > 0.0)) throw StatsError("KS exponential rate must be positive");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = 1.0 - std::exp(-rate * samples[i]);
        d = std::max(d, std::max((i + 1.0) / n - f, f - i / n));
    }
    const double rn = std::sqrt(n);
    return kolmogorov_q((rn + 0.12 + 0.11 / rn) * d);
}

double ks_test_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw StatsError("empty sample for KS test");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        // Consume whole tie groups before comparing, so quantized samples are
        // handled correctly.
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == x) ++i;
        while (j < b.size() && b[j] == x) ++j;
        d = std::max(d, std::abs(i / na - j / nb));
    }
    const double ne = std::sqrt(na * nb / (na + nb));
    return kolmogorov_q((ne + 0.12 + 0.11 / ne) * d);
}

}  // namespace wqed
