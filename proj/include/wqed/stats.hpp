#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "wqed/correlation.hpp"
#include "wqed/model.hpp"
#include "wqed/trajectory.hpp"

namespace wqed {

// Plain counting histogram over [0, bins * bin_width); samples at or beyond the
// upper edge land in a separate overflow bucket so no mass is lost.  All estimator
// results are integer folds of these, which is what makes sharded runs merge
// exactly.
class Histogram1D {
  public:
    Histogram1D(int bins, double bin_width);

    void add(double x);
    int bins() const { return static_cast<int>(counts_.size()); }
    double bin_width() const { return bin_width_; }
    double center(int i) const;
    std::int64_t count(int i) const { return counts_.at(static_cast<std::size_t>(i)); }
    const std::vector<std::int64_t>& counts() const { return counts_; }
    std::int64_t overflow() const { return overflow_; }
    std::int64_t total_samples() const { return total_; }

    double density(int i) const;         // count / (total * width)
    double density_stderr(int i) const;  // Poisson error, floor of one count
    // In-range mass plus overflow fraction must account for every sample.
    void check_integral() const;

  private:
    friend Histogram1D merge(const Histogram1D& a, const Histogram1D& b);
    double bin_width_;
    std::vector<std::int64_t> counts_;
    std::int64_t overflow_ = 0;
    std::int64_t total_ = 0;
};

// Square 2D variant over [0, bins * bin_width)^2 with one shared overflow bucket.
class Histogram2D {
  public:
    Histogram2D(int bins, double bin_width);

    void add(double x, double y);
    int bins() const { return bins_; }
    double bin_width() const { return bin_width_; }
    double center(int i) const;
    std::int64_t count(int i, int j) const;
    std::int64_t overflow() const { return overflow_; }
    std::int64_t total_samples() const { return total_; }

    double density(int i, int j) const;  // count / (total * width^2)
    double density_stderr(int i, int j) const;
    void check_integral() const;

  private:
    friend Histogram2D merge(const Histogram2D& a, const Histogram2D& b);
    int bins_;
    double bin_width_;
    std::vector<std::int64_t> counts_;  // row-major [i * bins + j]
    std::int64_t overflow_ = 0;
    std::int64_t total_ = 0;
};

// Exact integer merges; geometry (bin count and width) must match bit for bit.
Histogram1D merge(const Histogram1D& a, const Histogram1D& b);
Histogram2D merge(const Histogram2D& a, const Histogram2D& b);

// Waiting times grouped by trajectory; channel is empty when both channels were
// merged into one detector stream.  Every wait is positive because event times
// within a trajectory strictly increase.
struct WaitingTimeSeries {
    std::optional<Channel> channel;
    std::vector<std::vector<double>> per_trajectory;

    std::int64_t total_count() const;
    std::vector<double> pooled() const;
    bool empty() const { return total_count() == 0; }
};

// Mean of all waits; throws StatsError on an empty series.
double mean_waiting_time(const WaitingTimeSeries& series);

// Consecutive same-channel differences within each trajectory, using only events
// after burn_in.  channel = nullopt keeps both channels as one stream.  Events must
// be grouped by trajectory and time-sorted within it.
WaitingTimeSeries waiting_times(const std::vector<DetectionEvent>& events,
                                std::optional<Channel> channel, double burn_in);

// Waiting-time distribution with its scale information.  For the scaled estimate
// the histogram is over x = tau / tau_bar and the density is directly W(x), the
// form whose x -> 0 limit matches g2(0).  For the absolute-grid estimate W(tau) =
// tau_bar * density(i).
struct WtdEstimate {
    Histogram1D hist;
    double tau_bar = 0.0;
    bool scaled = true;  // bin axis is tau / tau_bar rather than tau
    std::optional<Channel> channel;

    double w(int i) const;         // W at bin i in the g2-comparable normalization
    double w_stderr(int i) const;
};

// dt_floor is the engine step; bins finer than it would resolve quantization noise,
// so that is rejected.  tau_max is in units of tau_bar for wtd and absolute time
// for wtd_absolute.
WtdEstimate wtd(const WaitingTimeSeries& series, int bins, double tau_max,
                double dt_floor = 0.0);
WtdEstimate wtd_absolute(const WaitingTimeSeries& series, int bins, double tau_max,
                         double dt_floor = 0.0);

// Joint density of adjacent waiting-time pairs on the scaled axis x = tau/tau_bar.
struct AwtdEstimate {
    Histogram2D hist;
    double tau_bar = 0.0;
    std::optional<Channel> channel;
};

AwtdEstimate awtd(const WaitingTimeSeries& series, int bins, double tau_max,
                  double dt_floor = 0.0);

// Histogram estimate of g2: every post-burn-in event with a full tau_max window
// before the horizon anchors a histogram of intervals to ALL later same-channel
// events, normalized by anchors * bin width * flux so the curve settles at 1.
// The flux estimate is post-burn-in events / (n_traj * (horizon - burn_in)).
// stderr holds the per-bin Poisson errors.  Throws StatsError when the channel has
// no post-burn-in events.
struct G2Estimate {
    CorrelationCurve curve;
    std::vector<double> stderr_values;
    double flux = 0.0;
    std::int64_t anchors = 0;
};

G2Estimate g2_histogram(const std::vector<DetectionEvent>& events, Channel channel,
                        int bins, double tau_max, double burn_in, double horizon,
                        std::int64_t n_traj);

// Kolmogorov-Smirnov machinery for the statistical acceptance tests.
double kolmogorov_q(double lambda);  // P(D > observed) asymptotic tail
double ks_test_exponential(std::vector<double> samples, double rate);  // returns p
double ks_test_two_sample(std::vector<double> a, std::vector<double> b);

}  // namespace wqed
