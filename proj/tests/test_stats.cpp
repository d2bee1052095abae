#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "wqed/philox.hpp"
#include "wqed/stats.hpp"

using namespace wqed;

namespace {

DetectionEvent ev(std::int64_t id, double t, Channel c) { return {id, t, c}; }

// A two-channel Poisson stream: total rate 2, each detection assigned to a side by
// a fair coin, so the per-side streams are unit-rate Poisson processes.
std::vector<DetectionEvent> poisson_events(std::int64_t n_traj, double horizon) {
    std::vector<DetectionEvent> events;
    for (std::int64_t id = 0; id < n_traj; ++id) {
        RngStream rng(20240401, id);
        double t = 0.0;
        while (true) {
            t += rng.exponential(2.0);
            if (t >= horizon) break;
            events.push_back(ev(id, t, rng.uniform() < 0.5 ? Channel::Right : Channel::Left));
        }
    }
    return events;
}

}  // namespace

TEST_CASE("1d histogram bookkeeping by hand") {
    Histogram1D h(4, 0.5);
    for (double x : {0.1, 0.49999, 0.5, 1.2, 1.9999, 2.0, 7.0}) h.add(x);
    CHECK(h.bins() == 4);
    CHECK(h.bin_width() == 0.5);
    CHECK(h.count(0) == 2);
    CHECK(h.count(1) == 1);
    CHECK(h.count(2) == 1);
    CHECK(h.count(3) == 1);
    CHECK(h.overflow() == 2);
    CHECK(h.total_samples() == 7);
    CHECK(h.center(1) == doctest::Approx(0.75));
    CHECK(h.density(0) == doctest::Approx(2.0 / (7.0 * 0.5)));
    CHECK(h.density_stderr(0) == doctest::Approx(std::sqrt(2.0) / (7.0 * 0.5)));
    CHECK_NOTHROW(h.check_integral());

    Histogram1D empty_bin(2, 1.0);
    empty_bin.add(0.5);
    // The error bar on a zero-count bin is the one-count floor, never zero.
    CHECK(empty_bin.density(1) == 0.0);
    CHECK(empty_bin.density_stderr(1) == doctest::Approx(1.0));

    CHECK_THROWS_AS(Histogram1D(0, 0.5), StatsError);
    CHECK_THROWS_AS(Histogram1D(4, 0.0), StatsError);
    CHECK_THROWS_AS(h.add(-0.1), StatsError);
    CHECK_THROWS_AS(h.add(std::nan("")), StatsError);
    CHECK_THROWS(h.count(-1));  // range-checked container access
    CHECK_THROWS(h.count(4));
    CHECK_THROWS_AS(h.center(-1), StatsError);
    CHECK_THROWS_AS(h.center(4), StatsError);
    CHECK_THROWS_AS(Histogram1D(2, 1.0).density(0), StatsError);
}

TEST_CASE("2d histogram bookkeeping by hand") {
    Histogram2D h(3, 1.0);
    h.add(0.5, 2.5);
    h.add(0.5, 2.5);
    h.add(2.1, 0.1);
    h.add(3.5, 0.5);  // x past the edge: shared overflow
    h.add(0.5, 9.0);  // y past the edge: same bucket
    CHECK(h.count(0, 2) == 2);
    CHECK(h.count(2, 0) == 1);
    CHECK(h.count(1, 1) == 0);
    CHECK(h.overflow() == 2);
    CHECK(h.total_samples() == 5);
    CHECK(h.center(2) == doctest::Approx(2.5));
    CHECK(h.density(0, 2) == doctest::Approx(2.0 / 5.0));
    CHECK(h.density_stderr(1, 1) == doctest::Approx(1.0 / 5.0));  // one-count floor
    CHECK_NOTHROW(h.check_integral());
    CHECK_THROWS_AS(h.count(3, 0), StatsError);
    CHECK_THROWS_AS(h.count(0, -1), StatsError);
    CHECK_THROWS_AS(Histogram2D(2, 1.0).density(0, 0), StatsError);
}

TEST_CASE("histogram merges are exact integer sums") {
    Histogram1D a(3, 0.5), b(3, 0.5);
    for (double x : {0.1, 0.6, 2.0}) a.add(x);
    for (double x : {0.2, 0.7, 0.8, 1.2}) b.add(x);
    const Histogram1D m = merge(a, b);
    CHECK(m.count(0) == 2);
    CHECK(m.count(1) == 3);
    CHECK(m.count(2) == 1);
    CHECK(m.overflow() == 1);
    CHECK(m.total_samples() == 7);
    CHECK_THROWS_AS(merge(a, Histogram1D(3, 0.25)), StatsError);
    CHECK_THROWS_AS(merge(a, Histogram1D(4, 0.5)), StatsError);

    Histogram2D c(2, 1.0), d(2, 1.0);
    c.add(0.5, 0.5);
    d.add(0.5, 0.5);
    d.add(1.5, 0.5);
    d.add(5.0, 0.0);
    const Histogram2D m2 = merge(c, d);
    CHECK(m2.count(0, 0) == 2);
    CHECK(m2.count(1, 0) == 1);
    CHECK(m2.overflow() == 1);
    CHECK(m2.total_samples() == 4);
    CHECK_THROWS_AS(merge(c, Histogram2D(3, 1.0)), StatsError);
}

TEST_CASE("waiting times from a hand-built event log") {
    std::vector<DetectionEvent> events = {
        ev(0, 1.0, Channel::Right), ev(0, 1.5, Channel::Left),
        ev(0, 2.5, Channel::Right), ev(0, 3.0, Channel::Right),
        ev(0, 3.25, Channel::Left), ev(1, 0.5, Channel::Right),
        ev(1, 4.0, Channel::Right), ev(2, 2.0, Channel::Left),
    };

    const WaitingTimeSeries right = waiting_times(events, Channel::Right, 0.0);
    REQUIRE(right.per_trajectory.size() == 2);
    CHECK(right.per_trajectory[0] == std::vector<double>{1.5, 0.5});
    CHECK(right.per_trajectory[1] == std::vector<double>{3.5});
    CHECK(right.total_count() == 3);
    CHECK(right.pooled() == std::vector<double>{1.5, 0.5, 3.5});
    CHECK(mean_waiting_time(right) == doctest::Approx(5.5 / 3.0));
    CHECK(right.channel == Channel::Right);
    CHECK_FALSE(right.empty());

    // Merged-stream mode keeps both channels; single-event trajectories drop out.
    const WaitingTimeSeries merged = waiting_times(events, std::nullopt, 0.0);
    REQUIRE(merged.per_trajectory.size() == 2);
    CHECK(merged.per_trajectory[0] == std::vector<double>{0.5, 1.0, 0.5, 0.25});
    CHECK(merged.total_count() == 5);
    CHECK_FALSE(merged.channel.has_value());

    // Burn-in discards events at or before the cut, waits restart after it.
    const WaitingTimeSeries late = waiting_times(events, Channel::Right, 1.0);
    REQUIRE(late.per_trajectory.size() == 1);
    CHECK(late.per_trajectory[0] == std::vector<double>{0.5});

    const WaitingTimeSeries none = waiting_times({}, std::nullopt, 0.0);
    CHECK(none.empty());
    CHECK_THROWS_AS(mean_waiting_time(none), StatsError);

    std::vector<DetectionEvent> ungrouped = {ev(0, 1.0, Channel::Right),
                                             ev(1, 1.0, Channel::Right),
                                             ev(0, 2.0, Channel::Right)};
    CHECK_THROWS_AS(waiting_times(ungrouped, std::nullopt, 0.0), StatsError);
    std::vector<DetectionEvent> stalled = {ev(0, 1.0, Channel::Right),
                                           ev(0, 1.0, Channel::Left)};
    CHECK_THROWS_AS(waiting_times(stalled, std::nullopt, 0.0), StatsError);
    CHECK_THROWS_AS(waiting_times(events, std::nullopt, -0.5), StatsError);
}

TEST_CASE("scaled and absolute estimates are the same histogram in two gauges") {
    const std::vector<DetectionEvent> events = poisson_events(300, 50.0);
    const WaitingTimeSeries series = waiting_times(events, Channel::Right, 0.0);
    REQUIRE(series.total_count() > 10000);

    const WtdEstimate s = wtd(series, 20, 4.0);
    CHECK(s.tau_bar == mean_waiting_time(series));
    const WtdEstimate a = wtd_absolute(series, 20, 4.0 * s.tau_bar);
    CHECK(a.tau_bar == s.tau_bar);
    for (int i = 0; i < 20; ++i) {
        CHECK(s.hist.count(i) == a.hist.count(i));
        CHECK(s.w(i) == doctest::Approx(a.w(i)).epsilon(1e-12));
        CHECK(s.w_stderr(i) == doctest::Approx(a.w_stderr(i)).epsilon(1e-12));
    }
    // The accessor definitions themselves.
    CHECK(s.w(3) == s.hist.density(3));
    CHECK(a.w(3) == a.tau_bar * a.hist.density(3));
    CHECK(a.w_stderr(3) == a.tau_bar * a.hist.density_stderr(3));
}

TEST_CASE("rescaling every wait leaves the scaled distribution untouched") {
    const std::vector<DetectionEvent> events = poisson_events(50, 50.0);
    const WaitingTimeSeries series = waiting_times(events, std::nullopt, 0.0);
    WaitingTimeSeries tripled = series;
    for (auto& v : tripled.per_trajectory)
        for (double& w : v) w *= 3.0;
    const WtdEstimate base = wtd(series, 16, 4.0);
    const WtdEstimate big = wtd(tripled, 16, 4.0);
    CHECK(big.tau_bar == doctest::Approx(3.0 * base.tau_bar).epsilon(1e-12));
    for (int i = 0; i < 16; ++i) CHECK(base.hist.count(i) == big.hist.count(i));
}

TEST_CASE("poisson statistics look like what a textbook says they should") {
    const std::vector<DetectionEvent> events = poisson_events(300, 50.0);
    const WaitingTimeSeries right = waiting_times(events, Channel::Right, 0.0);
    const WaitingTimeSeries merged = waiting_times(events, std::nullopt, 0.0);

    // Fair thinning of a rate-2 process leaves unit-rate exponential waits.
    CHECK(ks_test_exponential(right.pooled(), 1.0) > 1e-3);
    CHECK(ks_test_exponential(merged.pooled(), 2.0) > 1e-3);
    CHECK(mean_waiting_time(right) == doctest::Approx(1.0).epsilon(0.05));

    // Adjacent waits are independent, so the joint density factorizes.
    const AwtdEstimate joint = awtd(right, 8, 3.0);
    const double w = joint.hist.bin_width();
    for (int i = 0; i < 8; ++i) {
        const double qi = std::exp(-i * w) * (1.0 - std::exp(-w)) / w;
        for (int j = 0; j < 8; ++j) {
            const double qj = std::exp(-j * w) * (1.0 - std::exp(-w)) / w;
            const double pull =
                (joint.hist.density(i, j) - qi * qj) / joint.hist.density_stderr(i, j);
            CHECK(std::abs(pull) < 5.0);
        }
    }

    // And the intensity correlation is flat at one.
    const G2Estimate g2 = g2_histogram(events, Channel::Right, 20, 2.0, 0.0, 50.0, 300);
    CHECK(g2.flux == doctest::Approx(1.0).epsilon(0.05));
    for (int i = 0; i < 20; ++i) {
        const double pull = (g2.curve.values[size_t(i)] - 1.0) / g2.stderr_values[size_t(i)];
        CHECK(std::abs(pull) < 5.0);
    }
}

TEST_CASE("bins finer than the engine step are refused") {
    const std::vector<DetectionEvent> events = poisson_events(20, 50.0);
    const WaitingTimeSeries series = waiting_times(events, Channel::Right, 0.0);
    CHECK_THROWS_AS(wtd(series, 1000, 1.0, 0.005), StatsError);
    CHECK_THROWS_AS(wtd_absolute(series, 1000, 1.0, 0.005), StatsError);
    CHECK_THROWS_AS(awtd(series, 1000, 1.0, 0.005), StatsError);
    CHECK_NOTHROW(wtd_absolute(series, 100, 1.0, 0.005));
    CHECK_THROWS_AS(wtd(series, 10, -1.0), StatsError);
    CHECK_THROWS_AS(wtd(series, 0, 1.0), StatsError);
    const WaitingTimeSeries none = waiting_times({}, std::nullopt, 0.0);
    CHECK_THROWS_AS(wtd(none, 10, 1.0), StatsError);
    CHECK_THROWS_AS(awtd(none, 10, 1.0), StatsError);
}

TEST_CASE("intensity correlation bookkeeping by hand") {
    std::vector<DetectionEvent> events = {
        ev(0, 1.0, Channel::Right), ev(0, 1.5, Channel::Left),
        ev(0, 2.2, Channel::Right), ev(0, 3.4, Channel::Right),
        ev(0, 8.0, Channel::Right), ev(1, 5.0, Channel::Right),
        ev(1, 5.5, Channel::Right),
    };
    const G2Estimate est = g2_histogram(events, Channel::Right, 4, 4.0, 0.0, 10.0, 2);
    // Anchors need a full window before the horizon: 1.0, 2.2, 3.4, 5.0, 5.5 qualify;
    // 8.0 does not.  Pair separations 1.2, 2.4, 1.2, 0.5 land in bins 1, 2, 1, 0.
    CHECK(est.anchors == 5);
    CHECK(est.flux == doctest::Approx(6.0 / 20.0));
    const double norm = 5.0 * 1.0 * 0.3;
    REQUIRE(est.curve.values.size() == 4);
    CHECK(est.curve.values[0] == doctest::Approx(1.0 / norm));
    CHECK(est.curve.values[1] == doctest::Approx(2.0 / norm));
    CHECK(est.curve.values[2] == doctest::Approx(1.0 / norm));
    CHECK(est.curve.values[3] == 0.0);
    CHECK(est.stderr_values[3] == doctest::Approx(1.0 / norm));  // one-count floor
    CHECK(est.curve.taus[0] == doctest::Approx(0.5));
    CHECK(est.curve.taus[3] == doctest::Approx(3.5));
    CHECK(est.curve.channel == Channel::Right);
    CHECK(source_name(est.curve.source) == std::string("trajectory-histogram"));

    CHECK_THROWS_AS(g2_histogram(events, Channel::Right, 4, 4.0, 0.0, 10.0, 0), StatsError);
    CHECK_THROWS_AS(g2_histogram(events, Channel::Right, 4, 4.0, 10.0, 10.0, 2), StatsError);
    CHECK_THROWS_AS(g2_histogram(events, Channel::Right, 4, -1.0, 0.0, 10.0, 2), StatsError);
    CHECK_THROWS_AS(g2_histogram(events, Channel::Right, 4, 9.5, 0.5, 10.0, 2), StatsError);
    // Only one left-side event: no waits, but a flux; two: fine.  None: dark.
    std::vector<DetectionEvent> right_only = {ev(0, 1.0, Channel::Right)};
    CHECK_THROWS_WITH_AS(g2_histogram(right_only, Channel::Left, 4, 4.0, 0.0, 10.0, 1),
                         doctest::Contains("dark channel"), StatsError);
    std::vector<DetectionEvent> late_only = {ev(0, 9.0, Channel::Right)};
    CHECK_THROWS_WITH_AS(g2_histogram(late_only, Channel::Right, 4, 4.0, 0.0, 10.0, 1),
                         doctest::Contains("no anchor"), StatsError);
}

TEST_CASE("sharded histograms merge into the pooled answer exactly") {
    const std::vector<DetectionEvent> all = poisson_events(100, 50.0);
    std::vector<DetectionEvent> first, second;
    for (const DetectionEvent& e : all) (e.trajectory_id < 50 ? first : second).push_back(e);

    const WtdEstimate pooled =
        wtd_absolute(waiting_times(all, Channel::Left, 0.0), 25, 5.0);
    const Histogram1D combined =
        merge(wtd_absolute(waiting_times(first, Channel::Left, 0.0), 25, 5.0).hist,
              wtd_absolute(waiting_times(second, Channel::Left, 0.0), 25, 5.0).hist);
    CHECK(combined.total_samples() == pooled.hist.total_samples());
    CHECK(combined.overflow() == pooled.hist.overflow());
    for (int i = 0; i < 25; ++i) CHECK(combined.count(i) == pooled.hist.count(i));
}

TEST_CASE("kolmogorov machinery matches frozen values and sane verdicts") {
    CHECK(kolmogorov_q(0.5) == doctest::Approx(0.96394524366487509).epsilon(1e-12));
    CHECK(kolmogorov_q(1.36) == doctest::Approx(0.04948587675537791).epsilon(1e-12));
    CHECK(kolmogorov_q(2.0) == doctest::Approx(0.00067092525577969535).epsilon(1e-10));
    CHECK(kolmogorov_q(0.0) == 1.0);

    RngStream rng(77, 0);
    std::vector<double> x, y, shifted;
    for (int i = 0; i < 5000; ++i) {
        x.push_back(rng.exponential(3.0));
        y.push_back(rng.exponential(3.0));
        shifted.push_back(y.back() + 0.3);
    }
    CHECK(ks_test_exponential(x, 3.0) > 1e-3);
    CHECK(ks_test_exponential(x, 4.0) < 1e-6);
    CHECK(ks_test_two_sample(x, y) > 1e-3);
    CHECK(ks_test_two_sample(x, shifted) < 1e-6);
    CHECK_THROWS_AS(ks_test_exponential({}, 1.0), StatsError);
    CHECK_THROWS_AS(ks_test_exponential(x, 0.0), StatsError);
    CHECK_THROWS_AS(ks_test_two_sample({}, x), StatsError);
}
