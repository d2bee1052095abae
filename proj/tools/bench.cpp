#include <chrono>
#include <cstdio>
#include <vector>

#include "CLI11.hpp"
#include "wqed/model.hpp"
#include "wqed/trajectory.hpp"

// Times the OpenMP ensemble against the serial reference on the same workload and
// checks that both produce the identical event stream, which is the determinism
// contract the statistics layer relies on.

namespace {

using wqed::DetectionEvent;

std::vector<DetectionEvent> collect(bool parallel, const wqed::ModelOperators& m,
                                    const wqed::TrajectoryConfig& cfg, std::int64_t n,
                                    int workers, double* seconds) {
    std::vector<DetectionEvent> events;
    const auto sink = [&](wqed::TrajectoryRecord&& rec) {
        events.insert(events.end(), rec.events.begin(), rec.events.end());
    };
    const auto t0 = std::chrono::steady_clock::now();
    if (parallel)
        wqed::run_ensemble(m, cfg, n, sink, workers);
    else
        wqed::run_ensemble_serial(m, cfg, n, sink);
    *seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return events;
}

bool identical(const std::vector<DetectionEvent>& a, const std::vector<DetectionEvent>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i].trajectory_id != b[i].trajectory_id || a[i].time != b[i].time ||
            a[i].channel != b[i].channel)
            return false;
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    std::int64_t trajectories = 200;
    double t_end = 200.0;
    double dt = 0.005;
    int workers = 0;
    CLI::App app{"ensemble benchmark: serial reference vs parallel kernels"};
    app.add_option("--trajectories", trajectories, "ensemble size");
    app.add_option("--t-end", t_end, "trajectory horizon");
    app.add_option("--dt", dt, "integration step");
    app.add_option("--workers", workers, "worker threads for the parallel run (0 = all)");
    CLI11_PARSE(app, argc, argv);

    wqed::OneQubitParams params;
    const wqed::ModelOperators m = wqed::build_one_qubit(params);
    wqed::TrajectoryConfig cfg;
    cfg.dt = dt;
    cfg.t_end = t_end;
    cfg.validate(m);

    std::printf("workload: %lld trajectories, t_end = %g, dt = %g\n",
                static_cast<long long>(trajectories), t_end, dt);

    double serial_s = 0.0;
    const auto serial = collect(false, m, cfg, trajectories, workers, &serial_s);
    std::printf("serial:   %8.3f s  (%zu events)\n", serial_s, serial.size());

    double parallel_s = 0.0;
    const auto parallel = collect(true, m, cfg, trajectories, workers, &parallel_s);
    std::printf("parallel: %8.3f s  (%zu events)\n", parallel_s, parallel.size());

    if (!identical(serial, parallel)) {
        std::printf("FAIL: event streams differ between serial and parallel runs\n");
        return 1;
    }
    std::printf("event streams identical; speedup %.2fx\n",
                parallel_s > 0.0 ? serial_s / parallel_s : 0.0);
    return 0;
}
