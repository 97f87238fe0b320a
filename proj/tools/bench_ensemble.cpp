// Timing comparison between the serial reference driver (--workers 1) and
// the OpenMP ensemble at full width, on the two kernel families. Estimates
// must agree bit-for-bit; only the wall time may differ.

#include <omp.h>

#include <chrono>
#include <cstdio>

#include "affharm/line_estimates.hpp"
#include "affharm/walk.hpp"

using namespace affharm;

namespace {

double seconds(const std::chrono::steady_clock::time_point& a,
               const std::chrono::steady_clock::time_point& b) {
    return std::chrono::duration<double>(b - a).count();
}

void bench_group_walks(int threads) {
    MeasuredGroup g = builtin_group("bs12");
    WalkConfig cfg;
    cfg.group = &g;
    cfg.start = AffineElement::identity(g.place());
    cfg.seed = 2024;
    cfg.rule = SigmaStop{32.0};
    const int64_t n = 50000;

    cfg.workers = 1;
    auto t0 = std::chrono::steady_clock::now();
    EstimateReport serial = ensemble_c_small(cfg, n, Rational(3));
    auto t1 = std::chrono::steady_clock::now();

    cfg.workers = threads;
    auto t2 = std::chrono::steady_clock::now();
    EstimateReport parallel = ensemble_c_small(cfg, n, Rational(3));
    auto t3 = std::chrono::steady_clock::now();

    double ts = seconds(t0, t1), tp = seconds(t2, t3);
    bool identical = serial.estimate == parallel.estimate &&
                     serial.std_error == parallel.std_error &&
                     serial.n_censored == parallel.n_censored;
    printf("bs12 sigma_32 ensemble (n=%lld): serial %.3fs, %d workers %.3fs, speedup %.2fx, "
           "estimates %s\n",
           static_cast<long long>(n), ts, threads, tp, ts / tp,
           identical ? "identical" : "DIFFER");
}

void bench_line_walks(int threads) {
    LineConfig cfg;
    cfg.dist = StepDistribution::parse("unit");
    cfg.y = 0;
    cfg.n_samples = 200000;
    cfg.seed = 7;

    cfg.workers = 1;
    auto t0 = std::chrono::steady_clock::now();
    LemmaVerdict serial = verify_exit_time(cfg, {32});
    auto t1 = std::chrono::steady_clock::now();

    cfg.workers = threads;
    auto t2 = std::chrono::steady_clock::now();
    LemmaVerdict parallel = verify_exit_time(cfg, {32});
    auto t3 = std::chrono::steady_clock::now();

    double ts = seconds(t0, t1), tp = seconds(t2, t3);
    bool identical = serial.series[0].ys == parallel.series[0].ys;
    printf("line exit_time r=32 (n=%lld): serial %.3fs, %d workers %.3fs, speedup %.2fx, "
           "estimates %s\n",
           static_cast<long long>(cfg.n_samples), ts, threads, tp, ts / tp,
           identical ? "identical" : "DIFFER");
}

}  // namespace

int main() {
    int threads = omp_get_max_threads();
    printf("hardware threads: %d\n", threads);
    bench_group_walks(threads);
    bench_line_walks(threads);
    return 0;
}
