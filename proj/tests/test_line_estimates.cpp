#include <doctest.h>

#include <cmath>

#include "affharm/line_estimates.hpp"

using namespace affharm;

namespace {

// exhaustive subset oracle for the separated-set size
int max_separated_brute(const std::vector<double>& pts) {
    int best = 0;
    size_t n = pts.size();
    for (size_t mask = 0; mask < (size_t{1} << n); ++mask) {
        bool ok = true;
        int size = 0;
        for (size_t i = 0; i < n && ok; ++i) {
            if (!(mask >> i & 1)) continue;
            ++size;
            for (size_t j = i + 1; j < n && ok; ++j)
                if ((mask >> j & 1) && std::fabs(pts[i] - pts[j]) < 1.0) ok = false;
        }
        if (ok && size > best) best = size;
    }
    return best;
}

}  // namespace

TEST_SUITE("line_estimates") {

TEST_CASE("exact oracles: frozen small cases") {
    CHECK(exact_exit_time_unit(-4, 4, 0) == Rational(25));
    CHECK(exact_exit_time_unit(-8, 8, 0) == Rational(81));
    CHECK(exact_exit_time_unit(-4, 4, 5) == Rational(0));  // already outside
    // gambler's ruin from y=2 on [-8,8]: offsets {-10..6}, exit above
    CHECK(exact_exit_above_unit(-10, 6, 0) == Rational(BigInt(11), BigInt(18)));
    CHECK(exact_exit_above_unit(-9, 9, 0) == Rational(BigInt(1), BigInt(2)));
    // closed forms (r+1)^2 - y^2 across a sweep
    for (int64_t r : {3, 5, 10}) {
        for (int64_t y = -r; y <= r; ++y) {
            Rational expect((r + 1) * (r + 1) - y * y);
            CHECK(exact_exit_time_unit(-r, r, y) == expect);
        }
    }
    // ruin probability is monotone in the start point
    Rational prev(0);
    for (int64_t y = -9; y <= 9; ++y) {
        Rational p = exact_exit_above_unit(-9, 9, y);
        CHECK(p >= prev);
        prev = p;
    }
}

TEST_CASE("exact occupation survival makes sense") {
    std::vector<Rational> surv = exact_occupation_survival_unit(32, 2, 1, 40);
    CHECK(surv[0] == Rational(1));  // starts inside [0,2]: V >= 1
    for (size_t i = 1; i < surv.size(); ++i) CHECK(surv[i] <= surv[i - 1]);
    // the tail is genuinely exponential: log-ratio stabilizes
    double tail_ratio = surv[39].to_double() / surv[38].to_double();
    double mid_ratio = surv[30].to_double() / surv[29].to_double();
    CHECK(tail_ratio == doctest::Approx(mid_ratio).epsilon(0.02));
}

TEST_CASE("max_separated: examples and brute-force agreement") {
    CHECK(max_separated_points({}) == 0);
    CHECK(max_separated_points({0.0, 0.5, 1.5, 3.0}) == 3);
    CHECK(max_separated_brute({0.0, 0.5, 1.5, 3.0}) == 3);
    CHECK(max_separated_points({0, 1, 2, 3}) == 4);
    SplitMix64 rng(2718);
    for (int trial = 0; trial < 120; ++trial) {
        std::vector<double> pts;
        size_t n = rng.next_below(13);
        for (size_t i = 0; i < n; ++i) pts.push_back(rng.next_double() * 6.0 - 3.0);
        CHECK(max_separated_points(pts) == max_separated_brute(pts));
        // monotone under adding points
        std::vector<double> more = pts;
        more.push_back(rng.next_double() * 6.0 - 3.0);
        CHECK(max_separated_points(more) >= max_separated_points(pts));
    }
}

TEST_CASE("step distributions") {
    CHECK(StepDistribution::parse("unit").to_string() == "unit");
    CHECK(StepDistribution::parse("uniform:3").k == 3);
    CHECK(StepDistribution::parse("geom:0.5").q == doctest::Approx(0.5));
    CHECK_THROWS(StepDistribution::parse("geom:1.5"));
    CHECK_THROWS(StepDistribution::parse("cauchy"));
    // sym-geometric(1/2): E|Z| = 2, Pr(|Z| > z) = 2^{-z}
    StepDistribution g = StepDistribution::parse("geom:0.5");
    SplitMix64 rng(1);
    int64_t n = 200000, exceed4 = 0;
    double sum = 0;
    for (int64_t i = 0; i < n; ++i) {
        int64_t z = g.sample(rng);
        sum += std::llabs(z);
        exceed4 += std::llabs(z) > 4;
    }
    CHECK(sum / static_cast<double>(n) == doctest::Approx(2.0).epsilon(0.02));
    CHECK(static_cast<double>(exceed4) / static_cast<double>(n) ==
          doctest::Approx(1.0 / 16).epsilon(0.1));
}

TEST_CASE("exit-time verdict passes for the unit walk") {
    LineConfig cfg;
    cfg.dist = StepDistribution::parse("unit");
    cfg.n_samples = 40000;
    cfg.seed = 3;
    cfg.workers = 1;
    LemmaVerdict v = verify_exit_time(cfg, {8, 16, 32});
    CHECK(v.pass);
    // empirical ratios track (r+1)^2/r^2
    const Series& ratios = v.series[0];
    const Series& exact = v.series[1];
    for (size_t i = 0; i < ratios.ys.size(); ++i)
        CHECK(ratios.ys[i] == doctest::Approx(exact.ys[i]).epsilon(0.05));
}

TEST_CASE("big-jump verdict") {
    LineConfig cfg;
    cfg.dist = StepDistribution::parse("unit");
    cfg.n_samples = 20000;
    cfg.seed = 5;
    cfg.workers = 1;
    // unit steps never exceed z >= 1
    LemmaVerdict v = verify_big_jump(cfg, 16, {1, 2, 4});
    CHECK(v.pass);
    for (double p : v.series[0].ys) CHECK(p == 0.0);

    cfg.dist = StepDistribution::parse("geom:0.5");
    cfg.n_samples = 50000;
    LemmaVerdict vg = verify_big_jump(cfg, 16, {4, 6, 8, 10, 12});
    CHECK(vg.pass);
    double slope = 0;
    for (const auto& [k, val] : vg.metrics)
        if (k == "log_slope") slope = val;
    // per-step tail 2^{-z} forces log-slope near -log 2
    CHECK(slope == doctest::Approx(-std::log(2.0)).epsilon(0.35));
}

TEST_CASE("green-function verdict and symmetry") {
    LineConfig cfg;
    cfg.dist = StepDistribution::parse("unit");
    cfg.y = 2;
    cfg.n_samples = 50000;
    cfg.seed = 9;
    cfg.workers = 1;
    LemmaVerdict v = verify_green_function(cfg, {8, 16, 32});
    CHECK(v.pass);
    // symmetric start: exit-right probability is 1/2 within noise
    cfg.y = 0;
    LemmaVerdict v0 = verify_green_function(cfg, {16});
    CHECK(std::fabs(v0.series[0].ys[0] - 0.5) <= 3.0 * v0.series[0].errs[0]);
}

TEST_CASE("occupation verdict calibrated against the exact kernel") {
    LineConfig cfg;
    cfg.dist = StepDistribution::parse("unit");
    cfg.y = 1;
    cfg.n_samples = 60000;
    cfg.seed = 11;
    cfg.workers = 1;
    LemmaVerdict v = verify_occupation_time(cfg, 32, {2, 4});
    CHECK(v.pass);
    double mc_slope = 0;
    for (const auto& [k, val] : v.metrics)
        if (k == "slope_m2") mc_slope = val;
    // oracle slope from the exact survival at m=2
    std::vector<Rational> surv = exact_occupation_survival_unit(32, 2, 1, 60);
    double exact_slope =
        (std::log(surv[50].to_double()) - std::log(surv[20].to_double())) / 30.0;
    CHECK(mc_slope == doctest::Approx(exact_slope).epsilon(0.5));
    CHECK(-mc_slope * 4 >= 0.1);
    CHECK(-mc_slope * 4 <= 10.0);
}

TEST_CASE("msep verdict: decay in r") {
    LineConfig cfg;
    cfg.dist = StepDistribution::parse("unit");
    cfg.y = 0;
    cfg.n_samples = 40000;
    cfg.seed = 13;
    cfg.workers = 1;
    LemmaVerdict v = verify_msep(cfg, 1.0, {16, 32, 64}, 2);
    CHECK(v.pass);
    // for fixed n the probability decreases along the r sweep
    for (int n = 0; n <= 2; ++n) {
        double prev = 2.0;
        for (const Series& s : v.series) {
            double p = s.ys[static_cast<size_t>(n)];
            CHECK(p < prev + 0.01);
            prev = p;
        }
    }
    CHECK_THROWS(verify_msep(cfg, 1.0, {2}, 1));  // r > 2*max(-y, q) violated
}

}  // TEST_SUITE
