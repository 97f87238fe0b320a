#include <doctest.h>

#include <cmath>

#include "affharm/line_estimates.hpp"
#include "affharm/walk.hpp"

using namespace affharm;

namespace {

WalkConfig zline_sigma(const MeasuredGroup& g, double r, uint64_t seed) {
    WalkConfig cfg;
    cfg.group = &g;
    cfg.start = AffineElement::identity(g.place());
    cfg.seed = seed;
    cfg.rule = SigmaStop{r};
    cfg.observable = Observable::CValue;
    cfg.workers = 1;
    return cfg;
}

bool same_sample(const StoppedSample& a, const StoppedSample& b) {
    return a.stop_kind == b.stop_kind && a.stop_time == b.stop_time && a.final == b.final &&
           a.exit_side == b.exit_side;
}

}  // namespace

TEST_SUITE("walk_engine") {

TEST_CASE("zline sigma_4 mean exit time matches the linear-solve oracle") {
    // oracle: first-step analysis over {-4..4}; the closed form is (r+1)^2
    Rational exact = exact_exit_time_unit(-4, 4, 0);
    CHECK(exact == Rational(25));
    MeasuredGroup z = builtin_group("zline");
    EstimateReport rep = ensemble_stop_time(zline_sigma(z, 4.0, 42), 100000);
    CHECK(rep.n_censored == 0);
    CHECK(std::fabs(rep.estimate - 25.0) <= 3.0 * rep.std_error);
}

TEST_CASE("zline sigma_8 mean stop time is near 81") {
    CHECK(exact_exit_time_unit(-8, 8, 0) == Rational(81));
    MeasuredGroup z = builtin_group("zline");
    EstimateReport rep = ensemble_stop_time(zline_sigma(z, 8.0, 7), 100000);
    CHECK(std::fabs(rep.estimate - 81.0) <= 3.0 * rep.std_error);
}

TEST_CASE("start outside the window stops at time zero") {
    MeasuredGroup z = builtin_group("zline");
    WalkConfig cfg = zline_sigma(z, 4.0, 1);
    cfg.start = AffineElement(ValuedScalar(z.place(), Rational(9)),
                              ValuedScalar::one(z.place()));
    StoppedSample s = sample_stopped_walk(cfg);
    CHECK(s.stop_kind == StopKind::SigmaR);
    CHECK(s.stop_time == 0);
    CHECK(s.final == cfg.start);
}

TEST_CASE("tau rules on the rho observable from the identity") {
    MeasuredGroup bs = builtin_group("bs12");
    WalkConfig cfg;
    cfg.group = &bs;
    cfg.start = AffineElement::identity(bs.place());
    cfg.seed = 5;
    cfg.workers = 1;
    // rho changes exactly when a^{+-1} fires, which is mu-mass 1/2; stopping
    // on "rho nonzero" therefore fires at t=1 with probability 1/2
    cfg.rule = TauSetStop{{RealInterval::parse("(-inf,0)"), RealInterval::parse("(0,inf)")}};
    EnsembleSpec first_step;
    first_step.value = [](const WalkFinal& f) { return f.stop_time() == 1 ? 1.0 : 0.0; };
    EstimateReport both = run_ensemble(cfg, 50000, first_step);
    CHECK(std::fabs(both.estimate - 0.5) <= 3.0 * both.std_error);
    // one-sided target: only a^{-1} (rho = +log 2) fires, mass 1/4
    cfg.rule = TauSetStop{{RealInterval::parse("(0,inf)")}};
    EstimateReport one = run_ensemble(cfg, 50000, first_step);
    CHECK(std::fabs(one.estimate - 0.25) <= 3.0 * one.std_error);
}

TEST_CASE("reports are identical across worker counts") {
    MeasuredGroup bs = builtin_group("bs12");
    WalkConfig cfg;
    cfg.group = &bs;
    cfg.start = AffineElement::identity(bs.place());
    cfg.seed = 404;
    cfg.rule = SigmaStop{8.0};
    for (int64_t n : {1000LL, 20000LL}) {
        cfg.workers = 1;
        EstimateReport serial = ensemble_c_small(cfg, n, Rational(3));
        cfg.workers = 3;
        EstimateReport parallel = ensemble_c_small(cfg, n, Rational(3));
        CHECK(serial.estimate == parallel.estimate);
        CHECK(serial.std_error == parallel.std_error);
        CHECK(serial.n_censored == parallel.n_censored);
    }
}

TEST_CASE("fast kernel agrees with the exact reference walk sample-for-sample") {
    MeasuredGroup bs = builtin_group("bs12");
    MeasuredGroup lp = builtin_group("lamplighter:2");
    MeasuredGroup z = builtin_group("zline");
    std::vector<WalkConfig> cfgs;

    WalkConfig c1;
    c1.group = &bs;
    c1.start = AffineElement::identity(bs.place());
    c1.seed = 11;
    c1.rule = SigmaStop{6.0};
    cfgs.push_back(c1);

    WalkConfig c2 = c1;
    c2.start = bs.evaluate("a^-2 b");
    c2.rule = WindowStop{0.0, 6.0};
    cfgs.push_back(c2);

    WalkConfig c3 = c1;
    c3.rule = TauSetStop{{RealInterval::parse("[1.3,inf)")}};
    cfgs.push_back(c3);

    WalkConfig c4;
    c4.group = &lp;
    c4.start = lp.evaluate("a t a");
    c4.seed = 13;
    c4.rule = SigmaStop{4.0};
    cfgs.push_back(c4);

    WalkConfig c5 = zline_sigma(z, 5.0, 17);
    c5.start = z.evaluate("s^2");
    cfgs.push_back(c5);

    for (const WalkConfig& cfg : cfgs) {
        for (uint64_t i = 0; i < 60; ++i) {
            StoppedSample ref = sample_stopped_walk(cfg, i);
            StoppedSample fast = sample_stopped_walk_fast(cfg, i);
            CHECK(same_sample(ref, fast));
        }
    }

    // subgroup stopping, both labeling families
    CosetLabeling par = CosetLabeling::zline_parity(z);
    WalkConfig c6 = zline_sigma(z, 4.0, 23);
    c6.rule = TauSubgroupStop{&par};
    CosetLabeling mod2 = CosetLabeling::lambda_exp_mod(bs, 2);
    WalkConfig c7 = c1;
    c7.seed = 29;
    c7.rule = TauSubgroupStop{&mod2};
    for (const WalkConfig& cfg : {c6, c7}) {
        for (uint64_t i = 0; i < 60; ++i)
            CHECK(same_sample(sample_stopped_walk(cfg, i), sample_stopped_walk_fast(cfg, i)));
    }
}

TEST_CASE("censoring is rare for sigma runs at the default cap") {
    MeasuredGroup bs = builtin_group("bs12");
    WalkConfig cfg;
    cfg.group = &bs;
    cfg.start = AffineElement::identity(bs.place());
    cfg.seed = 31;
    cfg.rule = SigmaStop{8.0};
    cfg.workers = 1;
    EstimateReport rep = ensemble_stop_time(cfg, 20000);
    CHECK(static_cast<double>(rep.n_censored) < 1e-3 * 20000);
    // and a tight cap censors visibly but still reports
    cfg.max_steps = 20;
    EstimateReport tight = ensemble_stop_time(cfg, 2000);
    CHECK(tight.n_censored > 0);
    CHECK(tight.n_samples == 2000);
}

TEST_CASE("rho of the walk is a martingale") {
    MeasuredGroup bs = builtin_group("bs12");
    EstimateReport rep = fixed_time_rho_mean(bs, AffineElement::identity(bs.place()), 64, 20000,
                                             1234, 1);
    CHECK(std::fabs(rep.estimate - 0.0) <= 4.0 * rep.std_error);
    AffineElement start = bs.evaluate("a^3");
    EstimateReport rep2 = fixed_time_rho_mean(bs, start, 32, 20000, 4321, 1);
    CHECK(std::fabs(rep2.estimate - rho(start).to_double()) <= 4.0 * rep2.std_error);
}

TEST_CASE("moment bound table on zline") {
    MeasuredGroup z = builtin_group("zline");
    BallIndex ball(z, 40);
    std::vector<MomentRow> k1 = moment_bound_check(z, {0, 2, 4, 8, 16}, 1, 20000, 5, ball, 1);
    CHECK(k1[0].skipped);  // t = 0 guarded
    for (size_t i = 1; i < k1.size(); ++i) {
        CHECK(!k1[i].skipped);
        CHECK(k1[i].ratio <= 1.0 + 1e-9);  // |X_t| <= t
    }
    // E|X_t|^2 = t exactly for the simple walk, so ratio = 1/t
    std::vector<MomentRow> k2 = moment_bound_check(z, {4, 8, 16}, 2, 40000, 6, ball, 1);
    for (const MomentRow& row : k2) {
        CHECK(row.n_censored == 0);
        CHECK(row.ratio ==
              doctest::Approx(1.0 / static_cast<double>(row.t)).epsilon(0.05));
    }
}

TEST_CASE("interval parsing") {
    RealInterval iv = RealInterval::parse("[-3,3)");
    CHECK(iv.contains(-3.0));
    CHECK(iv.contains(0.0));
    CHECK(!iv.contains(3.0));
    CHECK(RealInterval::parse("(0,inf)").contains(1e9));
    CHECK(!RealInterval::parse("(0,inf)").contains(0.0));
    CHECK_THROWS(RealInterval::parse("0,1"));
    CHECK_THROWS(RealInterval::parse("(1)"));
}

}  // TEST_SUITE
