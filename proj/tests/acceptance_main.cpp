// Acceptance suite: one pass/fail line per criterion, exit code = number of
// failures. Every tolerance is pinned here, in code. The --quick flag runs a
// reduced-sample smoke of the same structure for development; the registered
// ctest entry runs the full configuration.

#include <omp.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <json.hpp>
#include <string>
#include <vector>

#include "affharm/harmonic.hpp"
#include "affharm/hitting.hpp"
#include "affharm/line_estimates.hpp"
#include "affharm/walk.hpp"

using namespace affharm;
using ordered_json = nlohmann::ordered_json;

namespace {

double g_scale = 1.0;

int64_t S(int64_t n) {
    int64_t scaled = static_cast<int64_t>(static_cast<double>(n) * g_scale);
    return std::max<int64_t>(scaled, 500);
}

struct Result {
    bool pass = false;
    std::string detail;
    ordered_json report;
};

// ---------------------------------------------------------------- criteria

// 1. MC gambler's ruin vs the exact rational 11/18
Result criterion1(int workers) {
    Result res;
    LineConfig cfg;
    cfg.dist = StepDistribution::parse("unit");
    cfg.y = 2;
    cfg.n_samples = S(100000);
    cfg.seed = 101;
    cfg.workers = workers;
    LemmaVerdict v = verify_green_function(cfg, {8});
    Rational exact = exact_exit_above_unit(-10, 6, 0);
    bool frozen = exact == Rational(BigInt(11), BigInt(18));
    double emp = v.series[0].ys[0], se = v.series[0].errs[0];
    double gap = std::fabs(emp - exact.to_double());
    res.pass = frozen && gap <= 3.0 * se;
    char buf[160];
    snprintf(buf, sizeof buf, "empirical %.5f vs exact 11/18 = %.5f (|gap| %.5f <= 3se %.5f)",
             emp, exact.to_double(), gap, 3.0 * se);
    res.detail = buf;
    res.report = ordered_json{{"criterion", 1},
                              {"empirical", emp},
                              {"std_error", se},
                              {"exact", exact.to_string()},
                              {"pass", res.pass}};
    return res;
}

// 2. E[sigma_r]/r^2 flat within 20% of the exact values; exponential tails
Result criterion2(int workers) {
    Result res;
    LineConfig cfg;
    cfg.dist = StepDistribution::parse("unit");
    cfg.y = 0;
    cfg.n_samples = S(100000);
    cfg.seed = 202;
    cfg.workers = workers;
    LemmaVerdict v = verify_exit_time(cfg, {8, 16, 32, 64});
    res.pass = v.pass;
    std::string ratios;
    for (double y : v.series[0].ys) ratios += std::to_string(y).substr(0, 6) + " ";
    res.detail = "E[sigma_r]/r^2 = " + ratios + (v.pass ? "(flat, tails linear)" : "(FAILED)");
    res.report = ordered_json{{"criterion", 2}, {"ratios", v.series[0].ys},
                              {"exact", v.series[1].ys}, {"pass", v.pass}};
    for (const auto& note : v.notes) res.detail += " | " + note;
    return res;
}

// 3. zline/parity hitting measure: exact rationals plus MC agreement
Result criterion3(int workers) {
    Result res;
    MeasuredGroup z = builtin_group("zline");
    CosetLabeling par = CosetLabeling::zline_parity(z);
    HittingMeasure exact = hitting_measure_exact(z, par);
    bool ok = exact.expected_tau_exact == Rational(2) && exact.support.size() == 3;
    std::map<std::string, Rational> expect = {
        {"(0; 1)", Rational(BigInt(1), BigInt(2))},
        {"(2; 1)", Rational(BigInt(1), BigInt(4))},
        {"(-2; 1)", Rational(BigInt(1), BigInt(4))}};
    for (const auto& atom : exact.support) {
        auto it = expect.find(atom.element.to_string());
        ok = ok && it != expect.end() && it->second == atom.p_exact;
    }
    int64_t n = S(100000);
    HittingMeasure mc = hitting_measure_mc(z, par, n, 303, workers);
    double worst = 0;
    for (const auto& atom : exact.support) {
        double pe = atom.p_exact.to_double();
        double se = std::sqrt(pe * (1 - pe) / static_cast<double>(n));
        double pm = 0;
        for (const auto& m : mc.support)
            if (m.element == atom.element) pm = m.p;
        worst = std::max(worst, std::fabs(pm - pe) / se);
        ok = ok && std::fabs(pm - pe) <= 3.0 * se;
    }
    res.pass = ok;
    char buf[160];
    snprintf(buf, sizeof buf,
             "exact mu_H = {1/2, 1/4, 1/4}, E[tau]=2; MC worst deviation %.2f se", worst);
    res.detail = buf;
    ordered_json support = ordered_json::array();
    for (const auto& atom : exact.support)
        support.push_back({{"element", atom.element.to_string()}, {"p", atom.p_exact.to_string()}});
    ordered_json mcj = ordered_json::array();
    for (const auto& atom : mc.support)
        mcj.push_back({{"element", atom.element.to_string()}, {"p", atom.p}});
    res.report = ordered_json{{"criterion", 3}, {"exact_support", support},
                              {"expected_tau", exact.expected_tau_exact.to_string()},
                              {"mc_support", mcj}, {"pass", ok}};
    return res;
}

// 4. smoothness propagates to the bs12 mod-2 hitting measure
Result criterion4(int workers) {
    Result res;
    MeasuredGroup bs = builtin_group("bs12");
    CosetLabeling mod2 = CosetLabeling::lambda_exp_mod(bs, 2);
    BallIndex ball(bs, 12);
    SmoothnessDiagnostic sd = hitting_smoothness(bs, mod2, S(100000), 404, ball, workers);
    res.pass = sd.pass;
    char buf[160];
    snprintf(buf, sizeof buf, "word-length log-survival slope %.4f (R^2 %.3f), %lld beyond ball",
             sd.word_length_tail.slope, sd.word_length_tail.r_squared,
             static_cast<long long>(sd.beyond_radius));
    res.detail = buf;
    res.report = ordered_json{{"criterion", 4},
                              {"slope", sd.word_length_tail.slope},
                              {"r_squared", sd.word_length_tail.r_squared},
                              {"histogram", sd.length_histogram},
                              {"beyond", sd.beyond_radius},
                              {"pass", sd.pass}};
    return res;
}

// 5. harmonicity of f-hat at the identity and 4 random ball points; the
//    exact function rho has residual exactly zero
Result criterion5(int workers) {
    Result res;
    MeasuredGroup bs = builtin_group("bs12");
    BallIndex ball(bs, 3);
    // 4 seeded draws from the radius-3 ball
    SplitMix64 pick(505);
    std::vector<AffineElement> centers{AffineElement::identity(bs.place())};
    const auto& elems = ball.elements();
    while (centers.size() < 5) {
        const AffineElement& cand = elems[pick.next_below(static_cast<uint32_t>(elems.size()))];
        bool dup = false;
        for (const auto& c : centers) dup = dup || c == cand;
        if (!dup) centers.push_back(cand);
    }
    HarmonicEvaluator eval(bs, 64.0, Rational(3), S(1000000), 515, workers);
    ordered_json rows = ordered_json::array();
    bool ok = true;
    std::string detail;
    for (const AffineElement& c : centers) {
        ResidualReport rr = harmonicity_residual(eval, c);
        Rational exact_rho = rho_residual_exact(bs, c);
        bool point_ok = rr.pass && exact_rho.is_zero();
        ok = ok && point_ok;
        rows.push_back(ordered_json{{"point", c.to_string()},
                                    {"residual", rr.residual},
                                    {"propagated_se", rr.propagated_se},
                                    {"rho_residual", exact_rho.to_string()},
                                    {"pass", point_ok}});
        char buf[96];
        snprintf(buf, sizeof buf, "%s: %.4f/%.4f ", c.to_string().c_str(), rr.residual,
                 3.0 * rr.propagated_se);
        detail += buf;
    }
    res.pass = ok;
    res.detail = "residual vs 3se at each point: " + detail + "; rho residual exactly 0";
    res.report = ordered_json{{"criterion", 5}, {"points", rows}, {"pass", ok}};
    return res;
}

// 6. linear growth and non-constancy of f-hat, bounded k=1 seminorm band
Result criterion6(int workers) {
    Result res;
    MeasuredGroup bs = builtin_group("bs12");
    std::vector<double> ns, vals;
    ordered_json growth = ordered_json::array();
    for (int n = 1; n <= 8; ++n) {
        AffineElement x = bs.evaluate("a^-" + std::to_string(n));
        HarmonicEstimate est = estimate_f(bs, x, 128.0, Rational(3), S(150000), 606, workers);
        ns.push_back(n);
        vals.push_back(est.value);
        growth.push_back(ordered_json{{"n", n}, {"value", est.value}, {"se", est.std_error}});
    }
    LinearFit fit = linear_fit(ns, vals);
    bool growth_ok = fit.slope > 0 && fit.r_squared > 0.9;

    BallIndex ball(bs, 8);
    HarmonicEvaluator eval(bs, 64.0, Rational(3), S(1500), 616, workers);
    std::vector<SeminormPoint> prof = seminorm_profile(eval, 1, {4, 6, 8}, ball);
    double lo = prof[0].max_scaled, hi = prof[0].max_scaled;
    ordered_json profile = ordered_json::array();
    for (const auto& p : prof) {
        lo = std::min(lo, p.max_scaled);
        hi = std::max(hi, p.max_scaled);
        profile.push_back(ordered_json{{"radius", p.radius}, {"max_scaled", p.max_scaled}});
    }
    bool band_ok = hi <= 3.0 * lo;
    res.pass = growth_ok && band_ok;
    char buf[200];
    snprintf(buf, sizeof buf,
             "growth slope %.3f R^2 %.3f; k=1 seminorm band [%.3f, %.3f] ratio %.2f", fit.slope,
             fit.r_squared, lo, hi, hi / lo);
    res.detail = buf;
    res.report = ordered_json{{"criterion", 6},    {"growth", growth},
                              {"slope", fit.slope}, {"r_squared", fit.r_squared},
                              {"profile", profile}, {"pass", res.pass}};
    return res;
}

// 7. 1/r decay of the drift event and of the small-c probability at |c| > 5
Result criterion7(int workers) {
    Result res;
    MeasuredGroup bs = builtin_group("bs12");
    AffineElement x = bs.evaluate("a^-3");  // rho = 3 log 2
    DriftReport drift =
        c_drift_check(bs, x, {16, 32, 64}, Rational(2), S(1000000), 707, workers);

    // |c| > 5 and rho = 0: Pr[|c(X_sigma_r)| < 3] should scale like 1/r
    AffineElement far(ValuedScalar(bs.place(), Rational(8)), ValuedScalar::one(bs.place()));
    std::vector<double> lx, ly;
    ordered_json small_c = ordered_json::array();
    for (double r : {16.0, 32.0, 64.0}) {
        WalkConfig cfg;
        cfg.group = &bs;
        cfg.start = far;
        cfg.seed = derive_seed(717, static_cast<uint64_t>(r));
        cfg.rule = SigmaStop{r};
        cfg.workers = workers;
        EstimateReport rep = ensemble_c_small(cfg, S(1000000), Rational(3));
        small_c.push_back(ordered_json{{"r", r}, {"prob", rep.estimate}, {"se", rep.std_error}});
        if (rep.estimate > 0) {
            lx.push_back(std::log(r));
            ly.push_back(std::log(rep.estimate));
        }
    }
    LinearFit far_fit = linear_fit(lx, ly);
    bool far_ok = lx.size() == 3 && far_fit.slope >= -1.5 && far_fit.slope <= -0.5;
    res.pass = drift.pass && far_ok;
    char buf[160];
    snprintf(buf, sizeof buf, "c-drift log-log slope %.3f; small-c at |c|=8 slope %.3f",
             drift.loglog.slope, far_fit.slope);
    res.detail = buf;
    ordered_json drift_pts = ordered_json::array();
    for (const auto& p : drift.points)
        drift_pts.push_back(ordered_json{{"r", p.r}, {"prob", p.prob}, {"se", p.se}});
    res.report = ordered_json{{"criterion", 7},
                              {"drift", drift_pts},
                              {"drift_slope", drift.loglog.slope},
                              {"small_c", small_c},
                              {"small_c_slope", far_fit.slope},
                              {"pass", res.pass}};
    return res;
}

// 8. orbit evaluation matrix has full numerical rank; exact separation
Result criterion8(int workers) {
    Result res;
    MeasuredGroup bs = builtin_group("bs12");
    OrbitReport rep = orbit_independence(bs, 3, 12, 64.0, Rational(3), S(30000), 808, workers);
    // off-diagonal points satisfy |c| >= 12 > 5 exactly
    bool sep12 = true;
    AffineElement xel = bs.support()[*bs.x_index()].element;
    AffineElement xinv = xel.inverse();
    for (int n = 1; n <= 3; ++n) {
        for (int m = 1; m <= 3; ++m) {
            if (n == m) continue;
            AffineElement pt = rep.y[static_cast<size_t>(n - 1)].inverse() *
                               rep.y[static_cast<size_t>(m - 1)];
            for (int j = 0; j <= 12; ++j) {
                if (j > 0) pt = pt * xinv;
                sep12 = sep12 && abs_compare(pt.c(), Rational(12)) >= 0;
            }
        }
    }
    res.pass = rep.rank == 3 && rep.offdiag_c_exceeds_5 && sep12;
    char buf[160];
    snprintf(buf, sizeof buf, "rank %d of 3 (sigma_max %.2f); off-diagonal |c| >= 12: %s",
             rep.rank, rep.sigma_max, sep12 ? "exact" : "VIOLATED");
    res.detail = buf;
    res.report = ordered_json{{"criterion", 8},
                              {"rank", rep.rank},
                              {"sigma_max", rep.sigma_max},
                              {"matrix", rep.matrix},
                              {"offdiag_c_exceeds_5", rep.offdiag_c_exceeds_5},
                              {"offdiag_c_at_least_12", sep12},
                              {"pass", res.pass}};
    return res;
}

// 9. separated-set lemma decay plus the greedy == brute-force oracle
Result criterion9(int workers) {
    Result res;
    LineConfig cfg;
    cfg.dist = StepDistribution::parse("unit");
    cfg.y = 0;
    cfg.n_samples = S(100000);
    cfg.seed = 909;
    cfg.workers = workers;
    LemmaVerdict v = verify_msep(cfg, 1.0, {16, 32, 64}, 2);

    // greedy equals exhaustive subset search on 500 random point sets
    SplitMix64 rng(919);
    bool greedy_ok = true;
    for (int trial = 0; trial < 500 && greedy_ok; ++trial) {
        size_t n = rng.next_below(16);
        std::vector<double> pts;
        for (size_t i = 0; i < n; ++i) pts.push_back(rng.next_double() * 8.0 - 4.0);
        int brute = 0;
        for (size_t mask = 0; mask < (size_t{1} << n); ++mask) {
            bool sep = true;
            int size = 0;
            for (size_t i = 0; i < n && sep; ++i) {
                if (!(mask >> i & 1)) continue;
                ++size;
                for (size_t j = i + 1; j < n && sep; ++j)
                    if ((mask >> j & 1) && std::fabs(pts[i] - pts[j]) < 1.0) sep = false;
            }
            if (sep && size > brute) brute = size;
        }
        greedy_ok = max_separated_points(pts) == brute;
    }
    res.pass = v.pass && greedy_ok;
    std::string slopes;
    for (const auto& [k, val] : v.metrics)
        if (k.rfind("loglog", 0) == 0) slopes += k + "=" + std::to_string(val).substr(0, 6) + " ";
    res.detail = slopes + "; greedy==brute on 500 sets: " + (greedy_ok ? "yes" : "NO");
    res.report = ordered_json{{"criterion", 9}, {"verdict_pass", v.pass},
                              {"greedy_matches_bruteforce", greedy_ok}, {"pass", res.pass}};
    for (const auto& [k, val] : v.metrics) res.report[k] = val;
    return res;
}

}  // namespace

int main(int argc, char** argv) {
    bool quick = false;
    for (int i = 1; i < argc; ++i)
        if (std::strcmp(argv[i], "--quick") == 0) quick = true;
    if (quick) {
        g_scale = 0.02;
        printf("[quick smoke mode: reduced samples, NOT the acceptance gate]\n");
    }

    using Fn = std::function<Result(int)>;
    std::vector<std::pair<std::string, Fn>> criteria = {
        {"exact-oracle agreement (gambler's ruin 11/18)", criterion1},
        {"exit-time law E[sigma_r]/r^2", criterion2},
        {"hitting measure exactness (zline/parity)", criterion3},
        {"smoothness propagation (bs12 mod-2)", criterion4},
        {"harmonicity of f-hat at 5 points + exact rho", criterion5},
        {"linear growth, non-constancy, seminorm band", criterion6},
        {"1/r decay (c-drift and |c|>5 small-c)", criterion7},
        {"orbit Gram rank 3 + exact separation", criterion8},
        {"separated-set lemma + greedy oracle", criterion9},
    };

    int w1 = omp_get_max_threads();
    int w2 = w1 > 1 ? w1 - 1 : 2;

    int failures = 0;
    std::vector<std::string> first_reports;
    for (size_t i = 0; i < criteria.size(); ++i) {
        Result r = criteria[i].second(w1);
        first_reports.push_back(r.report.dump());
        printf("[%s] criterion %zu: %s — %s\n", r.pass ? "PASS" : "FAIL", i + 1,
               criteria[i].first.c_str(), r.detail.c_str());
        fflush(stdout);
        failures += r.pass ? 0 : 1;
    }

    // 10. reproducibility: rerun every criterion at a different worker count
    // and demand byte-identical reports
    bool repro = true;
    std::string repro_detail;
    for (size_t i = 0; i < criteria.size(); ++i) {
        Result again = criteria[i].second(w2);
        if (again.report.dump() != first_reports[i]) {
            repro = false;
            repro_detail += " criterion " + std::to_string(i + 1) + " differs;";
        }
    }
    printf("[%s] criterion 10: reports byte-identical across runs and worker counts (%d vs %d)%s\n",
           repro ? "PASS" : "FAIL", w1, w2, repro_detail.c_str());
    failures += repro ? 0 : 1;

    printf("%d/10 criteria passed\n", 10 - failures);
    return failures;
}
