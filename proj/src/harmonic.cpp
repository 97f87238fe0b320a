#include "affharm/harmonic.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "affharm/rng.hpp"

namespace affharm {

namespace {

uint64_t point_stream_seed(uint64_t seed, const AffineElement& x, double r, const Rational& thr) {
    std::string key = x.to_string();
    uint64_t h = fnv1a64(key.data(), key.size());
    uint64_t rbits;
    static_assert(sizeof rbits == sizeof r);
    std::memcpy(&rbits, &r, sizeof rbits);
    h ^= SplitMix64::mix(rbits);
    std::string ts = thr.to_string();
    h ^= fnv1a64(ts.data(), ts.size()) * 0x9e3779b97f4a7c15ULL;
    return derive_seed(seed, h);
}

}  // namespace

HarmonicEstimate estimate_f(const MeasuredGroup& g, const AffineElement& x, double r,
                            const Rational& threshold, int64_t n, uint64_t seed, int workers,
                            double max_censored_fraction) {
    if (!g.x_index())
        throw VirtuallyAbelianError(
            "estimate_f needs a normalized presentation with an expanding element");
    if (threshold.sign() <= 0) throw std::invalid_argument("estimate_f threshold must be > 0");
    HarmonicEstimate est;
    est.point = x;
    est.r = r;
    est.threshold = threshold;
    est.n_samples = n;
    est.stream_seed = point_stream_seed(seed, x, r, threshold);

    // the cutoff indicator 1{r > 2|rho(x)|}
    double rho_x = rho(x).to_double();
    if (!(r > 2.0 * std::fabs(rho_x) + 1e-12)) {
        est.cutoff_zero = true;
        est.n_samples = 0;
        return est;
    }

    WalkConfig cfg;
    cfg.group = &g;
    cfg.start = x;
    cfg.seed = est.stream_seed;
    cfg.rule = SigmaStop{r};
    cfg.observable = Observable::Rho;
    cfg.workers = workers;
    EstimateReport rep = ensemble_c_small(cfg, n, threshold);
    if (static_cast<double>(rep.n_censored) >
        max_censored_fraction * static_cast<double>(n))
        throw std::runtime_error("estimate_f: censored fraction " +
                                 std::to_string(static_cast<double>(rep.n_censored) /
                                                static_cast<double>(n)) +
                                 " exceeds " + std::to_string(max_censored_fraction));
    est.value = r * rep.estimate;
    est.std_error = r * rep.std_error;
    est.n_censored = rep.n_censored;
    return est;
}

HarmonicEvaluator::HarmonicEvaluator(const MeasuredGroup& g, double r, Rational threshold,
                                     int64_t n, uint64_t seed, int workers)
    : g_(g), r_(r), thr_(std::move(threshold)), n_(n), seed_(seed), workers_(workers) {}

const HarmonicEstimate& HarmonicEvaluator::at(const AffineElement& x) {
    std::string key = x.to_string();
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    HarmonicEstimate est = estimate_f(g_, x, r_, thr_, n_, seed_, workers_);
    return cache_.emplace(std::move(key), std::move(est)).first->second;
}

namespace {

ResidualReport residual_impl(const MeasuredGroup& g,
                             const std::function<HarmonicEstimate(const AffineElement&)>& oracle,
                             const AffineElement& x) {
    ResidualReport rep;
    rep.point = x;
    rep.center = oracle(x);
    double acc = rep.center.value;
    double var = rep.center.std_error * rep.center.std_error;
    for (const auto& e : g.support()) {
        HarmonicEstimate nb = oracle(x * e.element);
        double w = e.weight.to_double();
        acc -= w * nb.value;
        var += w * w * nb.std_error * nb.std_error;
        rep.neighbors.push_back(std::move(nb));
    }
    rep.residual = acc;
    rep.propagated_se = std::sqrt(var);
    rep.pass = std::fabs(rep.residual) <= 3.0 * rep.propagated_se;
    return rep;
}

}  // namespace

ResidualReport harmonicity_residual(HarmonicEvaluator& eval, const AffineElement& x) {
    return residual_impl(eval.group(),
                         [&eval](const AffineElement& p) { return eval.at(p); }, x);
}

ResidualReport oracle_residual(const MeasuredGroup& g,
                               const std::function<HarmonicEstimate(const AffineElement&)>& oracle,
                               const AffineElement& x) {
    return residual_impl(g, oracle, x);
}

Rational rho_residual_exact(const MeasuredGroup& g, const AffineElement& x) {
    // rho(xs) = rho(x) + rho(s) exactly; the residual collapses to
    // -sum_s mu(s) k(s) in units of log(base), which symmetry kills
    LogAbs rx = rho(x);
    if (!rx.is_exact()) throw std::invalid_argument("rho_residual_exact needs an exact rho(x)");
    uint32_t base = rx.base;
    Rational acc(0);
    for (const auto& e : g.support()) {
        LogAbs rs = rho(x * e.element);
        if (!rs.is_exact())
            throw std::invalid_argument("rho_residual_exact needs exact rho on the ball");
        if (rs.k != 0 && rx.k != 0 && rs.base != base && base != 0)
            throw std::invalid_argument("rho_residual_exact: mixed bases");
        if (base == 0) base = rs.base;
        acc = acc + e.weight * Rational(rs.k);
    }
    return Rational(rx.k) - acc;
}

std::vector<SeminormPoint> seminorm_profile(const HarmonicOracle& oracle, int k,
                                            const std::vector<int>& radii,
                                            const BallIndex& ball) {
    std::vector<SeminormPoint> out;
    for (int radius : radii) {
        if (radius > ball.radius())
            throw BallBudgetError("seminorm radius exceeds the prepared ball");
        SeminormPoint pt;
        pt.radius = radius;
        double best = -1.0;
        for (const AffineElement& x : ball.elements()) {
            if (*ball.distance(x) > radius) continue;
            HarmonicEstimate est = oracle(x);
            double scaled = std::fabs(est.value) / std::pow(static_cast<double>(radius), k);
            if (scaled > best) {
                best = scaled;
                pt.max_scaled = scaled;
                pt.se_at_argmax = est.std_error / std::pow(static_cast<double>(radius), k);
                pt.argmax = x;
            }
        }
        out.push_back(std::move(pt));
    }
    return out;
}

std::vector<SeminormPoint> seminorm_profile(HarmonicEvaluator& eval, int k,
                                            const std::vector<int>& radii,
                                            const BallIndex& ball) {
    return seminorm_profile([&eval](const AffineElement& x) { return eval.at(x); }, k, radii,
                            ball);
}

std::vector<StabilizationRow> f_stabilization(const MeasuredGroup& g, const AffineElement& x,
                                              const std::vector<double>& r_list,
                                              const Rational& threshold, int64_t n, uint64_t seed,
                                              int workers) {
    std::vector<StabilizationRow> rows;
    for (double r : r_list) {
        HarmonicEstimate est = estimate_f(g, x, r, threshold, n, seed, workers);
        StabilizationRow row{r, est.value, est.std_error, true};
        if (!rows.empty()) {
            double gap = std::fabs(row.value - rows.back().value);
            row.within_3se_of_prev = gap <= 3.0 * (row.se + rows.back().se);
        }
        rows.push_back(row);
    }
    return rows;
}

DriftReport c_drift_check(const MeasuredGroup& g, const AffineElement& x,
                          const std::vector<double>& r_list, const Rational& diff_threshold,
                          int64_t n, uint64_t seed, int workers) {
    double rho_x = rho(x).to_double();
    DriftReport rep;
    std::vector<double> lx, ly;
    for (double r : r_list) {
        if (!(rho_x > 0 && rho_x < r))
            throw std::invalid_argument("c_drift_check needs 0 < rho(x) < r");
        WalkConfig cfg;
        cfg.group = &g;
        cfg.start = x;
        cfg.seed = derive_seed(seed, static_cast<uint64_t>(r));
        cfg.rule = WindowStop{0.0, r};
        cfg.observable = Observable::Rho;
        cfg.workers = workers;
        EnsembleSpec spec;
        Rational thr = diff_threshold;
        spec.value = [thr](const WalkFinal& f) {
            return (f.exit_side() > 0 && f.c_diff_greater(thr)) ? 1.0 : 0.0;
        };
        EstimateReport er = run_ensemble(cfg, n, spec);
        DriftPoint pt{r, er.estimate, er.std_error,
                      static_cast<int64_t>(er.estimate * static_cast<double>(n) + 0.5)};
        rep.points.push_back(pt);
        if (pt.prob > 0) {
            lx.push_back(std::log(r));
            ly.push_back(std::log(pt.prob));
        }
    }
    rep.loglog = linear_fit(lx, ly);
    rep.pass = lx.size() >= 2 && rep.loglog.slope >= -1.5 && rep.loglog.slope <= -0.5;
    return rep;
}

double q_threshold(const MeasuredGroup& g) {
    if (!g.z_index())
        throw std::invalid_argument("q_threshold needs a designated z with c(z) != 0");
    const AffineElement& z = g.support()[*g.z_index()].element;
    double cz = abs_as_rational(z.c()).to_double();
    // sum_{k>=1} e^{-k} = 1/(e-1)
    double tail = 1.0 / (std::exp(1.0) - 1.0);
    return std::log(3.0 / (cz * (1.0 - tail)));
}

MsConditionalReport conditional_small_c_check(const MeasuredGroup& g, const AffineElement& x,
                                              double r, double q, const Rational& threshold,
                                              int64_t n, uint64_t seed, int workers,
                                              int64_t min_bin_count) {
    MsConditionalReport rep;
    rep.q = q > 0 ? q : q_threshold(g) + 0.01;
    WalkConfig cfg;
    cfg.group = &g;
    cfg.start = x;
    cfg.seed = seed;
    cfg.rule = SigmaStop{r};
    cfg.observable = Observable::Rho;
    cfg.workers = workers;
    std::vector<MsBinRow> bins = ensemble_ms_conditional(cfg, n, rep.q, threshold);
    std::vector<double> xs, ys;
    for (const MsBinRow& b : bins) {
        if (b.count < min_bin_count) {
            if (b.count > 0) rep.dropped_bins.push_back(b.ms);
            continue;
        }
        rep.bins.push_back(b);
        if (b.small_c > 0) {
            xs.push_back(static_cast<double>(b.ms));
            ys.push_back(std::log(static_cast<double>(b.small_c) / static_cast<double>(b.count)));
        }
    }
    rep.slope_fit = linear_fit(xs, ys);
    rep.pass = xs.size() >= 3 && rep.slope_fit.slope < 0;
    return rep;
}

OrbitReport orbit_independence(const MeasuredGroup& g, int n_max, int j_max, double r,
                               const Rational& threshold, int64_t n, uint64_t seed, int workers) {
    if (!g.x_index() || !g.z_index())
        throw std::invalid_argument("orbit_independence needs designated x and z elements");
    const AffineElement& xel = g.support()[*g.x_index()].element;
    const AffineElement& zel = g.support()[*g.z_index()].element;
    OrbitReport rep;

    // minimal N with |lambda^N| (|lambda^N| - 1) |c(z)| > 5, exact arithmetic
    Rational lam_abs = abs_as_rational(xel.lambda());
    Rational cz_abs = abs_as_rational(zel.c());
    Rational five(5);
    Rational pw(1);
    for (int N = 1; N <= 64; ++N) {
        pw = pw * lam_abs;
        if (pw * (pw - Rational(1)) * cz_abs > five) {
            rep.N = N;
            break;
        }
    }
    if (rep.N == 0) throw std::runtime_error("orbit_independence: no usable N <= 64");

    AffineElement xN = AffineElement::identity(g.place());
    for (int i = 0; i < rep.N; ++i) xN = xN * xel;
    AffineElement xinv = xel.inverse();

    std::vector<AffineElement> conj_pow;  // x^{Nn} for n = 0..n_max
    conj_pow.push_back(AffineElement::identity(g.place()));
    for (int i = 1; i <= n_max; ++i) conj_pow.push_back(conj_pow.back() * xN);
    for (int i = 1; i <= n_max; ++i)
        rep.y.push_back(conj_pow[static_cast<size_t>(i)] * zel *
                        conj_pow[static_cast<size_t>(i)].inverse());

    HarmonicEvaluator eval(g, r, threshold, n, seed, workers);
    rep.offdiag_c_exceeds_5 = true;
    for (int ni = 1; ni <= n_max; ++ni) {
        std::vector<double> row, row_se;
        std::vector<double> diag_j, diag_v;
        AffineElement yn_inv = rep.y[static_cast<size_t>(ni - 1)].inverse();
        for (int mi = 1; mi <= n_max; ++mi) {
            AffineElement base = yn_inv * rep.y[static_cast<size_t>(mi - 1)];
            AffineElement pt = base;
            for (int j = 0; j <= j_max; ++j) {
                if (j > 0) pt = pt * xinv;
                if (mi != ni && abs_compare(pt.c(), five) <= 0) rep.offdiag_c_exceeds_5 = false;
                const HarmonicEstimate& est = eval.at(pt);
                row.push_back(est.value);
                row_se.push_back(est.std_error);
                if (mi == ni) {
                    diag_j.push_back(j);
                    diag_v.push_back(est.value);
                } else {
                    rep.max_offdiagonal = std::max(rep.max_offdiagonal, est.value);
                }
            }
        }
        rep.diagonal_growth.push_back(linear_fit(diag_j, diag_v));
        rep.matrix.push_back(std::move(row));
        rep.matrix_se.push_back(std::move(row_se));
    }
    rep.rank = numerical_rank(rep.matrix, 1e-6);
    // sigma_max for the report
    std::vector<std::vector<double>> gram(rep.matrix.size(),
                                          std::vector<double>(rep.matrix.size(), 0.0));
    for (size_t i = 0; i < rep.matrix.size(); ++i)
        for (size_t j = 0; j < rep.matrix.size(); ++j) {
            double s = 0;
            for (size_t k = 0; k < rep.matrix[i].size(); ++k)
                s += rep.matrix[i][k] * rep.matrix[j][k];
            gram[i][j] = s;
        }
    std::vector<double> eig = symmetric_eigenvalues(std::move(gram));
    rep.sigma_max = eig.empty() ? 0.0 : std::sqrt(std::max(0.0, eig.back()));
    rep.pass = rep.rank == n_max && rep.offdiag_c_exceeds_5;
    return rep;
}

HarmonicEstimate extend_harmonic(const MeasuredGroup& g, const CosetLabeling& labeling,
                                 const std::function<double(const AffineElement&)>& ftilde,
                                 const AffineElement& x, int64_t n, uint64_t seed, int workers) {
    WalkConfig cfg;
    cfg.group = &g;
    cfg.start = x;
    cfg.seed = seed;
    cfg.rule = TauSubgroupStop{&labeling};
    cfg.observable = g.virtually_abelian() ? Observable::CValue : Observable::Rho;
    cfg.workers = workers;
    EnsembleSpec spec;
    spec.value = [&ftilde](const WalkFinal& f) { return ftilde(f.element()); };
    EstimateReport rep = run_ensemble(cfg, n, spec);
    HarmonicEstimate est;
    est.point = x;
    est.value = rep.estimate;
    est.std_error = rep.std_error;
    est.n_samples = rep.n_samples;
    est.n_censored = rep.n_censored;
    est.stream_seed = seed;
    return est;
}

}  // namespace affharm
