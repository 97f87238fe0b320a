#pragma once

#include <functional>
#include <map>

#include "affharm/labeling.hpp"
#include "affharm/walk.hpp"

namespace affharm {

// One Monte Carlo evaluation of f_r(x) = r * Pr_x[|c(X_{sigma_r})| < thr],
// zeroed on the cutoff region r <= 2|rho(x)|.
struct HarmonicEstimate {
    AffineElement point;
    double r = 0.0;
    Rational threshold;
    double value = 0.0;
    double std_error = 0.0;
    int64_t n_samples = 0;
    int64_t n_censored = 0;
    bool cutoff_zero = false;
    uint64_t stream_seed = 0;  // derived stream family for this point
};

// Cached f-hat evaluation: the cache key is (point, r, threshold, seed), and
// each key owns a disjoint trajectory-stream family, so residual and
// seminorm computations can propagate errors as independent.
class HarmonicEvaluator {
public:
    HarmonicEvaluator(const MeasuredGroup& g, double r, Rational threshold, int64_t n,
                      uint64_t seed, int workers = 0);

    const HarmonicEstimate& at(const AffineElement& x);
    const MeasuredGroup& group() const { return g_; }
    double r() const { return r_; }
    const Rational& threshold() const { return thr_; }
    int64_t samples_per_point() const { return n_; }
    uint64_t seed() const { return seed_; }

private:
    const MeasuredGroup& g_;
    double r_;
    Rational thr_;
    int64_t n_;
    uint64_t seed_;
    int workers_;
    std::map<std::string, HarmonicEstimate> cache_;
};

// single evaluation; censored fraction above max_censored_fraction throws
HarmonicEstimate estimate_f(const MeasuredGroup& g, const AffineElement& x, double r,
                            const Rational& threshold, int64_t n, uint64_t seed, int workers = 0,
                            double max_censored_fraction = 1e-3);

// residual f(x) - sum_s mu(s) f(xs) with propagated standard error
struct ResidualReport {
    AffineElement point;
    double residual = 0.0;
    double propagated_se = 0.0;
    bool pass = false;  // |residual| <= 3 * propagated_se
    HarmonicEstimate center;
    std::vector<HarmonicEstimate> neighbors;
};
ResidualReport harmonicity_residual(HarmonicEvaluator& eval, const AffineElement& x);

// residual of an arbitrary (externally supplied) oracle, same formula
ResidualReport oracle_residual(const MeasuredGroup& g,
                               const std::function<HarmonicEstimate(const AffineElement&)>& oracle,
                               const AffineElement& x);

// harmonicity defect of rho itself: an exact rational multiple of log(base),
// identically zero for symmetric mu (machine-exact, no sampling)
Rational rho_residual_exact(const MeasuredGroup& g, const AffineElement& x);

// max |f| / radius^k over word-metric balls, for any evaluation oracle
struct SeminormPoint {
    int radius = 0;
    double max_scaled = 0.0;
    double se_at_argmax = 0.0;
    AffineElement argmax;
};
using HarmonicOracle = std::function<HarmonicEstimate(const AffineElement&)>;
std::vector<SeminormPoint> seminorm_profile(const HarmonicOracle& oracle, int k,
                                            const std::vector<int>& radii, const BallIndex& ball);
std::vector<SeminormPoint> seminorm_profile(HarmonicEvaluator& eval, int k,
                                            const std::vector<int>& radii, const BallIndex& ball);

// f-hat along an r-sweep with successive-3-sigma stabilization flags
struct StabilizationRow {
    double r = 0.0;
    double value = 0.0;
    double se = 0.0;
    bool within_3se_of_prev = true;
};
std::vector<StabilizationRow> f_stabilization(const MeasuredGroup& g, const AffineElement& x,
                                              const std::vector<double>& r_list,
                                              const Rational& threshold, int64_t n, uint64_t seed,
                                              int workers = 0);

// Pr_x[|c(X_{sigma_r}) - c(x)| > 2, exit right] decays like 1/r
struct DriftPoint {
    double r = 0.0;
    double prob = 0.0;
    double se = 0.0;
    int64_t n_events = 0;
};
struct DriftReport {
    std::vector<DriftPoint> points;
    LinearFit loglog;
    bool pass = false;  // slope in [-1.5, -0.5]
};
DriftReport c_drift_check(const MeasuredGroup& g, const AffineElement& x,
                          const std::vector<double>& r_list, const Rational& diff_threshold,
                          int64_t n, uint64_t seed, int workers = 0);

// small-c probability conditioned on the separated-visit count MS
struct MsConditionalReport {
    double q = 0.0;
    std::vector<MsBinRow> bins;
    std::vector<int> dropped_bins;  // fewer than min_bin_count samples
    LinearFit slope_fit;            // log conditional probability vs n
    bool pass = false;              // fitted slope < 0
};
// the smallest admissible separated-set cutoff forced by the designated z,
// log(3 / (|c(z)| (1 - sum_{k>=1} e^{-k}))); callers stay strictly above it
double q_threshold(const MeasuredGroup& g);
MsConditionalReport conditional_small_c_check(const MeasuredGroup& g, const AffineElement& x,
                                              double r, double q, const Rational& threshold,
                                              int64_t n, uint64_t seed, int workers = 0,
                                              int64_t min_bin_count = 200);

// conjugated-orbit evaluation matrix and its numerical rank
struct OrbitReport {
    int N = 0;  // conjugation exponent, minimal with |l^N|(|l^N|-1)|c(z)| > 5
    std::vector<AffineElement> y;                 // y_n = x^{Nn} z x^{-Nn}
    std::vector<std::vector<double>> matrix;      // rows n; cols (m, j)
    std::vector<std::vector<double>> matrix_se;
    std::vector<LinearFit> diagonal_growth;       // f-hat at y_n^{-1}y_n x^{-j} vs j
    double max_offdiagonal = 0.0;
    bool offdiag_c_exceeds_5 = false;  // exact arithmetic on every off-diagonal point
    int rank = 0;
    double sigma_max = 0.0;
    bool pass = false;  // rank == n_max and the exact separation holds
};
OrbitReport orbit_independence(const MeasuredGroup& g, int n_max, int j_max, double r,
                               const Rational& threshold, int64_t n, uint64_t seed,
                               int workers = 0);

// harmonic extension across a finite-index subgroup: E_x[ftilde(X_{tau_H})]
HarmonicEstimate extend_harmonic(const MeasuredGroup& g, const CosetLabeling& labeling,
                                 const std::function<double(const AffineElement&)>& ftilde,
                                 const AffineElement& x, int64_t n, uint64_t seed,
                                 int workers = 0);

}  // namespace affharm
