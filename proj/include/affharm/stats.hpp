#pragma once

#include <cstdint>
#include <vector>

namespace affharm {

// Monte Carlo point estimate with provenance. Estimates are invariant under
// the worker count by construction (ordered folds over per-trajectory
// values); worker_count is runtime metadata and is deliberately left out of
// the canonical serialized reports.
struct EstimateReport {
    double estimate = 0.0;
    double std_error = 0.0;
    int64_t n_samples = 0;
    int64_t n_censored = 0;
    double confidence = 0.95;
    uint64_t seed = 0;
    int worker_count = 1;
};

// mean and standard error folded in index order
EstimateReport summarize(const std::vector<double>& values, uint64_t seed, int workers,
                         int64_t n_censored = 0);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    size_t n_points = 0;
};

LinearFit linear_fit(const std::vector<double>& xs, const std::vector<double>& ys);

// survival curve S(t) = #{samples > t}/n on the distinct observed values
struct SurvivalCurve {
    std::vector<double> t;
    std::vector<double> log_survival;
};

SurvivalCurve survival_curve(std::vector<int64_t> samples);

// least-squares line through the tail of a log-survival curve, dropping the
// leading fraction (the lemmas are asymptotic; the head is transient)
LinearFit tail_fit(const SurvivalCurve& curve, double drop_head_fraction = 0.2);

// maximum size of a subset with pairwise gaps >= 1; sorted greedy sweep,
// optimal on the line
int max_separated(std::vector<double> points);

// eigenvalues of a small symmetric matrix (cyclic Jacobi), ascending
std::vector<double> symmetric_eigenvalues(std::vector<std::vector<double>> m);

// numerical rank of a rows x cols matrix: count of singular values above
// tol_rel * sigma_max
int numerical_rank(const std::vector<std::vector<double>>& m, double tol_rel);

}  // namespace affharm
