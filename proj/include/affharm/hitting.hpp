#pragma once

#include "affharm/labeling.hpp"
#include "affharm/stats.hpp"
#include "affharm/walk.hpp"

namespace affharm {

// First-return distribution to H: support atoms with probabilities, plus
// whatever mass the estimator could not attribute (truncation or censoring).
struct HittingMeasure {
    struct Atom {
        AffineElement element;
        Rational p_exact;       // exact mode
        double p = 0.0;         // both modes
        int64_t count = 0;      // MC mode
    };
    std::vector<Atom> support;
    bool exact = false;
    double residual_mass = 0.0;
    Rational expected_tau_exact;  // exact mode only
};

struct HittingStats {
    EstimateReport tau_mean;
    LinearFit tau_tail;          // log-survival fit of tau_H
    int index = 0;
    bool pass = false;
};

// empirical E[tau_H] with an exponential-tail fit; passes when the mean sits
// within 3 std errors of the subgroup index and the fitted slope is negative
HittingStats hitting_time_stats(const MeasuredGroup& g, const CosetLabeling& labeling, int64_t n,
                                uint64_t seed, int workers = 0);

// exact first-return distribution by linear solve over the truncated
// element chain; the truncation is validated by mass conservation
HittingMeasure hitting_measure_exact(const MeasuredGroup& g, const CosetLabeling& labeling,
                                     size_t state_budget = 4096,
                                     double mass_tolerance = 1e-12);

// Monte Carlo hitting measure plus the word-length tail of X_tau (the
// smoothness diagnostic); elements beyond the ball radius only contribute
// to the right of the fitted window
struct SmoothnessDiagnostic {
    LinearFit word_length_tail;
    std::vector<int64_t> length_histogram;  // index = word length
    int64_t beyond_radius = 0;
    bool pass = false;
};

HittingMeasure hitting_measure_mc(const MeasuredGroup& g, const CosetLabeling& labeling, int64_t n,
                                  uint64_t seed, int workers = 0);

SmoothnessDiagnostic hitting_smoothness(const MeasuredGroup& g, const CosetLabeling& labeling,
                                        int64_t n, uint64_t seed, const BallIndex& ball,
                                        int workers = 0);

}  // namespace affharm
