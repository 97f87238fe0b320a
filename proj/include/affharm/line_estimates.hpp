#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "affharm/rational.hpp"
#include "affharm/rng.hpp"
#include "affharm/stats.hpp"

namespace affharm {

// Integer-valued symmetric mean-zero step laws with exponential tails.
struct StepDistribution {
    enum class Kind { Unit, UniformK, SymGeometric };
    Kind kind = Kind::Unit;
    int k = 1;        // UniformK: magnitude uniform on {1..k}
    double q = 0.5;   // SymGeometric: Pr(|Z| > z) = q^z

    static StepDistribution parse(const std::string& s);  // "unit" | "uniform:k" | "geom:q"
    std::string to_string() const;
    int64_t sample(SplitMix64& rng) const;
};

// A named measurement series inside a verdict; counts ride along so reports
// can be re-analyzed without rerunning.
struct Series {
    std::string name;
    std::vector<double> xs, ys, errs;
    std::vector<int64_t> counts;
};

struct LemmaVerdict {
    std::string lemma;
    bool pass = false;
    std::vector<std::pair<std::string, double>> metrics;
    std::vector<Series> series;
    std::vector<std::string> notes;

    void metric(const std::string& k, double v) { metrics.emplace_back(k, v); }
};

// ------------------------------------------------------------ exact oracles
// First-step-analysis linear systems over integer lattice states, solved in
// exact rational arithmetic (unit-step walks). Ground truth for exit times
// and exit-side probabilities without trusting Monte Carlo.

// E_y[first exit time from {lo..hi}] for the unit walk
Rational exact_exit_time_unit(int64_t lo, int64_t hi, int64_t y);
// Pr_y[walk leaves {lo..hi} upward (hits hi+1 before lo-1)]
Rational exact_exit_above_unit(int64_t lo, int64_t hi, int64_t y);
// Pr_y[V > v] for v = 0..v_max, where V counts time in {0..m} before the
// unit walk exits {0..r}
std::vector<Rational> exact_occupation_survival_unit(int64_t r, int64_t m, int64_t y,
                                                     int64_t v_max);

// ---------------------------------------------------------------- verifiers

struct LineConfig {
    StepDistribution dist;
    double y = 0.0;
    int64_t n_samples = 100000;
    uint64_t seed = 1;
    int workers = 0;
};

// E_y[sigma_r] <= C r^2 with exponential tails; sweep over r
LemmaVerdict verify_exit_time(const LineConfig& cfg, const std::vector<double>& r_list);

// Pr[some pre-exit jump exceeds z] decays at least exponentially in z
LemmaVerdict verify_big_jump(const LineConfig& cfg, double r, const std::vector<double>& z_list);

// exit-right probability approaches (y+r)/2r as r grows
LemmaVerdict verify_green_function(const LineConfig& cfg, const std::vector<double>& r_list);

// time spent in [0,m] before exiting [0,r] has tails exp(-cv/m^2)
LemmaVerdict verify_occupation_time(const LineConfig& cfg, double r,
                                    const std::vector<int>& m_list);

// Pr[MS_r((-inf,-q)) <= n] < C(n+1)/r
LemmaVerdict verify_msep(const LineConfig& cfg, double q, const std::vector<double>& r_list,
                         int n_max);

// maximal 1-separated subset size (sorted greedy sweep, optimal on the line)
int max_separated_points(const std::vector<double>& points);

}  // namespace affharm
