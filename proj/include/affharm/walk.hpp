#pragma once

#include <functional>
#include <variant>

#include "affharm/affine.hpp"
#include "affharm/labeling.hpp"
#include "affharm/stats.hpp"

namespace affharm {

// Which real-valued projection of the walk the stopping rule watches.
// Rho drives the harmonic-function construction; CValue (the signed
// translation part) is what makes sense on groups like zline where rho is
// identically zero.
enum class Observable { Rho, CValue };

// Real interval with open/closed ends; +-inf allowed.
struct RealInterval {
    double lo = 0.0, hi = 0.0;
    bool lo_strict = false, hi_strict = false;
    bool contains(double v, double tol = 1e-9) const;
    static RealInterval parse(const std::string& s);  // "(0,inf)", "[-3,3)"...
    std::string to_string() const;
};

// sigma_r: first exit of the observable from [-r, r]
struct SigmaStop {
    double r = 0.0;
};
// tau_A: first entry (t >= 0) of the observable into a union of intervals
struct TauSetStop {
    std::vector<RealInterval> targets;
};
// tau_H: first return (t >= 1) to the label-0 coset
struct TauSubgroupStop {
    const CosetLabeling* labeling = nullptr;
};
// asymmetric window on the observable, recording the exit side; this is the
// engine behind events like {tau_(r,inf) < tau_(-inf,0)}
struct WindowStop {
    double lo = 0.0, hi = 0.0;  // stop once observable leaves [lo, hi]
};
// no stopping condition; run exactly fixed_steps steps
struct FixedTimeStop {
    int64_t steps = 0;
};

using StopRule = std::variant<SigmaStop, TauSetStop, TauSubgroupStop, WindowStop, FixedTimeStop>;

enum class StopKind { SigmaR, TauSet, TauSubgroup, Censored, FixedTime };

struct WalkConfig {
    const MeasuredGroup* group = nullptr;
    AffineElement start;
    uint64_t seed = 0;
    int64_t max_steps = 0;  // 0: defaulted (200 r^2 for sigma, 10^6 otherwise)
    StopRule rule = SigmaStop{1.0};
    Observable observable = Observable::Rho;
    int workers = 0;  // 0: all available
    bool track_visited = false;  // record visited observable values (for MS)

    int64_t effective_max_steps() const;
    int effective_workers() const;
};

struct StoppedSample {
    StopKind stop_kind = StopKind::Censored;
    int64_t stop_time = 0;
    AffineElement final;
    LogAbs final_rho;
    LogAbs final_c_abs;
    // exit side for Sigma/Window rules: -1 below, +1 above, 0 otherwise
    int exit_side = 0;
};

// One walk, exact element arithmetic at every step: the serial reference
// implementation. Trajectory `index` of the experiment keyed by cfg.seed.
StoppedSample sample_stopped_walk(const WalkConfig& cfg, uint64_t index = 0);

// Same trajectory on the counter-based kernel the ensembles use; throws
// when the config has no fast plan. Must agree with sample_stopped_walk
// sample-for-sample (tested).
StoppedSample sample_stopped_walk_fast(const WalkConfig& cfg, uint64_t index = 0);

// What per-trajectory statistics may look at. Exact queries materialize
// field elements only when called.
class WalkFinal {
public:
    virtual ~WalkFinal() = default;
    virtual StopKind kind() const = 0;
    virtual int64_t stop_time() const = 0;
    virtual int exit_side() const = 0;
    virtual AffineElement element() const = 0;
    virtual LogAbs rho_final() const = 0;
    // |c(X_T)| < thr, decided exactly
    virtual bool c_abs_less(const Rational& thr) const = 0;
    // |c(X_T) - c(X_0)| > thr, decided exactly
    virtual bool c_diff_greater(const Rational& thr) const = 0;
    // max 1-separated subset of {rho(X_t) : t < T} below -q (needs track_visited)
    virtual int ms_below(double q) const = 0;
};

// Data-parallel ensemble. Each trajectory draws its private stream derived
// from (seed, index); the workers only decide scheduling. `value` maps a
// finished trajectory to the statistic; NaN marks "excluded" (censored
// trajectories are excluded automatically unless include_censored).
struct EnsembleSpec {
    std::function<double(const WalkFinal&)> value;
    bool include_censored = false;
};

EstimateReport run_ensemble(const WalkConfig& cfg, int64_t n, const EnsembleSpec& stat);

// mean stop time, censored excluded
EstimateReport ensemble_stop_time(const WalkConfig& cfg, int64_t n);
// fraction of trajectories with |c(X_T)| < thr (the f-estimate event)
EstimateReport ensemble_c_small(const WalkConfig& cfg, int64_t n, const Rational& thr);

// per-MS-value conditional tallies of the small-c event
struct MsBinRow {
    int ms = 0;
    int64_t count = 0;
    int64_t small_c = 0;
};
std::vector<MsBinRow> ensemble_ms_conditional(const WalkConfig& cfg, int64_t n,
                                              double q, const Rational& thr);

// tau_H ensemble with the full first-return tally
struct HittingTally {
    struct Atom {
        AffineElement element;
        int64_t count = 0;
    };
    std::vector<Atom> support;        // descending count, ties by serialization
    std::vector<int64_t> tau_values;  // non-censored stop times, trajectory order
    int64_t n_censored = 0;
};
HittingTally ensemble_hitting(const WalkConfig& cfg, int64_t n);

// E[|X_t|^k] / t^k rows for the moment bound, word lengths from the ball
struct MomentRow {
    int64_t t = 0;
    double ratio = 0.0;      // empirical E|X_t|^k / t^k
    int64_t n_measured = 0;  // trajectories whose |X_t| the ball resolves
    int64_t n_censored = 0;  // beyond the ball radius
    bool skipped = false;    // t == 0 rows are reported but not scored
};
std::vector<MomentRow> moment_bound_check(const MeasuredGroup& g, const std::vector<int64_t>& ts,
                                          int k, int64_t n, uint64_t seed, const BallIndex& ball,
                                          int workers = 0);

// E[rho(X_t)] at a fixed time (martingale diagnostic)
EstimateReport fixed_time_rho_mean(const MeasuredGroup& g, const AffineElement& start, int64_t t,
                                   int64_t n, uint64_t seed, int workers = 0);

}  // namespace affharm
