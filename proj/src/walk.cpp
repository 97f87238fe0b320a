#include "affharm/walk.hpp"

#include <omp.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <limits>
#include <map>
#include <sstream>

#include "affharm/rng.hpp"

namespace affharm {

namespace {

constexpr double kThresholdTol = 1e-9;

// ---------------------------------------------------------------- sampling

// cumulative mu thresholds on the u64 scale, exact for dyadic weights;
// both engines draw the same u64 and scan the same table, so they pick
// identical generators on identical streams
std::vector<uint64_t> weight_thresholds(const MeasuredGroup& g) {
    std::vector<uint64_t> cum;
    cum.reserve(g.support().size());
    Rational acc;
    BigInt two64 = BigInt(1).shifted_left(64);
    for (const auto& e : g.support()) {
        acc = acc + e.weight;
        BigInt scaled = (acc.num() * two64) / acc.den();
        cum.push_back(scaled >= two64 ? std::numeric_limits<uint64_t>::max()
                                      : scaled.to_uint64());
    }
    cum.back() = std::numeric_limits<uint64_t>::max();
    return cum;
}

inline size_t pick_generator(const std::vector<uint64_t>& cum, uint64_t u) {
    size_t i = 0;
    while (i + 1 < cum.size() && u >= cum[i]) ++i;
    return i;
}

// ---------------------------------------------------------------- geometry

// exponent k such that |lambda| = base^k, when exact and compatible
std::optional<int64_t> lambda_exponent_on_base(const AffineElement& x, uint32_t base) {
    LogAbs a = abs_value(x.lambda());
    if (!a.is_exact()) return std::nullopt;
    if (a.k == 0) return 0;
    if (a.base != base) return std::nullopt;
    return a.k;
}

// integer window of k with rho = -k*log(base) inside [lo, hi] (closed)
std::pair<int64_t, int64_t> rho_window_k(double lo, double hi, uint32_t base) {
    double lb = std::log(static_cast<double>(base));
    int64_t klo = static_cast<int64_t>(std::ceil(-hi / lb - kThresholdTol));
    int64_t khi = static_cast<int64_t>(std::floor(-lo / lb + kThresholdTol));
    return {klo, khi};
}

// k-ranges whose rho value lies in the interval (strictness honored)
std::vector<std::pair<int64_t, int64_t>> rho_targets_k(const std::vector<RealInterval>& ts,
                                                       uint32_t base) {
    double lb = std::log(static_cast<double>(base));
    std::vector<std::pair<int64_t, int64_t>> out;
    for (const RealInterval& iv : ts) {
        double hi_k = std::isinf(iv.lo) ? 0 : -iv.lo / lb;  // rho >= lo  =>  k <= -lo/lb
        double lo_k = std::isinf(iv.hi) ? 0 : -iv.hi / lb;
        int64_t ka = std::isinf(iv.hi) ? std::numeric_limits<int64_t>::min() / 4
                                       : static_cast<int64_t>(std::ceil(lo_k - 1.0));
        int64_t kb = std::isinf(iv.lo) ? std::numeric_limits<int64_t>::max() / 4
                                       : static_cast<int64_t>(std::floor(hi_k + 1.0));
        // tighten endpoints with the interval's own contains()
        while (ka <= kb && !iv.contains(-static_cast<double>(ka) * lb, kThresholdTol)) ++ka;
        while (kb >= ka && !iv.contains(-static_cast<double>(kb) * lb, kThresholdTol)) --kb;
        if (ka <= kb) out.push_back({ka, kb});
    }
    return out;
}

// integer window of n with value0 + n inside [lo, hi] (closed, exact)
std::pair<int64_t, int64_t> c_window_n(double lo, double hi, const Rational& c0) {
    Rational rlo = Rational::from_double(lo) - c0;
    Rational rhi = Rational::from_double(hi) - c0;
    return {rlo.ceil().to_int64(), rhi.floor().to_int64()};
}

std::vector<std::pair<int64_t, int64_t>> c_targets_n(const std::vector<RealInterval>& ts,
                                                     const Rational& c0) {
    std::vector<std::pair<int64_t, int64_t>> out;
    for (const RealInterval& iv : ts) {
        int64_t lo, hi;
        if (std::isinf(iv.lo)) {
            lo = std::numeric_limits<int64_t>::min() / 4;
        } else {
            Rational b = Rational::from_double(iv.lo) - c0;
            BigInt c = b.ceil();
            lo = c.to_int64();
            if (iv.lo_strict && c0 + Rational(lo) == Rational::from_double(iv.lo)) ++lo;
        }
        if (std::isinf(iv.hi)) {
            hi = std::numeric_limits<int64_t>::max() / 4;
        } else {
            Rational b = Rational::from_double(iv.hi) - c0;
            BigInt f = b.floor();
            hi = f.to_int64();
            if (iv.hi_strict && c0 + Rational(hi) == Rational::from_double(iv.hi)) --hi;
        }
        if (lo <= hi) out.push_back({lo, hi});
    }
    return out;
}

// ---------------------------------------------------------------- fast plan

struct FastPlan {
    enum class Mode { KWindow, KTargets, KLabel, CWindow, CTargets, CLabel, Fixed };

    const MeasuredGroup* group = nullptr;
    std::vector<uint64_t> cum;
    std::vector<int32_t> dk;   // lambda-exponent change per generator
    std::vector<int32_t> cu;   // c unit per generator
    int uniform_pick_shift = -1;  // >=0: uniform power-of-two support, pick by top bits
    bool fp = false;           // residue counters (laurent) vs signed counters
    uint32_t p = 0;
    uint32_t base = 2;
    int64_t k0 = 0;
    ValuedScalar c0;
    Mode mode = Mode::KWindow;
    StopKind fire_kind = StopKind::SigmaR;
    int64_t klo = 0, khi = 0;  // interior window (k or c offset units)
    std::vector<std::pair<int64_t, int64_t>> targets;
    // label tracking (KLabel/CLabel modes)
    int label_mod = 1;
    int label0 = 0;
    std::vector<int32_t> label_shift;
    bool c_walk = false;  // C* modes: evolve a single int64 offset, no counters
    int64_t fixed_steps = 0;
    int64_t max_steps = 0;
    bool track_visited = false;
};

// trajectory-local state, reused across trajectories of one worker
struct Scratch {
    std::vector<int64_t> zc;
    std::vector<uint32_t> fc;
    std::vector<uint64_t> visited;
    int64_t arr_lo = 0;  // absolute k of slot 0
    int64_t touched_lo = 0, touched_hi = -1;
    int64_t vis_lo = 0, vis_hi = -1;
    bool fp = false;
    // sigma windows preallocate the whole interior and skip touch tracking
    bool full_window = false;

    void init(const FastPlan& plan) {
        fp = plan.fp;
        full_window = plan.mode == FastPlan::Mode::KWindow;
        int64_t lo, hi;
        if (full_window) {
            lo = plan.klo;
            hi = plan.khi;
        } else {
            lo = plan.k0 - 64;
            hi = plan.k0 + 64;
        }
        arr_lo = lo;
        size_t n = static_cast<size_t>(hi - lo + 1);
        if (fp) fc.assign(n, 0);
        else zc.assign(n, 0);
        visited.assign((n + 63) / 64, 0);
        touched_lo = full_window ? 0 : 0;
        touched_hi = full_window ? static_cast<int64_t>(n) - 1 : -1;
        vis_lo = 0;
        vis_hi = -1;
    }

    void reset() {
        if (full_window) {
            if (fp) std::memset(fc.data(), 0, fc.size() * sizeof(uint32_t));
            else std::memset(zc.data(), 0, zc.size() * sizeof(int64_t));
            std::memset(visited.data(), 0, visited.size() * sizeof(uint64_t));
            vis_lo = 0;
            vis_hi = -1;
            return;
        }
        if (touched_hi >= touched_lo) {
            size_t lo = static_cast<size_t>(touched_lo), n = static_cast<size_t>(touched_hi - touched_lo + 1);
            if (fp) std::memset(fc.data() + lo, 0, n * sizeof(uint32_t));
            else std::memset(zc.data() + lo, 0, n * sizeof(int64_t));
        }
        if (vis_hi >= vis_lo)
            std::memset(visited.data() + vis_lo / 64, 0,
                        (vis_hi / 64 - vis_lo / 64 + 1) * sizeof(uint64_t));
        touched_lo = 0;
        touched_hi = -1;
        vis_lo = 0;
        vis_hi = -1;
    }

    void grow(int64_t k) {
        // double outward until k fits; preserves absolute indexing
        int64_t size = static_cast<int64_t>(fp ? fc.size() : zc.size());
        int64_t lo = arr_lo, hi = arr_lo + size - 1;
        int64_t nlo = lo, nhi = hi;
        while (k < nlo) nlo -= (nhi - nlo + 1);
        while (k > nhi) nhi += (nhi - nlo + 1);
        size_t n = static_cast<size_t>(nhi - nlo + 1);
        int64_t shift = lo - nlo;
        if (fp) {
            std::vector<uint32_t> nf(n, 0);
            std::memcpy(nf.data() + shift, fc.data(), fc.size() * sizeof(uint32_t));
            fc = std::move(nf);
        } else {
            std::vector<int64_t> nz(n, 0);
            std::memcpy(nz.data() + shift, zc.data(), zc.size() * sizeof(int64_t));
            zc = std::move(nz);
        }
        std::vector<uint64_t> nv((n + 63) / 64, 0);
        for (int64_t i = vis_lo; i <= vis_hi; ++i)
            if (visited[static_cast<size_t>(i) / 64] >> (i % 64) & 1)
                nv[static_cast<size_t>(i + shift) / 64] |= 1ULL << ((i + shift) % 64);
        visited = std::move(nv);
        if (touched_hi >= touched_lo) {
            touched_lo += shift;
            touched_hi += shift;
        }
        if (vis_hi >= vis_lo) {
            vis_lo += shift;
            vis_hi += shift;
        }
        arr_lo = nlo;
    }

    inline int64_t idx(int64_t k) {
        int64_t i = k - arr_lo;
        if (i < 0 || i >= static_cast<int64_t>(fp ? fc.size() : zc.size())) {
            grow(k);
            i = k - arr_lo;
        }
        return i;
    }

    inline void bump(int64_t k, int32_t unit, uint32_t p) {
        int64_t i = idx(k);
        if (touched_hi < touched_lo) touched_lo = touched_hi = i;
        else if (i < touched_lo) touched_lo = i;
        else if (i > touched_hi) touched_hi = i;
        if (fp) {
            int64_t v = static_cast<int64_t>(fc[static_cast<size_t>(i)]) + unit;
            v %= static_cast<int64_t>(p);
            if (v < 0) v += p;
            fc[static_cast<size_t>(i)] = static_cast<uint32_t>(v);
        } else {
            zc[static_cast<size_t>(i)] += unit;
        }
    }

    inline void mark(int64_t k) {
        int64_t i = idx(k);
        if (vis_hi < vis_lo) vis_lo = vis_hi = i;
        else if (i < vis_lo) vis_lo = i;
        else if (i > vis_hi) vis_hi = i;
        visited[static_cast<size_t>(i) / 64] |= 1ULL << (i % 64);
    }
};

struct FastRun {
    StopKind kind = StopKind::Censored;
    int64_t stop_time = 0;
    int64_t k_final = 0;  // lambda exponent (or c offset in c_walk mode)
    int exit_side = 0;
};

// The mode/flag dimensions are compiled out; the sigma_r loop this generates
// is the workhorse behind every harmonic estimate, so it has to stay lean:
// one RNG mix, a generator pick, a counter add or an exponent move.
template <FastPlan::Mode MODE, bool FP, bool VISITED>
FastRun run_fast_impl(const FastPlan& plan, Scratch& s, uint64_t seed, uint64_t index) {
    SplitMix64 rng = trajectory_stream(seed, index);
    s.reset();
    FastRun out;

    uint64_t cum[8];
    int32_t dk[8], cu[8];
    const uint32_t ng = static_cast<uint32_t>(plan.cum.size());
    for (uint32_t i = 0; i < ng; ++i) {
        cum[i] = plan.cum[i];
        dk[i] = plan.dk[i];
        cu[i] = plan.cu[i];
    }
    // uniform weights over a power-of-two support pick by top bits
    const int shift_pick = plan.uniform_pick_shift;

    constexpr bool C_WALK = MODE == FastPlan::Mode::CWindow || MODE == FastPlan::Mode::CTargets ||
                            MODE == FastPlan::Mode::CLabel;
    int64_t k = C_WALK ? 0 : plan.k0;

    auto in_targets = [&](int64_t v) {
        for (const auto& t : plan.targets)
            if (v >= t.first && v <= t.second) return true;
        return false;
    };

    // time-0 checks
    if constexpr (MODE == FastPlan::Mode::KWindow || MODE == FastPlan::Mode::CWindow) {
        if (k < plan.klo || k > plan.khi) {
            out.kind = plan.fire_kind;
            out.k_final = k;
            bool below = k < plan.klo;
            out.exit_side = C_WALK ? (below ? -1 : +1) : (below ? +1 : -1);
            return out;
        }
    } else if constexpr (MODE == FastPlan::Mode::KTargets || MODE == FastPlan::Mode::CTargets) {
        if (in_targets(k)) {
            out.kind = plan.fire_kind;
            out.k_final = k;
            return out;
        }
    }
    if constexpr (VISITED && !C_WALK) s.mark(k);

    int label = plan.label0;
    const int m = plan.label_mod;
    const int32_t* lshift = plan.label_shift.data();
    const int64_t klo = plan.klo, khi = plan.khi;
    const int64_t cap = MODE == FastPlan::Mode::Fixed ? plan.fixed_steps : plan.max_steps;
    const int64_t arr_lo = s.arr_lo;
    int64_t* zc = s.zc.data();
    uint32_t* fc = s.fc.data();
    const int64_t pmod = plan.p;

    int64_t t = 0;
    while (t < cap) {
        uint64_t u = rng.next();
        uint32_t gi;
        if (shift_pick >= 0) {
            gi = static_cast<uint32_t>(u >> shift_pick);
        } else {
            gi = 0;
            while (gi + 1 < ng && u >= cum[gi]) ++gi;
        }
        ++t;
        const int32_t unit = cu[gi];
        if constexpr (C_WALK) {
            k += unit;
            if constexpr (MODE == FastPlan::Mode::CWindow) {
                if (k < klo || k > khi) {
                    out.kind = plan.fire_kind;
                    out.stop_time = t;
                    out.k_final = k;
                    out.exit_side = k < klo ? -1 : +1;
                    return out;
                }
            } else if constexpr (MODE == FastPlan::Mode::CTargets) {
                if (unit != 0 && in_targets(k)) {
                    out.kind = plan.fire_kind;
                    out.stop_time = t;
                    out.k_final = k;
                    return out;
                }
            } else {
                label += lshift[gi];
                if (label >= m) label -= m;
                if (label == 0) {
                    out.kind = StopKind::TauSubgroup;
                    out.stop_time = t;
                    out.k_final = k;
                    return out;
                }
            }
            continue;
        } else if constexpr (MODE == FastPlan::Mode::KWindow) {
            // branchless body: the c-add is often zero, the exit branch is
            // the only unpredictable one and it fires once per trajectory
            if constexpr (FP) {
                uint32_t v = fc[k - arr_lo] + static_cast<uint32_t>(unit);
                fc[k - arr_lo] = v >= static_cast<uint32_t>(pmod) ? v - static_cast<uint32_t>(pmod) : v;
            } else {
                zc[k - arr_lo] += unit;
            }
            k += dk[gi];
            if (k < klo || k > khi) {
                out.kind = plan.fire_kind;
                out.stop_time = t;
                out.k_final = k;
                out.exit_side = k < klo ? +1 : -1;  // rho = -k log b
                return out;
            }
            if constexpr (VISITED) {
                size_t i = static_cast<size_t>(k - arr_lo);
                if (s.vis_hi < s.vis_lo) s.vis_lo = s.vis_hi = static_cast<int64_t>(i);
                else if (static_cast<int64_t>(i) < s.vis_lo) s.vis_lo = static_cast<int64_t>(i);
                else if (static_cast<int64_t>(i) > s.vis_hi) s.vis_hi = static_cast<int64_t>(i);
                s.visited[i / 64] |= 1ULL << (i % 64);
            }
        } else {
            const int32_t d = dk[gi];
            if (unit != 0) {
                s.bump(k, unit, plan.p);
                zc = s.zc.data();
                fc = s.fc.data();
            }
            if (d != 0) {
                k += d;
                if constexpr (MODE == FastPlan::Mode::KTargets) {
                    if (in_targets(k)) {
                        out.kind = plan.fire_kind;
                        out.stop_time = t;
                        out.k_final = k;
                        return out;
                    }
                }
                if constexpr (VISITED) {
                    s.mark(k);
                    zc = s.zc.data();
                    fc = s.fc.data();
                }
            }
            if constexpr (MODE == FastPlan::Mode::KLabel) {
                label += lshift[gi];
                if (label >= m) label -= m;
                if (label == 0) {
                    out.kind = StopKind::TauSubgroup;
                    out.stop_time = t;
                    out.k_final = k;
                    return out;
                }
            }
        }
    }
    out.kind = MODE == FastPlan::Mode::Fixed ? StopKind::FixedTime : StopKind::Censored;
    out.stop_time = cap;
    out.k_final = k;
    return out;
}

template <FastPlan::Mode M>
FastRun run_fast_flags(const FastPlan& plan, Scratch& s, uint64_t seed, uint64_t index) {
    if (plan.fp) {
        if (plan.track_visited) return run_fast_impl<M, true, true>(plan, s, seed, index);
        return run_fast_impl<M, true, false>(plan, s, seed, index);
    }
    if (plan.track_visited) return run_fast_impl<M, false, true>(plan, s, seed, index);
    return run_fast_impl<M, false, false>(plan, s, seed, index);
}

FastRun run_fast(const FastPlan& plan, Scratch& s, uint64_t seed, uint64_t index) {
    using M = FastPlan::Mode;
    switch (plan.mode) {
        case M::KWindow: return run_fast_flags<M::KWindow>(plan, s, seed, index);
        case M::KTargets: return run_fast_flags<M::KTargets>(plan, s, seed, index);
        case M::KLabel: return run_fast_flags<M::KLabel>(plan, s, seed, index);
        case M::CWindow: return run_fast_flags<M::CWindow>(plan, s, seed, index);
        case M::CTargets: return run_fast_flags<M::CTargets>(plan, s, seed, index);
        case M::CLabel: return run_fast_flags<M::CLabel>(plan, s, seed, index);
        case M::Fixed: return run_fast_flags<M::Fixed>(plan, s, seed, index);
    }
    throw std::logic_error("unreachable");
}

// ------------------------------------------------------ final-state facade

class FastFinal : public WalkFinal {
public:
    FastFinal(const FastPlan& plan, Scratch& s, const FastRun& run)
        : plan_(plan), s_(s), run_(run) {}

    StopKind kind() const override { return run_.kind; }
    int64_t stop_time() const override { return run_.stop_time; }
    int exit_side() const override { return run_.exit_side; }

    AffineElement element() const override {
        const Place& place = plan_.group->place();
        if (plan_.c_walk) {
            Rational c = plan_.c0.rational() + Rational(run_.k_final);
            return AffineElement(ValuedScalar(place, c),
                                 lambda_power(place, plan_.k0));
        }
        ValuedScalar c = plan_.fp
                             ? ValuedScalar(place, plan_.c0.fp_ratio() + delta_fp())
                             : ValuedScalar(place, plan_.c0.rational() + delta_rational());
        return AffineElement(c, lambda_power(place, run_.k_final));
    }

    LogAbs rho_final() const override {
        if (plan_.c_walk) return LogAbs::exact(-plan_.k0, plan_.base);
        return LogAbs::exact(-run_.k_final, plan_.base);
    }

    bool c_abs_less(const Rational& thr) const override {
        if (plan_.c_walk) {
            Rational c = plan_.c0.rational() + Rational(run_.k_final);
            return c.abs() < thr;
        }
        if (plan_.fp) {
            int deg = final_c_degree_fp(true);
            return fp_abs_less(deg, thr);
        }
        // certified float prefilter, exact decision otherwise
        double c0d = plan_.c0.rational().to_double();
        double sum = c0d, asum = std::fabs(c0d);
        for (int64_t i = s_.touched_lo; i <= s_.touched_hi; ++i) {
            int64_t n = s_.zc[static_cast<size_t>(i)];
            if (n == 0) continue;
            double term = static_cast<double>(n) * std::ldexp(1.0, static_cast<int>(i + s_.arr_lo));
            sum += term;
            asum += std::fabs(term);
        }
        double tv = thr.to_double();
        double err = asum * 1e-12 + 1e-300;
        if (std::isfinite(sum) && std::isfinite(asum) &&
            std::fabs(sum) - err > tv * (1.0 + 1e-9) + 1.0)
            return false;
        Rational c = plan_.c0.rational() + delta_rational();
        return c.abs() < thr;
    }

    bool c_diff_greater(const Rational& thr) const override {
        if (plan_.c_walk) return Rational(run_.k_final).abs() > thr;
        if (plan_.fp) {
            int deg = final_c_degree_fp(false);
            return !fp_abs_less(deg, thr) && !fp_abs_equal(deg, thr);
        }
        return delta_rational().abs() > thr;
    }

    int ms_below(double q) const override {
        if (s_.vis_hi < s_.vis_lo) return 0;
        double lb = std::log(static_cast<double>(plan_.base));
        // rho < -q  <=>  k*log(base) > q
        int64_t kq = static_cast<int64_t>(std::floor(q / lb + kThresholdTol)) + 1;
        int count = 0;
        int64_t last_k = 0;
        bool have = false;
        for (int64_t i = s_.vis_hi; i >= s_.vis_lo; --i) {
            if (!(s_.visited[static_cast<size_t>(i) / 64] >> (i % 64) & 1)) continue;
            int64_t k = i + s_.arr_lo;
            if (k < kq) break;
            if (!have) {
                have = true;
                last_k = k;
                count = 1;
            } else if (static_cast<double>(last_k - k) * lb >= 1.0 - 1e-12) {
                ++count;
                last_k = k;
            }
        }
        return count;
    }

private:
    static ValuedScalar lambda_power(const Place& place, int64_t k);

    Rational delta_rational() const {
        BigInt pos, neg;
        for (int64_t i = s_.touched_lo; i <= s_.touched_hi; ++i) {
            int64_t n = s_.zc[static_cast<size_t>(i)];
            if (n == 0) continue;
            uint64_t mag = static_cast<uint64_t>(n < 0 ? -n : n);
            uint64_t bits = static_cast<uint64_t>(i - s_.touched_lo);
            uint64_t rem = bits % 64;
            BigInt& acc = n > 0 ? pos : neg;
            acc.add_shifted_magnitude(mag << rem, bits / 64);
            if (rem && (mag >> (64 - rem)) != 0) acc.add_shifted_magnitude(mag >> (64 - rem), bits / 64 + 1);
        }
        BigInt d = pos - neg;
        int64_t scale = s_.touched_lo + s_.arr_lo;
        if (scale >= 0) return Rational(d.shifted_left(static_cast<uint32_t>(scale)), BigInt(1));
        return Rational(d, BigInt(1).shifted_left(static_cast<uint32_t>(-scale)));
    }

    FpPoly delta_poly_num(int64_t& shift) const {
        // counters as a polynomial times x^shift
        shift = s_.touched_lo + s_.arr_lo;
        std::vector<uint32_t> coeffs;
        for (int64_t i = s_.touched_lo; i <= s_.touched_hi; ++i)
            coeffs.push_back(s_.fc[static_cast<size_t>(i)]);
        return FpPoly(plan_.p, std::move(coeffs));
    }

    FpRatio delta_fp() const {
        if (s_.touched_hi < s_.touched_lo) return FpRatio::constant(plan_.p, 0);
        int64_t shift = 0;
        FpPoly num = delta_poly_num(shift);
        if (shift >= 0) return FpRatio(num.times_xk(static_cast<uint32_t>(shift)));
        return FpRatio(num, FpPoly::monomial(plan_.p, 1, static_cast<uint32_t>(-shift)));
    }

    // degree at infinity of c(X_T) (with_c0) or of the increment
    int final_c_degree_fp(bool with_c0) const {
        FpRatio c = delta_fp();
        if (with_c0) c = plan_.c0.fp_ratio() + c;
        return c.is_zero() ? std::numeric_limits<int>::min() : c.degree_at_infinity();
    }

    bool fp_abs_less(int deg, const Rational& thr) const {
        if (deg == std::numeric_limits<int>::min()) return thr.sign() > 0;
        BigInt p(static_cast<int64_t>(plan_.p));
        if (deg >= 0)
            return BigInt::pow(p, static_cast<uint64_t>(deg)) * thr.den() < thr.num();
        return thr.den() < thr.num() * BigInt::pow(p, static_cast<uint64_t>(-deg));
    }

    bool fp_abs_equal(int deg, const Rational& thr) const {
        if (deg == std::numeric_limits<int>::min()) return thr.is_zero();
        BigInt p(static_cast<int64_t>(plan_.p));
        if (deg >= 0) return Rational(BigInt::pow(p, static_cast<uint64_t>(deg)), BigInt(1)) == thr;
        return Rational(BigInt(1), BigInt::pow(p, static_cast<uint64_t>(-deg))) == thr;
    }

    const FastPlan& plan_;
    Scratch& s_;
    const FastRun& run_;
};

ValuedScalar FastFinal::lambda_power(const Place& place, int64_t k) {
    if (place.is_laurent())
        return ValuedScalar(place, FpRatio::monomial(place.p, 1, static_cast<int>(k)));
    if (k >= 0)
        return ValuedScalar(place, Rational(BigInt(1).shifted_left(static_cast<uint32_t>(k)), BigInt(1)));
    return ValuedScalar(place, Rational(BigInt(1), BigInt(1).shifted_left(static_cast<uint32_t>(-k))));
}

// ----------------------------------------------------------- generic engine

class GenericFinal : public WalkFinal {
public:
    GenericFinal(const WalkConfig& cfg, StopKind kind, int64_t stop_time, int side,
                 AffineElement final_el, std::vector<double> visited)
        : cfg_(cfg), kind_(kind), stop_time_(stop_time), side_(side),
          final_(std::move(final_el)), visited_(std::move(visited)) {}

    StopKind kind() const override { return kind_; }
    int64_t stop_time() const override { return stop_time_; }
    int exit_side() const override { return side_; }
    AffineElement element() const override { return final_; }
    LogAbs rho_final() const override { return rho(final_); }
    bool c_abs_less(const Rational& thr) const override { return abs_less_than(final_.c(), thr); }
    bool c_diff_greater(const Rational& thr) const override {
        ValuedScalar d = final_.c() - cfg_.start.c();
        return !abs_less_than(d, thr) && !abs_equals(d, thr);
    }
    int ms_below(double q) const override {
        std::vector<double> pts;
        for (double v : visited_)
            if (v < -q - kThresholdTol) pts.push_back(v);
        return max_separated(std::move(pts));
    }

private:
    static bool abs_equals(const ValuedScalar& v, const Rational& thr) {
        if (v.is_zero()) return thr.is_zero();
        if (v.is_rational()) return v.rational().abs() == thr;
        int deg = v.fp_ratio().degree_at_infinity();
        BigInt p(static_cast<int64_t>(v.place().p));
        if (deg >= 0) return Rational(BigInt::pow(p, static_cast<uint64_t>(deg)), BigInt(1)) == thr;
        return Rational(BigInt(1), BigInt::pow(p, static_cast<uint64_t>(-deg))) == thr;
    }

    const WalkConfig& cfg_;
    StopKind kind_;
    int64_t stop_time_;
    int side_;
    AffineElement final_;
    std::vector<double> visited_;
};

double observable_value(const WalkConfig& cfg, const AffineElement& x) {
    if (cfg.observable == Observable::Rho) return rho(x).to_double();
    if (!x.c().is_rational())
        throw std::invalid_argument("CValue observable needs an ordered (rational) place");
    return x.c().rational().to_double();
}

GenericFinal run_generic(const WalkConfig& cfg, uint64_t index) {
    SplitMix64 rng = trajectory_stream(cfg.seed, index);
    std::vector<uint64_t> cum = weight_thresholds(*cfg.group);
    AffineElement x = cfg.start;
    int64_t max_steps = cfg.effective_max_steps();
    std::vector<double> visited;

    double win_lo = 0, win_hi = 0;
    const std::vector<RealInterval>* targets = nullptr;
    const CosetLabeling* labeling = nullptr;
    StopKind fire = StopKind::Censored;
    int64_t fixed = -1;
    if (const auto* s = std::get_if<SigmaStop>(&cfg.rule)) {
        win_lo = -s->r;
        win_hi = s->r;
        fire = StopKind::SigmaR;
    } else if (const auto* w = std::get_if<WindowStop>(&cfg.rule)) {
        win_lo = w->lo;
        win_hi = w->hi;
        fire = StopKind::SigmaR;
    } else if (const auto* t = std::get_if<TauSetStop>(&cfg.rule)) {
        targets = &t->targets;
        fire = StopKind::TauSet;
    } else if (const auto* h = std::get_if<TauSubgroupStop>(&cfg.rule)) {
        labeling = h->labeling;
        fire = StopKind::TauSubgroup;
    } else {
        fixed = std::get<FixedTimeStop>(cfg.rule).steps;
    }

    auto window_exit = [&](double v) { return v < win_lo - kThresholdTol || v > win_hi + kThresholdTol; };
    auto in_targets = [&](double v) {
        for (const auto& iv : *targets)
            if (iv.contains(v, kThresholdTol)) return true;
        return false;
    };

    // time-0 checks
    if (fire == StopKind::SigmaR) {
        double v = observable_value(cfg, x);
        if (window_exit(v))
            return GenericFinal(cfg, fire, 0, v > win_hi ? +1 : -1, x, {});
    } else if (fire == StopKind::TauSet) {
        if (in_targets(observable_value(cfg, x)))
            return GenericFinal(cfg, fire, 0, 0, x, {});
    }
    // MS statistics live on the rho-trajectory
    if (cfg.track_visited) visited.push_back(rho(x).to_double());

    int64_t cap = fixed >= 0 ? fixed : max_steps;
    for (int64_t t = 1; t <= cap; ++t) {
        size_t gi = pick_generator(cum, rng.next());
        x = x * cfg.group->support()[gi].element;
        if (fixed >= 0) continue;
        if (fire == StopKind::SigmaR) {
            double v = observable_value(cfg, x);
            if (window_exit(v)) return GenericFinal(cfg, fire, t, v > win_hi ? +1 : -1, x, std::move(visited));
        } else if (fire == StopKind::TauSet) {
            if (in_targets(observable_value(cfg, x))) return GenericFinal(cfg, fire, t, 0, x, std::move(visited));
        } else if (labeling->label(x) == 0) {
            return GenericFinal(cfg, StopKind::TauSubgroup, t, 0, x, std::move(visited));
        }
        if (cfg.track_visited) visited.push_back(rho(x).to_double());
    }
    return GenericFinal(cfg, fixed >= 0 ? StopKind::FixedTime : StopKind::Censored, cap, 0, x,
                        std::move(visited));
}

// ------------------------------------------------------------ plan builder

std::optional<FastPlan> build_fast_plan(const WalkConfig& cfg) {
    const MeasuredGroup& g = *cfg.group;
    if (!g.power_basis()) return std::nullopt;
    const PowerBasis& pb = *g.power_basis();

    FastPlan plan;
    plan.group = &g;
    plan.cum = weight_thresholds(g);
    plan.base = pb.base;
    plan.fp = g.place().is_laurent();
    plan.p = plan.fp ? g.place().p : 0;
    for (size_t i = 0; i < g.support().size(); ++i) {
        plan.dk.push_back(pb.lambda_exp[i]);
        plan.cu.push_back(pb.c_unit[i]);
    }
    auto k0 = lambda_exponent_on_base(cfg.start, plan.base);
    if (!k0) return std::nullopt;
    plan.k0 = *k0;
    plan.c0 = cfg.start.c();
    plan.max_steps = cfg.effective_max_steps();
    plan.track_visited = cfg.track_visited;

    // uniform mu over 2^m generators: the top m bits of the draw pick the
    // generator, exactly matching the threshold scan
    size_t ng = g.support().size();
    if ((ng & (ng - 1)) == 0) {
        bool uniform = true;
        for (const auto& e : g.support())
            uniform &= e.weight == Rational(BigInt(1), BigInt(static_cast<int64_t>(ng)));
        if (uniform) {
            int bits = 0;
            while ((size_t{1} << bits) < ng) ++bits;
            plan.uniform_pick_shift = 64 - bits;
        }
    }

    bool all_dk_zero = true;
    for (int32_t d : plan.dk) all_dk_zero &= d == 0;

    if (cfg.observable == Observable::CValue) {
        // additive integer c-walk: every lambda is 1 and units are integers
        if (!all_dk_zero || plan.fp || plan.k0 != 0) return std::nullopt;
        if (!plan.c0.is_rational()) return std::nullopt;
        plan.c_walk = true;
        if (const auto* s = std::get_if<SigmaStop>(&cfg.rule)) {
            auto [lo, hi] = c_window_n(-s->r, s->r, plan.c0.rational());
            plan.mode = FastPlan::Mode::CWindow;
            plan.klo = lo;
            plan.khi = hi;
            plan.fire_kind = StopKind::SigmaR;
        } else if (const auto* w = std::get_if<WindowStop>(&cfg.rule)) {
            auto [lo, hi] = c_window_n(w->lo, w->hi, plan.c0.rational());
            plan.mode = FastPlan::Mode::CWindow;
            plan.klo = lo;
            plan.khi = hi;
            plan.fire_kind = StopKind::SigmaR;
        } else if (const auto* t = std::get_if<TauSetStop>(&cfg.rule)) {
            plan.mode = FastPlan::Mode::CTargets;
            plan.targets = c_targets_n(t->targets, plan.c0.rational());
            plan.fire_kind = StopKind::TauSet;
        } else if (const auto* h = std::get_if<TauSubgroupStop>(&cfg.rule)) {
            if (h->labeling->kind() != CosetLabeling::Kind::CParity) return std::nullopt;
            if (!plan.c0.rational().is_integer()) return std::nullopt;
            plan.mode = FastPlan::Mode::CLabel;
            plan.label_mod = h->labeling->index();
            plan.label0 = h->labeling->label(cfg.start);
            for (size_t i = 0; i < g.support().size(); ++i)
                plan.label_shift.push_back(h->labeling->act(0, i));
        } else {
            plan.mode = FastPlan::Mode::Fixed;
            plan.c_walk = false;
            plan.fixed_steps = std::get<FixedTimeStop>(cfg.rule).steps;
            return plan;
        }
        return plan;
    }

    // Rho observable
    if (const auto* s = std::get_if<SigmaStop>(&cfg.rule)) {
        auto [klo, khi] = rho_window_k(-s->r, s->r, plan.base);
        plan.mode = FastPlan::Mode::KWindow;
        plan.klo = klo;
        plan.khi = khi;
        plan.fire_kind = StopKind::SigmaR;
    } else if (const auto* w = std::get_if<WindowStop>(&cfg.rule)) {
        auto [klo, khi] = rho_window_k(w->lo, w->hi, plan.base);
        plan.mode = FastPlan::Mode::KWindow;
        plan.klo = klo;
        plan.khi = khi;
        plan.fire_kind = StopKind::SigmaR;
    } else if (const auto* t = std::get_if<TauSetStop>(&cfg.rule)) {
        plan.mode = FastPlan::Mode::KTargets;
        plan.targets = rho_targets_k(t->targets, plan.base);
        plan.fire_kind = StopKind::TauSet;
    } else if (const auto* h = std::get_if<TauSubgroupStop>(&cfg.rule)) {
        if (h->labeling->kind() != CosetLabeling::Kind::LambdaExpMod) return std::nullopt;
        plan.mode = FastPlan::Mode::KLabel;
        plan.label_mod = h->labeling->index();
        plan.label0 = h->labeling->label(cfg.start);
        for (size_t i = 0; i < g.support().size(); ++i)
            plan.label_shift.push_back(h->labeling->act(0, i));
    } else {
        plan.mode = FastPlan::Mode::Fixed;
        plan.fixed_steps = std::get<FixedTimeStop>(cfg.rule).steps;
    }
    return plan;
}

// fast KWindow exits need the rho-side fixed up for c-walk handled inline;
// nothing else to translate

}  // namespace

// --------------------------------------------------------------- intervals

bool RealInterval::contains(double v, double tol) const {
    bool lo_ok = std::isinf(lo) ? true : (lo_strict ? v > lo + tol : v >= lo - tol);
    bool hi_ok = std::isinf(hi) ? true : (hi_strict ? v < hi - tol : v <= hi + tol);
    return lo_ok && hi_ok;
}

RealInterval RealInterval::parse(const std::string& s) {
    if (s.size() < 3) throw std::invalid_argument("bad interval \"" + s + "\"");
    RealInterval iv;
    char open = s.front(), close = s.back();
    if (open != '(' && open != '[') throw std::invalid_argument("bad interval \"" + s + "\"");
    if (close != ')' && close != ']') throw std::invalid_argument("bad interval \"" + s + "\"");
    iv.lo_strict = open == '(';
    iv.hi_strict = close == ')';
    std::string body = s.substr(1, s.size() - 2);
    size_t comma = body.find(',');
    if (comma == std::string::npos) throw std::invalid_argument("bad interval \"" + s + "\"");
    auto parse_val = [](std::string t) {
        size_t b = t.find_first_not_of(" \t");
        size_t e = t.find_last_not_of(" \t");
        t = b == std::string::npos ? "" : t.substr(b, e - b + 1);
        if (t == "inf" || t == "+inf") return std::numeric_limits<double>::infinity();
        if (t == "-inf") return -std::numeric_limits<double>::infinity();
        return std::stod(t);
    };
    iv.lo = parse_val(body.substr(0, comma));
    iv.hi = parse_val(body.substr(comma + 1));
    return iv;
}

std::string RealInterval::to_string() const {
    std::ostringstream out;
    out << (lo_strict ? '(' : '[');
    if (std::isinf(lo)) out << (lo < 0 ? "-inf" : "inf");
    else out << lo;
    out << ",";
    if (std::isinf(hi)) out << (hi < 0 ? "-inf" : "inf");
    else out << hi;
    out << (hi_strict ? ')' : ']');
    return out.str();
}

int64_t WalkConfig::effective_max_steps() const {
    if (max_steps > 0) return max_steps;
    if (const auto* s = std::get_if<SigmaStop>(&rule)) {
        double r2 = std::max(1.0, s->r * s->r);
        return static_cast<int64_t>(200.0 * r2);
    }
    if (const auto* w = std::get_if<WindowStop>(&rule)) {
        double width = std::max(1.0, w->hi - w->lo);
        return static_cast<int64_t>(200.0 * width * width);
    }
    if (std::holds_alternative<FixedTimeStop>(rule))
        return std::get<FixedTimeStop>(rule).steps;
    return 1'000'000;
}

int WalkConfig::effective_workers() const {
    return workers > 0 ? workers : omp_get_max_threads();
}

// ------------------------------------------------------------- public API

namespace {

StoppedSample pack_sample(const WalkFinal& fin) {
    StoppedSample out;
    out.stop_kind = fin.kind();
    out.stop_time = fin.stop_time();
    out.final = fin.element();
    out.final_rho = rho(out.final);
    out.final_c_abs = abs_value(out.final.c());
    out.exit_side = fin.exit_side();
    return out;
}

}  // namespace

StoppedSample sample_stopped_walk(const WalkConfig& cfg, uint64_t index) {
    GenericFinal fin = run_generic(cfg, index);
    return pack_sample(fin);
}

StoppedSample sample_stopped_walk_fast(const WalkConfig& cfg, uint64_t index) {
    std::optional<FastPlan> plan = build_fast_plan(cfg);
    if (!plan) throw std::invalid_argument("no fast plan for this walk configuration");
    Scratch scratch;
    scratch.init(*plan);
    FastRun run = run_fast(*plan, scratch, cfg.seed, index);
    FastFinal fin(*plan, scratch, run);
    return pack_sample(fin);
}

namespace {

// drives n trajectories over the chosen engine, invoking visit(index, final)
// from worker threads; visit must only write to per-index slots or
// thread-local tallies
template <typename Visit>
void drive(const WalkConfig& cfg, int64_t n, Visit&& visit) {
    std::optional<FastPlan> plan = build_fast_plan(cfg);
    int workers = cfg.effective_workers();
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    if (plan) {
        const FastPlan& p = *plan;
#pragma omp parallel num_threads(workers)
        {
            Scratch scratch;
            scratch.init(p);
#pragma omp for schedule(dynamic, 512)
            for (int64_t i = 0; i < n; ++i) {
                if (failed.load(std::memory_order_relaxed)) continue;
                try {
                    FastRun run = run_fast(p, scratch, cfg.seed, static_cast<uint64_t>(i));
                    FastFinal fin(p, scratch, run);
                    visit(static_cast<uint64_t>(i), fin);
                } catch (...) {
#pragma omp critical
                    if (!failed.exchange(true)) error = std::current_exception();
                }
            }
        }
    } else {
#pragma omp parallel for schedule(dynamic, 64) num_threads(workers)
        for (int64_t i = 0; i < n; ++i) {
            if (failed.load(std::memory_order_relaxed)) continue;
            try {
                GenericFinal fin = run_generic(cfg, static_cast<uint64_t>(i));
                visit(static_cast<uint64_t>(i), fin);
            } catch (...) {
#pragma omp critical
                if (!failed.exchange(true)) error = std::current_exception();
            }
        }
    }
    if (error) std::rethrow_exception(error);
}

}  // namespace

EstimateReport run_ensemble(const WalkConfig& cfg, int64_t n, const EnsembleSpec& stat) {
    std::vector<double> slots(static_cast<size_t>(n), std::numeric_limits<double>::quiet_NaN());
    std::vector<char> censored(static_cast<size_t>(n), 0);
    drive(cfg, n, [&](uint64_t i, const WalkFinal& fin) {
        bool c = fin.kind() == StopKind::Censored;
        censored[i] = c;
        if (c && !stat.include_censored) return;
        slots[i] = stat.value(fin);
    });
    std::vector<double> values;
    values.reserve(static_cast<size_t>(n));
    int64_t n_censored = 0;
    for (int64_t i = 0; i < n; ++i) {
        n_censored += censored[static_cast<size_t>(i)];
        double v = slots[static_cast<size_t>(i)];
        if (!std::isnan(v)) values.push_back(v);
    }
    EstimateReport rep = summarize(values, cfg.seed, cfg.effective_workers(), n_censored);
    rep.n_samples = n;
    return rep;
}

EstimateReport ensemble_stop_time(const WalkConfig& cfg, int64_t n) {
    EnsembleSpec spec;
    spec.value = [](const WalkFinal& f) { return static_cast<double>(f.stop_time()); };
    return run_ensemble(cfg, n, spec);
}

EstimateReport ensemble_c_small(const WalkConfig& cfg, int64_t n, const Rational& thr) {
    EnsembleSpec spec;
    spec.value = [&thr](const WalkFinal& f) { return f.c_abs_less(thr) ? 1.0 : 0.0; };
    return run_ensemble(cfg, n, spec);
}

std::vector<MsBinRow> ensemble_ms_conditional(const WalkConfig& cfg, int64_t n, double q,
                                              const Rational& thr) {
    WalkConfig c2 = cfg;
    c2.track_visited = true;
    int workers = c2.effective_workers();
    std::vector<std::vector<MsBinRow>> per_thread(static_cast<size_t>(workers));
    drive(c2, n, [&](uint64_t, const WalkFinal& fin) {
        if (fin.kind() == StopKind::Censored) return;
        int ms = fin.ms_below(q);
        auto& bins = per_thread[static_cast<size_t>(omp_get_thread_num())];
        if (static_cast<size_t>(ms) >= bins.size()) bins.resize(static_cast<size_t>(ms) + 1);
        bins[static_cast<size_t>(ms)].ms = ms;
        bins[static_cast<size_t>(ms)].count += 1;
        bins[static_cast<size_t>(ms)].small_c += fin.c_abs_less(thr) ? 1 : 0;
    });
    std::vector<MsBinRow> out;
    for (const auto& bins : per_thread) {
        if (bins.size() > out.size()) out.resize(bins.size());
        for (size_t i = 0; i < bins.size(); ++i) {
            out[i].ms = static_cast<int>(i);
            out[i].count += bins[i].count;
            out[i].small_c += bins[i].small_c;
        }
    }
    for (size_t i = 0; i < out.size(); ++i) out[i].ms = static_cast<int>(i);
    return out;
}

HittingTally ensemble_hitting(const WalkConfig& cfg, int64_t n) {
    if (!std::holds_alternative<TauSubgroupStop>(cfg.rule))
        throw std::invalid_argument("ensemble_hitting needs a TauSubgroup rule");
    int workers = cfg.effective_workers();
    struct Local {
        std::map<std::string, std::pair<AffineElement, int64_t>> counts;
    };
    std::vector<Local> locals(static_cast<size_t>(workers));
    std::vector<int64_t> taus(static_cast<size_t>(n), -1);
    drive(cfg, n, [&](uint64_t i, const WalkFinal& fin) {
        if (fin.kind() == StopKind::Censored) return;
        taus[i] = fin.stop_time();
        AffineElement el = fin.element();
        Local& loc = locals[static_cast<size_t>(omp_get_thread_num())];
        auto key = el.to_string();
        auto it = loc.counts.find(key);
        if (it == loc.counts.end()) loc.counts.emplace(key, std::make_pair(el, 1));
        else it->second.second += 1;
    });
    std::map<std::string, std::pair<AffineElement, int64_t>> merged;
    for (auto& loc : locals) {
        for (auto& [k, v] : loc.counts) {
            auto it = merged.find(k);
            if (it == merged.end()) merged.emplace(k, v);
            else it->second.second += v.second;
        }
    }
    HittingTally tally;
    for (auto& [k, v] : merged) tally.support.push_back({v.first, v.second});
    std::sort(tally.support.begin(), tally.support.end(), [](const auto& a, const auto& b) {
        if (a.count != b.count) return a.count > b.count;
        return a.element.to_string() < b.element.to_string();
    });
    for (int64_t i = 0; i < n; ++i) {
        if (taus[static_cast<size_t>(i)] >= 0) tally.tau_values.push_back(taus[static_cast<size_t>(i)]);
        else tally.n_censored += 1;
    }
    return tally;
}

std::vector<MomentRow> moment_bound_check(const MeasuredGroup& g, const std::vector<int64_t>& ts,
                                          int k, int64_t n, uint64_t seed, const BallIndex& ball,
                                          int workers) {
    std::vector<MomentRow> rows;
    for (int64_t t : ts) {
        MomentRow row;
        row.t = t;
        if (t == 0) {
            row.skipped = true;  // ratio would divide by zero
            rows.push_back(row);
            continue;
        }
        WalkConfig cfg;
        cfg.group = &g;
        cfg.start = AffineElement::identity(g.place());
        cfg.seed = derive_seed(seed, static_cast<uint64_t>(t));
        cfg.rule = FixedTimeStop{t};
        cfg.workers = workers;
        std::vector<double> slots(static_cast<size_t>(n), std::numeric_limits<double>::quiet_NaN());
        drive(cfg, n, [&](uint64_t i, const WalkFinal& fin) {
            std::optional<int> d = ball.distance(fin.element());
            if (d) slots[i] = std::pow(static_cast<double>(*d), k);
        });
        double sum = 0;
        for (int64_t i = 0; i < n; ++i) {
            double v = slots[static_cast<size_t>(i)];
            if (std::isnan(v)) row.n_censored += 1;
            else {
                sum += v;
                row.n_measured += 1;
            }
        }
        if (row.n_measured > 0)
            row.ratio = sum / static_cast<double>(row.n_measured) /
                        std::pow(static_cast<double>(t), k);
        rows.push_back(row);
    }
    return rows;
}

EstimateReport fixed_time_rho_mean(const MeasuredGroup& g, const AffineElement& start, int64_t t,
                                   int64_t n, uint64_t seed, int workers) {
    WalkConfig cfg;
    cfg.group = &g;
    cfg.start = start;
    cfg.seed = seed;
    cfg.rule = FixedTimeStop{t};
    cfg.workers = workers;
    EnsembleSpec spec;
    spec.value = [](const WalkFinal& f) { return f.rho_final().to_double(); };
    spec.include_censored = true;
    return run_ensemble(cfg, n, spec);
}

}  // namespace affharm
