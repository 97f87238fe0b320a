#include "affharm/hitting.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <unordered_map>

namespace affharm {

HittingStats hitting_time_stats(const MeasuredGroup& g, const CosetLabeling& labeling, int64_t n,
                                uint64_t seed, int workers) {
    if (!labeling.irreducible())
        throw InvalidGroupSpecError("coset chain is not irreducible for " + g.name());
    WalkConfig cfg;
    cfg.group = &g;
    cfg.start = AffineElement::identity(g.place());
    cfg.seed = seed;
    cfg.rule = TauSubgroupStop{&labeling};
    cfg.observable = g.virtually_abelian() ? Observable::CValue : Observable::Rho;
    cfg.workers = workers;
    HittingTally tally = ensemble_hitting(cfg, n);

    HittingStats out;
    out.index = labeling.index();
    std::vector<double> vals(tally.tau_values.begin(), tally.tau_values.end());
    out.tau_mean = summarize(vals, seed, cfg.effective_workers(), tally.n_censored);
    out.tau_tail = tail_fit(survival_curve(tally.tau_values), 0.0);
    double gap = std::fabs(out.tau_mean.estimate - static_cast<double>(labeling.index()));
    // a point-mass tau (deterministic return) has a vacuous tail
    bool tail_ok = out.tau_tail.n_points < 2 || out.tau_tail.slope < 0;
    out.pass = gap <= 3.0 * out.tau_mean.std_error && tail_ok;
    return out;
}

namespace {

struct ElementKey {
    size_t operator()(const AffineElement& x) const { return x.hash(); }
};

}  // namespace

HittingMeasure hitting_measure_exact(const MeasuredGroup& g, const CosetLabeling& labeling,
                                     size_t state_budget, double mass_tolerance) {
    if (!labeling.irreducible())
        throw InvalidGroupSpecError("coset chain is not irreducible for " + g.name());
    AffineElement id = AffineElement::identity(g.place());

    // enumerate the transient closure (elements off H reachable before the
    // first return), absorbing on label-0 elements
    std::unordered_map<AffineElement, size_t, ElementKey> transient_index;
    std::vector<AffineElement> transients;
    std::deque<size_t> queue;
    std::unordered_map<AffineElement, Rational, ElementKey> direct_absorb;
    std::vector<Rational> alpha;  // initial mass per transient

    auto intern = [&](const AffineElement& x) -> size_t {
        auto it = transient_index.find(x);
        if (it != transient_index.end()) return it->second;
        if (transients.size() >= state_budget)
            throw BallBudgetError("hitting_measure_exact: transient state budget exceeded");
        size_t idx = transients.size();
        transient_index.emplace(x, idx);
        transients.push_back(x);
        alpha.push_back(Rational(0));
        queue.push_back(idx);
        return idx;
    };

    for (size_t s = 0; s < g.support().size(); ++s) {
        AffineElement x = id * g.support()[s].element;
        const Rational& w = g.support()[s].weight;
        if (labeling.label(x) == 0) {
            auto it = direct_absorb.find(x);
            if (it == direct_absorb.end()) direct_absorb.emplace(x, w);
            else it->second = it->second + w;
        } else {
            size_t i = intern(x);
            alpha[i] = alpha[i] + w;
        }
    }

    struct Edge {
        size_t to;
        Rational w;
    };
    std::vector<std::vector<Edge>> trans_edges;      // transient -> transient
    std::vector<std::vector<std::pair<AffineElement, Rational>>> absorb_edges;
    while (!queue.empty()) {
        size_t i = queue.front();
        queue.pop_front();
        if (trans_edges.size() <= i) {
            trans_edges.resize(transients.size());
            absorb_edges.resize(transients.size());
        }
        AffineElement x = transients[i];
        for (size_t s = 0; s < g.support().size(); ++s) {
            AffineElement y = x * g.support()[s].element;
            const Rational& w = g.support()[s].weight;
            if (labeling.label(y) == 0) {
                absorb_edges[i].push_back({y, w});
            } else {
                size_t j = intern(y);
                if (trans_edges.size() <= std::max(i, j)) {
                    trans_edges.resize(transients.size());
                    absorb_edges.resize(transients.size());
                }
                trans_edges[i].push_back({j, w});
            }
        }
    }
    trans_edges.resize(transients.size());
    absorb_edges.resize(transients.size());

    // visit counts: nu (I - Q) = alpha, dense elimination on the transpose
    size_t n = transients.size();
    std::vector<std::vector<Rational>> mat(n, std::vector<Rational>(n + 1, Rational(0)));
    for (size_t i = 0; i < n; ++i) {
        mat[i][i] = Rational(1);
        mat[i][n] = alpha[i];
    }
    for (size_t i = 0; i < n; ++i)
        for (const Edge& e : trans_edges[i]) mat[e.to][i] = mat[e.to][i] - e.w;
    for (size_t col = 0; col < n; ++col) {
        size_t piv = col;
        while (piv < n && mat[piv][col].is_zero()) ++piv;
        if (piv == n) throw std::runtime_error("hitting_measure_exact: singular chain system");
        std::swap(mat[col], mat[piv]);
        for (size_t row = 0; row < n; ++row) {
            if (row == col || mat[row][col].is_zero()) continue;
            Rational f = mat[row][col] / mat[col][col];
            for (size_t k = col; k <= n; ++k) mat[row][k] = mat[row][k] - f * mat[col][k];
        }
    }
    std::vector<Rational> nu(n);
    for (size_t i = 0; i < n; ++i) nu[i] = mat[i][n] / mat[i][i];

    std::unordered_map<AffineElement, Rational, ElementKey> measure = direct_absorb;
    for (size_t i = 0; i < n; ++i) {
        for (const auto& [h, w] : absorb_edges[i]) {
            Rational add = nu[i] * w;
            auto it = measure.find(h);
            if (it == measure.end()) measure.emplace(h, add);
            else it->second = it->second + add;
        }
    }
    Rational total(0);
    for (const auto& [h, p] : measure) total = total + p;
    Rational leak = Rational(1) - total;
    if (leak.to_double() > mass_tolerance)
        throw BallBudgetError("hitting_measure_exact: escaping mass " +
                              std::to_string(leak.to_double()) + " above tolerance");

    HittingMeasure out;
    out.exact = true;
    out.residual_mass = leak.to_double();
    Rational etau(1);
    for (const Rational& v : nu) etau = etau + v;
    out.expected_tau_exact = etau;
    for (const auto& [h, p] : measure) out.support.push_back({h, p, p.to_double(), 0});
    std::sort(out.support.begin(), out.support.end(), [](const auto& a, const auto& b) {
        if (a.p != b.p) return a.p > b.p;
        return a.element.to_string() < b.element.to_string();
    });
    return out;
}

HittingMeasure hitting_measure_mc(const MeasuredGroup& g, const CosetLabeling& labeling, int64_t n,
                                  uint64_t seed, int workers) {
    WalkConfig cfg;
    cfg.group = &g;
    cfg.start = AffineElement::identity(g.place());
    cfg.seed = seed;
    cfg.rule = TauSubgroupStop{&labeling};
    cfg.workers = workers;
    HittingTally tally = ensemble_hitting(cfg, n);
    HittingMeasure out;
    out.exact = false;
    out.residual_mass = static_cast<double>(tally.n_censored) / static_cast<double>(n);
    for (const auto& atom : tally.support)
        out.support.push_back({atom.element, Rational(0),
                               static_cast<double>(atom.count) / static_cast<double>(n),
                               atom.count});
    return out;
}

SmoothnessDiagnostic hitting_smoothness(const MeasuredGroup& g, const CosetLabeling& labeling,
                                        int64_t n, uint64_t seed, const BallIndex& ball,
                                        int workers) {
    WalkConfig cfg;
    cfg.group = &g;
    cfg.start = AffineElement::identity(g.place());
    cfg.seed = seed;
    cfg.rule = TauSubgroupStop{&labeling};
    cfg.workers = workers;
    HittingTally tally = ensemble_hitting(cfg, n);

    SmoothnessDiagnostic out;
    out.length_histogram.assign(static_cast<size_t>(ball.radius()) + 1, 0);
    for (const auto& atom : tally.support) {
        std::optional<int> d = ball.distance(atom.element);
        if (d) out.length_histogram[static_cast<size_t>(*d)] += atom.count;
        else out.beyond_radius += atom.count;
    }
    int64_t total = out.beyond_radius;
    for (int64_t c : out.length_histogram) total += c;
    // log-survival of |X_tau|; mass beyond the ball radius stays in every
    // tail count, so truncation cannot flatten the fit
    std::vector<double> xs, ys;
    int64_t above = total;
    for (size_t L = 0; L < out.length_histogram.size(); ++L) {
        above -= out.length_histogram[L];
        if (above <= 0) break;
        xs.push_back(static_cast<double>(L));
        ys.push_back(std::log(static_cast<double>(above) / static_cast<double>(total)));
    }
    out.word_length_tail = linear_fit(xs, ys);
    out.pass = out.word_length_tail.slope < 0 && xs.size() >= 3;
    return out;
}

}  // namespace affharm
