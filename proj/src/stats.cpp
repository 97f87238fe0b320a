#include "affharm/stats.hpp"

#include <algorithm>
#include <cmath>

namespace affharm {

EstimateReport summarize(const std::vector<double>& values, uint64_t seed, int workers,
                         int64_t n_censored) {
    EstimateReport r;
    r.seed = seed;
    r.worker_count = workers;
    r.n_samples = static_cast<int64_t>(values.size()) + n_censored;
    r.n_censored = n_censored;
    if (values.empty()) return r;
    double sum = 0.0;
    for (double v : values) sum += v;
    double mean = sum / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    r.estimate = mean;
    if (values.size() > 1)
        r.std_error = std::sqrt(ss / (static_cast<double>(values.size()) - 1.0) /
                                static_cast<double>(values.size()));
    return r;
}

LinearFit linear_fit(const std::vector<double>& xs, const std::vector<double>& ys) {
    LinearFit f;
    f.n_points = xs.size();
    if (xs.size() < 2 || xs.size() != ys.size()) return f;
    double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
        syy += ys[i] * ys[i];
    }
    double vxx = sxx - sx * sx / n;
    double vyy = syy - sy * sy / n;
    double vxy = sxy - sx * sy / n;
    if (vxx <= 0) return f;
    f.slope = vxy / vxx;
    f.intercept = (sy - f.slope * sx) / n;
    f.r_squared = vyy > 0 ? vxy * vxy / (vxx * vyy) : 1.0;
    return f;
}

SurvivalCurve survival_curve(std::vector<int64_t> samples) {
    SurvivalCurve c;
    if (samples.empty()) return c;
    std::sort(samples.begin(), samples.end());
    double n = static_cast<double>(samples.size());
    size_t i = 0;
    while (i < samples.size()) {
        int64_t v = samples[i];
        while (i < samples.size() && samples[i] == v) ++i;
        size_t above = samples.size() - i;  // strictly greater than v
        if (above == 0) break;
        c.t.push_back(static_cast<double>(v));
        c.log_survival.push_back(std::log(static_cast<double>(above) / n));
    }
    return c;
}

LinearFit tail_fit(const SurvivalCurve& curve, double drop_head_fraction) {
    size_t n = curve.t.size();
    size_t start = static_cast<size_t>(drop_head_fraction * static_cast<double>(n));
    if (n - start < 3 && n >= 3) start = n - 3;
    std::vector<double> xs(curve.t.begin() + start, curve.t.end());
    std::vector<double> ys(curve.log_survival.begin() + start, curve.log_survival.end());
    return linear_fit(xs, ys);
}

int max_separated(std::vector<double> points) {
    if (points.empty()) return 0;
    std::sort(points.begin(), points.end());
    int count = 1;
    double last = points.front();
    for (double v : points) {
        if (v - last >= 1.0 - 1e-12) {
            ++count;
            last = v;
        }
    }
    return count;
}

std::vector<double> symmetric_eigenvalues(std::vector<std::vector<double>> m) {
    size_t n = m.size();
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (size_t i = 0; i < n; ++i)
            for (size_t j = i + 1; j < n; ++j) off += m[i][j] * m[i][j];
        if (off < 1e-30) break;
        for (size_t p = 0; p < n; ++p) {
            for (size_t q = p + 1; q < n; ++q) {
                if (std::fabs(m[p][q]) < 1e-300) continue;
                double theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                double cs = 1.0 / std::sqrt(t * t + 1.0);
                double sn = t * cs;
                for (size_t k = 0; k < n; ++k) {
                    double mkp = m[k][p], mkq = m[k][q];
                    m[k][p] = cs * mkp - sn * mkq;
                    m[k][q] = sn * mkp + cs * mkq;
                }
                for (size_t k = 0; k < n; ++k) {
                    double mpk = m[p][k], mqk = m[q][k];
                    m[p][k] = cs * mpk - sn * mqk;
                    m[q][k] = sn * mpk + cs * mqk;
                }
            }
        }
    }
    std::vector<double> eig(n);
    for (size_t i = 0; i < n; ++i) eig[i] = m[i][i];
    std::sort(eig.begin(), eig.end());
    return eig;
}

int numerical_rank(const std::vector<std::vector<double>>& m, double tol_rel) {
    size_t rows = m.size();
    if (rows == 0) return 0;
    size_t cols = m[0].size();
    // Gram matrix of the rows; singular values are sqrt of its eigenvalues
    std::vector<std::vector<double>> gram(rows, std::vector<double>(rows, 0.0));
    for (size_t i = 0; i < rows; ++i)
        for (size_t j = i; j < rows; ++j) {
            double s = 0.0;
            for (size_t k = 0; k < cols; ++k) s += m[i][k] * m[j][k];
            gram[i][j] = gram[j][i] = s;
        }
    std::vector<double> eig = symmetric_eigenvalues(std::move(gram));
    double max_eig = eig.empty() ? 0.0 : std::max(0.0, eig.back());
    if (max_eig <= 0.0) return 0;
    double sigma_max = std::sqrt(max_eig);
    double cut = tol_rel * sigma_max;
    int rank = 0;
    for (double e : eig)
        if (e > 0 && std::sqrt(e) > cut) ++rank;
    return rank;
}

}  // namespace affharm
