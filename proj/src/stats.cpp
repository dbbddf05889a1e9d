#include "rbmh/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rbmh::stats {

double mean(std::span<const double> xs) {
    if (xs.empty()) throw std::invalid_argument("mean: empty sample");
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs) {
    const auto n = xs.size();
    if (n < 2) throw std::invalid_argument("sample_variance: need at least two values");
    const double m = mean(xs);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return s / static_cast<double>(n - 1);
}

double mean_se(std::span<const double> xs) {
    return std::sqrt(sample_variance(xs) / static_cast<double>(xs.size()));
}

double variance_se(std::span<const double> xs) {
    const auto n = xs.size();
    if (n < 4) throw std::invalid_argument("variance_se: sample too small");
    const double m = mean(xs);
    double m2 = 0.0, m4 = 0.0;
    for (double x : xs) {
        const double d = x - m;
        m2 += d * d;
        m4 += d * d * d * d;
    }
    m2 /= static_cast<double>(n);
    m4 /= static_cast<double>(n);
    const double v = std::max(m4 - m2 * m2, 0.0);
    return std::sqrt(v / static_cast<double>(n));
}

double quantile(std::vector<double> xs, double q) {
    if (xs.empty()) throw std::invalid_argument("quantile: empty sample");
    if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile: q outside [0, 1]");
    std::sort(xs.begin(), xs.end());
    const double h = q * static_cast<double>(xs.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, xs.size() - 1);
    const double frac = h - std::floor(h);
    return xs[lo] + frac * (xs[hi] - xs[lo]);
}

double batch_means_se(std::span<const double> series) {
    const auto n = series.size();
    if (n < 16) throw std::invalid_argument("batch_means_se: series too short");
    const auto b = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n))));
    const std::size_t len = n / b;
    std::vector<double> batch(b);
    for (std::size_t i = 0; i < b; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < len; ++j) s += series[i * len + j];
        batch[i] = s / static_cast<double>(len);
    }
    return std::sqrt(sample_variance(batch) / static_cast<double>(b));
}

namespace {

// Regularized lower incomplete gamma by series expansion, x < a + 1.
double gamma_p_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < 10000; ++n) {
        term *= x / (a + n);
        sum += term;
        if (std::abs(term) < std::abs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Regularized upper incomplete gamma by Lentz continued fraction, x >= a + 1.
double gamma_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 10000; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double gamma_q(double a, double x) {
    if (!(a > 0.0) || x < 0.0) throw std::domain_error("gamma_q: need a > 0 and x >= 0");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_cf(a, x);
}

double chi_squared_sf(double x, double df) { return gamma_q(df / 2.0, x / 2.0); }

double geometric_gof_pvalue(std::span<const std::int64_t> draws, double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("geometric_gof_pvalue: p in (0,1)");
    const auto n = static_cast<double>(draws.size());
    if (draws.size() < 100) throw std::invalid_argument("geometric_gof_pvalue: sample too small");
    // Tail cell starts where the expected count would drop below ~5.
    int tail_start = 1;
    double cell_prob = p;
    while (n * cell_prob * (1.0 - p) >= 5.0 && tail_start < 200) {
        cell_prob *= 1.0 - p;
        ++tail_start;
    }
    const int cells = tail_start + 1;  // 1..tail_start plus the tail
    std::vector<std::int64_t> observed(cells, 0);
    for (std::int64_t v : draws) {
        if (v < 1) throw std::invalid_argument("geometric_gof_pvalue: draw < 1");
        const int idx = v <= tail_start ? static_cast<int>(v - 1) : cells - 1;
        observed[idx] += 1;
    }
    double stat = 0.0;
    double prob = p;
    for (int i = 0; i < cells; ++i) {
        const double expect = (i == cells - 1)
                                  ? n * std::pow(1.0 - p, tail_start)  // P(G > tail_start)
                                  : n * prob;
        prob *= 1.0 - p;
        const double d = static_cast<double>(observed[i]) - expect;
        stat += d * d / expect;
    }
    return chi_squared_sf(stat, cells - 1);
}

double homogeneity_pvalue(const std::vector<std::vector<std::int64_t>>& table) {
    const std::size_t rows = table.size();
    if (rows < 2) throw std::invalid_argument("homogeneity_pvalue: need >= 2 rows");
    const std::size_t cols = table.front().size();
    std::vector<double> row_sum(rows, 0.0), col_sum(cols, 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
        if (table[i].size() != cols) throw std::invalid_argument("homogeneity_pvalue: ragged table");
        for (std::size_t j = 0; j < cols; ++j) {
            row_sum[i] += static_cast<double>(table[i][j]);
            col_sum[j] += static_cast<double>(table[i][j]);
            total += static_cast<double>(table[i][j]);
        }
    }
    double stat = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            const double expect = row_sum[i] * col_sum[j] / total;
            if (expect <= 0.0) throw std::invalid_argument("homogeneity_pvalue: empty margin");
            const double d = static_cast<double>(table[i][j]) - expect;
            stat += d * d / expect;
        }
    }
    const double df = static_cast<double>((rows - 1) * (cols - 1));
    return chi_squared_sf(stat, df);
}

namespace {

double simpson(double a, double fa, double b, double fb, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive(const std::function<double(double)>& f, double a, double fa, double b, double fb,
                double m, double fm, double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = simpson(a, fa, m, fm, flm);
    const double right = simpson(m, fm, b, fb, frm);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1) +
           adaptive(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b, double tol,
                 int max_depth) {
    const double m = 0.5 * (a + b);
    const double fa = f(a), fb = f(b), fm = f(m);
    const double whole = simpson(a, fa, b, fb, fm);
    return adaptive(f, a, fa, b, fb, m, fm, whole, tol, max_depth);
}

double ols_slope(std::span<const double> y, std::span<const double> x) {
    if (y.size() != x.size() || y.size() < 2)
        throw std::invalid_argument("ols_slope: mismatched or tiny samples");
    const double mx = mean(x);
    const double my = mean(y);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    if (sxx == 0.0) throw std::domain_error("ols_slope: zero-variance regressor");
    return sxy / sxx;
}

double VarStats::variance() const {
    if (n < 2) throw std::invalid_argument("VarStats::variance: need n >= 2");
    const double nn = static_cast<double>(n);
    return std::max(sum_sq - sum * sum / nn, 0.0) / (nn - 1.0);
}

RatioEstimate pooled_variance_ratio(std::span<const VarStats> num, std::span<const VarStats> den) {
    if (num.size() != den.size() || num.empty())
        throw std::invalid_argument("pooled_variance_ratio: group mismatch");
    VarStats num_all, den_all;
    for (const auto& s : num) num_all.merge(s);
    for (const auto& s : den) den_all.merge(s);
    const double den_var = den_all.variance();
    if (den_var == 0.0) throw std::domain_error("pooled_variance_ratio: zero denominator variance");
    RatioEstimate est;
    est.ratio = num_all.variance() / den_var;
    if (num.size() < 2) {
        est.se = std::numeric_limits<double>::quiet_NaN();
        return est;
    }
    // Delete-one-group jackknife.
    const auto g = num.size();
    std::vector<double> loo(g);
    double loo_mean = 0.0;
    for (std::size_t i = 0; i < g; ++i) {
        VarStats n_i = num_all, d_i = den_all;
        n_i.n -= num[i].n;
        n_i.sum -= num[i].sum;
        n_i.sum_sq -= num[i].sum_sq;
        d_i.n -= den[i].n;
        d_i.sum -= den[i].sum;
        d_i.sum_sq -= den[i].sum_sq;
        loo[i] = n_i.variance() / d_i.variance();
        loo_mean += loo[i];
    }
    loo_mean /= static_cast<double>(g);
    double ss = 0.0;
    for (double v : loo) ss += (v - loo_mean) * (v - loo_mean);
    est.se = std::sqrt(ss * static_cast<double>(g - 1) / static_cast<double>(g));
    return est;
}

}  // namespace rbmh::stats
