#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace rbmh::stats {

double mean(std::span<const double> xs);

/// Unbiased sample variance (n-1 denominator); requires n >= 2.
double sample_variance(std::span<const double> xs);

/// Standard error of the sample mean.
double mean_se(std::span<const double> xs);

/// Large-sample standard error of the sample variance, sqrt((m4 - s^4)/n).
double variance_se(std::span<const double> xs);

/// Type-7 (linear interpolation) quantile of an unsorted sample.
double quantile(std::vector<double> xs, double q);

/// Batch-means standard error of the mean of a correlated series, using
/// floor(sqrt(n)) batches.
double batch_means_se(std::span<const double> series);

/// Regularized upper incomplete gamma Q(a, x) (series + continued fraction).
double gamma_q(double a, double x);

/// Survival function of the chi-squared distribution.
double chi_squared_sf(double x, double df);

/// Chi-square goodness-of-fit p-value of positive integer draws against a
/// geometric law with success probability p (support 1, 2, ...). Cells are
/// 1..B plus a tail cell, B chosen so expected counts stay above ~5.
double geometric_gof_pvalue(std::span<const std::int64_t> draws, double p);

/// Chi-square homogeneity p-value for an observed contingency table
/// (rows: groups, columns: outcomes).
double homogeneity_pvalue(const std::vector<std::vector<std::int64_t>>& table);

/// Adaptive Simpson quadrature on [a, b] to absolute tolerance tol.
double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-10,
                 int max_depth = 40);

/// Ordinary least squares slope of y on x.
double ols_slope(std::span<const double> y, std::span<const double> x);

/// Per-group sufficient statistics for pooled-variance ratios.
struct VarStats {
    std::int64_t n = 0;
    double sum = 0.0;
    double sum_sq = 0.0;

    void add(double v) {
        ++n;
        sum += v;
        sum_sq += v * v;
    }
    void merge(const VarStats& o) {
        n += o.n;
        sum += o.sum;
        sum_sq += o.sum_sq;
    }
    double variance() const;  // n-1 denominator
};

/// Pooled component-variance ratio num/den with a delete-one-group
/// jackknife standard error.
struct RatioEstimate {
    double ratio = 0.0;
    double se = 0.0;
};
RatioEstimate pooled_variance_ratio(std::span<const VarStats> num, std::span<const VarStats> den);

}  // namespace rbmh::stats
