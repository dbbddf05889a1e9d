#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "rbmh/target.hpp"

namespace rbmh {

/// Design matrix (intercept, standardized BMI) and binary outcomes.
struct ProbitData {
    std::vector<std::array<double, 2>> x;  // column 0 is 1.0, column 1 standardized
    std::vector<int> y;
    double bmi_mean = 0.0;  // raw-scale standardization parameters
    double bmi_sd = 1.0;

    std::int64_t n_obs() const { return static_cast<std::int64_t>(y.size()); }
    void validate() const;  // both classes present, sizes match
};

struct ProbitLoadSpec {
    std::string bmi_column = "bmi";
    std::string outcome_column = "type";
};

/// Read a delimited text file (comma or whitespace, header row required),
/// pick the configured columns, standardize BMI to mean 0 / sd 1. Outcomes
/// accept 0/1 and Yes/No style labels.
ProbitData load_pima(const std::string& path, const ProbitLoadSpec& spec = {});

/// Build ProbitData from already-raw covariate/outcome vectors (standardizes).
ProbitData make_probit_data(const std::vector<double>& bmi_raw, const std::vector<int>& outcomes);

/// Synthetic dataset drawn from the model itself: standardized covariate,
/// latent z = x'beta + N(0,1), y = 1{z > 0}.
ProbitData generate_probit_data(std::int64_t n_obs, const std::array<double, 2>& beta,
                                std::uint64_t seed);

void save_probit_csv(const ProbitData& data, const std::string& path);

/// Numerically stable log Phi; no catastrophic underflow for |t| <= 40.
double log_norm_cdf(double t);

/// Flat-prior log-posterior: sum_i [y log Phi(x'b) + (1-y) log Phi(-x'b)].
double log_posterior(const std::array<double, 2>& beta, const ProbitData& data);

std::array<double, 2> grad_log_posterior(const std::array<double, 2>& beta,
                                         const ProbitData& data);

struct MleResult {
    std::array<double, 2> beta{};
    std::array<std::array<double, 2>, 2> fisher_info{};  // -Hessian at the MLE
    std::array<double, 2> standard_errors{};
    int iterations = 0;
};

/// Newton-Raphson MLE, stops at gradient norm < 1e-8 (<= 100 iterations).
MleResult fit_mle_detail(const ProbitData& data);
std::array<double, 2> fit_mle(const ProbitData& data);

/// Posterior target (flat prior) with a two-dimensional Gaussian random
/// walk of single scale tau; the chain starts from the MLE.
Model make_probit_model(std::shared_ptr<const ProbitData> data, double tau);

}  // namespace rbmh
