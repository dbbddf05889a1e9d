#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "rbmh/stats.hpp"
#include "rbmh/target.hpp"

namespace rbmh {

/// Flat experiment description; serializable to/from the JSON config file.
/// Command-line flags of the same names override file values.
struct ExperimentConfig {
    std::string model;            // gaussian_rw | cauchy_independence | exp_independence |
                                  // geometric_rw | probit
    double lambda = 1.0;          // exp_independence target rate
    std::vector<double> scales;   // tau (RW/Cauchy/probit), mu (exp), beta (geometric)
    std::int64_t iterations = 100;
    int replications = 1000;
    std::vector<int> k_list;      // weight orders; kInfiniteOrder = -1 = "inf"
    std::vector<std::string> h_list;
    std::uint64_t seed = 0;
    bool seed_set = false;        // seeds are always explicit, never wall clock
    std::string output_dir;
    bool oracle = false;          // add exact importance-sampling reference rows
    bool control_variate = false; // add control-variate rows and draws
    bool envelope = false;        // retain running traces for figure data
    std::string envelope_h = "x";
    int threads = 0;              // 0 = hardware concurrency
    std::string data_path;        // probit only
    std::string bmi_column = "bmi";
    std::string outcome_column = "type";
    std::int64_t max_weight_proposals = 1'000'000;
    double product_floor = 1e-12;

    static ExperimentConfig from_json(const nlohmann::json& j);
    nlohmann::ordered_json to_json() const;
    void validate() const;
};

struct Accounting {
    std::int64_t path_proposals = 0;
    std::int64_t weight_proposals = 0;
    std::int64_t cv_draws = 0;
    std::int64_t truncated_blocks = 0;

    void merge(const Accounting& o) {
        path_proposals += o.path_proposals;
        weight_proposals += o.weight_proposals;
        cv_draws += o.cv_draws;
        truncated_blocks += o.truncated_blocks;
    }
    std::int64_t total() const { return path_proposals + weight_proposals + cv_draws; }
};

struct EnvelopeBand {
    std::vector<double> min, q05, q95, max;
};

struct ScaleResult {
    double scale = 0.0;
    std::map<std::string, std::map<int, stats::RatioEstimate>> ratios;  // h -> k -> cell
    std::map<std::string, stats::RatioEstimate> oracle_ratios;
    std::map<std::string, stats::RatioEstimate> cv_ratios;
    std::map<std::string, std::vector<double>> delta_plain_reps;                 // h -> [R]
    std::map<std::string, std::map<int, std::vector<double>>> delta_k_reps;      // h -> k -> [R]
    std::map<std::string, std::vector<double>> delta_oracle_reps;
    std::map<std::string, std::vector<double>> delta_cv_reps;
    std::vector<double> acceptance_rates;
    EnvelopeBand env_delta, env_delta_inf;  // filled when envelope is on
    Accounting accounting;
};

struct ExperimentReport {
    ExperimentConfig config;
    std::vector<ScaleResult> scales;
    Accounting totals;
    std::vector<double> wall_ms;  // per (scale, replication); never serialized
                                  // into report.json (timings are not reproducible)

    nlohmann::ordered_json to_json() const;
};

/// Construct the configured model at one scale value. Probit data is loaded
/// once by run_experiment and passed through here.
Model build_model(const ExperimentConfig& config, double scale);

/// Run R seeded replications per scale (parallel over replications; results
/// are independent of scheduling) and assemble every requested table cell.
ExperimentReport run_experiment(const ExperimentConfig& config);

/// Write report.json plus the delimited table/envelope files and the
/// generated column documentation into `dir`. Timings go to timings.csv,
/// which is the only non-reproducible output.
void write_outputs(const ExperimentReport& report, const std::string& dir);

/// Emit table CSVs / envelope CSVs from a previously written report.json.
void write_tables_from_json(const nlohmann::json& report, const std::string& dir);
void write_figures_from_json(const nlohmann::json& report, const std::string& dir);

/// Paper-layout text rendering (rows: scale, columns: h).
std::string render_text_tables(const nlohmann::json& report);

}  // namespace rbmh
