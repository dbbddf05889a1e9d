#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "rbmh/chain.hpp"
#include "rbmh/target.hpp"

namespace rbmh {

/// Test functions are evaluated per accepted block so that block-level
/// quantities (like the control-variate draw used for the p(x) column) fit
/// the same interface as plain functions of the state.
using StateFunc = std::function<double(const State&)>;
using BlockFunc = std::function<double(const AcceptedBlock&)>;

/// Named test functions: "x", "x2", "ind_gt0", "ind_gt1", "p_proxy" (the
/// independent alpha(z, y0) draw), and for the probit posterior "beta1",
/// "beta2", "ind_beta2_gt0.5".
struct HSpec {
    std::string name;
    BlockFunc block_fn;
    StateFunc state_fn;   // null for block-level functions such as p_proxy
    bool needs_cv = false;
};
HSpec resolve_h(const std::string& name);

/// Plain ergodic average (1/N) sum_t h(x_t) over the path.
double delta_plain(const ChainRecord& record, const StateFunc& h);

/// Same estimator in block form: each block contributes h(z) added
/// n_occupation times, so the two routes agree exactly.
double delta_plain_blocks(std::span<const AcceptedBlock> blocks, std::int64_t n_budget,
                          const StateFunc& h);

/// Self-normalized weighted mean sum w_i h(z_i) / sum w_i using the stored
/// weight of the given order.
double delta_weighted(std::span<const AcceptedBlock> blocks, int order, const BlockFunc& h);
double delta_weighted(std::span<const AcceptedBlock> blocks, std::span<const double> weights,
                      const BlockFunc& h);

/// Importance-sampling reference with exact weights 1/p(z_i).
double delta_oracle(std::span<const AcceptedBlock> blocks, const AnalyticOracle& oracle,
                    const BlockFunc& h);

struct CvAdjusted {
    double value = 0.0;
    double slope = 0.0;
    bool fallback = false;  // degenerate control, plain weighted value returned
    std::vector<double> components;  // adjusted numerator terms
};

/// Control-variate adjustment: regress w_i h(z_i) on the control
/// c_i = w_i alpha(z_i, y0_i) (known mean 1), subtract slope * (c_i - 1)
/// from each numerator term, renormalize by sum w_i.
CvAdjusted delta_cv(std::span<const AcceptedBlock> blocks, int order, const BlockFunc& h);

/// Var_i(w_i h(z_i)) / Var_i(n_i h(z_i)) over the given blocks.
double component_variance_ratio(std::span<const AcceptedBlock> blocks, int order,
                                const BlockFunc& h);

/// Component vectors used by the experiment harness for pooled variances.
std::vector<double> weighted_components(std::span<const AcceptedBlock> blocks, int order,
                                        const BlockFunc& h);
std::vector<double> count_components(std::span<const AcceptedBlock> blocks, const BlockFunc& h);
std::vector<double> oracle_components(std::span<const AcceptedBlock> blocks,
                                      const AnalyticOracle& oracle, const BlockFunc& h);

}  // namespace rbmh
