#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rbmh/chain.hpp"
#include "rbmh/rng.hpp"
#include "rbmh/state.hpp"
#include "rbmh/target.hpp"

namespace rbmh {

/// Which estimator of 1/p(z) to compute: the first `order` rejection
/// indicators are integrated out into products of (1 - alpha), the rest are
/// simulated; order 0 is a plain geometric draw, kInfiniteOrder the fully
/// integrated series.
struct WeightSpec {
    int order = kInfiniteOrder;
    std::int64_t max_proposals = 1'000'000;
    double product_floor = 1e-12;  // early stop for the infinite series

    void validate() const;
};

struct WeightResult {
    double xi = 1.0;
    std::int64_t proposals_used = 0;
    /// True when the evaluation hit max_proposals (any order) or
    /// product_floor (infinite order); the estimate is then biased low by a
    /// documented, bounded amount instead of exactly unbiased.
    bool truncated = false;
};

/// Unbiased estimate of 1/p(z) from fresh iid proposals at z.
WeightResult xi_hat_k(const State& z, const WeightSpec& spec, const TargetModel& target,
                      const ProposalKernel& proposal, RngStream& rng);

/// The leave probability p and its squared-alpha analogue r at one state.
struct PRPair {
    double p = 1.0;
    double r = 1.0;

    /// Requires 0 < r <= p <= 1 and 1 - 2p + r >= 0 (the latter is
    /// E[(1-alpha)^2] >= 0, needed for the geometric series).
    void validate() const;
};

/// Closed-form conditional variance of the order-k estimator (k >= 0);
/// reduces to the geometric variance (1-p)/p^2 at k = 0.
double var_xi_k_closed(const PRPair& pr, int k);

/// Limit of var_xi_k_closed as k -> infinity.
double var_xi_inf_closed(const PRPair& pr);

/// One fresh draw y0 ~ q(.|z); returns alpha(z, y0), an unbiased estimate
/// of p(z) independent of everything else, usable as a control variate.
double control_variate_draw(const State& z, const TargetModel& target,
                            const ProposalKernel& proposal, RngStream& rng);

struct WeightAccounting {
    std::int64_t proposals = 0;
    std::int64_t truncated_blocks = 0;
};

/// Fill the weight maps of the complete blocks of a record, in block order,
/// one entry per requested order. Order 0 reuses the path's own occupation
/// count (the two are identically distributed; the path count preserves the
/// exact delta identity) unless `fresh_order0` is set.
WeightAccounting attach_weights(std::span<AcceptedBlock> complete_blocks,
                                std::span<const int> orders, const WeightSpec& spec,
                                const TargetModel& target, const ProposalKernel& proposal,
                                RngStream& rng, bool fresh_order0 = false);

/// Fill cv_draw for each complete block, in block order. Returns the number
/// of proposals consumed (one per block).
std::int64_t attach_control_variates(std::span<AcceptedBlock> complete_blocks,
                                     const TargetModel& target, const ProposalKernel& proposal,
                                     RngStream& rng);

}  // namespace rbmh
