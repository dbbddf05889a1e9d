#include "rbmh/weights.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rbmh {

void WeightSpec::validate() const {
    if (order != kInfiniteOrder && order < 0)
        throw std::invalid_argument("WeightSpec: order must be >= 0 or kInfiniteOrder");
    if (max_proposals < 1) throw std::invalid_argument("WeightSpec: max_proposals must be >= 1");
    if (order != kInfiniteOrder && max_proposals < order)
        throw std::invalid_argument("WeightSpec: max_proposals must be >= order");
    if (!(product_floor >= 0.0 && product_floor < 1.0))
        throw std::invalid_argument("WeightSpec: product_floor must be in [0, 1)");
}

void PRPair::validate() const {
    if (!(p > 0.0 && p <= 1.0)) throw std::domain_error("PRPair: p must be in (0, 1]");
    if (!(r > 0.0 && r <= p)) throw std::domain_error("PRPair: need 0 < r <= p");
    if (!(1.0 - 2.0 * p + r >= 0.0))
        throw std::domain_error("PRPair: 1 - 2p + r must be >= 0 (it is E[(1-alpha)^2])");
}

namespace {

double alpha_or_throw(const State& z, const State& y, const TargetModel& target,
                      const ProposalKernel& proposal) {
    const double a = acceptance_prob(z, y, target, proposal);
    if (std::isnan(a)) throw std::runtime_error("xi_hat_k: alpha evaluated to NaN");
    return a;
}

}  // namespace

WeightResult xi_hat_k(const State& z, const WeightSpec& spec, const TargetModel& target,
                      const ProposalKernel& proposal, RngStream& rng) {
    spec.validate();
    WeightResult res;
    double prod = 1.0;

    if (spec.order == kInfiniteOrder) {
        // Fully integrated series: 1 + sum_j prod_{l<=j} (1 - alpha_l).
        // Terminates exactly when some alpha = 1; product_floor bounds the
        // (reported) truncation otherwise.
        while (true) {
            if (res.proposals_used >= spec.max_proposals) {
                res.truncated = true;
                break;
            }
            const State y = proposal.sample(z, rng);
            ++res.proposals_used;
            prod *= 1.0 - alpha_or_throw(z, y, target, proposal);
            if (prod == 0.0) break;
            res.xi += prod;
            if (prod < spec.product_floor) {
                res.truncated = true;
                break;
            }
        }
        return res;
    }

    // Integrated phase: j = 1..k. A zero product ends the whole series
    // (every later term carries the same factor).
    for (int j = 0; j < spec.order; ++j) {
        if (res.proposals_used >= spec.max_proposals) {
            res.truncated = true;
            return res;
        }
        const State y = proposal.sample(z, rng);
        ++res.proposals_used;
        prod *= 1.0 - alpha_or_throw(z, y, target, proposal);
        if (prod == 0.0) return res;
        res.xi += prod;
    }

    // Simulated phase: fresh (y, u) pairs; each survival of u >= alpha adds
    // the frozen product, the first acceptance kills all remaining terms.
    while (true) {
        if (res.proposals_used >= spec.max_proposals) {
            res.truncated = true;
            return res;
        }
        const State y = proposal.sample(z, rng);
        ++res.proposals_used;
        const double a = alpha_or_throw(z, y, target, proposal);
        const double u = rng.uniform();
        if (u < a) return res;
        res.xi += prod;
    }
}

double var_xi_k_closed(const PRPair& pr, int k) {
    pr.validate();
    if (k < 0) throw std::domain_error("var_xi_k_closed: k must be >= 0");
    const double p = pr.p;
    const double r = pr.r;
    const double geometric = (1.0 - p) / (p * p);
    if (k == 0) return geometric;
    // (1 - 2p + r)^k via exp(k log1p(r - 2p)) to avoid cancellation when the
    // base is close to 1; bracket = 1 - base^k.
    const double bracket = -std::expm1(static_cast<double>(k) * std::log1p(r - 2.0 * p));
    const double value =
        geometric - bracket / (2.0 * p - r) * ((2.0 - p) / (p * p)) * (p - r);
    return std::max(value, 0.0);
}

double var_xi_inf_closed(const PRPair& pr) {
    pr.validate();
    const double p = pr.p;
    const double r = pr.r;
    const double value =
        (1.0 - p) / (p * p) - (2.0 - p) * (p - r) / ((2.0 * p - r) * p * p);
    return std::max(value, 0.0);
}

double control_variate_draw(const State& z, const TargetModel& target,
                            const ProposalKernel& proposal, RngStream& rng) {
    const State y0 = proposal.sample(z, rng);
    return alpha_or_throw(z, y0, target, proposal);
}

WeightAccounting attach_weights(std::span<AcceptedBlock> complete_blocks,
                                std::span<const int> orders, const WeightSpec& spec,
                                const TargetModel& target, const ProposalKernel& proposal,
                                RngStream& rng, bool fresh_order0) {
    WeightAccounting acc;
    for (auto& block : complete_blocks) {
        for (int order : orders) {
            if (order == 0 && !fresh_order0) {
                block.weights[0] = static_cast<double>(block.n_occupation);
                continue;
            }
            WeightSpec s = spec;
            s.order = order;
            const WeightResult res = xi_hat_k(block.z, s, target, proposal, rng);
            block.weights[order] = res.xi;
            acc.proposals += res.proposals_used;
            if (res.truncated) ++acc.truncated_blocks;
        }
    }
    return acc;
}

std::int64_t attach_control_variates(std::span<AcceptedBlock> complete_blocks,
                                     const TargetModel& target, const ProposalKernel& proposal,
                                     RngStream& rng) {
    for (auto& block : complete_blocks) {
        block.cv_draw = control_variate_draw(block.z, target, proposal, rng);
    }
    return static_cast<std::int64_t>(complete_blocks.size());
}

}  // namespace rbmh
