#include "rbmh/chain.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace rbmh {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_ratio_or_throw(double lp_x, double lp_y, const State& x, const State& y,
                          const ProposalKernel& proposal) {
    if (std::isnan(lp_y)) throw std::runtime_error("acceptance_prob: target log-density is NaN");
    if (lp_y == kNegInf) return kNegInf;
    double log_ratio = lp_y - lp_x;
    if (proposal.kind != ProposalKind::SymmetricRandomWalk) {
        const double lq_xy = proposal.log_density(x, y);  // log q(x | y)
        const double lq_yx = proposal.log_density(y, x);  // log q(y | x)
        if (std::isnan(lq_xy) || std::isnan(lq_yx))
            throw std::runtime_error("acceptance_prob: proposal log-density is NaN");
        log_ratio += lq_xy - lq_yx;
    }
    if (std::isnan(log_ratio)) throw std::runtime_error("acceptance_prob: NaN log ratio");
    return log_ratio;
}

double alpha_from_log_ratio(double log_ratio) {
    if (log_ratio >= 0.0) return 1.0;
    return std::exp(log_ratio);
}

AcceptedBlock new_block(State z) {
    AcceptedBlock b;
    b.z = std::move(z);
    return b;
}

// alpha with the current state's log-density already known.
double alpha_cached(double lp_x, const State& x, const State& y, const TargetModel& target,
                    const ProposalKernel& proposal) {
    const double lp_y = target.log_density(y);
    return alpha_from_log_ratio(log_ratio_or_throw(lp_x, lp_y, x, y, proposal));
}

}  // namespace

double acceptance_prob(const State& x, const State& y, const TargetModel& target,
                       const ProposalKernel& proposal) {
    const double lp_x = target.log_density(x);
    if (std::isnan(lp_x)) throw std::runtime_error("acceptance_prob: target log-density is NaN");
    if (lp_x == kNegInf)
        throw std::invalid_argument(
            "acceptance_prob: current state has zero target density (bad initialization?)");
    return alpha_cached(lp_x, x, y, target, proposal);
}

StepOutcome mh_step(const State& x, const TargetModel& target, const ProposalKernel& proposal,
                    ChainRngs& rngs) {
    State y = proposal.sample(x, rngs.proposals);
    const double alpha = acceptance_prob(x, y, target, proposal);
    const double u = rngs.path_uniforms.uniform();
    const bool accepted = u < alpha;
    return StepOutcome{accepted ? y : x, accepted, std::move(y), u, alpha};
}

ChainRecord run_chain(const TargetModel& target, const ProposalKernel& proposal, const State& x0,
                      std::int64_t n_budget, std::uint64_t seed) {
    ChainRngs rngs = ChainRngs::from_seed(seed);
    return run_chain(target, proposal, x0, n_budget, seed, rngs);
}

ChainRecord run_chain(const TargetModel& target, const ProposalKernel& proposal, const State& x0,
                      std::int64_t n_budget, std::uint64_t seed, ChainRngs& rngs) {
    if (n_budget < 1) throw std::invalid_argument("run_chain: n_budget must be >= 1");
    double lp_x = target.log_density(x0);
    if (std::isnan(lp_x)) throw std::runtime_error("run_chain: target log-density is NaN at x0");
    if (lp_x == kNegInf)
        throw std::invalid_argument("run_chain: initial state has zero target density");

    ChainRecord rec;
    rec.n_budget = n_budget;
    rec.seed = seed;
    rec.path.reserve(static_cast<std::size_t>(n_budget));
    rec.path.push_back(x0);
    rec.blocks.push_back(new_block(x0));

    State x = x0;
    for (std::int64_t t = 1; t < n_budget; ++t) {
        State y = proposal.sample(x, rngs.proposals);
        const double lp_y = target.log_density(y);
        const double alpha = alpha_from_log_ratio(log_ratio_or_throw(lp_x, lp_y, x, y, proposal));
        const double u = rngs.path_uniforms.uniform();
        if (u < alpha) {
            x = std::move(y);
            lp_x = lp_y;
            rec.blocks.push_back(new_block(x));
        } else {
            rec.blocks.back().n_occupation += 1;
        }
        rec.path.push_back(x);
    }

    rec.m = static_cast<std::int64_t>(rec.blocks.size());
    rec.m_complete = rec.m - 1;  // the last block's run is cut off by the budget
    rec.trailing_truncated = true;
    rec.acceptance_rate = static_cast<double>(rec.m) / static_cast<double>(n_budget);
    rec.path_proposals = n_budget - 1;
    return rec;
}

BlockRun run_chain_blocks(const TargetModel& target, const ProposalKernel& proposal,
                          const State& x0, std::int64_t m_complete, ChainRngs& rngs,
                          std::int64_t max_steps) {
    if (m_complete < 1) throw std::invalid_argument("run_chain_blocks: m_complete must be >= 1");
    double lp_x = target.log_density(x0);
    if (lp_x == kNegInf)
        throw std::invalid_argument("run_chain_blocks: initial state has zero target density");

    BlockRun run;
    run.blocks.reserve(static_cast<std::size_t>(m_complete) + 1);
    run.blocks.push_back(new_block(x0));

    State x = x0;
    std::int64_t accepted = 0;
    std::int64_t steps = 0;
    while (accepted < m_complete) {
        if (steps >= max_steps) {
            std::ostringstream msg;
            msg << "run_chain_blocks: exceeded " << max_steps << " steps with only " << accepted
                << " completed blocks";
            throw std::runtime_error(msg.str());
        }
        State y = proposal.sample(x, rngs.proposals);
        const double lp_y = target.log_density(y);
        const double alpha = alpha_from_log_ratio(log_ratio_or_throw(lp_x, lp_y, x, y, proposal));
        const double u = rngs.path_uniforms.uniform();
        ++steps;
        if (u < alpha) {
            ++accepted;
            x = std::move(y);
            lp_x = lp_y;
            run.blocks.push_back(new_block(x));
        } else {
            run.blocks.back().n_occupation += 1;
        }
    }
    run.m_complete = m_complete;
    run.steps = steps;
    run.path_proposals = steps;
    return run;
}

Decomposition decompose_chain(std::span<const State> path) {
    if (path.empty()) throw std::invalid_argument("decompose_chain: empty path");
    Decomposition d;
    d.blocks.push_back(new_block(path.front()));
    for (std::size_t t = 1; t < path.size(); ++t) {
        if (path[t] == d.blocks.back().z) {
            d.blocks.back().n_occupation += 1;
        } else {
            d.blocks.push_back(new_block(path[t]));
        }
    }
    d.m = static_cast<std::int64_t>(d.blocks.size());
    d.m_complete = d.m - 1;
    return d;
}

std::vector<State> expand_blocks(std::span<const AcceptedBlock> blocks) {
    std::vector<State> path;
    for (const auto& b : blocks) {
        for (std::int64_t i = 0; i < b.n_occupation; ++i) path.push_back(b.z);
    }
    return path;
}

}  // namespace rbmh
