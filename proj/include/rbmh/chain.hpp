#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "rbmh/rng.hpp"
#include "rbmh/state.hpp"
#include "rbmh/target.hpp"

namespace rbmh {

/// Map key for the fully integrated weight estimator (k = infinity).
inline constexpr int kInfiniteOrder = -1;

/// One accepted state together with its occupation count and any weight
/// estimates attached later. Consecutive blocks may carry the same state:
/// an accepted self-proposal (possible on discrete models) opens a new
/// block even though the path does not move.
struct AcceptedBlock {
    State z;
    std::int64_t n_occupation = 1;
    std::map<int, double> weights;  // key: k >= 0, or kInfiniteOrder
    std::optional<double> cv_draw;  // alpha(z, y0) from an independent draw
};

struct ChainRecord {
    std::vector<State> path;  // length n_budget; path[0] is the initial state
    std::vector<AcceptedBlock> blocks;
    std::int64_t n_budget = 0;
    std::int64_t m = 0;           // number of blocks (initial state counts as one)
    std::int64_t m_complete = 0;  // blocks whose occupation closed within budget
    bool trailing_truncated = true;
    std::uint64_t seed = 0;
    double acceptance_rate = 0.0;  // m / n_budget
    std::int64_t path_proposals = 0;

    std::span<const AcceptedBlock> complete_blocks() const {
        return {blocks.data(), static_cast<std::size_t>(m_complete)};
    }
    std::span<AcceptedBlock> complete_blocks() {
        return {blocks.data(), static_cast<std::size_t>(m_complete)};
    }
};

/// Blocks-only run (no path stored), for experiments that fix the number of
/// completed blocks rather than the step budget.
struct BlockRun {
    std::vector<AcceptedBlock> blocks;  // exactly m_complete + 1 entries
    std::int64_t m_complete = 0;
    std::int64_t steps = 0;
    std::int64_t path_proposals = 0;
};

/// min{1, [π(y)/π(x)]·[q(x|y)/q(y|x)]}, computed in log space and
/// exponentiated last. Throws if x is off-support; returns 0 if y is.
double acceptance_prob(const State& x, const State& y, const TargetModel& target,
                       const ProposalKernel& proposal);

struct StepOutcome {
    State next;
    bool accepted = false;
    State proposed;
    double u = 0.0;
    double alpha = 0.0;
};

/// One Metropolis-Hastings transition. Acceptance is u < alpha (strict), so
/// zero-probability proposals are never accepted even when u == 0.
StepOutcome mh_step(const State& x, const TargetModel& target, const ProposalKernel& proposal,
                    ChainRngs& rngs);

/// Run a chain for a fixed step budget. path[0] = x0 and every block is the
/// run of one accepted state; the trailing block's count is cut off by the
/// budget and is excluded from m_complete.
ChainRecord run_chain(const TargetModel& target, const ProposalKernel& proposal, const State& x0,
                      std::int64_t n_budget, std::uint64_t seed);
ChainRecord run_chain(const TargetModel& target, const ProposalKernel& proposal, const State& x0,
                      std::int64_t n_budget, std::uint64_t seed, ChainRngs& rngs);

/// Run until `m_complete` blocks have closed (i.e. that many acceptances).
BlockRun run_chain_blocks(const TargetModel& target, const ProposalKernel& proposal,
                          const State& x0, std::int64_t m_complete, ChainRngs& rngs,
                          std::int64_t max_steps = 100'000'000);

struct Decomposition {
    std::vector<AcceptedBlock> blocks;
    std::int64_t m = 0;
    std::int64_t m_complete = 0;
};

/// Run-length encoding of a path by consecutive state equality (bitwise).
Decomposition decompose_chain(std::span<const State> path);

/// Inverse of decompose_chain: each block's state repeated n_occupation times.
std::vector<State> expand_blocks(std::span<const AcceptedBlock> blocks);

}  // namespace rbmh
