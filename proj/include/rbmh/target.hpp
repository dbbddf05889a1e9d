#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "rbmh/rng.hpp"
#include "rbmh/state.hpp"

namespace rbmh {

/// Closed forms available for some toy models: the one-step leave
/// probability p(x) = ∫ α(x,y) q(y|x) dy, its squared-α analogue r(x), and
/// (when known) the log-density of the accepted-state stationary law,
/// proportional to π·p.
struct AnalyticOracle {
    std::function<double(const State&)> p_exact;
    std::function<double(const State&)> r_exact;
    std::function<double(const State&)> pi_tilde_log_density;  // may be empty
    std::string description;
};

/// Unnormalized target: log π, extended-real valued (-inf off support).
struct TargetModel {
    std::function<double(const State&)> log_density;
    int dimension = 1;
    std::shared_ptr<const AnalyticOracle> oracle;  // null when no closed forms
};

enum class ProposalKind { SymmetricRandomWalk, Independence, General };

/// Proposal kernel q(y|x): a sampler plus the log-density, with a kind tag.
/// For SymmetricRandomWalk kernels the engine skips the q-ratio entirely;
/// for Independence kernels log_density must not depend on x.
struct ProposalKernel {
    std::function<State(const State&, RngStream&)> sample;
    std::function<double(const State&, const State&)> log_density;  // log q(y | x)
    ProposalKind kind = ProposalKind::General;
};

/// A target/proposal pair bundled with its optional closed forms and an
/// exact sampler for the initial state.
struct Model {
    std::string name;
    TargetModel target;
    ProposalKernel proposal;
    std::function<State(RngStream&)> draw_initial;
};

}  // namespace rbmh
