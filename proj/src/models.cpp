#include "rbmh/models.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

#include "rbmh/stats.hpp"
#include "rbmh/weights.hpp"

namespace rbmh {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
const double kLogSqrt2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

double std_normal_log_density(double x) { return -0.5 * x * x; }

}  // namespace

Model make_gaussian_rw(double tau) {
    if (!(tau > 0.0)) throw std::invalid_argument("make_gaussian_rw: tau must be positive");
    Model m;
    m.name = "gaussian_rw";
    m.target.dimension = 1;
    m.target.log_density = [](const State& s) { return std_normal_log_density(s.real(0)); };
    m.proposal.kind = ProposalKind::SymmetricRandomWalk;
    m.proposal.sample = [tau](const State& x, RngStream& rng) {
        return State::real1(x.real(0) + tau * rng.normal());
    };
    m.proposal.log_density = [tau](const State& y, const State& x) {
        const double d = (y.real(0) - x.real(0)) / tau;
        return -0.5 * d * d - std::log(tau) - kLogSqrt2Pi;
    };
    m.draw_initial = [](RngStream& rng) { return State::real1(rng.normal()); };
    return m;
}

Model make_cauchy_independence(double tau) {
    if (!(tau > 0.0)) throw std::invalid_argument("make_cauchy_independence: tau must be positive");
    Model m;
    m.name = "cauchy_independence";
    m.target.dimension = 1;
    m.target.log_density = [](const State& s) { return std_normal_log_density(s.real(0)); };
    m.proposal.kind = ProposalKind::Independence;
    m.proposal.sample = [tau](const State&, RngStream& rng) {
        return State::real1(rng.cauchy(tau));
    };
    m.proposal.log_density = [tau](const State& y, const State&) {
        const double t = y.real(0) / tau;
        return -std::log(std::numbers::pi * tau) - std::log1p(t * t);
    };
    m.draw_initial = [](RngStream& rng) { return State::real1(rng.normal()); };
    return m;
}

Model make_exp_independence(double lambda, double mu) {
    if (!(lambda > 0.0) || !(mu > 0.0))
        throw std::invalid_argument("make_exp_independence: rates must be positive");
    if (mu > lambda)
        throw std::invalid_argument(
            "make_exp_independence: requires mu <= lambda; the closed forms for p and r "
            "presuppose a proposal with heavier tail than the target");
    Model m;
    m.name = "exp_independence";
    m.target.dimension = 1;
    m.target.log_density = [lambda](const State& s) {
        const double x = s.real(0);
        return x >= 0.0 ? std::log(lambda) - lambda * x : kNegInf;
    };
    m.proposal.kind = ProposalKind::Independence;
    m.proposal.sample = [mu](const State&, RngStream& rng) {
        return State::real1(rng.exponential(mu));
    };
    m.proposal.log_density = [mu](const State& y, const State&) {
        const double v = y.real(0);
        return v >= 0.0 ? std::log(mu) - mu * v : kNegInf;
    };
    m.draw_initial = [lambda](RngStream& rng) { return State::real1(rng.exponential(lambda)); };

    auto oracle = std::make_shared<AnalyticOracle>();
    oracle->description = "Exp(lambda) target / Exp(mu) independence proposal";
    oracle->p_exact = [lambda, mu](const State& s) {
        return 1.0 - (lambda - mu) / lambda * std::exp(-mu * s.real(0));
    };
    oracle->r_exact = [lambda, mu](const State& s) {
        return 1.0 - 2.0 * (lambda - mu) / (2.0 * lambda - mu) * std::exp(-mu * s.real(0));
    };
    auto p_exact = oracle->p_exact;
    oracle->pi_tilde_log_density = [lambda, p_exact](const State& s) {
        const double x = s.real(0);
        if (x < 0.0) return kNegInf;
        return std::log(lambda) - lambda * x + std::log(p_exact(s));
    };
    m.target.oracle = oracle;
    return m;
}

Model make_geometric_rw(double beta) {
    if (!(beta > 0.0 && beta < 1.0))
        throw std::invalid_argument("make_geometric_rw: beta must be in (0, 1)");
    Model m;
    m.name = "geometric_rw";
    m.target.dimension = 1;
    const double log_1mb = std::log1p(-beta);
    const double log_b = std::log(beta);
    m.target.log_density = [log_b, log_1mb](const State& s) {
        const std::int64_t x = s.as_integer();
        return x >= 0 ? log_b + static_cast<double>(x) * log_1mb : kNegInf;
    };
    // One-step walk; at 0 the down-move folds onto staying so q sums to one
    // and the leave probability stays 1 - beta/2 at the boundary.
    m.proposal.kind = ProposalKind::SymmetricRandomWalk;
    m.proposal.sample = [](const State& x, RngStream& rng) {
        const std::int64_t v = x.as_integer();
        const bool down = rng.uniform() < 0.5;
        if (v == 0) return State::integer(down ? 0 : 1);
        return State::integer(down ? v - 1 : v + 1);
    };
    m.proposal.log_density = [](const State& y, const State& x) {
        const std::int64_t xv = x.as_integer();
        const std::int64_t yv = y.as_integer();
        const double log_half = std::log(0.5);
        if (xv == 0) return (yv == 0 || yv == 1) ? log_half : kNegInf;
        return std::llabs(yv - xv) == 1 ? log_half : kNegInf;
    };
    m.draw_initial = [log_1mb](RngStream& rng) {
        const double u = rng.uniform_pos();
        return State::integer(static_cast<std::int64_t>(std::floor(std::log(u) / log_1mb)));
    };

    auto oracle = std::make_shared<AnalyticOracle>();
    oracle->description = "Geo(beta) target / one-step random-walk proposal";
    const double p = geometric_p(beta);
    const double r = geometric_r(beta);
    oracle->p_exact = [p](const State&) { return p; };
    oracle->r_exact = [r](const State&) { return r; };
    oracle->pi_tilde_log_density = m.target.log_density;  // p constant => pi_tilde = pi
    m.target.oracle = oracle;
    return m;
}

double geometric_p(double beta) { return 1.0 - beta / 2.0; }

double geometric_r(double beta) { return 1.0 - beta + beta * beta / 2.0; }

double geometric_gain_absolute(double beta) {
    if (!(beta > 0.0 && beta < 1.0))
        throw std::invalid_argument("geometric_gain_absolute: beta must be in (0, 1)");
    return 2.0 * beta * (1.0 - beta) * (2.0 + beta) /
           ((2.0 - beta * beta) * (2.0 - beta) * (2.0 - beta));
}

double geometric_gain_relative(double beta) {
    if (!(beta > 0.0 && beta < 1.0))
        throw std::invalid_argument("geometric_gain_relative: beta must be in (0, 1)");
    return (1.0 - beta) * (2.0 + beta) / (2.0 - beta * beta);
}

double v_k_first_term(const Model& model, const ModelExpectations& expect,
                      const std::function<double(double)>& h, int order) {
    const auto& oracle = model.target.oracle;
    if (!oracle) throw std::invalid_argument("v_k_first_term: model has no closed-form oracle");

    auto at = [&](double x) {
        const State s = expect.discrete
                            ? State::integer(static_cast<std::int64_t>(std::llround(x)))
                            : State::real1(x);
        const PRPair pr{oracle->p_exact(s), oracle->r_exact(s)};
        const double var = order == kInfiniteOrder ? var_xi_inf_closed(pr)
                                                   : var_xi_k_closed(pr, order);
        return expect.pi_density(x) * var * h(x) * h(x) * pr.p;
    };
    auto p_at = [&](double x) {
        const State s = expect.discrete
                            ? State::integer(static_cast<std::int64_t>(std::llround(x)))
                            : State::real1(x);
        return expect.pi_density(x) * oracle->p_exact(s);
    };

    double pi_p = 0.0, inner = 0.0;
    if (expect.discrete) {
        for (double x = expect.lower; x <= expect.upper; x += 1.0) {
            pi_p += p_at(x);
            inner += at(x);
        }
    } else {
        pi_p = stats::integrate(p_at, expect.lower, expect.upper);
        inner = stats::integrate(at, expect.lower, expect.upper);
    }
    return pi_p * inner;
}

}  // namespace rbmh
