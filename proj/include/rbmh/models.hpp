#pragma once

#include "rbmh/target.hpp"

namespace rbmh {

/// N(0,1) target with a Gaussian random-walk proposal of scale tau.
/// No closed-form p here.
Model make_gaussian_rw(double tau);

/// N(0,1) target with an independence Cauchy(0, tau) proposal.
Model make_cauchy_independence(double tau);

/// Exp(lambda) target with an independence Exp(mu) proposal, 0 < mu <=
/// lambda. Ships exact p(x) = 1 - ((lambda-mu)/lambda) e^{-mu x} and
/// r(x) = 1 - (2(lambda-mu)/(2 lambda - mu)) e^{-mu x}.
Model make_exp_independence(double lambda, double mu);

/// Geo(beta) target on {0,1,...} with the one-step random-walk proposal;
/// from 0 the down-move folds onto staying, so q(0|0) = q(1|0) = 1/2 and
/// p stays constant at 1 - beta/2 (r = 1 - beta + beta^2/2).
Model make_geometric_rw(double beta);

/// Constant (p, r) of the geometric model.
double geometric_p(double beta);
double geometric_r(double beta);

/// Absolute variance gain of the fully integrated weight over the raw
/// geometric count, 2 beta (1-beta)(2+beta) / [(2-beta^2)(2-beta)^2];
/// identical to var_xi_k_closed(k=0) - var_xi_inf_closed at this model's
/// (p, r).
double geometric_gain_absolute(double beta);

/// Relative variance gain (1-beta)(2+beta)/(2-beta^2), decreasing in beta.
double geometric_gain_relative(double beta);

/// First term of the asymptotic variance of the self-normalized order-k
/// estimator for a model with closed-form (p, r):
/// pi(p) * E_pi[ Var(xi_k | z) h(z)^2 p(z) ]. Diagnostic only; `h` is a
/// scalar function of the state, expectations are taken by quadrature on
/// [0, upper] (continuous) or summation (discrete).
struct ModelExpectations {
    std::function<double(double)> pi_density;  // normalized, scalar argument
    double lower = 0.0;
    double upper = 0.0;
    bool discrete = false;
};

double v_k_first_term(const Model& model, const ModelExpectations& expect,
                      const std::function<double(double)>& h, int order);

}  // namespace rbmh
