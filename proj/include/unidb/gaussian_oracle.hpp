#pragma once

#include "unidb/bridge.hpp"
#include "unidb/sde.hpp"

namespace unidb {

// Gaussian endpoint fixture: x_0 ~ N(prior_mean, prior_var I), x_T fixed.
// Every marginal/score below is closed form, so samplers and training
// targets can be validated without any learned model.
struct GaussianEndpointModel {
  StateVec prior_mean;
  double prior_var = 1.0;  // > 0 (isotropic)
  StateVec x_T;
};

// Moments of p(x_t | x_T): mean = a prior_mean + b x_T + c m,
// var = a^2 prior_var + sigma'^2 (isotropic).
struct GaussianMarginal {
  StateVec mean;
  double var = 0.0;
};
GaussianMarginal marginal_of_xt(const GaussianEndpointModel& model, const BridgeParams& p,
                                double t);

StateVec analytic_score(const GaussianEndpointModel& model, const BridgeParams& p, double t,
                        const StateVec& x_t);

double log_marginal_density(const GaussianEndpointModel& model, const BridgeParams& p,
                            double t, const StateVec& x_t);

// Target distribution of x_0 given the fixed conditioning endpoint: the prior.
GaussianMarginal posterior_x0_given_xT(const GaussianEndpointModel& model,
                                       const BridgeParams& p);

// ScoreFn adapter: eps_hat = -sigma'_t * analytic_score (the eps-prediction
// convention used by the reverse sampler and the trainer).
ScoreFn analytic_eps_fn(const GaussianEndpointModel& model, const BridgeParams& p);

}  // namespace unidb
