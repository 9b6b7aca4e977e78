#include "unidb/gaussian_oracle.hpp"

namespace unidb {

GaussianMarginal marginal_of_xt(const GaussianEndpointModel& model, const BridgeParams& p,
                                double t) {
  if (model.prior_var < 0.0) throw ConfigError("prior_var must be nonnegative");
  const auto co = interpolant_coeffs(p, t);
  GaussianMarginal m;
  m.mean = co.a * model.prior_mean + co.b * model.x_T + co.c * p.m;
  m.var = co.a * co.a * model.prior_var + co.sigma_prime * co.sigma_prime;
  return m;
}

StateVec analytic_score(const GaussianEndpointModel& model, const BridgeParams& p, double t,
                        const StateVec& x_t) {
  const auto m = marginal_of_xt(model, p, t);
  if (m.var <= 0.0) throw SingularityError("analytic_score: marginal variance is zero");
  return (m.mean - x_t) / m.var;
}

double log_marginal_density(const GaussianEndpointModel& model, const BridgeParams& p,
                            double t, const StateVec& x_t) {
  const auto m = marginal_of_xt(model, p, t);
  if (m.var <= 0.0) throw SingularityError("log_marginal_density: variance is zero");
  const double d = static_cast<double>(x_t.size());
  return -0.5 * (x_t - m.mean).squaredNorm() / m.var -
         0.5 * d * std::log(2.0 * M_PI * m.var);
}

GaussianMarginal posterior_x0_given_xT(const GaussianEndpointModel& model,
                                       const BridgeParams&) {
  return {model.prior_mean, model.prior_var};
}

ScoreFn analytic_eps_fn(const GaussianEndpointModel& model, const BridgeParams& p) {
  return [model, p](const StateVec& x_t, const StateVec&, double t) -> StateVec {
    const double sp = transition_std(p, t);
    return -sp * analytic_score(model, p, t, x_t);
  };
}

}  // namespace unidb
