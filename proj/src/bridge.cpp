#include "unidb/bridge.hpp"

namespace unidb {

double d_coeff(const BridgeParams& p, double t) {
  const auto& s = p.schedule;
  const double efT = std::exp(s.f_bar0(s.horizon));
  return p.gamma.inv() + efT * efT * s.g_bar_sq(t, s.horizon);
}

namespace {

StateVec controller_numerator(const BridgeParams& p, double t, const StateVec& x_t,
                              const StateVec& x_T) {
  const auto& s = p.schedule;
  const double ef_tT = std::exp(s.f_bar(t, s.horizon));
  const double efT = std::exp(s.f_bar0(s.horizon));
  return x_T - ef_tT * x_t - (efT * s.h_bar(t, s.horizon)) * p.m;
}

}  // namespace

StateVec optimal_controller(const BridgeParams& p, double t, const StateVec& x_t,
                            const StateVec& x_T) {
  const double d = d_coeff(p, t);
  if (d <= 0.0) {
    throw SingularityError("optimal_controller: d_{t,gamma} = 0 (t = T with gamma = inf)");
  }
  const auto& s = p.schedule;
  const double ef_tT = std::exp(s.f_bar(t, s.horizon));
  return (s.g(t) * ef_tT / d) * controller_numerator(p, t, x_t, x_T);
}

StateVec doob_h(const BridgeParams& p, double t, const StateVec& x_t, const StateVec& x_T) {
  const auto& s = p.schedule;
  const double efT = std::exp(s.f_bar0(s.horizon));
  const double denom = efT * efT * s.g_bar_sq(t, s.horizon);
  if (denom <= 0.0) throw SingularityError("doob_h: sigma_bar^2_{t:T} = 0 at t = T");
  const double ef_tT = std::exp(s.f_bar(t, s.horizon));
  return (ef_tT / denom) * controller_numerator(p, t, x_t, x_T);
}

InterpolantCoeffs interpolant_coeffs(const BridgeParams& p, double t) {
  const auto& s = p.schedule;
  const double T = s.horizon;
  const double ef_t = std::exp(s.f_bar0(t));
  const double ef_T = std::exp(s.f_bar0(T));
  const double g2t = s.g_bar_sq0(t) - s.g_bar_sq0(0.0);
  const double g2T = s.g_bar_sq0(T) - s.g_bar_sq0(0.0);
  const double ht = s.h_bar0(t) - s.h_bar0(0.0);
  const double hT = s.h_bar0(T) - s.h_bar0(0.0);
  const double ginv = p.gamma.inv();
  const double d0 = ginv + ef_T * ef_T * g2T;
  const double dt = ginv + ef_T * ef_T * (g2T - g2t);

  InterpolantCoeffs co;
  co.a = ef_t * dt / d0;
  co.b = ef_t * ef_T * g2t / d0;
  co.c = ef_t * (ht - ef_T * ef_T * g2t * hT / d0);

  const double s2_t = ef_t * ef_t * g2t;          // sigma_bar^2_t
  const double s2_tT = ef_T * ef_T * (g2T - g2t); // sigma_bar^2_{t:T}
  const double s2_T = ef_T * ef_T * g2T;          // sigma_bar^2_T
  co.sigma_prime = std::sqrt(std::max(0.0, s2_t * s2_tT / s2_T));
  return co;
}

StateVec transition_mean(const BridgeParams& p, double t, const StateVec& x_0,
                         const StateVec& x_T) {
  const auto co = interpolant_coeffs(p, t);
  return co.a * x_0 + co.b * x_T + co.c * p.m;
}

double transition_std(const BridgeParams& p, double t) {
  return interpolant_coeffs(p, t).sigma_prime;
}

StateVec sample_transition(const BridgeParams& p, double t, const StateVec& x_0,
                           const StateVec& x_T, const StateVec& noise) {
  const auto co = interpolant_coeffs(p, t);
  return co.a * x_0 + co.b * x_T + co.c * p.m + co.sigma_prime * noise;
}

StateVec cost_residual(const BridgeParams& p, const StateVec& x_0, const StateVec& x_T) {
  const auto& s = p.schedule;
  const double ef_T = std::exp(s.f_bar0(s.horizon));
  return ef_T * x_0 - x_T + (ef_T * s.h_bar0(s.horizon)) * p.m;
}

double terminal_gap(const BridgeParams& p, const StateVec& x_0, const StateVec& x_T) {
  const auto& s = p.schedule;
  if (s.kind != ScheduleKind::GOU) {
    throw DomainError("terminal_gap is the GOU-specialized Eq. 23 closed form");
  }
  if (p.gamma.is_infinite()) return 0.0;
  const double theta_bar_T = s.theta_bar0(s.horizon);
  const double e2 = std::exp(-2.0 * theta_bar_T);
  const double denom = 1.0 + p.gamma.value() * s.lambda_sq * (1.0 - e2);
  return e2 / (denom * denom) * (x_T - x_0).squaredNorm();
}

CostReport cost_report(const BridgeParams& p, const StateVec& x_0, const StateVec& x_T) {
  const auto& s = p.schedule;
  const double T = s.horizon;
  const double ef_T = std::exp(s.f_bar0(T));
  const double a2 = cost_residual(p, x_0, x_T).squaredNorm();
  const double d0 = d_coeff(p, 0.0);
  // int g_t^2 e^{-2 f_bar_t} dt (= g_bar^2_T; computed by quadrature per contract)
  const double gbar2 = integrate(
      [&s](double z) { return s.g_sq(z) * std::exp(-2.0 * s.f_bar0(z)); }, 0.0, T);

  CostReport r;
  r.control_energy = 0.5 * ef_T * ef_T * a2 * gbar2 / (d0 * d0);
  r.terminal_penalty = p.gamma.is_infinite() ? 0.0 : a2 / (2.0 * p.gamma.value() * d0 * d0);
  r.total = r.control_energy + r.terminal_penalty;
  return r;
}

double cost_total_closed(const BridgeParams& p, const StateVec& x_0, const StateVec& x_T) {
  return cost_residual(p, x_0, x_T).squaredNorm() / (2.0 * d_coeff(p, 0.0));
}

BridgeParams specialize_ve(ScalarFn sigma_sq_fn, ScalarFn dsigma_sq_fn, Gamma gamma,
                           int dim, double horizon) {
  BridgeParams p{make_ve(std::move(sigma_sq_fn), std::move(dsigma_sq_fn), horizon), gamma,
                 StateVec::Zero(dim)};
  return p;
}

BridgeParams specialize_vp(double g_sq_const, Gamma gamma, int dim, double horizon) {
  BridgeParams p{make_vp_const(g_sq_const, horizon), gamma, StateVec::Zero(dim)};
  return p;
}

BridgeParams specialize_gou(ScalarFn theta_fn, double lambda_sq, Gamma gamma,
                            const StateVec& mu, double horizon) {
  BridgeParams p{make_gou(std::move(theta_fn), lambda_sq, horizon), gamma, mu};
  return p;
}

}  // namespace unidb
