#pragma once

#include "unidb/schedule.hpp"
#include "unidb/types.hpp"

namespace unidb {

// A schedule plus the terminal penalty gamma and the drift anchor m.
// Pure value type; all derived quantities below are pure functions of it.
struct BridgeParams {
  BridgeSchedule schedule;
  Gamma gamma = Gamma::infinity();
  StateVec m;  // drift anchor (mu for GOU; typically x_T)
  // GOU with mu = x_T: the anchor follows each sample's conditioning endpoint.
  bool m_tracks_x_T = false;

  double horizon() const { return schedule.horizon; }

  BridgeParams anchored(const StateVec& x_T) const {
    if (!m_tracks_x_T) return *this;
    return BridgeParams{schedule, gamma, x_T, false};
  }
};

// d_{t,gamma} = gamma^{-1} + e^{2 f_bar_T} g_bar^2_{t:T}   (0 at t=T for gamma=inf)
double d_coeff(const BridgeParams& p, double t);

// u*_{t,gamma} of Eq. 13:
//   g_t e^{f_bar_{t:T}} (x_T - e^{f_bar_{t:T}} x_t - m e^{f_bar_T} h_bar_{t:T}) / d_{t,gamma}
StateVec optimal_controller(const BridgeParams& p, double t, const StateVec& x_t,
                            const StateVec& x_T);

// grad_{x_t} log p(x_T | x_t); g_t * doob_h equals the gamma=inf controller.
StateVec doob_h(const BridgeParams& p, double t, const StateVec& x_t, const StateVec& x_T);

// Interpolant decomposition of the transition mean:
//   mu_bar_{t,gamma} = a x_0 + b x_T + c m,  std sigma' (gamma-independent).
struct InterpolantCoeffs {
  double a = 0.0, b = 0.0, c = 0.0;
  double sigma_prime = 0.0;
};
InterpolantCoeffs interpolant_coeffs(const BridgeParams& p, double t);

StateVec transition_mean(const BridgeParams& p, double t, const StateVec& x_0,
                         const StateVec& x_T);
// sigma'_t = sqrt(sigma_bar^2_t sigma_bar^2_{t:T} / sigma_bar^2_T); 0 at both ends.
double transition_std(const BridgeParams& p, double t);
StateVec sample_transition(const BridgeParams& p, double t, const StateVec& x_0,
                           const StateVec& x_T, const StateVec& noise);

// Residual a = e^{f_bar_T} x_0 - x_T + m e^{f_bar_T} h_bar_T (Appendix A.3).
StateVec cost_residual(const BridgeParams& p, const StateVec& x_0, const StateVec& x_T);

// ||x_T^u - x_T||^2 in closed form (Eq. 23; GOU specialization).
double terminal_gap(const BridgeParams& p, const StateVec& x_0, const StateVec& x_T);

struct CostReport {
  double control_energy = 0.0;   // 1/2 int ||u*||^2 dt
  double terminal_penalty = 0.0; // gamma/2 ||x_T^u - x_T||^2 (0 at gamma=inf)
  double total = 0.0;
};

// Control energy by quadrature of the along-trajectory integrand
// g_t^2 e^{-2 f_bar_t} e^{2 f_bar_T} ||a||^2 / d_{0,gamma}^2 / 2
// (the costate is constant along the optimum, so the denominator is d_{0,gamma}).
CostReport cost_report(const BridgeParams& p, const StateVec& x_0, const StateVec& x_T);

// Closed form J(gamma) = ||a||^2 / (2 d_{0,gamma}); cross-check for cost_report.
double cost_total_closed(const BridgeParams& p, const StateVec& x_0, const StateVec& x_T);

// Preset constructors ("specialize"): gamma-tagged params for the named family.
BridgeParams specialize_ve(ScalarFn sigma_sq_fn, ScalarFn dsigma_sq_fn, Gamma gamma,
                           int dim, double horizon = 1.0);
BridgeParams specialize_vp(double g_sq_const, Gamma gamma, int dim, double horizon = 1.0);
BridgeParams specialize_gou(ScalarFn theta_fn, double lambda_sq, Gamma gamma,
                            const StateVec& mu, double horizon = 1.0);

}  // namespace unidb
