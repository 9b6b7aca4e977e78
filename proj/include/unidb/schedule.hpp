#pragma once

#include <cmath>
#include <functional>

#include "unidb/types.hpp"

namespace unidb {

enum class ScheduleKind { GOU, VE, VP, Custom };

using ScalarFn = std::function<double(double)>;

// How to read the configured terminal floor c: the paper's appendix writes
// e^{theta_bar_T} = 0.005, which forces theta_bar_T < 0 and contradicts
// theta >= 0; NegExp (e^{-theta_bar_T} = c) is the default reading and
// LiteralExp is rejected at construction with a diagnostic.
enum class FloorConvention { NegExp, LiteralExp };

// Coefficient functions of the unified linear SDE
//   dx = (f_t x + h_t m) dt + g_t dw
// together with their from-zero integrals:
//   f_bar0(t)    = int_0^t f_z dz
//   h_bar0(t)    = int_0^t e^{-f_bar0(z)} h_z dz
//   g_bar_sq0(t) = int_0^t e^{-2 f_bar0(z)} g_z^2 dz
// Interval values are differences of the from-zero evaluators (the weights
// inside h_bar / g_bar_sq are anchored at 0 by definition, so additivity is
// exact). Immutable after construction; safe to share across threads.
struct BridgeSchedule {
  ScheduleKind kind = ScheduleKind::Custom;
  double horizon = 1.0;  // T_cont

  ScalarFn f, h, g_sq;
  ScalarFn f_bar0, h_bar0, g_bar_sq0;

  // GOU-only extras (theta empty otherwise).
  double lambda_sq = 0.0;
  ScalarFn theta, theta_bar0;

  double g(double t) const { return std::sqrt(g_sq(t)); }

  double f_bar(double s, double t) const { return f_bar0(check(s, t)) - f_bar0(s); }
  double h_bar(double s, double t) const { return h_bar0(check(s, t)) - h_bar0(s); }
  double g_bar_sq(double s, double t) const { return g_bar_sq0(check(s, t)) - g_bar_sq0(s); }
  // sigma_bar^2_{s:t} = e^{2 f_bar0(t)} * g_bar_sq(s,t)
  double sigma_bar_sq(double s, double t) const {
    return std::exp(2.0 * f_bar0(check(s, t))) * g_bar_sq(s, t);
  }

 private:
  double check(double s, double t) const {
    if (s > t) throw DomainError("integral interval requires s <= t");
    if (s < 0.0 || t > horizon * (1.0 + 1e-12)) {
      throw DomainError("integral interval outside [0, T]");
    }
    return t;
  }
};

// g = sqrt(2 * lambda^2 * theta)
double g_from_theta(double theta, double lambda_sq);

// Adaptive Gauss-Kronrod quadrature, absolute tolerance 1e-12.
double integrate(const ScalarFn& fn, double a, double b);

// GOU with the flipped-cosine theta schedule; k is fixed so that
// exp(-theta_bar_T) equals `floor_value`. theta_bar has a closed form.
BridgeSchedule make_gou_cosine(double s_offset, double floor_value, double lambda_sq,
                               double horizon = 1.0,
                               FloorConvention conv = FloorConvention::NegExp);

// GOU with constant theta (closed-form integrals).
BridgeSchedule make_gou_const(double theta_c, double lambda_sq, double horizon = 1.0);

// GOU with arbitrary theta; theta_bar by quadrature unless supplied.
BridgeSchedule make_gou(ScalarFn theta_fn, double lambda_sq, double horizon = 1.0,
                        ScalarFn theta_bar0_fn = nullptr);

// VE: f = h = 0, g^2 = d sigma^2/dt.
BridgeSchedule make_ve(ScalarFn sigma_sq_fn, ScalarFn dsigma_sq_fn, double horizon = 1.0);

// VP with constant g^2 = c: f = -c/2, h = 0.
BridgeSchedule make_vp_const(double c, double horizon = 1.0);

// Fully generic coefficients; every integral is adaptive quadrature.
BridgeSchedule make_custom(ScalarFn f_fn, ScalarFn h_fn, ScalarFn g_sq_fn,
                           double horizon = 1.0);

}  // namespace unidb
