#include "unidb/schedule.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace unidb {

double g_from_theta(double theta, double lambda_sq) {
  if (theta < 0.0 || lambda_sq <= 0.0) {
    throw DomainError("g_from_theta requires theta >= 0 and lambda_sq > 0");
  }
  return std::sqrt(2.0 * lambda_sq * theta);
}

double integrate(const ScalarFn& fn, double a, double b) {
  if (a == b) return 0.0;
  double err = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      fn, a, b, 15, 1e-12, &err);
  if (!std::isfinite(v) || err > 1e-8 * (1.0 + std::abs(v))) {
    throw IntegrationError("quadrature failed to converge");
  }
  return v;
}

namespace {

// Assemble the GOU schedule (f = -theta, h = +theta, g^2 = 2 lambda^2 theta;
// the printed map (theta, -theta) would make the drift mean-averting and
// contradicts the mean-value/controller displays) from a closed theta_bar.
BridgeSchedule gou_from_theta(ScalarFn theta_fn, ScalarFn theta_bar0_fn,
                              double lambda_sq, double horizon,
                              ScheduleKind kind = ScheduleKind::GOU) {
  if (lambda_sq <= 0.0) throw ConfigError("lambda_sq must be positive");
  if (horizon <= 0.0) throw ConfigError("horizon must be positive");
  BridgeSchedule s;
  s.kind = kind;
  s.horizon = horizon;
  s.lambda_sq = lambda_sq;
  s.theta = theta_fn;
  s.theta_bar0 = theta_bar0_fn;
  s.f = [theta_fn](double t) { return -theta_fn(t); };
  s.h = theta_fn;
  s.g_sq = [theta_fn, lambda_sq](double t) { return 2.0 * lambda_sq * theta_fn(t); };
  s.f_bar0 = [theta_bar0_fn](double t) { return -theta_bar0_fn(t); };
  // int e^{theta_bar} theta = e^{theta_bar_t} - 1
  s.h_bar0 = [theta_bar0_fn](double t) { return std::expm1(theta_bar0_fn(t)); };
  // int e^{2 theta_bar} 2 lambda^2 theta = lambda^2 (e^{2 theta_bar_t} - 1)
  s.g_bar_sq0 = [theta_bar0_fn, lambda_sq](double t) {
    return lambda_sq * std::expm1(2.0 * theta_bar0_fn(t));
  };
  return s;
}

}  // namespace

BridgeSchedule make_gou_cosine(double s_offset, double floor_value, double lambda_sq,
                               double horizon, FloorConvention conv) {
  if (s_offset <= 0.0) throw ConfigError("cosine schedule requires s_offset > 0");
  if (!(floor_value > 0.0 && floor_value < 1.0)) {
    throw ConfigError("cosine schedule floor must lie in (0,1)");
  }
  const double T = horizon;
  const double u0 = (s_offset / (1.0 + s_offset)) * M_PI / 2.0;
  const double B = M_PI / (2.0 * T * (1.0 + s_offset));  // u(t) = u0 + B t
  const double c0 = std::cos(u0) * std::cos(u0);
  // int_0^t cos^2(u0 + Bz) dz
  auto cos_sq_int = [u0, B](double t) {
    return 0.5 * t + (std::sin(2.0 * (u0 + B * t)) - std::sin(2.0 * u0)) / (4.0 * B);
  };
  // unscaled theta_bar_T, for theta = 1 - cos^2(u)/cos^2(u0)
  const double base_T = T - cos_sq_int(T) / c0;
  const double target =
      (conv == FloorConvention::NegExp) ? -std::log(floor_value) : std::log(floor_value);
  const double k = target / base_T;
  if (!(k > 0.0) || !std::isfinite(k)) {
    throw ConfigError(
        "cosine floor convention yields a nonpositive scale k (theta_bar_T would be "
        "negative, contradicting theta >= 0); use the e^{-theta_bar_T}=floor reading");
  }
  auto theta = [k, u0, B, c0](double t) {
    const double cu = std::cos(u0 + B * t);
    return k * (1.0 - cu * cu / c0);
  };
  auto theta_bar = [k, c0, cos_sq_int](double t) { return k * (t - cos_sq_int(t) / c0); };
  return gou_from_theta(theta, theta_bar, lambda_sq, horizon);
}

BridgeSchedule make_gou_const(double theta_c, double lambda_sq, double horizon) {
  if (theta_c <= 0.0) throw ConfigError("constant theta must be positive");
  return gou_from_theta([theta_c](double) { return theta_c; },
                        [theta_c](double t) { return theta_c * t; }, lambda_sq, horizon);
}

BridgeSchedule make_gou(ScalarFn theta_fn, double lambda_sq, double horizon,
                        ScalarFn theta_bar0_fn) {
  if (!theta_bar0_fn) {
    theta_bar0_fn = [theta_fn](double t) { return integrate(theta_fn, 0.0, t); };
  }
  return gou_from_theta(std::move(theta_fn), std::move(theta_bar0_fn), lambda_sq, horizon);
}

BridgeSchedule make_ve(ScalarFn sigma_sq_fn, ScalarFn dsigma_sq_fn, double horizon) {
  if (horizon <= 0.0) throw ConfigError("horizon must be positive");
  BridgeSchedule s;
  s.kind = ScheduleKind::VE;
  s.horizon = horizon;
  s.f = [](double) { return 0.0; };
  s.h = [](double) { return 0.0; };
  s.g_sq = dsigma_sq_fn;
  s.f_bar0 = [](double) { return 0.0; };
  s.h_bar0 = [](double) { return 0.0; };
  s.g_bar_sq0 = [sigma_sq_fn](double t) { return sigma_sq_fn(t) - sigma_sq_fn(0.0); };
  return s;
}

BridgeSchedule make_vp_const(double c, double horizon) {
  if (c <= 0.0) throw ConfigError("VP diffusion constant must be positive");
  if (horizon <= 0.0) throw ConfigError("horizon must be positive");
  BridgeSchedule s;
  s.kind = ScheduleKind::VP;
  s.horizon = horizon;
  s.f = [c](double) { return -0.5 * c; };
  s.h = [](double) { return 0.0; };
  s.g_sq = [c](double) { return c; };
  s.f_bar0 = [c](double t) { return -0.5 * c * t; };
  s.h_bar0 = [](double) { return 0.0; };
  // int e^{cz} c dz = e^{ct} - 1
  s.g_bar_sq0 = [c](double t) { return std::expm1(c * t); };
  return s;
}

BridgeSchedule make_custom(ScalarFn f_fn, ScalarFn h_fn, ScalarFn g_sq_fn, double horizon) {
  if (horizon <= 0.0) throw ConfigError("horizon must be positive");
  BridgeSchedule s;
  s.kind = ScheduleKind::Custom;
  s.horizon = horizon;
  s.f = f_fn;
  s.h = h_fn;
  s.g_sq = g_sq_fn;
  auto f_bar0 = [f_fn](double t) { return integrate(f_fn, 0.0, t); };
  s.f_bar0 = f_bar0;
  s.h_bar0 = [f_bar0, h_fn](double t) {
    return integrate([&](double z) { return std::exp(-f_bar0(z)) * h_fn(z); }, 0.0, t);
  };
  s.g_bar_sq0 = [f_bar0, g_sq_fn](double t) {
    return integrate([&](double z) { return std::exp(-2.0 * f_bar0(z)) * g_sq_fn(z); }, 0.0, t);
  };
  return s;
}

}  // namespace unidb
