#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include <unidb/batch.hpp>
#include <unidb/gaussian_oracle.hpp>

using namespace unidb;

namespace {

StateVec sv1(double v) { return StateVec::Constant(1, v); }

GaussianEndpointModel fixture() { return {sv1(0.3), 0.4, sv1(1.2)}; }

BridgeParams params(Gamma g) {
  return BridgeParams{make_gou_const(1.0, 1.0), g, sv1(1.2)};
}

}  // namespace

TEST_CASE("marginal endpoints: prior at t = 0, pinned at t = T (gamma = inf)") {
  auto fx = fixture();
  auto p = params(Gamma::infinity());
  auto m0 = marginal_of_xt(fx, p, 0.0);
  CHECK(m0.mean[0] == doctest::Approx(fx.prior_mean[0]).epsilon(1e-14));
  CHECK(m0.var == doctest::Approx(fx.prior_var).epsilon(1e-14));
  auto mT = marginal_of_xt(fx, p, p.horizon());
  CHECK(mT.mean[0] == doctest::Approx(fx.x_T[0]).epsilon(1e-12));
  CHECK(mT.var <= 1e-12);  // a_T = 0, sigma'_T = 0
}

TEST_CASE("marginal matches interpolant coefficients at interior times") {
  auto fx = fixture();
  for (Gamma g : {Gamma::infinity(), Gamma::finite(7.0)}) {
    auto p = params(g);
    for (double t : {0.2, 0.5, 0.8}) {
      const auto c = interpolant_coeffs(p, t);
      const auto m = marginal_of_xt(fx, p, t);
      CHECK(m.mean[0] == doctest::Approx(c.a * fx.prior_mean[0] + c.b * fx.x_T[0] +
                                         c.c * p.m[0])
                             .epsilon(1e-14));
      CHECK(m.var == doctest::Approx(c.a * c.a * fx.prior_var +
                                     c.sigma_prime * c.sigma_prime)
                         .epsilon(1e-14));
    }
  }
}

TEST_CASE("marginal moments confirmed by Monte Carlo over the prior") {
  auto fx = fixture();
  auto p = params(Gamma::infinity());
  auto grid = TimeGrid::uniform(400, 1.0);
  const int snap = 200;  // t = 0.5
  const int n = 20000;

  // draw x_0 from the prior, push each through one noisy transition sample
  CounterRng rng(17);
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const StateVec x_0 = fx.prior_mean + std::sqrt(fx.prior_var) * rng.normal_vec(1);
    const double v =
        sample_transition(p, grid.knots[snap], x_0, fx.x_T, rng.normal_vec(1))[0];
    sum += v;
    sum_sq += v * v;
  }
  const double mean = sum / n;
  const double var = (sum_sq - n * mean * mean) / (n - 1);
  const auto m = marginal_of_xt(fx, p, grid.knots[snap]);
  CHECK(std::abs(mean - m.mean[0]) <= 4.0 * std::sqrt(m.var / n));
  CHECK(std::abs(var - m.var) <= 0.05 * m.var);
}

TEST_CASE("score: zero at the mean, linear in x with slope -1/var") {
  auto fx = fixture();
  auto p = params(Gamma::finite(3.0));
  for (double t : {0.25, 0.6}) {
    const auto m = marginal_of_xt(fx, p, t);
    CHECK(analytic_score(fx, p, t, m.mean)[0] == doctest::Approx(0.0).epsilon(1e-14));
    const double s1 = analytic_score(fx, p, t, m.mean + sv1(0.5))[0];
    const double s2 = analytic_score(fx, p, t, m.mean + sv1(1.5))[0];
    CHECK((s2 - s1) / 1.0 == doctest::Approx(-1.0 / m.var).epsilon(1e-12));
  }
}

TEST_CASE("score equals the central finite difference of log density") {
  auto fx = fixture();
  auto p = params(Gamma::infinity());
  const double eps = 1e-6;
  CounterRng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const double t = 0.1 + 0.8 * rng.uniform();
    const StateVec x = sv1(rng.normal());
    const double fd = (log_marginal_density(fx, p, t, x + sv1(eps)) -
                       log_marginal_density(fx, p, t, x - sv1(eps))) /
                      (2.0 * eps);
    CHECK(analytic_score(fx, p, t, x)[0] == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("log density normalizes: 1e6-point Riemann sum integrates to 1") {
  auto fx = fixture();
  auto p = params(Gamma::infinity());
  const double t = 0.5;
  const auto m = marginal_of_xt(fx, p, t);
  const double lo = m.mean[0] - 12.0 * std::sqrt(m.var);
  const double hi = m.mean[0] + 12.0 * std::sqrt(m.var);
  const int n = 1000000;
  const double dx = (hi - lo) / n;
  double mass = 0.0;
  for (int i = 0; i < n; ++i) {
    mass += std::exp(log_marginal_density(fx, p, t, sv1(lo + (i + 0.5) * dx)));
  }
  CHECK(mass * dx == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("posterior of x_0 given the endpoint is the prior") {
  auto fx = fixture();
  auto post = posterior_x0_given_xT(fx, params(Gamma::infinity()));
  CHECK(post.mean[0] == fx.prior_mean[0]);
  CHECK(post.var == fx.prior_var);
}

TEST_CASE("eps adapter obeys eps_hat = -sigma'_t * score") {
  auto fx = fixture();
  auto p = params(Gamma::infinity());
  auto fn = analytic_eps_fn(fx, p);
  for (double t : {0.2, 0.5, 0.9}) {
    const StateVec x = sv1(0.77);
    CHECK(fn(x, fx.x_T, t)[0] ==
          doctest::Approx(-transition_std(p, t) * analytic_score(fx, p, t, x)[0])
              .epsilon(1e-14));
  }
}

TEST_CASE("degenerate variance is a structured error") {
  auto fx = fixture();
  fx.prior_var = 0.0;
  auto p = params(Gamma::infinity());
  // var(x_T marginal) = 0: score undefined there
  CHECK_THROWS_AS(analytic_score(fx, p, p.horizon(), sv1(0.0)), SingularityError);
}
