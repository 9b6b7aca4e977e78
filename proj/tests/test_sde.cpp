#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include <unidb/batch.hpp>
#include <unidb/gaussian_oracle.hpp>
#include <unidb/sde.hpp>

using namespace unidb;

namespace {

StateVec sv1(double v) { return StateVec::Constant(1, v); }

BridgeParams gou(double theta, double lambda_sq, Gamma g, const StateVec& mu) {
  return BridgeParams{make_gou_const(theta, lambda_sq), g, mu};
}

}  // namespace

TEST_CASE("TimeGrid: uniform knots and the t=T evaluation clamp") {
  auto g = TimeGrid::uniform(4, 1.0);
  CHECK(g.n_steps() == 4);
  CHECK(g.knots.front() == 0.0);
  CHECK(g.knots.back() == 1.0);
  CHECK(g.dt(1) == doctest::Approx(0.25));
  CHECK(g.eval_time(4) == g.knots[3]);
  CHECK(g.eval_time(3) == g.knots[3]);
  CHECK(g.eval_time(1) == g.knots[1]);
  CHECK_THROWS_AS(TimeGrid::uniform(0, 1.0), ConfigError);
  CHECK_THROWS_AS(TimeGrid::from_knots({0.0, 0.5, 0.5}), ConfigError);
}

TEST_CASE("zero dynamics: trajectory constant at x_0") {
  auto sched = make_custom([](double) { return 0.0; }, [](double) { return 0.0; },
                           [](double) { return 0.0; });
  BridgeParams p{sched, Gamma::finite(3.0), sv1(0.0)};
  auto tr = simulate_forward(p, sv1(0.7), sv1(-0.4), TimeGrid::uniform(50, 1.0), 9, true);
  for (int k = 0; k <= 50; ++k) CHECK(tr.states(k, 0) == 0.7);
  CHECK(tr.states.row(0)[0] == 0.7);  // bit-exact initial state
}

TEST_CASE("deterministic forward: gamma=inf pins, finite gamma matches Eq. 23") {
  const StateVec x_0 = sv1(0.3), x_T = sv1(1.2);

  auto pinf = gou(0.2, 1.0, Gamma::infinity(), x_T);
  auto tr = simulate_forward(pinf, x_0, x_T, TimeGrid::uniform(2000, 1.0), 1, false);
  CHECK((tr.states.row(2000).transpose() - x_T).norm() <= 1e-3 * (x_0 - x_T).norm());

  for (double ge : {10.0, 1e3}) {
    auto p = gou(0.2, 1.0, Gamma::finite(ge), x_T);
    auto t2 = simulate_forward(p, x_0, x_T, TimeGrid::uniform(100000, 1.0), 1, false);
    const double gap = (t2.states.row(100000).transpose() - x_T).squaredNorm();
    CHECK(gap == doctest::Approx(terminal_gap(p, x_0, x_T)).epsilon(1e-6));
  }
}

TEST_CASE("strong error vs closed-form mean decreases linearly in dt") {
  const StateVec x_0 = sv1(-0.5), x_T = sv1(0.8);
  auto p = gou(1.0, 1.0, Gamma::finite(10.0), x_T);
  const StateVec mu_T = transition_mean(p, 1.0, x_0, x_T);
  double prev_err = 0.0;
  for (int N : {100, 1000, 10000}) {
    auto tr = simulate_forward(p, x_0, x_T, TimeGrid::uniform(N, 1.0), 1, false);
    const double err = (tr.states.row(N).transpose() - mu_T).norm();
    if (prev_err > 0.0) {
      const double ratio = prev_err / err;  // ~10 for first-order Euler
      CHECK(ratio > 5.0);
      CHECK(ratio < 20.0);
    }
    prev_err = err;
  }
}

TEST_CASE("forward Monte Carlo moments: Eq. 17 at gamma=inf, mean-only at finite gamma") {
  const StateVec x_0 = sv1(0.3), x_T = sv1(1.2);
  const int n = 20000;
  auto grid = TimeGrid::uniform(400, 1.0);
  const std::vector<int> snaps{100, 200, 300};  // t = 0.25, 0.5, 0.75

  auto pinf = gou(1.0, 1.0, Gamma::infinity(), x_T);
  auto batch = simulate_forward_batch(pinf, x_0, x_T, grid, 5, n, snaps);
  for (std::size_t s = 0; s < snaps.size(); ++s) {
    const double t = grid.knots[snaps[s]];
    const auto col = batch.snapshots[s].col(0);
    const double mean = col.mean();
    const double var = (col.array() - mean).square().sum() / (n - 1);
    const double mu = transition_mean(pinf, t, x_0, x_T)[0];
    const double sp = transition_std(pinf, t);
    CHECK(std::abs(mean - mu) <= 4.0 * sp / std::sqrt(double(n)) + 2e-3);  // + O(dt) bias
    CHECK(std::abs(std::sqrt(var) - sp) <= 0.05 * sp);
  }

  auto pfin = gou(1.0, 1.0, Gamma::finite(10.0), x_T);
  auto bfin = simulate_forward_batch(pfin, x_0, x_T, grid, 6, n, snaps);
  for (std::size_t s = 0; s < snaps.size(); ++s) {
    const double t = grid.knots[snaps[s]];
    const double mean = bfin.snapshots[s].col(0).mean();
    const double mu = transition_mean(pfin, t, x_0, x_T)[0];
    const double sp = transition_std(pfin, t);
    CHECK(std::abs(mean - mu) <= 4.0 * sp / std::sqrt(double(n)) + 2e-3);
  }
}

TEST_CASE("reproducibility: same seed bitwise, parallel == serial bitwise") {
  const StateVec x_0 = sv1(0.3), x_T = sv1(1.2);
  auto p = gou(1.0, 1.0, Gamma::finite(50.0), x_T);
  auto grid = TimeGrid::uniform(64, 1.0);

  auto a = simulate_forward(p, x_0, x_T, grid, 1234, true);
  auto b = simulate_forward(p, x_0, x_T, grid, 1234, true);
  CHECK(a.states == b.states);
  auto c = simulate_forward(p, x_0, x_T, grid, 1235, true);
  CHECK(a.states != c.states);

  auto par = simulate_forward_batch(p, x_0, x_T, grid, 77, 512, {}, true);
  auto ser = simulate_forward_batch(p, x_0, x_T, grid, 77, 512, {}, false);
  CHECK(par.finals == ser.finals);
}

TEST_CASE("reverse SDE with analytic score recovers the posterior moments") {
  GaussianEndpointModel fx{sv1(0.3), 0.4, sv1(1.2)};
  auto p = gou(1.0, 1.0, Gamma::infinity(), fx.x_T);
  auto grid = TimeGrid::uniform(400, 1.0);
  const auto score = analytic_eps_fn(fx, p);

  const int n = 5000;
  auto samples = reverse_sde_sample_batch(p, fx.x_T, score, grid, 31, n);
  const double mean = samples.col(0).mean();
  const double var = (samples.col(0).array() - mean).square().sum() / (n - 1);
  const auto post = posterior_x0_given_xT(fx, p);
  const double se = std::sqrt(post.var / n);
  CHECK(std::abs(mean - post.mean[0]) <= 4.0 * se + 5e-3);  // + O(dt) bias headroom
  CHECK(std::abs(var - post.var) <= 0.10 * post.var);

  // parallel == serial bitwise for the reverse kernel too
  auto ser = reverse_sde_sample_batch(p, fx.x_T, score, TimeGrid::uniform(50, 1.0), 3, 64, false);
  auto par = reverse_sde_sample_batch(p, fx.x_T, score, TimeGrid::uniform(50, 1.0), 3, 64, true);
  CHECK(ser == par);
}

TEST_CASE("one-step degenerate reverse grid") {
  const StateVec x_T = sv1(1.2);
  auto p = gou(1.0, 1.0, Gamma::finite(10.0), x_T);
  auto grid = TimeGrid::uniform(1, 1.0);
  const ScoreFn zero = [](const StateVec& x, const StateVec&, double) {
    return StateVec::Zero(x.size());
  };
  // single update of x_T with coefficients at the clamped time t = 0
  const StateVec got = reverse_sde_sample(p, x_T, zero, grid, 5);
  const auto& s = p.schedule;
  const StateVec u = optimal_controller(p, 0.0, x_T, x_T);
  const StateVec want = x_T - (s.f(0.0) * x_T + s.h(0.0) * p.m + s.g(0.0) * u) * 1.0;
  CHECK((got - want).norm() <= 1e-15);
}

TEST_CASE("reverse update reproduces the GOUB form at gamma=inf") {
  // one manual Euler step of Eq. 15 written in the GOUB (Remark 1) form
  GaussianEndpointModel fx{sv1(0.0), 1.0, sv1(1.0)};
  auto p = gou(0.9, 1.1, Gamma::infinity(), fx.x_T);
  auto grid = TimeGrid::uniform(2, 1.0);
  const auto score = analytic_eps_fn(fx, p);

  const double t1 = grid.eval_time(2), t0 = grid.eval_time(1);
  StateVec x = fx.x_T;
  auto goub_step = [&](double t, const StateVec& xx, double dt) {
    const double g2 = p.schedule.g_sq(t);
    const double e2 = std::exp(-2.0 * 0.9 * (1.0 - t));
    const double s2tT = p.schedule.sigma_bar_sq(t, 1.0);
    const StateVec drift_fwd =
        (0.9 + g2 * e2 / s2tT) * (fx.x_T - xx);  // GOUB Eq. 6 drift, mu = x_T
    const double sp = transition_std(p, t);
    return (xx - (drift_fwd + g2 / sp * score(xx, fx.x_T, t)) * dt).eval();
  };
  StateVec manual = goub_step(t1, x, grid.knots[2] - grid.knots[1]);
  manual = goub_step(t0, manual, grid.knots[1] - grid.knots[0]);
  const StateVec got = mean_ode_sample(p, fx.x_T, score, grid);
  CHECK((got - manual).norm() <= 1e-12);
}

TEST_CASE("mean ODE: determinism, posterior mean, gamma limit continuity") {
  GaussianEndpointModel fx{sv1(0.3), 0.4, sv1(1.2)};
  auto p = gou(1.0, 1.0, Gamma::infinity(), fx.x_T);
  auto grid = TimeGrid::uniform(1000, 1.0);
  const auto score = analytic_eps_fn(fx, p);

  const StateVec a = mean_ode_sample(p, fx.x_T, score, grid);
  const StateVec b = mean_ode_sample(p, fx.x_T, score, grid);
  CHECK(a == b);

  // linear dynamics: the noise-free endpoint equals the posterior mean up to O(dt)
  CHECK(std::abs(a[0] - fx.prior_mean[0]) <= 1e-3);

  auto pbig = gou(1.0, 1.0, Gamma::finite(1e12), fx.x_T);
  const StateVec c = mean_ode_sample(pbig, fx.x_T, analytic_eps_fn(fx, pbig), grid);
  CHECK(std::abs(a[0] - c[0]) <= 1e-6 * (1.0 + std::abs(a[0])));
}

TEST_CASE("non-finite score is reported with the step index") {
  const StateVec x_T = sv1(1.0);
  auto p = gou(1.0, 1.0, Gamma::finite(10.0), x_T);
  const ScoreFn bad = [](const StateVec& x, const StateVec&, double) {
    return StateVec::Constant(x.size(), std::nan(""));
  };
  CHECK_THROWS_AS(reverse_sde_sample(p, x_T, bad, TimeGrid::uniform(10, 1.0), 1),
                  IntegrationError);
}

TEST_CASE("trajectory CSV and binary round-trip") {
  const StateVec x_0 = sv1(0.3), x_T = sv1(1.2);
  auto p = gou(1.0, 1.0, Gamma::finite(50.0), x_T);
  CounterRng rng(99);
  for (int trial = 0; trial < 10; ++trial) {
    const int N = 2 + static_cast<int>(rng.next_u64() % 40);
    auto tr = simulate_forward(p, x_0, x_T, TimeGrid::uniform(N, 1.0), trial, true);
    std::stringstream bin;
    write_trajectory_binary(tr, bin);
    auto back = read_trajectory_binary(bin);
    CHECK(back.times == tr.times);
    CHECK(back.states == tr.states);
    CHECK(back.controls == tr.controls);
    CHECK(back.seed == tr.seed);
  }

  auto tr = simulate_forward(p, x_0, x_T, TimeGrid::uniform(3, 1.0), 0, false);
  std::stringstream csv;
  write_trajectory_csv(tr, csv);
  std::string header;
  std::getline(csv, header);
  CHECK(header == "step,t,x0,u0\r");
  int rows = 0;
  for (std::string line; std::getline(csv, line);) ++rows;
  CHECK(rows == 4);

  std::stringstream junk("not a trajectory");
  CHECK_THROWS_AS(read_trajectory_binary(junk), IntegrationError);
}
