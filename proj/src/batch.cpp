#include "unidb/batch.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace unidb {

namespace {

// Per-knot coefficients of the controlled forward Euler step
//   x += (lin_k x + base_k) dt_k + g_k sqrt(dt_k) z,
// with u* folded in (u* = A_k (r_k - e_k x)). Built once, shared read-only.
struct ForwardStepper {
  int n_steps;
  std::vector<double> lin, g, dt, sqrt_dt;
  std::vector<StateVec> base;
  bool snap;  // gamma = inf: last step snaps to x_T
  StateVec x_T;

  ForwardStepper(const BridgeParams& p_in, const StateVec& x_0, const StateVec& x_T_in,
                 const TimeGrid& grid) {
    const BridgeParams p = p_in.anchored(x_T_in);
    if (x_0.size() != x_T_in.size() || x_0.size() != p.m.size()) {
      throw DomainError("simulate_forward_batch: dimension mismatch");
    }
    const auto& s = p.schedule;
    const double T = s.horizon;
    const double efT = std::exp(s.f_bar0(T));
    n_steps = grid.n_steps();
    snap = p.gamma.is_infinite();
    x_T = x_T_in;
    const int last = snap ? n_steps - 1 : n_steps;
    lin.resize(last);
    g.resize(last);
    dt.resize(last);
    sqrt_dt.resize(last);
    base.resize(last);
    for (int k = 0; k < last; ++k) {
      const double t = grid.knots[k];
      const double e_tT = std::exp(s.f_bar(t, T));
      const double d = p.gamma.inv() + efT * efT * s.g_bar_sq(t, T);
      const double gk = s.g(t);
      const double A = gk * e_tT / d;
      const StateVec r = x_T - (efT * s.h_bar(t, T)) * p.m;
      lin[k] = s.f(t) - gk * A * e_tT;
      base[k] = s.h(t) * p.m + gk * A * r;
      g[k] = gk;
      dt[k] = grid.dt(k);
      sqrt_dt[k] = std::sqrt(dt[k]);
    }
  }

  void run(StateVec& x, CounterRng& rng, bool noise_on,
           const std::vector<int>& snapshot_knots, Eigen::MatrixXd* snaps, int row) const {
    std::size_t si = 0;
    auto record = [&](int k) {
      while (si < snapshot_knots.size() && snapshot_knots[si] == k) {
        snaps[si].row(row) = x;
        ++si;
      }
    };
    record(0);
    const int last = static_cast<int>(lin.size());
    for (int k = 0; k < last; ++k) {
      x += (lin[k] * x + base[k]) * dt[k];
      if (noise_on) x += g[k] * sqrt_dt[k] * rng.normal_vec(x.size());
      record(k + 1);
    }
    if (snap) {
      x = x_T;
      record(n_steps);
    }
  }
};

}  // namespace

ForwardBatch simulate_forward_batch(const BridgeParams& p, const StateVec& x_0,
                                    const StateVec& x_T, const TimeGrid& grid,
                                    std::uint64_t seed, int n,
                                    const std::vector<int>& snapshot_knots, bool parallel) {
  const ForwardStepper stepper(p, x_0, x_T, grid);
  ForwardBatch out;
  out.finals.resize(n, x_0.size());
  out.snapshots.assign(snapshot_knots.size(), Eigen::MatrixXd(n, x_0.size()));

#pragma omp parallel for schedule(static) if (parallel)
  for (int i = 0; i < n; ++i) {
    CounterRng rng(CounterRng::derive_key(seed, static_cast<std::uint64_t>(i)));
    StateVec x = x_0;
    stepper.run(x, rng, true, snapshot_knots, out.snapshots.data(), i);
    out.finals.row(i) = x;
  }
  return out;
}

Eigen::MatrixXd reverse_sde_sample_batch(const BridgeParams& p, const StateVec& x_T,
                                         const ScoreFn& score, const TimeGrid& grid,
                                         std::uint64_t seed, int n, bool parallel) {
  Eigen::MatrixXd out(n, x_T.size());
  std::exception_ptr error;

#pragma omp parallel for schedule(static) if (parallel)
  for (int i = 0; i < n; ++i) {
    try {
      out.row(i) = reverse_sde_sample(p, x_T, score, grid,
                                      CounterRng::derive_key(seed, static_cast<std::uint64_t>(i)));
    } catch (...) {
#pragma omp critical
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return out;
}

}  // namespace unidb
