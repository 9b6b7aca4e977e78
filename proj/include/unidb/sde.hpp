#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "unidb/bridge.hpp"
#include "unidb/rng.hpp"

namespace unidb {

struct TimeGrid {
  std::vector<double> knots;  // N+1 times, 0 = t_0 < ... < t_N = T

  static TimeGrid uniform(int n_steps, double horizon);
  static TimeGrid from_knots(std::vector<double> k);

  int n_steps() const { return static_cast<int>(knots.size()) - 1; }
  double horizon() const { return knots.back(); }
  double dt(int k) const { return knots[k + 1] - knots[k]; }
  // Evaluation time for step-k coefficients in reverse sampling / training:
  // t_N = T is singular (sigma'_T = 0, d_{T,inf} = 0), so index N clamps to N-1.
  double eval_time(int k) const {
    const int n = n_steps();
    return knots[k < n ? k : n - 1];
  }
};

struct Trajectory {
  std::vector<double> times;
  Eigen::MatrixXd states;    // (N+1) x d
  Eigen::MatrixXd controls;  // N x d when recorded, else 0 x 0
  std::uint64_t seed = 0;

  bool has_controls() const { return controls.size() > 0; }
};

// Euler-Maruyama on the controlled forward SDE (Eq. 12):
//   x_{k+1} = x_k + (f x_k + h m + g u*(t_k, x_k)) dt + g sqrt(dt) z_k.
// At gamma = inf the controller is applied through step N-1 and the final
// step snaps to x_T exactly (d_{T,inf} = 0 makes the last update singular).
Trajectory simulate_forward(const BridgeParams& p, const StateVec& x_0, const StateVec& x_T,
                            const TimeGrid& grid, std::uint64_t seed, bool noise_on);

// eps-prediction contract: score = -eval(x_t, x_T, t) / sigma'_t.
using ScoreFn = std::function<StateVec(const StateVec& x_t, const StateVec& x_T, double t)>;

// Reverse-SDE sampler (Eq. 15 / Alg. 2):
//   x_{k-1} = x_k - [f x + h m + g u* + (g^2/sigma') eps] dt - g sqrt(dt) z,
// coefficients at eval_time(k), z = 0 on the final step. Returns x_hat_0.
StateVec reverse_sde_sample(const BridgeParams& p, const StateVec& x_T, const ScoreFn& score,
                            const TimeGrid& grid, std::uint64_t seed);

// Mean-ODE (Eq. 16): the same update with every z = 0.
StateVec mean_ode_sample(const BridgeParams& p, const StateVec& x_T, const ScoreFn& score,
                         const TimeGrid& grid);

// CSV: header "step,t,x[0..d),u[0..d)"; binary: magic "UDBT", version byte,
// little-endian f64 payload.
void write_trajectory_csv(const Trajectory& tr, std::ostream& os);
void write_trajectory_binary(const Trajectory& tr, std::ostream& os);
Trajectory read_trajectory_binary(std::istream& is);

}  // namespace unidb
