#pragma once

#include <iosfwd>
#include <string>

#include "unidb/mlp.hpp"
#include "unidb/sde.hpp"

namespace unidb {

// eps-prediction network: input x_t || x_T || sinusoidal-features(t).
struct ScoreModel {
  Mlp net;
  int dim = 0;
  int time_features = 16;  // even count of sin/cos features
  double horizon = 1.0;

  static ScoreModel init(int dim, const std::vector<int>& hidden, int time_features,
                         double horizon, std::uint64_t seed);

  Eigen::VectorXd embed(const StateVec& x_t, const StateVec& x_T, double t) const;
  StateVec eval(const StateVec& x_t, const StateVec& x_T, double t) const;
  ScoreFn as_score_fn() const;
};

// mu_{t-1,gamma}: Bayes posterior mean of x_{t-1} given (x_0, x_t, x_T),
//   mu_bar_{t-1} + (sigma'^2_{t-1} a_t)/(sigma'^2_t a_{t-1}) (x_t - mu_bar_t).
StateVec posterior_target(const BridgeParams& p, const StateVec& x_0, const StateVec& x_t,
                          const StateVec& x_T, double t, double t_prev);

// mu_{t-1,theta}: one reverse Euler step written in eps form,
//   x_t - (f x_t + h m + g u*) dt - (g^2/sigma'_t) eps_hat dt.
StateVec model_mean(const BridgeParams& p, const StateVec& x_t, const StateVec& x_T,
                    double t, double dt, const StateVec& eps_hat);

struct TrainItem {
  StateVec x_0, x_T;
  int k = 1;       // sampled step index in {1..N}; N clamps to N-1 at evaluation
  StateVec noise;  // the eps injected into x_t
};

struct TrainBatch {
  std::vector<TrainItem> items;
  std::uint64_t seed = 0;
};

using PairSampler = std::function<void(CounterRng&, StateVec&, StateVec&)>;

TrainBatch make_train_batch(const PairSampler& sample_pair, int dim, const TimeGrid& grid,
                            int batch_size, std::uint64_t seed);

struct LossOptions {
  bool weighted = true;      // 1/(2 g_t^2) factor of Eq. 18
  double huber_delta = 0.0;  // 0 = exact l1 (subgradient 0 at kinks)
};

double loss(const BridgeParams& p, const ScoreModel& model, const TrainBatch& batch,
            const TimeGrid& grid, const LossOptions& opt = {});
// Returns the loss value; accumulates gradients into g (must be zeroed by caller).
double loss_grad(const BridgeParams& p, const ScoreModel& model, const TrainBatch& batch,
                 const TimeGrid& grid, Mlp::Grad& g, const LossOptions& opt = {});

struct TrainConfig {
  int steps = 2000;
  int batch_size = 32;
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.99;
  std::uint64_t seed = 1;
  std::vector<int> hidden{128, 128, 128};
  int time_features = 16;
  LossOptions loss_opt;
};

struct TrainResult {
  ScoreModel model;
  std::vector<double> loss_curve;  // one entry per step
};

TrainResult train(const BridgeParams& p, const TimeGrid& grid, const PairSampler& data,
                  int dim, const TrainConfig& cfg);
// Warm start: continue from an existing model (fresh optimizer state).
TrainResult train(const BridgeParams& p, const TimeGrid& grid, const PairSampler& data,
                  const TrainConfig& cfg, ScoreModel start);

// Checkpoint: magic "UDBM", version byte, shape table, f64 tensors, config echo.
void save_checkpoint(const ScoreModel& model, const std::string& config_echo,
                     std::ostream& os);
ScoreModel load_checkpoint(std::istream& is, std::string* config_echo = nullptr);

void write_loss_csv(const std::vector<double>& curve, std::ostream& os);

}  // namespace unidb
