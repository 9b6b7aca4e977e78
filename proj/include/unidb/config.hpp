#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "unidb/bridge.hpp"

namespace unidb {

// Plain-text `[section]` / `key = value` experiment config. Unknown keys are
// rejected; serialize() is canonical, round-trips losslessly, and is the
// input of hash().
struct ExperimentConfig {
  // [schedule]
  std::string kind = "gou_cosine";  // gou_cosine | gou_const | ve_linear | vp_const
  double s_offset = 0.008;
  double floor = 0.005;
  std::string floor_convention = "neg_exp";  // neg_exp | literal
  double lambda_sq = 900.0 / 65025.0;        // 30^2/255^2
  double theta = 1.0;                        // gou_const
  double ve_slope = 1.0;                     // ve_linear: sigma^2(t) = slope * t
  double vp_c = 1.0;                         // vp_const: g^2 = c
  double t_cont = 1.0;

  // [bridge]
  std::vector<Gamma> gammas{Gamma::infinity()};

  // [grid]
  int n_steps = 100;

  // [run]
  std::uint64_t seed = 1;
  std::string out_dir = "out";

  // [dataset]
  std::string dataset = "gaussian2d";  // gaussian2d | patches
  int dim = 2;
  double prior_mean = 0.0;  // broadcast over dim
  double prior_var = 1.0;
  double x_T_value = 0.0;  // broadcast over dim

  // [train]
  int train_steps = 2000;
  int batch_size = 32;
  double lr = 1e-4;
  int time_features = 16;
  std::vector<int> hidden{128, 128, 128};
  bool weighted = true;
  double huber_delta = 0.0;

  // [sample]
  int n_samples = 1000;

  // [sweep]
  double endpoint_dist_sq = 1.0;
  int n_instances = 100;

  static ExperimentConfig parse(std::istream& is);
  static ExperimentConfig parse_file(const std::string& path);
  std::string serialize() const;
  std::uint64_t hash() const;  // FNV-1a 64 of serialize()

  BridgeSchedule build_schedule() const;
  // GOU kinds anchor m to x_T per sample (m_tracks_x_T).
  BridgeParams build_params(Gamma gamma) const;
};

}  // namespace unidb
