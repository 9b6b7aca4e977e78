// Command-line front end: invariant verification, gamma sweeps, cost
// comparisons, training, sampling, and forward simulation.
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include <unidb/batch.hpp>
#include <unidb/config.hpp>
#include <unidb/gaussian_oracle.hpp>
#include <unidb/score_model.hpp>
#include <unidb/toy_data.hpp>

using namespace unidb;
using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

constexpr int kExitError = 1;
constexpr int kExitConfig = 2;
constexpr int kExitMissingCheckpoint = 3;

struct CliOptions {
  std::string config_path;
  std::string out_dir;
  std::string gamma_list;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int steps = 0;
};

void add_common(CLI::App* cmd, CliOptions& opt) {
  cmd->add_option("--config", opt.config_path, "experiment config file");
  cmd->add_option("--out", opt.out_dir, "output directory (overrides run.out_dir)");
  cmd->add_option("--gamma", opt.gamma_list,
                  "comma-separated gamma list, e.g. 10,1e3,inf (overrides bridge.gamma)");
  cmd->add_option("--steps", opt.steps, "grid steps (overrides grid.n_steps)");
  cmd->add_option("--seed", opt.seed, "RNG seed (overrides run.seed)")
      ->each([&opt](const std::string&) { opt.seed_set = true; });
}

ExperimentConfig load_config(const CliOptions& opt) {
  ExperimentConfig c = opt.config_path.empty() ? ExperimentConfig{}
                                               : ExperimentConfig::parse_file(opt.config_path);
  if (!opt.out_dir.empty()) c.out_dir = opt.out_dir;
  if (opt.seed_set) c.seed = opt.seed;
  if (opt.steps > 0) c.n_steps = opt.steps;
  if (!opt.gamma_list.empty()) {
    c.gammas.clear();
    std::stringstream ss(opt.gamma_list);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (!tok.empty()) c.gammas.push_back(Gamma::parse(tok));
    }
    if (c.gammas.empty()) throw ConfigError("--gamma produced an empty list");
  }
  fs::create_directories(c.out_dir);
  return c;
}

std::string hash_str(const ExperimentConfig& c) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(c.hash()));
  return buf;
}

GaussianEndpointModel gaussian_fixture(const ExperimentConfig& c) {
  return {StateVec::Constant(c.dim, c.prior_mean), c.prior_var,
          StateVec::Constant(c.dim, c.x_T_value)};
}

PairSampler make_sampler(const ExperimentConfig& c, int& dim) {
  if (c.dataset == "patches") {
    dim = kPatchDim;
    return patch_pair_sampler();
  }
  dim = c.dim;
  return gaussian_pair_sampler(gaussian_fixture(c));
}

TrainConfig train_config(const ExperimentConfig& c) {
  TrainConfig t;
  t.steps = c.train_steps;
  t.batch_size = c.batch_size;
  t.lr = c.lr;
  t.seed = c.seed;
  t.hidden = c.hidden;
  t.time_features = c.time_features;
  t.loss_opt.weighted = c.weighted;
  t.loss_opt.huber_delta = c.huber_delta;
  return t;
}

// ---- verify ---------------------------------------------------------------

int cmd_verify(const ExperimentConfig& c) {
  ordered_json checks = ordered_json::array();
  bool all_ok = true;
  auto add = [&](const std::string& name, double max_error, double tol) {
    const bool ok = max_error <= tol;
    all_ok = all_ok && ok;
    ordered_json e;
    e["check"] = name;
    e["status"] = ok ? "pass" : "fail";
    e["max_error"] = max_error;
    e["tolerance"] = tol;
    checks.push_back(e);
  };

  const Gamma ga = c.gammas.front();
  auto p = c.build_params(ga);
  const auto dim = p.m.size();
  CounterRng rng(c.seed);

  {  // controller vs g * doob_h at gamma = inf
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
      const StateVec x_T = rng.normal_vec(dim);
      const BridgeParams pinf =
          BridgeParams{p.schedule, Gamma::infinity(), p.m, p.m_tracks_x_T}.anchored(x_T);
      const double t = 0.98 * rng.uniform();
      const StateVec x = rng.normal_vec(dim);
      const StateVec a = optimal_controller(pinf, t, x, x_T);
      const StateVec b = pinf.schedule.g(t) * doob_h(pinf, t, x, x_T);
      worst = std::max(worst, (a - b).norm() / (1.0 + b.norm()));
    }
    add("controller_equals_g_doob_at_gamma_inf", worst, 1e-12);
  }
  {  // transition mean interpolant: coefficients sum to the drift-consistent value
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
      const StateVec x_0 = rng.normal_vec(dim);
      const StateVec x_T = rng.normal_vec(dim);
      const BridgeParams pp = p.anchored(x_T);
      const double t = rng.uniform();
      const auto co = interpolant_coeffs(pp, t);
      const StateVec mu = transition_mean(pp, t, x_0, x_T);
      const StateVec want = co.a * x_0 + co.b * x_T + co.c * pp.m;
      worst = std::max(worst, (mu - want).norm());
    }
    add("transition_mean_matches_interpolant", worst, 1e-12);
  }
  {  // closed-form cost vs component quadrature, random endpoints per gamma
    double worst = 0.0;
    for (Gamma g : c.gammas) {
      const StateVec x_0 = rng.normal_vec(dim);
      const StateVec x_T = rng.normal_vec(dim);
      BridgeParams pg = p.anchored(x_T);
      pg.gamma = g;
      const auto r = cost_report(pg, x_0, x_T);
      const double closed = cost_total_closed(pg, x_0, x_T);
      worst = std::max(worst, std::abs(r.total - closed) / (1e-30 + std::abs(closed)));
    }
    add("cost_quadrature_matches_closed_form", worst, 1e-9);
  }
  {  // transition endpoints: mean pins x_0, sigma' vanishes at both ends
    const StateVec x_0 = rng.normal_vec(dim);
    const StateVec x_T = rng.normal_vec(dim);
    const BridgeParams pp = p.anchored(x_T);
    const double e0 = (transition_mean(pp, 0.0, x_0, x_T) - x_0).norm();
    const double sT = std::max(transition_std(pp, 0.0), transition_std(pp, pp.horizon()));
    add("transition_endpoint_pinning", std::max(e0, sT), 1e-12);
  }

  ordered_json doc;
  doc["schema_version"] = 1;
  doc["config_hash"] = hash_str(c);
  doc["gamma"] = c.gammas.front().str();
  doc["checks"] = checks;
  std::ofstream f(fs::path(c.out_dir) / "verify.json");
  f << doc.dump(2) << "\n";
  std::cout << doc.dump(2) << "\n";
  return all_ok ? 0 : kExitError;
}

// ---- gamma-sweep ----------------------------------------------------------

int cmd_gamma_sweep(const ExperimentConfig& c) {
  std::ofstream f(fs::path(c.out_dir) / "gamma_sweep.csv");
  f << "schema_version,config_hash,gamma,d0,cost_total,terminal_gap\r\n";
  char buf[32];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    f << ',' << buf;
  };
  const double dist = std::sqrt(c.endpoint_dist_sq);
  for (Gamma g : c.gammas) {
    auto p = c.build_params(g);
    const StateVec x_T = StateVec::Zero(p.m.size());
    StateVec x_0 = StateVec::Zero(p.m.size());
    x_0[0] = dist;
    const BridgeParams pp = p.anchored(x_T);
    f << "1," << hash_str(c) << ',' << g.str();
    put(d_coeff(pp, 0.0));
    put(cost_total_closed(pp, x_0, x_T));
    put(g.is_infinite() ? 0.0 : terminal_gap(pp, x_0, x_T));
    f << "\r\n";
  }
  std::cout << "wrote " << (fs::path(c.out_dir) / "gamma_sweep.csv").string() << "\n";
  return 0;
}

// ---- cost-compare ---------------------------------------------------------

int cmd_cost_compare(const ExperimentConfig& c) {
  std::ofstream f(fs::path(c.out_dir) / "cost_compare.csv");
  f << "schema_version,config_hash,gamma,control_energy,terminal_penalty,total,closed_total\r\n";
  char buf[32];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    f << ',' << buf;
  };
  auto pinf = c.build_params(Gamma::infinity());
  const StateVec x_T = StateVec::Constant(pinf.m.size(), c.x_T_value);
  StateVec x_0 = x_T;
  x_0[0] += std::sqrt(c.endpoint_dist_sq);  // separate the endpoints
  for (Gamma g : c.gammas) {
    auto p = c.build_params(g).anchored(x_T);
    const auto r = cost_report(p, x_0, x_T);
    f << "1," << hash_str(c) << ',' << g.str();
    put(r.control_energy);
    put(r.terminal_penalty);
    put(r.total);
    put(cost_total_closed(p, x_0, x_T));
    f << "\r\n";
  }
  std::cout << "wrote " << (fs::path(c.out_dir) / "cost_compare.csv").string() << "\n";
  return 0;
}

// ---- train ----------------------------------------------------------------

int cmd_train(const ExperimentConfig& c) {
  int dim = 0;
  const PairSampler data = make_sampler(c, dim);
  auto p = c.build_params(c.gammas.front());
  if (static_cast<int>(p.m.size()) != dim) p.m = StateVec::Constant(dim, c.x_T_value);
  auto grid = TimeGrid::uniform(c.n_steps, p.horizon());
  const auto result = train(p, grid, data, dim, train_config(c));
  {
    std::ofstream f(fs::path(c.out_dir) / "model.udbm", std::ios::binary);
    save_checkpoint(result.model, c.serialize(), f);
  }
  {
    std::ofstream f(fs::path(c.out_dir) / "loss.csv");
    write_loss_csv(result.loss_curve, f);
  }
  std::cout << "final loss " << result.loss_curve.back() << ", wrote model.udbm and loss.csv in "
            << c.out_dir << "\n";
  return 0;
}

// ---- sample ---------------------------------------------------------------

int cmd_sample(const ExperimentConfig& c, const std::string& checkpoint) {
  const fs::path ckpt =
      checkpoint.empty() ? fs::path(c.out_dir) / "model.udbm" : fs::path(checkpoint);
  std::ifstream in(ckpt, std::ios::binary);
  if (!in) {
    std::cerr << "error: checkpoint not found: " << ckpt.string() << "\n";
    return kExitMissingCheckpoint;
  }
  const ScoreModel model = load_checkpoint(in);
  auto p = c.build_params(c.gammas.front());
  if (static_cast<int>(p.m.size()) != model.dim) {
    p.m = StateVec::Constant(model.dim, c.x_T_value);
  }
  auto grid = TimeGrid::uniform(c.n_steps, p.horizon());
  const StateVec x_T = c.dataset == "patches"
                           ? [] {
                               CounterRng r(1);
                               return mask_patch(make_patch(r));
                             }()
                           : StateVec::Constant(model.dim, c.x_T_value);
  const auto samples = reverse_sde_sample_batch(p, x_T, model.as_score_fn(), grid, c.seed,
                                                c.n_samples);
  std::ofstream f(fs::path(c.out_dir) / "samples.csv");
  f << "schema_version,sample";
  for (int d = 0; d < model.dim; ++d) f << ",x" << d;
  f << "\r\n";
  char buf[32];
  for (Eigen::Index i = 0; i < samples.rows(); ++i) {
    f << "1," << i;
    for (Eigen::Index d = 0; d < samples.cols(); ++d) {
      std::snprintf(buf, sizeof(buf), "%.17g", samples(i, d));
      f << ',' << buf;
    }
    f << "\r\n";
  }
  const Eigen::RowVectorXd mean = samples.colwise().mean();
  std::cout << "wrote " << samples.rows() << " samples; mean of dim 0 = " << mean[0]
            << "\n";
  return 0;
}

// ---- simulate -------------------------------------------------------------

int cmd_simulate(const ExperimentConfig& c) {
  auto p = c.build_params(c.gammas.front());
  const StateVec x_0 = StateVec::Constant(p.m.size(), c.prior_mean);
  const StateVec x_T = StateVec::Constant(p.m.size(), c.x_T_value);
  auto grid = TimeGrid::uniform(c.n_steps, p.horizon());
  const auto tr = simulate_forward(p, x_0, x_T, grid, c.seed, true);
  {
    std::ofstream f(fs::path(c.out_dir) / "trajectory.csv");
    f << "# schema_version=1 config_hash=" << hash_str(c) << "\r\n";
    write_trajectory_csv(tr, f);
  }
  {
    std::ofstream f(fs::path(c.out_dir) / "trajectory.udbt", std::ios::binary);
    write_trajectory_binary(tr, f);
  }
  std::cout << "wrote trajectory.csv and trajectory.udbt in " << c.out_dir << "; endpoint gap "
            << (tr.states.row(grid.n_steps()).transpose() - x_T).norm() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"diffusion-bridge stochastic-optimal-control toolkit"};
  app.require_subcommand(1);

  CliOptions opt;
  std::string checkpoint;
  auto* verify = app.add_subcommand("verify", "run closed-form invariant checks");
  auto* sweep = app.add_subcommand("gamma-sweep", "terminal gap and cost across gammas");
  auto* cost = app.add_subcommand("cost-compare", "cost components per gamma");
  auto* tr = app.add_subcommand("train", "train the eps-prediction model");
  auto* sample = app.add_subcommand("sample", "reverse-SDE samples from a checkpoint");
  auto* sim = app.add_subcommand("simulate", "one noisy controlled forward trajectory");
  for (auto* cmd : {verify, sweep, cost, tr, sample, sim}) add_common(cmd, opt);
  sample->add_option("--checkpoint", checkpoint, "model checkpoint (default OUT/model.udbm)");

  CLI11_PARSE(app, argc, argv);

  try {
    const ExperimentConfig c = load_config(opt);
    if (verify->parsed()) return cmd_verify(c);
    if (sweep->parsed()) return cmd_gamma_sweep(c);
    if (cost->parsed()) return cmd_cost_compare(c);
    if (tr->parsed()) return cmd_train(c);
    if (sample->parsed()) return cmd_sample(c, checkpoint);
    if (sim->parsed()) return cmd_simulate(c);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return 0;
}
