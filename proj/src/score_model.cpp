#include "unidb/score_model.hpp"

#include <cstring>
#include <istream>
#include <ostream>

namespace unidb {

ScoreModel ScoreModel::init(int dim, const std::vector<int>& hidden, int time_features,
                            double horizon, std::uint64_t seed) {
  if (dim < 1 || time_features < 2 || time_features % 2 != 0) {
    throw ConfigError("ScoreModel needs dim >= 1 and an even time_features >= 2");
  }
  ScoreModel m;
  m.dim = dim;
  m.time_features = time_features;
  m.horizon = horizon;
  std::vector<int> dims{2 * dim + time_features};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(dim);
  m.net = Mlp::init(dims, seed);
  return m;
}

Eigen::VectorXd ScoreModel::embed(const StateVec& x_t, const StateVec& x_T, double t) const {
  Eigen::VectorXd in(2 * dim + time_features);
  in.head(dim) = x_t;
  in.segment(dim, dim) = x_T;
  const double u = t / horizon;
  for (int j = 0; j < time_features / 2; ++j) {
    const double w = M_PI * std::ldexp(1.0, j);  // pi * 2^j
    in[2 * dim + 2 * j] = std::sin(w * u);
    in[2 * dim + 2 * j + 1] = std::cos(w * u);
  }
  return in;
}

StateVec ScoreModel::eval(const StateVec& x_t, const StateVec& x_T, double t) const {
  return net.forward(embed(x_t, x_T, t));
}

ScoreFn ScoreModel::as_score_fn() const {
  return [m = *this](const StateVec& x_t, const StateVec& x_T, double t) {
    return m.eval(x_t, x_T, t);
  };
}

StateVec posterior_target(const BridgeParams& p, const StateVec& x_0, const StateVec& x_t,
                          const StateVec& x_T, double t, double t_prev) {
  if (!(0.0 <= t_prev && t_prev < t && t <= p.horizon())) {
    throw DomainError("posterior_target requires 0 <= t_prev < t <= T");
  }
  const auto ct = interpolant_coeffs(p, t);
  if (ct.sigma_prime <= 0.0) {
    throw SingularityError("posterior_target: sigma'_t = 0");
  }
  const auto cp = interpolant_coeffs(p, t_prev);
  const StateVec mu_t = ct.a * x_0 + ct.b * x_T + ct.c * p.m;
  const StateVec mu_p = cp.a * x_0 + cp.b * x_T + cp.c * p.m;
  const double ratio = (cp.sigma_prime * cp.sigma_prime * ct.a) /
                       (ct.sigma_prime * ct.sigma_prime * cp.a);
  return mu_p + ratio * (x_t - mu_t);
}

StateVec model_mean(const BridgeParams& p, const StateVec& x_t, const StateVec& x_T,
                    double t, double dt, const StateVec& eps_hat) {
  if (!(t > 0.0)) throw DomainError("model_mean requires t > 0");
  const double sp = transition_std(p, t);
  if (sp <= 0.0) throw SingularityError("model_mean: sigma'_t = 0");
  const auto& s = p.schedule;
  const StateVec u = optimal_controller(p, t, x_t, x_T);
  return x_t - (s.f(t) * x_t + s.h(t) * p.m + s.g(t) * u) * dt -
         (s.g_sq(t) / sp * dt) * eps_hat;
}

TrainBatch make_train_batch(const PairSampler& sample_pair, int dim, const TimeGrid& grid,
                            int batch_size, std::uint64_t seed) {
  if (batch_size < 1) throw DomainError("batch_size must be positive");
  TrainBatch batch;
  batch.seed = seed;
  CounterRng rng(CounterRng::derive_key(seed, 0xBA7C4));
  const int N = grid.n_steps();
  batch.items.resize(batch_size);
  for (auto& it : batch.items) {
    it.x_0.resize(dim);
    it.x_T.resize(dim);
    sample_pair(rng, it.x_0, it.x_T);
    // Alg. 1 draws t from Uniform({1..N}); t = 0 is excluded.
    it.k = 1 + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(N));
    it.noise = rng.normal_vec(dim);
  }
  return batch;
}

namespace {

struct ItemEval {
  double t, t_prev, dt, weight, g_sq, sigma_prime;
  StateVec x_t, residual;  // residual = model_mean - posterior_target
};

// rho and drho/dr for exact l1 (delta = 0) or its Huber smoothing.
inline double rho(double r, double delta) {
  if (delta <= 0.0) return std::abs(r);
  const double a = std::abs(r);
  return a <= delta ? r * r / (2.0 * delta) : a - 0.5 * delta;
}
inline double drho(double r, double delta) {
  if (delta <= 0.0) return r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0);
  return std::clamp(r / delta, -1.0, 1.0);
}

ItemEval eval_item(const BridgeParams& p_in, const TrainItem& item, const TimeGrid& grid,
                   const StateVec& eps_hat, const LossOptions& opt) {
  const BridgeParams p = p_in.anchored(item.x_T);
  const int N = grid.n_steps();
  const int kk = std::min(item.k, N - 1);  // t = T is singular; clamp to N-1
  ItemEval e;
  e.t = grid.knots[kk];
  e.t_prev = grid.knots[kk - 1];
  e.dt = e.t - e.t_prev;
  const auto co = interpolant_coeffs(p, e.t);
  e.sigma_prime = co.sigma_prime;
  e.x_t = co.a * item.x_0 + co.b * item.x_T + co.c * p.m + co.sigma_prime * item.noise;
  e.g_sq = p.schedule.g_sq(e.t);
  if (e.g_sq <= 0.0) throw TrainingError("loss: g_t = 0 at a sampled t");
  e.weight = opt.weighted ? 1.0 / (2.0 * e.g_sq) : 1.0;
  const StateVec target = posterior_target(p, item.x_0, e.x_t, item.x_T, e.t, e.t_prev);
  e.residual = model_mean(p, e.x_t, item.x_T, e.t, e.dt, eps_hat) - target;
  return e;
}

}  // namespace

double loss(const BridgeParams& p, const ScoreModel& model, const TrainBatch& batch,
            const TimeGrid& grid, const LossOptions& opt) {
  if (batch.items.empty()) throw DomainError("loss: empty batch");
  double total = 0.0;
  for (const auto& item : batch.items) {
    const BridgeParams pp = p.anchored(item.x_T);
    const int kk = std::min(item.k, grid.n_steps() - 1);
    const auto co = interpolant_coeffs(pp, grid.knots[kk]);
    const StateVec x_t =
        co.a * item.x_0 + co.b * item.x_T + co.c * pp.m + co.sigma_prime * item.noise;
    const auto e = eval_item(pp, item, grid, model.eval(x_t, item.x_T, grid.knots[kk]), opt);
    double item_loss = 0.0;
    for (Eigen::Index i = 0; i < e.residual.size(); ++i) {
      item_loss += rho(e.residual[i], opt.huber_delta);
    }
    total += e.weight * item_loss;
  }
  return total / static_cast<double>(batch.items.size());
}

double loss_grad(const BridgeParams& p, const ScoreModel& model, const TrainBatch& batch,
                 const TimeGrid& grid, Mlp::Grad& g, const LossOptions& opt) {
  if (batch.items.empty()) throw DomainError("loss_grad: empty batch");
  double total = 0.0;
  const double inv_b = 1.0 / static_cast<double>(batch.items.size());
  Mlp::Tape tape;
  for (const auto& item : batch.items) {
    const BridgeParams pp = p.anchored(item.x_T);
    const int kk = std::min(item.k, grid.n_steps() - 1);
    const double t = grid.knots[kk];
    const auto co = interpolant_coeffs(pp, t);
    const StateVec x_t =
        co.a * item.x_0 + co.b * item.x_T + co.c * pp.m + co.sigma_prime * item.noise;
    const Eigen::VectorXd eps_hat = model.net.forward(model.embed(x_t, item.x_T, t), tape);
    if (!eps_hat.allFinite()) throw TrainingError("loss_grad: non-finite activations");
    const auto e = eval_item(pp, item, grid, eps_hat, opt);
    Eigen::VectorXd grad_out(e.residual.size());
    // d pred / d eps_hat = -(g^2/sigma') dt, elementwise
    const double deps = -(e.g_sq / e.sigma_prime) * e.dt;
    for (Eigen::Index i = 0; i < e.residual.size(); ++i) {
      total += e.weight * rho(e.residual[i], opt.huber_delta);
      grad_out[i] = e.weight * inv_b * drho(e.residual[i], opt.huber_delta) * deps;
    }
    model.net.backward(tape, grad_out, g);
  }
  return total * inv_b;
}

TrainResult train(const BridgeParams& p, const TimeGrid& grid, const PairSampler& data,
                  int dim, const TrainConfig& cfg) {
  return train(p, grid, data, cfg,
               ScoreModel::init(dim, cfg.hidden, cfg.time_features, grid.horizon(),
                                cfg.seed));
}

TrainResult train(const BridgeParams& p, const TimeGrid& grid, const PairSampler& data,
                  const TrainConfig& cfg, ScoreModel start) {
  TrainResult out;
  out.model = std::move(start);
  const int dim = out.model.dim;
  Adam opt(out.model.net, cfg.lr, cfg.beta1, cfg.beta2);
  out.loss_curve.reserve(cfg.steps);
  for (int step = 0; step < cfg.steps; ++step) {
    const auto batch = make_train_batch(data, dim, grid, cfg.batch_size,
                                        CounterRng::derive_key(cfg.seed, step));
    auto g = Mlp::Grad::zeros_like(out.model.net);
    const double l = loss_grad(p, out.model, batch, grid, g, cfg.loss_opt);
    if (!std::isfinite(l)) {
      throw TrainingError("training diverged (non-finite loss) at step " +
                          std::to_string(step));
    }
    opt.step(out.model.net, g);
    out.loss_curve.push_back(l);
  }
  return out;
}

namespace {

constexpr char kCkptMagic[4] = {'U', 'D', 'B', 'M'};
constexpr std::uint8_t kCkptVersion = 1;

template <typename T>
void put_raw(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

template <typename T>
T get_raw(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!is) throw ConfigError("checkpoint: truncated stream");
  return v;
}

}  // namespace

void save_checkpoint(const ScoreModel& model, const std::string& config_echo,
                     std::ostream& os) {
  os.write(kCkptMagic, 4);
  put_raw(os, kCkptVersion);
  put_raw(os, static_cast<std::int32_t>(model.dim));
  put_raw(os, static_cast<std::int32_t>(model.time_features));
  put_raw(os, model.horizon);
  put_raw(os, model.net.init_seed);
  const auto dims = model.net.dims();
  put_raw(os, static_cast<std::uint8_t>(dims.size()));
  for (int d : dims) put_raw(os, static_cast<std::int32_t>(d));
  for (std::size_t l = 0; l < model.net.W.size(); ++l) {
    const auto& W = model.net.W[l];
    for (Eigen::Index r = 0; r < W.rows(); ++r) {
      for (Eigen::Index c = 0; c < W.cols(); ++c) put_raw(os, W(r, c));
    }
    for (Eigen::Index i = 0; i < model.net.b[l].size(); ++i) put_raw(os, model.net.b[l][i]);
  }
  put_raw(os, static_cast<std::uint32_t>(config_echo.size()));
  os.write(config_echo.data(), static_cast<std::streamsize>(config_echo.size()));
}

ScoreModel load_checkpoint(std::istream& is, std::string* config_echo) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kCkptMagic, 4) != 0) {
    throw ConfigError("checkpoint: bad magic");
  }
  if (get_raw<std::uint8_t>(is) != kCkptVersion) {
    throw ConfigError("checkpoint: unsupported version");
  }
  ScoreModel m;
  m.dim = get_raw<std::int32_t>(is);
  m.time_features = get_raw<std::int32_t>(is);
  m.horizon = get_raw<double>(is);
  const std::uint64_t seed = get_raw<std::uint64_t>(is);
  const int n_dims = get_raw<std::uint8_t>(is);
  std::vector<int> dims(n_dims);
  for (auto& d : dims) d = get_raw<std::int32_t>(is);
  m.net = Mlp::init(dims, seed);
  for (std::size_t l = 0; l < m.net.W.size(); ++l) {
    auto& W = m.net.W[l];
    for (Eigen::Index r = 0; r < W.rows(); ++r) {
      for (Eigen::Index c = 0; c < W.cols(); ++c) W(r, c) = get_raw<double>(is);
    }
    for (Eigen::Index i = 0; i < m.net.b[l].size(); ++i) m.net.b[l][i] = get_raw<double>(is);
  }
  const auto echo_len = get_raw<std::uint32_t>(is);
  std::string echo(echo_len, '\0');
  is.read(echo.data(), echo_len);
  if (!is) throw ConfigError("checkpoint: truncated config echo");
  if (config_echo) *config_echo = echo;
  return m;
}

void write_loss_csv(const std::vector<double>& curve, std::ostream& os) {
  os << "schema_version,step,loss\r\n";
  char buf[32];
  for (std::size_t i = 0; i < curve.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", curve[i]);
    os << "1," << i << ',' << buf << "\r\n";
  }
}

}  // namespace unidb
