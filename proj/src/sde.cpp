#include "unidb/sde.hpp"

#include <cstring>
#include <istream>
#include <ostream>
#include <string>

namespace unidb {

TimeGrid TimeGrid::uniform(int n_steps, double horizon) {
  if (n_steps < 1 || horizon <= 0.0) throw ConfigError("grid needs n_steps >= 1, horizon > 0");
  TimeGrid g;
  g.knots.resize(n_steps + 1);
  for (int k = 0; k <= n_steps; ++k) g.knots[k] = horizon * k / n_steps;
  g.knots.back() = horizon;
  return g;
}

TimeGrid TimeGrid::from_knots(std::vector<double> k) {
  if (k.size() < 2 || k.front() != 0.0) throw ConfigError("grid knots must start at 0");
  for (std::size_t i = 1; i < k.size(); ++i) {
    if (k[i] <= k[i - 1]) throw ConfigError("grid knots must be strictly increasing");
  }
  TimeGrid g;
  g.knots = std::move(k);
  return g;
}

namespace {

void check_finite(const StateVec& x, int step, const char* what) {
  if (!x.allFinite()) {
    throw IntegrationError(std::string(what) + " produced a non-finite state at step " +
                           std::to_string(step));
  }
}

}  // namespace

Trajectory simulate_forward(const BridgeParams& p, const StateVec& x_0, const StateVec& x_T,
                            const TimeGrid& grid, std::uint64_t seed, bool noise_on) {
  const BridgeParams pp = p.anchored(x_T);
  if (x_0.size() != x_T.size() || x_0.size() != pp.m.size()) {
    throw DomainError("simulate_forward: dimension mismatch");
  }
  const int N = grid.n_steps();
  const auto d = x_0.size();
  Trajectory tr;
  tr.times = grid.knots;
  tr.seed = seed;
  tr.states.resize(N + 1, d);
  tr.controls = Eigen::MatrixXd::Zero(N, d);
  tr.states.row(0) = x_0;

  CounterRng rng(CounterRng::derive_key(seed, 0));
  StateVec x = x_0;
  const bool snap = pp.gamma.is_infinite();
  for (int k = 0; k < N; ++k) {
    if (snap && k == N - 1) {
      // gamma = inf: d_{T,inf} = 0 makes the last update singular; the bridge
      // pins the endpoint, so the controller stops one step early.
      x = x_T;
      tr.states.row(k + 1) = x;
      break;
    }
    const double t = grid.knots[k];
    const double dt = grid.dt(k);
    const double g = pp.schedule.g(t);
    const StateVec u = optimal_controller(pp, t, x, x_T);
    tr.controls.row(k) = u;
    x += (pp.schedule.f(t) * x + pp.schedule.h(t) * pp.m + g * u) * dt;
    if (noise_on) x += g * std::sqrt(dt) * rng.normal_vec(d);
    check_finite(x, k, "simulate_forward");
    tr.states.row(k + 1) = x;
  }
  return tr;
}

namespace {

StateVec reverse_core(const BridgeParams& p, const StateVec& x_T, const ScoreFn& score,
                      const TimeGrid& grid, std::uint64_t seed, bool noisy) {
  const BridgeParams pp = p.anchored(x_T);
  if (x_T.size() != pp.m.size()) throw DomainError("reverse sampler: dimension mismatch");
  const int N = grid.n_steps();
  const auto d = x_T.size();
  CounterRng rng(CounterRng::derive_key(seed, 0));
  StateVec x = x_T;
  for (int k = N; k >= 1; --k) {
    const double t = grid.eval_time(k);
    const double dt = grid.knots[k] - grid.knots[k - 1];
    const double g = pp.schedule.g(t);
    const StateVec u = optimal_controller(pp, t, x, x_T);
    StateVec eps = score(x, x_T, t);
    if (!eps.allFinite()) {
      throw IntegrationError("reverse sampler: score returned non-finite values at step " +
                             std::to_string(k));
    }
    const double sp = transition_std(pp, t);
    StateVec score_term;
    if (sp > 0.0) {
      score_term = (pp.schedule.g_sq(t) / sp) * eps;
    } else if (eps.isZero(0.0)) {
      score_term = StateVec::Zero(d);
    } else {
      throw SingularityError("reverse sampler: sigma'_t = 0 with nonzero eps at step " +
                             std::to_string(k));
    }
    x -= (pp.schedule.f(t) * x + pp.schedule.h(t) * pp.m + g * u + score_term) * dt;
    if (noisy && k > 1) x -= g * std::sqrt(dt) * rng.normal_vec(d);  // z = 0 on final step
    check_finite(x, k, "reverse sampler");
  }
  return x;
}

}  // namespace

StateVec reverse_sde_sample(const BridgeParams& p, const StateVec& x_T, const ScoreFn& score,
                            const TimeGrid& grid, std::uint64_t seed) {
  return reverse_core(p, x_T, score, grid, seed, true);
}

StateVec mean_ode_sample(const BridgeParams& p, const StateVec& x_T, const ScoreFn& score,
                         const TimeGrid& grid) {
  return reverse_core(p, x_T, score, grid, 0, false);
}

void write_trajectory_csv(const Trajectory& tr, std::ostream& os) {
  const auto d = tr.states.cols();
  os << "step,t";
  for (Eigen::Index i = 0; i < d; ++i) os << ",x" << i;
  if (tr.has_controls()) {
    for (Eigen::Index i = 0; i < d; ++i) os << ",u" << i;
  }
  os << "\r\n";
  char buf[32];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    os << ',' << buf;
  };
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    os << k;
    put(tr.times[k]);
    for (Eigen::Index i = 0; i < d; ++i) put(tr.states(k, i));
    if (tr.has_controls()) {
      for (Eigen::Index i = 0; i < d; ++i) {
        put(k + 1 < tr.times.size() ? tr.controls(k, i) : 0.0);
      }
    }
    os << "\r\n";
  }
}

namespace {

constexpr char kTrajMagic[4] = {'U', 'D', 'B', 'T'};
constexpr std::uint8_t kTrajVersion = 1;

template <typename T>
void put_raw(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));  // little-endian host
}

template <typename T>
T get_raw(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!is) throw IntegrationError("trajectory binary: truncated stream");
  return v;
}

}  // namespace

void write_trajectory_binary(const Trajectory& tr, std::ostream& os) {
  os.write(kTrajMagic, 4);
  put_raw(os, kTrajVersion);
  put_raw(os, static_cast<std::uint8_t>(tr.has_controls() ? 1 : 0));
  put_raw(os, static_cast<std::uint32_t>(tr.times.size()));
  put_raw(os, static_cast<std::uint32_t>(tr.states.cols()));
  put_raw(os, static_cast<std::uint64_t>(tr.seed));
  for (double t : tr.times) put_raw(os, t);
  for (Eigen::Index r = 0; r < tr.states.rows(); ++r) {
    for (Eigen::Index c = 0; c < tr.states.cols(); ++c) put_raw(os, tr.states(r, c));
  }
  if (tr.has_controls()) {
    for (Eigen::Index r = 0; r < tr.controls.rows(); ++r) {
      for (Eigen::Index c = 0; c < tr.controls.cols(); ++c) put_raw(os, tr.controls(r, c));
    }
  }
}

Trajectory read_trajectory_binary(std::istream& is) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kTrajMagic, 4) != 0) {
    throw IntegrationError("trajectory binary: bad magic");
  }
  if (get_raw<std::uint8_t>(is) != kTrajVersion) {
    throw IntegrationError("trajectory binary: unsupported version");
  }
  const bool has_controls = get_raw<std::uint8_t>(is) != 0;
  const auto n_times = get_raw<std::uint32_t>(is);
  const auto dim = get_raw<std::uint32_t>(is);
  Trajectory tr;
  tr.seed = get_raw<std::uint64_t>(is);
  tr.times.resize(n_times);
  for (auto& t : tr.times) t = get_raw<double>(is);
  tr.states.resize(n_times, dim);
  for (std::uint32_t r = 0; r < n_times; ++r) {
    for (std::uint32_t c = 0; c < dim; ++c) tr.states(r, c) = get_raw<double>(is);
  }
  if (has_controls) {
    tr.controls.resize(n_times - 1, dim);
    for (std::uint32_t r = 0; r + 1 < n_times; ++r) {
      for (std::uint32_t c = 0; c < dim; ++c) tr.controls(r, c) = get_raw<double>(is);
    }
  }
  return tr;
}

}  // namespace unidb
