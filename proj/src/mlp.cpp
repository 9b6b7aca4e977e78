#include "unidb/mlp.hpp"

#include <cmath>

namespace unidb {

double silu(double z) { return z / (1.0 + std::exp(-z)); }

double silu_deriv(double z) {
  const double s = 1.0 / (1.0 + std::exp(-z));
  return s * (1.0 + z * (1.0 - s));
}

Mlp Mlp::init(const std::vector<int>& dims, std::uint64_t seed) {
  if (dims.size() < 2) throw ConfigError("Mlp needs at least input and output dims");
  Mlp m;
  m.init_seed = seed;
  CounterRng rng(CounterRng::derive_key(seed, 0xA11CE));
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const int in = dims[l], out = dims[l + 1];
    if (in < 1 || out < 1) throw ConfigError("Mlp layer widths must be positive");
    const double scale = std::sqrt(6.0 / (in + out));  // Glorot uniform
    Eigen::MatrixXd W(out, in);
    for (int r = 0; r < out; ++r) {
      for (int c = 0; c < in; ++c) W(r, c) = (2.0 * rng.uniform() - 1.0) * scale;
    }
    m.W.push_back(std::move(W));
    m.b.push_back(Eigen::VectorXd::Zero(out));
  }
  return m;
}

std::vector<int> Mlp::dims() const {
  std::vector<int> d{in_dim()};
  for (const auto& w : W) d.push_back(static_cast<int>(w.rows()));
  return d;
}

std::size_t Mlp::n_params() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < W.size(); ++l) n += W[l].size() + b[l].size();
  return n;
}

Eigen::VectorXd Mlp::forward(const Eigen::VectorXd& x) const {
  Eigen::VectorXd a = x;
  for (std::size_t l = 0; l < W.size(); ++l) {
    Eigen::VectorXd z = W[l] * a + b[l];
    if (l + 1 < W.size()) {
      a = z.unaryExpr([](double v) { return silu(v); });
    } else {
      a = std::move(z);
    }
  }
  return a;
}

Eigen::VectorXd Mlp::forward(const Eigen::VectorXd& x, Tape& tape) const {
  tape.act.assign(1, x);
  tape.pre.clear();
  for (std::size_t l = 0; l < W.size(); ++l) {
    Eigen::VectorXd z = W[l] * tape.act.back() + b[l];
    tape.pre.push_back(z);
    if (l + 1 < W.size()) {
      tape.act.push_back(z.unaryExpr([](double v) { return silu(v); }));
    } else {
      tape.act.push_back(std::move(z));
    }
  }
  return tape.act.back();
}

Mlp::Grad Mlp::Grad::zeros_like(const Mlp& m) {
  Grad g;
  for (std::size_t l = 0; l < m.W.size(); ++l) {
    g.dW.push_back(Eigen::MatrixXd::Zero(m.W[l].rows(), m.W[l].cols()));
    g.db.push_back(Eigen::VectorXd::Zero(m.b[l].size()));
  }
  return g;
}

void Mlp::Grad::scale(double s) {
  for (auto& w : dW) w *= s;
  for (auto& v : db) v *= s;
}

void Mlp::backward(const Tape& tape, const Eigen::VectorXd& grad_out, Grad& g) const {
  Eigen::VectorXd delta = grad_out;  // d loss / d pre-activation of last layer
  for (std::size_t l = W.size(); l-- > 0;) {
    g.dW[l].noalias() += delta * tape.act[l].transpose();
    g.db[l] += delta;
    if (l > 0) {
      Eigen::VectorXd back = W[l].transpose() * delta;
      delta = back.cwiseProduct(
          tape.pre[l - 1].unaryExpr([](double v) { return silu_deriv(v); }));
    }
  }
}

double* Mlp::param_ptr(std::size_t flat_index) {
  for (std::size_t l = 0; l < W.size(); ++l) {
    if (flat_index < static_cast<std::size_t>(W[l].size())) return W[l].data() + flat_index;
    flat_index -= W[l].size();
    if (flat_index < static_cast<std::size_t>(b[l].size())) return b[l].data() + flat_index;
    flat_index -= b[l].size();
  }
  throw DomainError("Mlp::param_ptr: index out of range");
}

double Mlp::grad_at(const Grad& g, std::size_t flat_index) const {
  for (std::size_t l = 0; l < W.size(); ++l) {
    if (flat_index < static_cast<std::size_t>(g.dW[l].size()))
      return g.dW[l].data()[flat_index];
    flat_index -= g.dW[l].size();
    if (flat_index < static_cast<std::size_t>(g.db[l].size()))
      return g.db[l].data()[flat_index];
    flat_index -= g.db[l].size();
  }
  throw DomainError("Mlp::grad_at: index out of range");
}

void Adam::step(Mlp& net, const Mlp::Grad& g) {
  ++step_count;
  const double c1 = 1.0 - std::pow(beta1, step_count);
  const double c2 = 1.0 - std::pow(beta2, step_count);
  for (std::size_t l = 0; l < net.W.size(); ++l) {
    m.dW[l] = beta1 * m.dW[l] + (1.0 - beta1) * g.dW[l];
    v.dW[l] = beta2 * v.dW[l] + (1.0 - beta2) * g.dW[l].cwiseProduct(g.dW[l]);
    net.W[l].array() -=
        lr * (m.dW[l].array() / c1) / ((v.dW[l].array() / c2).sqrt() + eps);
    m.db[l] = beta1 * m.db[l] + (1.0 - beta1) * g.db[l];
    v.db[l] = beta2 * v.db[l] + (1.0 - beta2) * g.db[l].cwiseProduct(g.db[l]);
    net.b[l].array() -=
        lr * (m.db[l].array() / c1) / ((v.db[l].array() / c2).sqrt() + eps);
  }
}

}  // namespace unidb
