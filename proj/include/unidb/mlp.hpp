#pragma once

#include <vector>

#include "unidb/rng.hpp"
#include "unidb/types.hpp"

namespace unidb {

// Minimal fully-connected net with SiLU hidden activations, linear output,
// and hand-written reverse-mode gradients (checked against central finite
// differences in the tests).
struct Mlp {
  std::vector<Eigen::MatrixXd> W;  // layer l: dims[l+1] x dims[l]
  std::vector<Eigen::VectorXd> b;
  std::uint64_t init_seed = 0;

  static Mlp init(const std::vector<int>& dims, std::uint64_t seed);

  int in_dim() const { return static_cast<int>(W.front().cols()); }
  int out_dim() const { return static_cast<int>(W.back().rows()); }
  std::vector<int> dims() const;
  std::size_t n_params() const;

  Eigen::VectorXd forward(const Eigen::VectorXd& x) const;

  // Forward pass retaining pre-activations for backprop.
  struct Tape {
    std::vector<Eigen::VectorXd> act;  // act[0] = input, act[L] = output
    std::vector<Eigen::VectorXd> pre;  // pre[l] = W_l act[l] + b_l
  };
  Eigen::VectorXd forward(const Eigen::VectorXd& x, Tape& tape) const;

  struct Grad {
    std::vector<Eigen::MatrixXd> dW;
    std::vector<Eigen::VectorXd> db;
    static Grad zeros_like(const Mlp& m);
    void scale(double s);
  };
  // Accumulates d(loss)/d(params) into g given d(loss)/d(output).
  void backward(const Tape& tape, const Eigen::VectorXd& grad_out, Grad& g) const;

  // Flat views used by the finite-difference tests and the checkpoint writer.
  double* param_ptr(std::size_t flat_index);
  double grad_at(const Grad& g, std::size_t flat_index) const;
};

struct Adam {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.99;
  double eps = 1e-8;
  long step_count = 0;
  Mlp::Grad m, v;

  explicit Adam(const Mlp& net, double lr_in, double b1, double b2)
      : lr(lr_in), beta1(b1), beta2(b2), m(Mlp::Grad::zeros_like(net)),
        v(Mlp::Grad::zeros_like(net)) {}

  void step(Mlp& net, const Mlp::Grad& g);
};

double silu(double z);
double silu_deriv(double z);

}  // namespace unidb
