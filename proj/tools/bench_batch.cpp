// Throughput comparison of the serial reference and the OpenMP batch kernels.
#include <chrono>
#include <cstdio>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <unidb/batch.hpp>
#include <unidb/gaussian_oracle.hpp>

using namespace unidb;

namespace {

double seconds(const std::function<void()>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  int n = argc > 1 ? std::atoi(argv[1]) : 20000;
  int steps = argc > 2 ? std::atoi(argv[2]) : 500;
  const int dim = 4;

  const StateVec x_T = StateVec::Constant(dim, 1.0);
  const StateVec x_0 = StateVec::Zero(dim);
  BridgeParams p{make_gou_const(1.0, 1.0), Gamma::infinity(), x_T};
  auto grid = TimeGrid::uniform(steps, 1.0);

#ifdef _OPENMP
  std::printf("OpenMP: %d threads\n", omp_get_max_threads());
#else
  std::printf("OpenMP: disabled at build time\n");
#endif
  std::printf("batch n = %d, steps = %d, dim = %d\n\n", n, steps, dim);

  ForwardBatch fser, fpar;
  const double t_fser =
      seconds([&] { fser = simulate_forward_batch(p, x_0, x_T, grid, 7, n, {}, false); });
  const double t_fpar =
      seconds([&] { fpar = simulate_forward_batch(p, x_0, x_T, grid, 7, n, {}, true); });
  const bool f_same = fser.finals == fpar.finals;
  std::printf("forward  serial %8.3f s  parallel %8.3f s  speedup %5.2fx  bit-identical: %s\n",
              t_fser, t_fpar, t_fser / t_fpar, f_same ? "yes" : "NO");

  GaussianEndpointModel fx{StateVec::Zero(dim), 1.0, x_T};
  const auto score = analytic_eps_fn(fx, p);
  Eigen::MatrixXd rser, rpar;
  const double t_rser =
      seconds([&] { rser = reverse_sde_sample_batch(p, x_T, score, grid, 9, n, false); });
  const double t_rpar =
      seconds([&] { rpar = reverse_sde_sample_batch(p, x_T, score, grid, 9, n, true); });
  const bool r_same = rser == rpar;
  std::printf("reverse  serial %8.3f s  parallel %8.3f s  speedup %5.2fx  bit-identical: %s\n",
              t_rser, t_rpar, t_rser / t_rpar, r_same ? "yes" : "NO");

  return f_same && r_same ? 0 : 1;
}
