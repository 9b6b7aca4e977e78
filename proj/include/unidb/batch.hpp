#pragma once

#include "unidb/sde.hpp"

namespace unidb {

// Batch Monte Carlo kernels. Each trajectory uses its own counter-based RNG
// stream keyed by derive_key(seed, index), so the OpenMP-parallel kernels and
// the serial reference produce bit-identical results; tests assert that and
// a benchmark tool compares their throughput.

// Final states (and optionally the states at the requested interior knot
// indices) of n noisy forward simulations. Row i = trajectory i.
struct ForwardBatch {
  Eigen::MatrixXd finals;                  // n x d
  std::vector<Eigen::MatrixXd> snapshots;  // one n x d block per requested knot
};

ForwardBatch simulate_forward_batch(const BridgeParams& p, const StateVec& x_0,
                                    const StateVec& x_T, const TimeGrid& grid,
                                    std::uint64_t seed, int n,
                                    const std::vector<int>& snapshot_knots = {},
                                    bool parallel = true);

Eigen::MatrixXd reverse_sde_sample_batch(const BridgeParams& p, const StateVec& x_T,
                                         const ScoreFn& score, const TimeGrid& grid,
                                         std::uint64_t seed, int n, bool parallel = true);

}  // namespace unidb
