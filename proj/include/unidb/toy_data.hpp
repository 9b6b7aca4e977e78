#pragma once

#include "unidb/gaussian_oracle.hpp"
#include "unidb/score_model.hpp"

namespace unidb {

// (x_0, x_T) sampler for the Gaussian endpoint fixture.
PairSampler gaussian_pair_sampler(const GaussianEndpointModel& model);

// 8x8 grayscale inpainting toy: smooth random patches in [0,1] with a fixed
// 3x3 hole (rows/cols 3..5) zeroed out; x_0 = clean patch, x_T = masked.
constexpr int kPatchSide = 8;
constexpr int kPatchDim = kPatchSide * kPatchSide;
constexpr int kHoleLo = 3, kHoleHi = 5;  // inclusive

StateVec make_patch(CounterRng& rng);
StateVec mask_patch(const StateVec& patch);
PairSampler patch_pair_sampler();

// PSNR with MAX = 1.0: 10 log10(1 / MSE).
double psnr(const StateVec& a, const StateVec& b);

}  // namespace unidb
