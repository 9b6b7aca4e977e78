#include "unidb/toy_data.hpp"

namespace unidb {

PairSampler gaussian_pair_sampler(const GaussianEndpointModel& model) {
  const double sd = std::sqrt(model.prior_var);
  return [model, sd](CounterRng& rng, StateVec& x_0, StateVec& x_T) {
    x_0 = model.prior_mean + sd * rng.normal_vec(model.prior_mean.size());
    x_T = model.x_T;
  };
}

StateVec make_patch(CounterRng& rng) {
  // Sum of three random low-frequency plane waves, squashed into [0,1].
  StateVec p(kPatchDim);
  double fx[3], fy[3], ph[3], amp[3];
  for (int w = 0; w < 3; ++w) {
    fx[w] = 0.5 + 1.5 * rng.uniform();
    fy[w] = 0.5 + 1.5 * rng.uniform();
    ph[w] = 2.0 * M_PI * rng.uniform();
    amp[w] = 0.3 + 0.4 * rng.uniform();
  }
  for (int y = 0; y < kPatchSide; ++y) {
    for (int x = 0; x < kPatchSide; ++x) {
      double v = 0.0;
      for (int w = 0; w < 3; ++w) {
        v += amp[w] * std::cos(2.0 * M_PI * (fx[w] * x + fy[w] * y) / kPatchSide + ph[w]);
      }
      p[y * kPatchSide + x] = 0.5 + 0.5 * std::tanh(v);
    }
  }
  return p;
}

StateVec mask_patch(const StateVec& patch) {
  StateVec out = patch;
  for (int y = kHoleLo; y <= kHoleHi; ++y) {
    for (int x = kHoleLo; x <= kHoleHi; ++x) out[y * kPatchSide + x] = 0.0;
  }
  return out;
}

PairSampler patch_pair_sampler() {
  return [](CounterRng& rng, StateVec& x_0, StateVec& x_T) {
    x_0 = make_patch(rng);
    x_T = mask_patch(x_0);
  };
}

double psnr(const StateVec& a, const StateVec& b) {
  const double mse = (a - b).squaredNorm() / static_cast<double>(a.size());
  if (mse <= 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

}  // namespace unidb
