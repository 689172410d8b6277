// Copyright 2026 The mmdest Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Fit the mean of a Gaussian by natural-gradient descent and compare the
// spread of the estimate with the closed-form asymptotic variance.

#include <cmath>
#include <cstdio>

#include "mmdest/mmdest.hpp"

int main() {
  using namespace mmdest;
  const GaussianLocation model(1, 1.0);
  const KernelSpec kernel = KernelSpec::gaussian_density(1.0);
  const Index m = 500;

  FitConfig cfg;
  cfg.iterations = 2000;
  cfg.n_sim = 20;
  cfg.minibatch = 20;
  cfg.eta0 = 0.1;
  cfg.average_tail = 0.5;

  double sum = 0.0, sum2 = 0.0;
  const int reps = 20;
  for (int r = 0; r < reps; ++r) {
    const SampleSet y = model.simulate(ParamVec::Zero(1), model.sample_latent(m, r, kDataStream));
    cfg.seed = r;
    const FitTrace tr = fit(kernel, model, y, ParamVec::Constant(1, 0.5), cfg);
    const double z = std::sqrt(static_cast<double>(m)) * tr.theta_hat[0];
    sum += z;
    sum2 += z * z;
    std::printf("rep %2d  theta_hat % .5f  (%s)\n", r, tr.theta_hat[0], tr.termination.c_str());
  }
  const double mean = sum / reps, var = (sum2 - reps * mean * mean) / (reps - 1);
  std::printf("var of sqrt(m) theta_hat: %.4f   closed form: %.4f\n", var, loc_asym_variance(1.0, 1.0, 1.0));
  return 0;
}
