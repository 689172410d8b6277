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

// g-and-k with plain and natural SGD from the same start and seeds.

#include <cstdio>

#include "mmdest/mmdest.hpp"

int main() {
  using namespace mmdest;
  const GAndK model;
  ParamVec truth(4);
  truth << 3.0, 1.0, 1.0, -0.6931471805599453;
  const SampleSet y = model.simulate(truth, model.sample_latent(2000, 1, kDataStream));
  const KernelSpec kernel = KernelSpec::gaussian_rbf(2.0);
  ParamVec start(4);
  start << 2.0, 1.5, 0.5, 0.0;

  for (FitMethod method : {FitMethod::sgd, FitMethod::natural_sgd}) {
    FitConfig cfg;
    cfg.method = method;
    cfg.iterations = 300;
    cfg.n_sim = 200;
    cfg.minibatch = 200;
    cfg.eta0 = method == FitMethod::sgd ? 2.0 : 0.05;
    if (method == FitMethod::natural_sgd) cfg.ridge = 1e-3;
    cfg.seed = 7;
    const FitTrace tr = fit(kernel, model, y, start, cfg);
    std::printf("%-12s theta_hat = [% .4f % .4f % .4f % .4f]  l1 error %.4f\n",
                std::string(to_string(method)).c_str(), tr.theta_hat[0], tr.theta_hat[1], tr.theta_hat[2],
                tr.theta_hat[3], (tr.theta_hat - truth).lpNorm<1>());
  }
  return 0;
}
