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

#ifndef MMDEST_CHECK_HPP_
#define MMDEST_CHECK_HPP_

#include <cstdint>
#include <stdexcept>

#include "mmdest/generators.hpp"
#include "mmdest/kernels.hpp"
#include "mmdest/latent.hpp"
#include "mmdest/mmd.hpp"
#include "mmdest/types.hpp"

namespace mmdest {

// Central differences of push_forward with the draws held fixed.
template <Generator G>
JacobianStack fd_jacobian(const G& model, const ParamVec& theta, const LatentDraws& u, double h = 1e-6) {
  const Index n = u.size(), d = model.data_dim(), p = model.param_dim();
  JacobianStack out(n, d, p);
  for (Index t = 0; t < p; ++t) {
    ParamVec tp = theta, tm = theta;
    tp[t] += h;
    tm[t] -= h;
    const SampleSet xp = model.simulate(tp, u), xm = model.simulate(tm, u);
    for (Index i = 0; i < n; ++i)
      for (Index c = 0; c < d; ++c) out[i](c, t) = (xp(i, c) - xm(i, c)) / (2.0 * h);
  }
  return out;
}

// Central differences of theta -> mmd2_uu(spec, push_forward(theta, u), Y).
template <Generator G>
Eigen::VectorXd fd_loss_gradient(const KernelSpec& spec, const G& model, const ParamVec& theta,
                                 const LatentDraws& u, const SampleSet& Y, double h = 1e-6) {
  Eigen::VectorXd g(model.param_dim());
  for (Index t = 0; t < g.size(); ++t) {
    ParamVec tp = theta, tm = theta;
    tp[t] += h;
    tm[t] -= h;
    g[t] = (mmd2_uu(spec, model.simulate(tp, u), Y) - mmd2_uu(spec, model.simulate(tm, u), Y)) / (2.0 * h);
  }
  return g;
}

// |est - ref| / |ref| in the Frobenius norm; absolute when ref is zero.
inline double relative_error(const Eigen::Ref<const Eigen::MatrixXd>& est,
                             const Eigen::Ref<const Eigen::MatrixXd>& ref) {
  if (est.rows() != ref.rows() || est.cols() != ref.cols())
    throw std::invalid_argument("relative_error: shape mismatch");
  const double diff = (est - ref).norm(), scale = ref.norm();
  return scale > 0.0 ? diff / scale : diff;
}

inline bool is_sde_family(ModelFamily f) {
  return f == ModelFamily::lotka_volterra || f == ModelFamily::multiscale_sde || f == ModelFamily::coarse_sde;
}

inline double gradcheck_tolerance(ModelFamily f) { return is_sde_family(f) ? 1e-3 : 1e-5; }

// A parameter drawn from a box where the family is well behaved.
inline ParamVec random_theta(const GeneratorModel& model, std::uint64_t seed, std::uint64_t trial) {
  const CounterRng rng(seed, trial);
  std::uint64_t k = 0;
  auto unif = [&](double lo, double hi) { return lo + (hi - lo) * rng.uniform(k++); };
  ParamVec th(model.param_dim());
  switch (model.family()) {
    case ModelFamily::gaussian_location:
      for (Index i = 0; i < th.size(); ++i) th[i] = unif(-2.0, 2.0);
      break;
    case ModelFamily::gaussian_scale: th[0] = unif(-0.5, 0.5); break;
    case ModelFamily::g_and_k: th << unif(2.0, 4.0), unif(0.5, 1.5), unif(0.5, 1.5), unif(-0.5, 0.5); break;
    case ModelFamily::stoch_vol: th << unif(0.5, 3.0), unif(-1.0, 0.5), unif(-3.0, -1.0); break;
    case ModelFamily::lotka_volterra: th << unif(50.0, 150.0), unif(50.0, 150.0); break;
    case ModelFamily::multiscale_sde:
    case ModelFamily::coarse_sde: th << unif(-1.0, 0.0), unif(0.3, 1.5); break;
  }
  return th;
}

struct GradCheckResult {
  double max_rel_error = 0.0;
  double tolerance = 0.0;
  int trials = 0;
  bool passed() const { return max_rel_error <= tolerance; }
};

// grad_estimate against fd_loss_gradient at `trials` random (theta, seed);
// the data Y comes from the model at an independent random parameter.
inline GradCheckResult gradcheck(const KernelSpec& spec, const GeneratorModel& model, int trials, Index n,
                                 std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("gradcheck: trials must be >= 1");
  GradCheckResult out;
  out.tolerance = gradcheck_tolerance(model.family());
  out.trials = trials;
  for (int r = 0; r < trials; ++r) {
    const auto tr = static_cast<std::uint64_t>(r);
    const ParamVec theta = random_theta(model, seed, 2 * tr);
    const ParamVec theta_y = random_theta(model, seed, 2 * tr + 1);
    const LatentDraws u = model.sample_latent(n, seed + tr, 0);
    const SampleSet Y = model.simulate(theta_y, model.sample_latent(n, seed + tr, 1));
    const GradEstimate g = grad_estimate(spec, model, theta, u, Y);
    const Eigen::VectorXd fd = fd_loss_gradient(spec, model, theta, u, Y);
    out.max_rel_error = std::max(out.max_rel_error, relative_error(g.value, fd));
  }
  return out;
}

}  // namespace mmdest

#endif  // MMDEST_CHECK_HPP_
