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

#ifndef MMDEST_KERNELS_HPP_
#define MMDEST_KERNELS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mmdest/latent.hpp"
#include "mmdest/types.hpp"

namespace mmdest {

enum class KernelFamily { gaussian_density, gaussian_rbf, matern12, matern32, imq, mixture };

inline std::string_view to_string(KernelFamily f) {
  switch (f) {
    case KernelFamily::gaussian_density: return "gaussian-density";
    case KernelFamily::gaussian_rbf: return "gaussian-rbf";
    case KernelFamily::matern12: return "matern-1/2";
    case KernelFamily::matern32: return "matern-3/2";
    case KernelFamily::imq: return "imq";
    case KernelFamily::mixture: return "mixture";
  }
  return "?";
}

inline KernelFamily kernel_family_from_string(std::string_view s) {
  for (auto f : {KernelFamily::gaussian_density, KernelFamily::gaussian_rbf, KernelFamily::matern12,
                 KernelFamily::matern32, KernelFamily::imq, KernelFamily::mixture})
    if (to_string(f) == s) return f;
  throw std::invalid_argument("unknown kernel family '" + std::string(s) + "'");
}

// thrown when a derivative is requested where the kernel is not differentiable
class NonSmoothKernelError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct KernelComponent {
  KernelFamily family = KernelFamily::gaussian_rbf;
  double lengthscale = 1.0;
  double beta = 0.5;  // imq exponent
};

// psi(q) and its q-derivatives, q = |x - y|^2.
struct RadialProfile {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
  bool nonsmooth = false;  // matern-1/2 at q = 0
};

// Kernel constants resolved for a fixed data dimension; cheap to evaluate.
class BoundKernel {
 public:
  struct Term {
    KernelFamily family;
    double amp;
    double c;     // 1/(2l^2) gaussian, 1/l^2 imq, sqrt3/l or 1/l matern
    double beta;
  };

  explicit BoundKernel(std::vector<Term> terms) : terms_(std::move(terms)) {}

  RadialProfile profile(double q) const {
    RadialProfile p;
    for (const Term& t : terms_) add_term(t, q, p);
    return p;
  }

  double value(double q) const {
    double v = 0.0;
    for (const Term& t : terms_) {
      switch (t.family) {
        case KernelFamily::gaussian_density:
        case KernelFamily::gaussian_rbf: v += t.amp * std::exp(-q * t.c); break;
        case KernelFamily::imq: v += t.amp * std::pow(1.0 + q * t.c, -t.beta); break;
        case KernelFamily::matern32: {
          const double s = t.c * std::sqrt(q);
          v += t.amp * (1.0 + s) * std::exp(-s);
          break;
        }
        case KernelFamily::matern12: v += t.amp * std::exp(-t.c * std::sqrt(q)); break;
        case KernelFamily::mixture: break;
      }
    }
    return v;
  }

  bool has_nonsmooth() const {
    return std::any_of(terms_.begin(), terms_.end(),
                       [](const Term& t) { return t.family == KernelFamily::matern12; });
  }

 private:
  static void add_term(const Term& t, double q, RadialProfile& p) {
    switch (t.family) {
      case KernelFamily::gaussian_density:
      case KernelFamily::gaussian_rbf: {
        const double e = t.amp * std::exp(-q * t.c);
        p.value += e;
        p.d1 -= t.c * e;
        p.d2 += t.c * t.c * e;
        break;
      }
      case KernelFamily::imq: {
        const double base = 1.0 + q * t.c;
        const double v = t.amp * std::pow(base, -t.beta);
        p.value += v;
        p.d1 -= t.beta * t.c * v / base;
        p.d2 += t.beta * (t.beta + 1.0) * t.c * t.c * v / (base * base);
        break;
      }
      case KernelFamily::matern32: {
        const double s = t.c * std::sqrt(q);
        const double e = t.amp * std::exp(-s);
        p.value += (1.0 + s) * e;
        p.d1 -= 0.5 * t.c * t.c * e;
        // the rr^T term of the Hessian vanishes at q = 0
        if (q > 0.0) p.d2 += t.c * t.c * t.c * t.c * e / (4.0 * s);
        break;
      }
      case KernelFamily::matern12: {
        const double rq = std::sqrt(q);
        const double e = t.amp * std::exp(-t.c * rq);
        p.value += e;
        if (q > 0.0) {
          p.d1 -= t.c * e / (2.0 * rq);
          p.d2 += t.c * t.c * e / (4.0 * q) + t.c * e / (4.0 * q * rq);
        } else {
          p.nonsmooth = true;
        }
        break;
      }
      case KernelFamily::mixture: break;
    }
  }

  std::vector<Term> terms_;
};

class KernelSpec {
 public:
  KernelSpec() : KernelSpec(KernelFamily::gaussian_rbf, 1.0) {}

  KernelSpec(KernelFamily family, double lengthscale, double beta = 0.5)
      : family_(family), components_{{family, lengthscale, beta}}, weights_{1.0} {
    if (family == KernelFamily::mixture)
      throw std::invalid_argument("KernelSpec: use KernelSpec::mixture for mixtures");
    validate();
  }

  static KernelSpec gaussian_density(double l) { return {KernelFamily::gaussian_density, l}; }
  static KernelSpec gaussian_rbf(double l) { return {KernelFamily::gaussian_rbf, l}; }
  static KernelSpec matern12(double l) { return {KernelFamily::matern12, l}; }
  static KernelSpec matern32(double l) { return {KernelFamily::matern32, l}; }
  static KernelSpec imq(double l, double beta = 0.5) { return {KernelFamily::imq, l, beta}; }

  static KernelSpec mixture(std::vector<KernelComponent> comps, std::vector<double> weights) {
    KernelSpec k;
    k.family_ = KernelFamily::mixture;
    k.components_ = std::move(comps);
    k.weights_ = std::move(weights);
    k.validate();
    return k;
  }

  // mixture of gaussian-density components
  static KernelSpec gaussian_mixture(const std::vector<double>& ls, std::vector<double> weights) {
    std::vector<KernelComponent> comps;
    for (double l : ls) comps.push_back({KernelFamily::gaussian_density, l, 0.5});
    return mixture(std::move(comps), std::move(weights));
  }

  KernelFamily family() const { return family_; }
  const std::vector<KernelComponent>& components() const { return components_; }
  const std::vector<double>& weights() const { return weights_; }
  double lengthscale() const { return components_.front().lengthscale; }

  bool differentiable() const {
    return std::none_of(components_.begin(), components_.end(),
                        [](const KernelComponent& c) { return c.family == KernelFamily::matern12; });
  }

  BoundKernel bind(Index d) const {
    if (d < 1) throw std::invalid_argument("KernelSpec: dimension must be >= 1");
    std::vector<BoundKernel::Term> terms;
    for (std::size_t s = 0; s < components_.size(); ++s) {
      const auto& c = components_[s];
      const double l = c.lengthscale;
      BoundKernel::Term t{c.family, weights_[s], 0.0, c.beta};
      switch (c.family) {
        case KernelFamily::gaussian_density:
          t.amp *= std::exp(-0.5 * static_cast<double>(d) * std::log(2.0 * std::numbers::pi * l * l));
          t.c = 0.5 / (l * l);
          break;
        case KernelFamily::gaussian_rbf: t.c = 0.5 / (l * l); break;
        case KernelFamily::imq: t.c = 1.0 / (l * l); break;
        case KernelFamily::matern32: t.c = std::numbers::sqrt3 / l; break;
        case KernelFamily::matern12: t.c = 1.0 / l; break;
        case KernelFamily::mixture: break;
      }
      terms.push_back(t);
    }
    return BoundKernel(std::move(terms));
  }

  double eval(const Eigen::Ref<const Eigen::VectorXd>& x,
              const Eigen::Ref<const Eigen::VectorXd>& y) const {
    check_pair(x, y);
    return bind(x.size()).value((x - y).squaredNorm());
  }

  // nonsmooth is set (and the zero vector returned) for matern-1/2 at x == y
  Eigen::VectorXd grad1(const Eigen::Ref<const Eigen::VectorXd>& x,
                        const Eigen::Ref<const Eigen::VectorXd>& y, bool* nonsmooth = nullptr) const {
    check_pair(x, y);
    const Eigen::VectorXd r = x - y;
    const RadialProfile p = bind(x.size()).profile(r.squaredNorm());
    if (nonsmooth) *nonsmooth = p.nonsmooth;
    if (p.nonsmooth) return Eigen::VectorXd::Zero(x.size());
    return 2.0 * p.d1 * r;
  }

  // d^2 k / dx_i dy_j
  Eigen::MatrixXd grad12(const Eigen::Ref<const Eigen::VectorXd>& x,
                         const Eigen::Ref<const Eigen::VectorXd>& y) const {
    check_pair(x, y);
    const Eigen::VectorXd r = x - y;
    const RadialProfile p = bind(x.size()).profile(r.squaredNorm());
    if (p.nonsmooth) throw NonSmoothKernelError("grad12: kernel is not differentiable at x == y");
    Eigen::MatrixXd h = -4.0 * p.d2 * (r * r.transpose());
    h.diagonal().array() -= 2.0 * p.d1;
    return h;
  }

 private:
  void validate() const {
    if (components_.empty() || components_.size() != weights_.size())
      throw std::invalid_argument("KernelSpec: components and weights must match");
    if (family_ == KernelFamily::mixture && components_.size() < 2)
      throw std::invalid_argument("KernelSpec: a mixture needs at least 2 components");
    for (std::size_t s = 0; s < components_.size(); ++s) {
      const auto& c = components_[s];
      if (c.family == KernelFamily::mixture)
        throw std::invalid_argument("KernelSpec: mixture components cannot be mixtures");
      if (!(c.lengthscale > 0.0) || !std::isfinite(c.lengthscale))
        throw std::invalid_argument("KernelSpec: lengthscale must be positive");
      if (!(weights_[s] > 0.0) || !std::isfinite(weights_[s]))
        throw std::invalid_argument("KernelSpec: weights must be positive");
      if (c.family == KernelFamily::imq && !(c.beta > 0.0))
        throw std::invalid_argument("KernelSpec: imq exponent must be positive");
    }
  }

  static void check_pair(const Eigen::Ref<const Eigen::VectorXd>& x,
                         const Eigen::Ref<const Eigen::VectorXd>& y) {
    if (x.size() != y.size() || x.size() < 1) throw std::invalid_argument("kernel: dimension mismatch");
    if (!x.allFinite() || !y.allFinite()) throw std::invalid_argument("kernel: non-finite input");
  }

  KernelFamily family_;
  std::vector<KernelComponent> components_;
  std::vector<double> weights_;
};

// sqrt(median_{i<j} |y_i - y_j|^2 / 2); above 2000 rows a seeded subsample is used.
inline double median_heuristic(const SampleSet& data, std::uint64_t seed = 0) {
  const Index m = data.rows();
  if (m < 2) throw std::invalid_argument("median_heuristic: need at least 2 points");
  constexpr Index kMaxRows = 2000;
  std::vector<Index> rows;
  if (m > kMaxRows) {
    rows = sample_without_replacement(m, kMaxRows, seed, 0);
  } else {
    rows.resize(static_cast<std::size_t>(m));
    for (Index i = 0; i < m; ++i) rows[i] = i;
  }
  const Index k = static_cast<Index>(rows.size());
  std::vector<double> half_sq;
  half_sq.reserve(static_cast<std::size_t>(k * (k - 1) / 2));
  for (Index a = 0; a < k; ++a)
    for (Index b = a + 1; b < k; ++b)
      half_sq.push_back(0.5 * (data.row(rows[a]) - data.row(rows[b])).squaredNorm());
  const std::size_t n = half_sq.size();
  const std::size_t mid = n / 2;
  std::nth_element(half_sq.begin(), half_sq.begin() + mid, half_sq.end());
  double med = half_sq[mid];
  if (n % 2 == 0) {
    const double lower = *std::max_element(half_sq.begin(), half_sq.begin() + mid);
    med = 0.5 * (med + lower);
  }
  if (!(med > 0.0)) throw std::invalid_argument("median_heuristic: median distance is zero");
  return std::sqrt(med);
}

}  // namespace mmdest

#endif  // MMDEST_KERNELS_HPP_
