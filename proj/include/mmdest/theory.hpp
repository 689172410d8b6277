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

#ifndef MMDEST_THEORY_HPP_
#define MMDEST_THEORY_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "mmdest/generators.hpp"
#include "mmdest/types.hpp"

// Closed forms for Gaussian location and scale models under the normalised
// Gaussian kernel phi(x; y, l^2). Powers of d are carried in log space.

namespace mmdest {

namespace detail {

inline void check_lsd(double l, double sigma, double d) {
  if (!(l > 0.0) || !(sigma > 0.0) || !(d >= 1.0) || !std::isfinite(l) || !std::isfinite(sigma))
    throw std::invalid_argument("theory: need l > 0, sigma > 0, d >= 1");
}

// log(sum_i exp(a_i) * w_i) for positive w_i
inline double log_weighted_sum(const std::vector<double>& a, const std::vector<double>& w) {
  const double mx = *std::max_element(a.begin(), a.end());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += w[i] * std::exp(a[i] - mx);
  return mx + std::log(s);
}

inline void check_mixture(const std::vector<double>& ls, const std::vector<double>& gs) {
  if (ls.empty() || ls.size() != gs.size()) throw std::invalid_argument("theory: mixture sizes differ");
  for (std::size_t i = 0; i < ls.size(); ++i)
    if (!(ls[i] > 0.0) || !(gs[i] > 0.0)) throw std::invalid_argument("theory: mixture entries must be positive");
}

}  // namespace detail

// ---- location model N(theta, sigma^2 I) ----

// sigma^2 ((l^2+sigma^2)(l^2+3sigma^2))^{-d/2-1} (l^2+2sigma^2)^{d+2}
inline double loc_asym_variance(double l, double sigma, double d) {
  detail::check_lsd(l, sigma, d);
  const double s2 = sigma * sigma, a = l * l + s2;
  const double lg = 2.0 * std::log(sigma) + (d + 2.0) * std::log1p(s2 / a) -
                    (0.5 * d + 1.0) * std::log1p(2.0 * s2 / a);
  return std::exp(lg);
}

// g(theta*) = (2 pi)^{-d/2} (l^2 + 2 sigma^2)^{-d/2-1}
inline double loc_metric(double l, double sigma, double d) {
  detail::check_lsd(l, sigma, d);
  return std::exp(-0.5 * d * std::log(2.0 * std::numbers::pi) -
                  (0.5 * d + 1.0) * std::log(l * l + 2.0 * sigma * sigma));
}

// R^{d/2+1} exp(-|z-theta|^2 / (2(l^2+sigma^2))) (z - theta), R = (l^2+2sigma^2)/(l^2+sigma^2)
inline Eigen::VectorXd loc_influence(double l, double sigma, double d, const Eigen::VectorXd& theta,
                                     const Eigen::VectorXd& z) {
  detail::check_lsd(l, sigma, d);
  if (theta.size() != z.size()) throw std::invalid_argument("loc_influence: dimension mismatch");
  const double s2 = sigma * sigma, a = l * l + s2;
  const Eigen::VectorXd r = z - theta;
  const double lg = (0.5 * d + 1.0) * std::log1p(s2 / a) - r.squaredNorm() / (2.0 * a);
  return std::exp(lg) * r;
}

// sup_z |loc_influence|, attained at |z - theta|^2 = l^2 + sigma^2
inline double loc_gross_sensitivity(double l, double sigma, double d) {
  detail::check_lsd(l, sigma, d);
  const double s2 = sigma * sigma, a = l * l + s2;
  return std::exp(-0.5 + 0.5 * std::log(a) + (0.5 * d + 1.0) * std::log1p(s2 / a));
}

// mixture kernel sum_s gamma_s phi(x; y, l_s^2)
inline double mix_asym_variance(const std::vector<double>& ls, const std::vector<double>& gs, double sigma,
                                double d) {
  detail::check_mixture(ls, gs);
  detail::check_lsd(ls.front(), sigma, d);
  const double s2 = sigma * sigma, e = -0.5 * d - 1.0;
  std::vector<double> na, nw, da;
  for (std::size_t s = 0; s < ls.size(); ++s) {
    const double as = ls[s] * ls[s];
    for (std::size_t t = 0; t < ls.size(); ++t) {
      const double at = ls[t] * ls[t];
      na.push_back(e * std::log((as + s2) * (at + s2) + s2 * (2.0 * s2 + as + at)));
      nw.push_back(gs[s] * gs[t]);
    }
    da.push_back(e * std::log(as + 2.0 * s2));
  }
  const double lnum = detail::log_weighted_sum(na, nw);
  const double lden = detail::log_weighted_sum(da, gs);
  return s2 * std::exp(lnum - 2.0 * lden);
}

inline Eigen::VectorXd mix_influence(const std::vector<double>& ls, const std::vector<double>& gs, double sigma,
                                     double d, const Eigen::VectorXd& theta, const Eigen::VectorXd& z) {
  detail::check_mixture(ls, gs);
  detail::check_lsd(ls.front(), sigma, d);
  if (theta.size() != z.size()) throw std::invalid_argument("mix_influence: dimension mismatch");
  const double s2 = sigma * sigma, e = -0.5 * d - 1.0;
  const Eigen::VectorXd r = z - theta;
  const double r2 = r.squaredNorm();
  std::vector<double> na, da;
  for (double l : ls) {
    const double a = l * l;
    na.push_back(e * std::log(a + s2) - r2 / (2.0 * (a + s2)));
    da.push_back(e * std::log(a + 2.0 * s2));
  }
  return std::exp(detail::log_weighted_sum(na, gs) - detail::log_weighted_sum(da, gs)) * r;
}

// ---- scale model N(mu, s I), s = exp(2 theta*) ----

struct ScaleMetricTerms {
  double a1, a2, a3;
};

// The three terms of g as separate integrals; their d^2 parts cancel, so
// the sum is only accurate for moderate l.
inline ScaleMetricTerms scale_metric_terms(double l, double theta, double d) {
  const double s = std::exp(2.0 * theta), L = l * l, b = L + 2.0 * s;
  const double pre = std::exp(-0.5 * d * std::log(2.0 * std::numbers::pi * b));
  return {d * d * pre, -2.0 * d * d / (L + s) * pre * (L + s * s / b),
          pre * (d * d * L / b + (d * d + 2.0 * d) * s * s / (b * b))};
}

// (2 pi)^{-d/2} (l^2+2s)^{-d/2} (d^2+2d) s^2 / (l^2+2s)^2
inline double scale_metric(double l, double theta, double d) {
  if (!(l >= 0.0) || !(d >= 1.0)) throw std::invalid_argument("scale_metric: need l >= 0, d >= 1");
  const double s = std::exp(2.0 * theta), b = l * l + 2.0 * s;
  return std::exp(-0.5 * d * std::log(2.0 * std::numbers::pi * b) + std::log(d * d + 2.0 * d) +
                  2.0 * std::log(s) - 2.0 * std::log(b));
}

inline double scale_c1(double l, double theta, double d) {
  const double s = std::exp(2.0 * theta), c = l * l + 3.0 * s;
  return 1.0 - 2.0 * s / c + (1.0 + 2.0 / d) * s * s / (c * c);
}

inline double scale_c2(double l, double theta, double) {
  const double s = std::exp(2.0 * theta), b = l * l + 2.0 * s;
  const double t = 1.0 - s / b;
  return t * t;
}

namespace detail {

// log of C1 (E - 1) + (C1 - C2), with E = (l^2+2s)^d / ((l^2+s)(l^2+3s))^{d/2}
inline double log_scale_bracket(double l, double theta, double d) {
  const double s = std::exp(2.0 * theta), L = l * l, b = L + 2.0 * s, c = L + 3.0 * s;
  const double c1 = scale_c1(l, theta, d);
  const double c1_minus_c2 =
      s * s * (2.0 * L * L + 8.0 * L * s + 7.0 * s * s) / (b * b * c * c) + (2.0 / d) * s * s / (c * c);
  const double le = -0.5 * d * std::log1p(-(s / b) * (s / b));  // log E >= 0
  if (le > 40.0) return std::log(c1) + le + std::log1p(-std::exp(-le) + c1_minus_c2 / c1 * std::exp(-le));
  return std::log(c1 * std::expm1(le) + c1_minus_c2);
}

}  // namespace detail

// (2 pi)^{-d} d^2 s^2/(s+l^2)^2 [C1 (l^2+3s)^{-d/2}(l^2+s)^{-d/2} - C2 (l^2+2s)^{-d}]
inline double scale_sigma(double l, double theta, double d) {
  if (!(l >= 0.0) || !(d >= 1.0)) throw std::invalid_argument("scale_sigma: need l >= 0, d >= 1");
  const double s = std::exp(2.0 * theta), L = l * l, b = L + 2.0 * s;
  return std::exp(-d * std::log(2.0 * std::numbers::pi * b) + 2.0 * std::log(d * s / (s + L)) +
                  detail::log_scale_bracket(l, theta, d));
}

inline double scale_asym_variance(double l, double theta, double d) {
  if (!(l >= 0.0) || !(d >= 1.0)) throw std::invalid_argument("scale_asym_variance: need l >= 0, d >= 1");
  const double s = std::exp(2.0 * theta), L = l * l, b = L + 2.0 * s;
  // Sigma / g^2 with the (2 pi)^{-d} (l^2+2s)^{-d} factors cancelled
  return std::exp(detail::log_scale_bracket(l, theta, d) + 4.0 * std::log(b) - 2.0 * std::log(s + L) -
                  2.0 * std::log(d + 2.0) - 2.0 * std::log(s));
}

// R^{d/2+2} (l^2+s-z^2) / (d(d+2)s) exp(-z^2/(2(l^2+s))), R = (l^2+2s)/(l^2+s)
inline double scale_influence(double l, double theta, double d, double z) {
  if (!(l >= 0.0) || !(d >= 1.0)) throw std::invalid_argument("scale_influence: need l >= 0, d >= 1");
  const double s = std::exp(2.0 * theta), a = l * l + s;
  const double lg = (0.5 * d + 2.0) * std::log1p(s / a) - z * z / (2.0 * a);
  return std::exp(lg) * (a - z * z) / (d * (d + 2.0) * s);
}

// sup_z |scale_influence|; the maximum is at z = 0 (the other extremum,
// z^2 = 3(l^2+s), is smaller by 2 e^{-3/2})
inline double scale_gross_sensitivity(double l, double theta, double d) {
  return std::abs(scale_influence(l, theta, d, 0.0));
}

// Large-lengthscale limit (grad M)^+ V (grad M)^{+T} from n_mc model draws.
template <Generator G>
Eigen::MatrixXd large_l_limit_variance(const G& model, const ParamVec& theta, Index n_mc, std::uint64_t seed) {
  if (n_mc < 2) throw std::invalid_argument("large_l_limit_variance: need at least 2 draws");
  const LatentDraws u = model.sample_latent(n_mc, seed, 0);
  const auto [x, jac] = model.simulate_with_jacobian(theta, u);
  const Index d = x.cols(), p = jac.cols();
  Eigen::MatrixXd dm = Eigen::MatrixXd::Zero(d, p);
  for (Index i = 0; i < n_mc; ++i) dm += jac[i];
  dm /= static_cast<double>(n_mc);
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const RowMatrix centered = x.rowwise() - mean;
  const Eigen::MatrixXd v = centered.transpose() * centered / static_cast<double>(n_mc - 1);

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(dm, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::VectorXd sv = svd.singularValues();
  const double smax = sv.size() ? sv.maxCoeff() : 0.0;
  if (!(smax > 0.0)) throw std::domain_error("large_l_limit_variance: grad M has rank 0");
  Eigen::MatrixXd sinv = Eigen::MatrixXd::Zero(p, d);
  for (Index i = 0; i < sv.size(); ++i)
    if (sv[i] > 1e-10 * smax) sinv(i, i) = 1.0 / sv[i];
  const Eigen::MatrixXd pinv = svd.matrixV() * sinv * svd.matrixU().transpose();
  Eigen::MatrixXd out = pinv * v * pinv.transpose();
  return 0.5 * (out + out.transpose());
}

}  // namespace mmdest

#endif  // MMDEST_THEORY_HPP_
