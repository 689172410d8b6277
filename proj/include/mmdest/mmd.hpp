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

#ifndef MMDEST_MMD_HPP_
#define MMDEST_MMD_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mmdest/exact_sum.hpp"
#include "mmdest/generators.hpp"
#include "mmdest/kernels.hpp"
#include "mmdest/parallel.hpp"
#include "mmdest/types.hpp"

namespace mmdest {

struct GradEstimate {
  Eigen::VectorXd value;
  Index n = 0;
  Index m = 0;
};

struct MetricTensor {
  Eigen::MatrixXd value;
  Index n = 0;
};

struct GodambeEstimate {
  Eigen::MatrixXd g;
  Eigen::MatrixXd sigma;
  Eigen::MatrixXd c;
  Eigen::VectorXd mbar;
};

class SingularMetricError : public std::runtime_error {
 public:
  SingularMetricError(const std::string& what, double condition)
      : std::runtime_error(what + " (condition number " + std::to_string(condition) + ")"),
        condition_(condition) {}
  double condition() const { return condition_; }

 private:
  double condition_;
};

namespace detail {

constexpr Index kBlock = 256;

inline double sqdist(const double* a, const double* b, Index d) {
  double s = 0.0;
  for (Index k = 0; k < d; ++k) {
    const double r = a[k] - b[k];
    s += r * r;
  }
  return s;
}

// Sums `width` accumulators over row blocks of [0, n); fn(lo, hi, acc) fills one block.
template <class Fn>
std::vector<ExactSum> blocked_sum(Index n, std::size_t width, Fn&& fn) {
  const long blocks = static_cast<long>((n + kBlock - 1) / kBlock);
  std::vector<std::vector<ExactSum>> parts(static_cast<std::size_t>(blocks),
                                           std::vector<ExactSum>(width));
  parallel_for(blocks, [&](long b) {
    const Index lo = static_cast<Index>(b) * kBlock;
    fn(lo, std::min(n, lo + kBlock), parts[static_cast<std::size_t>(b)]);
  });
  std::vector<ExactSum> total(width);
  for (const auto& part : parts)
    for (std::size_t w = 0; w < width; ++w) total[w].merge(part[w]);
  return total;
}

inline void check_sets(const SampleSet& X, const SampleSet& Y, Index min_rows, const char* op) {
  if (X.rows() < min_rows || Y.rows() < min_rows)
    throw std::invalid_argument(std::string(op) + ": need at least " + std::to_string(min_rows) +
                                " points in each set");
  if (X.cols() != Y.cols()) throw std::invalid_argument(std::string(op) + ": dimension mismatch");
  if (!X.allFinite() || !Y.allFinite()) throw std::invalid_argument(std::string(op) + ": non-finite input");
}

inline void require_differentiable(const KernelSpec& spec, const char* op) {
  if (!spec.differentiable())
    throw std::invalid_argument(std::string(op) + ": kernel must be differentiable (matern-1/2 is not)");
}

// exact sums of k over i<j within X, over all (i,j) across X,Y, and i<j within Y
inline std::array<double, 3> kernel_sums(const BoundKernel& k, const SampleSet& X, const SampleSet& Y,
                                         bool include_diagonal) {
  const Index n = X.rows(), m = Y.rows(), d = X.cols();
  auto self_sum = [&](const SampleSet& A) {
    const Index na = A.rows();
    auto acc = blocked_sum(na, 1, [&](Index lo, Index hi, std::vector<ExactSum>& s) {
      for (Index i = lo; i < hi; ++i)
        for (Index j = i + 1; j < na; ++j) s[0].add(k.value(sqdist(A.row(i).data(), A.row(j).data(), d)));
    });
    double v = 2.0 * acc[0].value();
    if (include_diagonal) v += static_cast<double>(na) * k.value(0.0);
    return v;
  };
  auto cross = blocked_sum(n, 1, [&](Index lo, Index hi, std::vector<ExactSum>& s) {
    for (Index i = lo; i < hi; ++i)
      for (Index j = 0; j < m; ++j) s[0].add(k.value(sqdist(X.row(i).data(), Y.row(j).data(), d)));
  });
  return {self_sum(X), cross[0].value(), self_sum(Y)};
}

}  // namespace detail

// Unbiased U-statistic estimate of MMD^2; may be negative.
inline double mmd2_uu(const KernelSpec& spec, const SampleSet& X, const SampleSet& Y) {
  detail::check_sets(X, Y, 2, "mmd2_uu");
  const auto k = spec.bind(X.cols());
  const auto s = detail::kernel_sums(k, X, Y, false);
  const double n = static_cast<double>(X.rows()), m = static_cast<double>(Y.rows());
  return s[0] / (n * (n - 1.0)) - 2.0 * s[1] / (n * m) + s[2] / (m * (m - 1.0));
}

// Biased V-statistic, diagonals included.
inline double mmd2_vv(const KernelSpec& spec, const SampleSet& X, const SampleSet& Y) {
  detail::check_sets(X, Y, 1, "mmd2_vv");
  const auto k = spec.bind(X.cols());
  const auto s = detail::kernel_sums(k, X, Y, true);
  const double n = static_cast<double>(X.rows()), m = static_cast<double>(Y.rows());
  return s[0] / (n * n) - 2.0 * s[1] / (n * m) + s[2] / (m * m);
}

// Gradient U-statistic from simulated points X with Jacobians jac against data Y.
inline GradEstimate grad_from_samples(const KernelSpec& spec, const SampleSet& X,
                                      const JacobianStack& jac, const SampleSet& Y) {
  detail::require_differentiable(spec, "grad_estimate");
  detail::check_sets(X, Y, 2, "grad_estimate");
  if (jac.size() != X.rows() || jac.rows() != X.cols())
    throw std::invalid_argument("grad_estimate: Jacobian shape mismatch");
  const Index n = X.rows(), m = Y.rows(), d = X.cols(), p = jac.cols();
  const auto k = spec.bind(d);
  const std::size_t P = static_cast<std::size_t>(p);

  // pairs i<i' contribute (J_i - J_i')^T grad1 k(x_i, x_i')
  auto self = detail::blocked_sum(n, P, [&](Index lo, Index hi, std::vector<ExactSum>& s) {
    std::vector<double> r(static_cast<std::size_t>(d));
    for (Index i = lo; i < hi; ++i) {
      const double* xi = X.row(i).data();
      const double* Ji = jac.row_ptr(i);
      for (Index j = i + 1; j < n; ++j) {
        const double* xj = X.row(j).data();
        const double* Jj = jac.row_ptr(j);
        double q = 0.0;
        for (Index a = 0; a < d; ++a) {
          r[a] = xi[a] - xj[a];
          q += r[a] * r[a];
        }
        const double c = 2.0 * k.profile(q).d1;
        for (Index b = 0; b < p; ++b) {
          double v = 0.0;
          for (Index a = 0; a < d; ++a) v += (Ji[a * p + b] - Jj[a * p + b]) * (c * r[a]);
          s[static_cast<std::size_t>(b)].add(v);
        }
      }
    }
  });
  auto cross = detail::blocked_sum(n, P, [&](Index lo, Index hi, std::vector<ExactSum>& s) {
    std::vector<double> r(static_cast<std::size_t>(d));
    for (Index i = lo; i < hi; ++i) {
      const double* xi = X.row(i).data();
      const double* Ji = jac.row_ptr(i);
      for (Index j = 0; j < m; ++j) {
        const double* yj = Y.row(j).data();
        double q = 0.0;
        for (Index a = 0; a < d; ++a) {
          r[a] = xi[a] - yj[a];
          q += r[a] * r[a];
        }
        const double c = 2.0 * k.profile(q).d1;
        for (Index b = 0; b < p; ++b) {
          double v = 0.0;
          for (Index a = 0; a < d; ++a) v += Ji[a * p + b] * (c * r[a]);
          s[static_cast<std::size_t>(b)].add(v);
        }
      }
    }
  });
  const double nn = static_cast<double>(n), mm = static_cast<double>(m);
  GradEstimate out{Eigen::VectorXd(p), n, m};
  for (std::size_t b = 0; b < P; ++b) {
    // scale the exact sums separately, then combine: the two terms cancel when Y equals X
    ExactSum total;
    total.add(2.0 * self[b].value() / (nn * (nn - 1.0)));
    total.add(-2.0 * cross[b].value() / (nn * mm));
    out.value[static_cast<Index>(b)] = total.value();
  }
  return out;
}

// Metric U-statistic (1/(n(n-1))) sum_{i != j} J_i^T grad1 grad2 k(x_i, x_j) J_j.
inline MetricTensor metric_from_samples(const KernelSpec& spec, const SampleSet& X,
                                        const JacobianStack& jac) {
  detail::require_differentiable(spec, "metric_tensor");
  if (X.rows() < 2) throw std::invalid_argument("metric_tensor: need at least 2 draws");
  if (jac.size() != X.rows() || jac.rows() != X.cols())
    throw std::invalid_argument("metric_tensor: Jacobian shape mismatch");
  const Index n = X.rows(), d = X.cols(), p = jac.cols();
  const auto k = spec.bind(d);
  const std::size_t W = static_cast<std::size_t>(p * (p + 1) / 2);
  auto acc = detail::blocked_sum(n, W, [&](Index lo, Index hi, std::vector<ExactSum>& s) {
    std::vector<double> r(static_cast<std::size_t>(d)), ai(static_cast<std::size_t>(p)),
        aj(static_cast<std::size_t>(p)), jj(static_cast<std::size_t>(p * p));
    for (Index i = lo; i < hi; ++i) {
      const double* xi = X.row(i).data();
      const double* Ji = jac.row_ptr(i);
      for (Index j = i + 1; j < n; ++j) {
        const double* xj = X.row(j).data();
        const double* Jj = jac.row_ptr(j);
        double q = 0.0;
        for (Index c = 0; c < d; ++c) {
          r[c] = xi[c] - xj[c];
          q += r[c] * r[c];
        }
        const RadialProfile pr = k.profile(q);
        std::fill(ai.begin(), ai.end(), 0.0);
        std::fill(aj.begin(), aj.end(), 0.0);
        std::fill(jj.begin(), jj.end(), 0.0);
        for (Index c = 0; c < d; ++c) {
          const double* ri = Ji + c * p;
          const double* rj = Jj + c * p;
          for (Index a = 0; a < p; ++a) {
            ai[a] += ri[a] * r[c];
            aj[a] += rj[a] * r[c];
            for (Index b = 0; b < p; ++b) jj[a * p + b] += ri[a] * rj[b];
          }
        }
        std::size_t w = 0;
        for (Index a = 0; a < p; ++a)
          for (Index b = a; b < p; ++b, ++w) {
            // T + T^T for T = -2 psi' Ji^T Jj - 4 psi'' (Ji^T r)(Jj^T r)^T
            const double t_ab = -2.0 * pr.d1 * jj[a * p + b] - 4.0 * pr.d2 * ai[a] * aj[b];
            const double t_ba = -2.0 * pr.d1 * jj[b * p + a] - 4.0 * pr.d2 * ai[b] * aj[a];
            s[w].add(t_ab + t_ba);
          }
      }
    }
  });
  const double nn = static_cast<double>(n);
  MetricTensor out{Eigen::MatrixXd(p, p), n};
  std::size_t w = 0;
  for (Index a = 0; a < p; ++a)
    for (Index b = a; b < p; ++b, ++w) {
      const double v = acc[w].value() / (nn * (nn - 1.0));
      out.value(a, b) = v;
      out.value(b, a) = v;
    }
  out.value = 0.5 * (out.value + out.value.transpose()).eval();
  return out;
}

template <Generator G>
GradEstimate grad_estimate(const KernelSpec& spec, const G& model, const ParamVec& theta,
                           const LatentDraws& u, const SampleSet& Y) {
  if (u.size() < 2) throw std::invalid_argument("grad_estimate: need at least 2 draws");
  const auto [X, jac] = model.simulate_with_jacobian(theta, u);
  return grad_from_samples(spec, X, jac, Y);
}

template <Generator G>
MetricTensor metric_tensor(const KernelSpec& spec, const G& model, const ParamVec& theta,
                           const LatentDraws& u) {
  if (u.size() < 2) throw std::invalid_argument("metric_tensor: need at least 2 draws");
  const auto [X, jac] = model.simulate_with_jacobian(theta, u);
  return metric_from_samples(spec, X, jac);
}

// Gradient and metric from one simulation of the same draws.
template <Generator G>
std::pair<GradEstimate, MetricTensor> grad_and_metric(const KernelSpec& spec, const G& model,
                                                      const ParamVec& theta, const LatentDraws& u,
                                                      const SampleSet& Y) {
  if (u.size() < 2) throw std::invalid_argument("grad_and_metric: need at least 2 draws");
  const auto [X, jac] = model.simulate_with_jacobian(theta, u);
  return {grad_from_samples(spec, X, jac, Y), metric_from_samples(spec, X, jac)};
}

// Eigen-decomposition based inverse of a symmetric matrix; throws when singular.
inline Eigen::MatrixXd inverse_spd(const Eigen::MatrixXd& g, const char* what) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
  const Eigen::VectorXd ev = es.eigenvalues();
  const double hi = ev.cwiseAbs().maxCoeff();
  const double lo = ev.minCoeff();
  const double cond = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  if (!(lo > 0.0) || !(hi > 0.0) || cond > 1e14) throw SingularMetricError(what, cond);
  return es.eigenvectors() * ev.cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
}

// Monte Carlo Godambe matrix at theta_star: outer draws v (stream 1), inner draws u (stream 2).
template <Generator G>
GodambeEstimate godambe_mc(const KernelSpec& spec, const G& model, const ParamVec& theta_star,
                           Index n_outer, Index n_inner, std::uint64_t seed) {
  detail::require_differentiable(spec, "godambe_mc");
  if (n_outer < 2 || n_inner < 2) throw std::invalid_argument("godambe_mc: need at least 2 draws");
  const LatentDraws v = model.sample_latent(n_outer, seed, 1);
  const LatentDraws u = model.sample_latent(n_inner, seed, 2);
  const SampleSet xv = model.simulate(theta_star, v);
  const auto [xu, jac] = model.simulate_with_jacobian(theta_star, u);
  const Index d = xu.cols(), p = jac.cols();
  const auto k = spec.bind(d);

  // m_b = mean_a J(u_a)^T grad1 k(G(u_a), G(v_b))
  Eigen::MatrixXd mb(n_outer, p);
  parallel_for(static_cast<long>(n_outer), [&](long bl) {
    const Index b = static_cast<Index>(bl);
    std::vector<ExactSum> s(static_cast<std::size_t>(p));
    Eigen::VectorXd r(d);
    for (Index a = 0; a < n_inner; ++a) {
      double q = 0.0;
      for (Index c = 0; c < d; ++c) {
        r[c] = xu(a, c) - xv(b, c);
        q += r[c] * r[c];
      }
      const double coef = 2.0 * k.profile(q).d1;
      const double* Ja = jac.row_ptr(a);
      for (Index t = 0; t < p; ++t) {
        double val = 0.0;
        for (Index c = 0; c < d; ++c) val += Ja[c * p + t] * (coef * r[c]);
        s[static_cast<std::size_t>(t)].add(val);
      }
    }
    for (Index t = 0; t < p; ++t) mb(b, t) = s[static_cast<std::size_t>(t)].value() / static_cast<double>(n_inner);
  });

  GodambeEstimate out;
  out.mbar = mb.colwise().mean().transpose();
  const Eigen::MatrixXd centered = mb.rowwise() - out.mbar.transpose();
  out.sigma = centered.transpose() * centered / static_cast<double>(n_outer - 1);
  out.sigma = 0.5 * (out.sigma + out.sigma.transpose()).eval();
  out.g = metric_from_samples(spec, xu, jac).value;
  const Eigen::MatrixXd ginv = inverse_spd(out.g, "godambe_mc: metric tensor is singular");
  out.c = ginv * out.sigma * ginv;
  out.c = 0.5 * (out.c + out.c.transpose()).eval();
  return out;
}

}  // namespace mmdest

#endif  // MMDEST_MMD_HPP_
