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

#ifndef MMDEST_OPTIM_HPP_
#define MMDEST_OPTIM_HPP_

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mmdest/generators.hpp"
#include "mmdest/latent.hpp"
#include "mmdest/mmd.hpp"

namespace mmdest {

enum class ScheduleKind { constant, robbins_monro };
enum class FitMethod { sgd, natural_sgd };

inline std::string_view to_string(ScheduleKind k) {
  return k == ScheduleKind::constant ? "constant" : "robbins-monro";
}
inline std::string_view to_string(FitMethod m) { return m == FitMethod::sgd ? "sgd" : "natural-sgd"; }

inline ScheduleKind schedule_kind_from_string(std::string_view s) {
  if (s == "constant") return ScheduleKind::constant;
  if (s == "robbins-monro") return ScheduleKind::robbins_monro;
  throw std::invalid_argument("unknown schedule '" + std::string(s) + "'");
}
inline FitMethod fit_method_from_string(std::string_view s) {
  if (s == "sgd") return FitMethod::sgd;
  if (s == "natural-sgd") return FitMethod::natural_sgd;
  throw std::invalid_argument("unknown method '" + std::string(s) + "'");
}

inline double step_schedule(ScheduleKind kind, double eta0, long k, double exponent = 0.75) {
  if (!(eta0 > 0.0)) throw std::invalid_argument("step_schedule: eta0 must be positive");
  if (kind == ScheduleKind::constant) return eta0;
  return eta0 / std::pow(1.0 + static_cast<double>(k), exponent);
}

struct FitConfig {
  long iterations = 100;
  Index n_sim = 100;
  Index minibatch = 0;  // 0 = full data
  ScheduleKind schedule = ScheduleKind::constant;
  double eta0 = 0.1;
  double exponent = 0.75;
  FitMethod method = FitMethod::natural_sgd;
  double ridge = 1e-8;
  std::uint64_t seed = 0;
  double grad_tol = 1e-8;
  bool frozen_draws = false;
  // fraction of final iterates averaged into theta_hat (0: last iterate)
  double average_tail = 0.0;
  bool record_loss = false;
  std::optional<Eigen::VectorXd> lower;  // optional box
  std::optional<Eigen::VectorXd> upper;
  int max_halvings = 30;
};

struct FitRecord {
  long k = 0;
  Eigen::VectorXd theta;
  double eta = 0.0;
  double grad_norm = std::numeric_limits<double>::quiet_NaN();
  double loss = std::numeric_limits<double>::quiet_NaN();
  int rejected = 0;  // domain rejections before the accepted step
};

struct FitTrace {
  std::vector<FitRecord> records;
  Eigen::VectorXd theta_hat;
  std::string termination;
  std::uint64_t seed = 0;
};

class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// stream layout: latent draws use stream k, minibatch indices use kMinibatchStream + k
inline constexpr std::uint64_t kMinibatchStream = std::uint64_t{1} << 40;

namespace detail {

inline void validate_fit(const FitConfig& cfg, Index m, Index p, const Eigen::VectorXd& theta0) {
  if (cfg.iterations < 1) throw std::invalid_argument("fit: iterations must be >= 1");
  if (cfg.n_sim < 2) throw std::invalid_argument("fit: n_sim must be >= 2");
  if (cfg.minibatch < 0 || cfg.minibatch > m) throw std::invalid_argument("fit: minibatch must be <= m");
  if (cfg.minibatch == 1 || m < 2) throw std::invalid_argument("fit: need at least 2 data points per batch");
  if (!(cfg.eta0 > 0.0)) throw std::invalid_argument("fit: eta0 must be positive");
  if (!(cfg.ridge >= 0.0)) throw std::invalid_argument("fit: ridge must be nonnegative");
  if (!(cfg.average_tail >= 0.0 && cfg.average_tail <= 1.0))
    throw std::invalid_argument("fit: average_tail must lie in [0,1]");
  if (theta0.size() != p) throw std::invalid_argument("fit: theta0 has the wrong length");
  if (cfg.lower && cfg.lower->size() != p) throw std::invalid_argument("fit: lower bound has the wrong length");
  if (cfg.upper && cfg.upper->size() != p) throw std::invalid_argument("fit: upper bound has the wrong length");
}

template <Generator G>
bool in_domain(const G& model, const FitConfig& cfg, const Eigen::VectorXd& th) {
  if (!th.allFinite()) return false;
  if (cfg.lower && (th.array() < cfg.lower->array()).any()) return false;
  if (cfg.upper && (th.array() > cfg.upper->array()).any()) return false;
  try {
    model.check_domain(th, true);
  } catch (const DomainError&) {
    return false;
  }
  return true;
}

}  // namespace detail

// Solves (g + lambda I) s = grad with lambda = ridge tr(g)/p, escalating lambda x10 up to 3 times.
inline Eigen::VectorXd natural_direction(const Eigen::MatrixXd& g, const Eigen::VectorXd& grad,
                                         double ridge) {
  const Index p = g.rows();
  const double tr = g.trace();
  double lambda = ridge * tr / static_cast<double>(p);
  for (int attempt = 0; attempt <= 3; ++attempt) {
    Eigen::MatrixXd a = g;
    a.diagonal().array() += lambda;
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() == Eigen::Success) {
      Eigen::VectorXd s = llt.solve(grad);
      if (s.allFinite()) return s;
    }
    lambda = lambda > 0.0 ? lambda * 10.0 : 1e-8 * std::max(std::abs(tr), 1e-300);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
  std::ostringstream msg;
  msg << "natural gradient solve failed: metric eigenvalues [" << es.eigenvalues().transpose()
      << "], trace " << tr << ", final ridge " << lambda;
  throw FitError(msg.str());
}

template <Generator G>
FitTrace fit(const KernelSpec& spec, const G& model, const SampleSet& data, const Eigen::VectorXd& theta0,
             const FitConfig& cfg) {
  detail::require_differentiable(spec, "fit");
  const Index m = data.rows(), p = model.param_dim();
  detail::validate_fit(cfg, m, p, theta0);
  if (data.cols() != model.data_dim()) throw std::invalid_argument("fit: data dimension does not match the model");
  if (!detail::in_domain(model, cfg, theta0)) throw DomainError("fit: theta0 outside the parameter domain");

  const Index batch = cfg.minibatch == 0 ? m : cfg.minibatch;
  FitTrace trace;
  trace.seed = cfg.seed;
  trace.records.push_back({0, theta0});
  Eigen::VectorXd theta = theta0;
  trace.termination = "iterations";

  SampleSet ybatch;
  for (long k = 1; k <= cfg.iterations; ++k) {
    const std::uint64_t stream = cfg.frozen_draws ? 0 : static_cast<std::uint64_t>(k);
    const LatentDraws u = model.sample_latent(cfg.n_sim, cfg.seed, stream);
    const SampleSet* y = &data;
    if (batch < m) {
      if (!cfg.frozen_draws || k == 1) {
        const auto idx = sample_without_replacement(m, batch, cfg.seed, kMinibatchStream + stream);
        ybatch.resize(batch, data.cols());
        for (Index i = 0; i < batch; ++i) ybatch.row(i) = data.row(idx[static_cast<std::size_t>(i)]);
      }
      y = &ybatch;
    }

    const auto [X, jac] = model.simulate_with_jacobian(theta, u);
    const GradEstimate grad = grad_from_samples(spec, X, jac, *y);
    const double gnorm = grad.value.norm();
    FitRecord rec;
    rec.k = k;
    rec.grad_norm = gnorm;
    if (cfg.record_loss) rec.loss = mmd2_uu(spec, X, *y);
    if (gnorm < cfg.grad_tol) {
      trace.termination = "gradient-tolerance";
      break;
    }
    Eigen::VectorXd dir = grad.value;
    if (cfg.method == FitMethod::natural_sgd)
      dir = natural_direction(metric_from_samples(spec, X, jac).value, grad.value, cfg.ridge);

    double eta = step_schedule(cfg.schedule, cfg.eta0, k, cfg.exponent);
    Eigen::VectorXd next = theta - eta * dir;
    int rejected = 0;
    while (!detail::in_domain(model, cfg, next)) {
      if (++rejected > cfg.max_halvings) break;
      eta *= 0.5;
      next = theta - eta * dir;
    }
    if (rejected > cfg.max_halvings) {
      trace.termination = "domain-violation";
      break;
    }
    theta = next;
    rec.theta = theta;
    rec.eta = eta;
    rec.rejected = rejected;
    trace.records.push_back(std::move(rec));
  }

  const std::size_t nrec = trace.records.size();
  std::size_t tail = static_cast<std::size_t>(std::ceil(cfg.average_tail * static_cast<double>(nrec - 1)));
  if (tail == 0) {
    trace.theta_hat = trace.records.back().theta;
  } else {
    tail = std::min(tail, nrec);
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(p);
    for (std::size_t i = nrec - tail; i < nrec; ++i) acc += trace.records[i].theta;
    trace.theta_hat = acc / static_cast<double>(tail);
  }
  return trace;
}

template <Generator G>
FitTrace sgd_fit(const KernelSpec& spec, const G& model, const SampleSet& data,
                 const Eigen::VectorXd& theta0, const FitConfig& cfg) {
  if (cfg.method != FitMethod::sgd) throw std::invalid_argument("sgd_fit: config method must be sgd");
  return fit(spec, model, data, theta0, cfg);
}

template <Generator G>
FitTrace natural_sgd_fit(const KernelSpec& spec, const G& model, const SampleSet& data,
                         const Eigen::VectorXd& theta0, const FitConfig& cfg) {
  if (cfg.method != FitMethod::natural_sgd)
    throw std::invalid_argument("natural_sgd_fit: config method must be natural-sgd");
  return fit(spec, model, data, theta0, cfg);
}

}  // namespace mmdest

#endif  // MMDEST_OPTIM_HPP_
