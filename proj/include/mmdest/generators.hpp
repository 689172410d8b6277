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

#ifndef MMDEST_GENERATORS_HPP_
#define MMDEST_GENERATORS_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "mmdest/latent.hpp"
#include "mmdest/normal.hpp"
#include "mmdest/types.hpp"

namespace mmdest {

enum class ModelFamily {
  gaussian_location,
  gaussian_scale,
  g_and_k,
  stoch_vol,
  lotka_volterra,
  multiscale_sde,
  coarse_sde
};

inline std::string_view to_string(ModelFamily f) {
  switch (f) {
    case ModelFamily::gaussian_location: return "gaussian-location";
    case ModelFamily::gaussian_scale: return "gaussian-scale";
    case ModelFamily::g_and_k: return "g-and-k";
    case ModelFamily::stoch_vol: return "stoch-vol";
    case ModelFamily::lotka_volterra: return "lotka-volterra";
    case ModelFamily::multiscale_sde: return "multiscale-sde";
    case ModelFamily::coarse_sde: return "coarse-sde";
  }
  return "?";
}

inline ModelFamily model_family_from_string(std::string_view s) {
  for (auto f : {ModelFamily::gaussian_location, ModelFamily::gaussian_scale, ModelFamily::g_and_k,
                 ModelFamily::stoch_vol, ModelFamily::lotka_volterra, ModelFamily::multiscale_sde,
                 ModelFamily::coarse_sde})
    if (to_string(f) == s) return f;
  throw std::invalid_argument("unknown model family '" + std::string(s) + "'");
}

struct ClampEvent {
  double time;
  int component;
};

struct PathWithSensitivity {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
  std::vector<Eigen::MatrixXd> sensitivities;  // d x p at each time
  double dt = 0.0;
  std::vector<ClampEvent> events;
};

// Batch simulation on top of a per-draw simulate_row(theta, u, x, jac).
template <class Derived>
class GeneratorBase {
 public:
  SampleSet simulate(const ParamVec& theta, const LatentDraws& u) const {
    const Derived& self = derived();
    prepare(theta, u, false);
    SampleSet x(u.size(), self.data_dim());
    for (Index i = 0; i < u.size(); ++i) self.simulate_row(theta, u.row(i), x.row(i).data(), nullptr);
    return x;
  }

  std::pair<SampleSet, JacobianStack> simulate_with_jacobian(const ParamVec& theta,
                                                             const LatentDraws& u) const {
    const Derived& self = derived();
    prepare(theta, u, true);
    SampleSet x(u.size(), self.data_dim());
    JacobianStack jac(u.size(), self.data_dim(), self.param_dim());
    for (Index i = 0; i < u.size(); ++i)
      self.simulate_row(theta, u.row(i), x.row(i).data(), jac.row_ptr(i));
    return {std::move(x), std::move(jac)};
  }

  JacobianStack jacobian(const ParamVec& theta, const LatentDraws& u) const {
    return simulate_with_jacobian(theta, u).second;
  }

 private:
  const Derived& derived() const { return static_cast<const Derived&>(*this); }

  void prepare(const ParamVec& theta, const LatentDraws& u, bool need_jacobian) const {
    const Derived& self = derived();
    if (theta.size() != self.param_dim())
      throw std::invalid_argument(std::string(to_string(Derived::kFamily)) + ": expected " +
                                  std::to_string(self.param_dim()) + " parameters");
    if (u.dim() != self.latent_dim())
      throw std::invalid_argument(std::string(to_string(Derived::kFamily)) +
                                  ": latent dimension mismatch");
    if (!theta.allFinite()) throw DomainError("non-finite parameter");
    self.check_domain(theta, need_jacobian);
  }
};

// x = theta + sigma u
class GaussianLocation : public GeneratorBase<GaussianLocation> {
 public:
  static constexpr ModelFamily kFamily = ModelFamily::gaussian_location;
  explicit GaussianLocation(Index dim = 1, double sigma = 1.0) : dim_(dim), sigma_(sigma) {
    if (dim < 1) throw std::invalid_argument("gaussian-location: dim must be >= 1");
    if (!(sigma > 0.0)) throw std::invalid_argument("gaussian-location: sigma must be positive");
  }
  Index param_dim() const { return dim_; }
  Index data_dim() const { return dim_; }
  Index latent_dim() const { return dim_; }
  double sigma() const { return sigma_; }
  LatentDraws sample_latent(Index n, std::uint64_t seed, std::uint64_t stream) const {
    return sample_standard_normal(n, dim_, seed, stream);
  }
  void check_domain(const ParamVec&, bool) const {}
  void simulate_row(const ParamVec& th, const double* u, double* x, double* jac) const {
    for (Index a = 0; a < dim_; ++a) x[a] = th[a] + sigma_ * u[a];
    if (jac)
      for (Index a = 0; a < dim_; ++a)
        for (Index b = 0; b < dim_; ++b) jac[a * dim_ + b] = a == b ? 1.0 : 0.0;
  }

 private:
  Index dim_;
  double sigma_;
};

// x = exp(theta) u
class GaussianScale : public GeneratorBase<GaussianScale> {
 public:
  static constexpr ModelFamily kFamily = ModelFamily::gaussian_scale;
  explicit GaussianScale(Index dim = 1) : dim_(dim) {
    if (dim < 1) throw std::invalid_argument("gaussian-scale: dim must be >= 1");
  }
  Index param_dim() const { return 1; }
  Index data_dim() const { return dim_; }
  Index latent_dim() const { return dim_; }
  LatentDraws sample_latent(Index n, std::uint64_t seed, std::uint64_t stream) const {
    return sample_standard_normal(n, dim_, seed, stream);
  }
  void check_domain(const ParamVec&, bool) const {}
  void simulate_row(const ParamVec& th, const double* u, double* x, double* jac) const {
    const double e = std::exp(th[0]);
    for (Index a = 0; a < dim_; ++a) {
      x[a] = e * u[a];
      if (jac) jac[a] = x[a];
    }
  }

 private:
  Index dim_;
};

// Quantile function a + b(1 + 0.8 tanh(cz/2))(1+z^2)^k z with z = Phi^{-1}(u).
class GAndK : public GeneratorBase<GAndK> {
 public:
  static constexpr ModelFamily kFamily = ModelFamily::g_and_k;
  Index param_dim() const { return 4; }
  Index data_dim() const { return 1; }
  Index latent_dim() const { return 1; }
  LatentDraws sample_latent(Index n, std::uint64_t seed, std::uint64_t stream) const {
    return sample_uniform(n, 1, seed, stream);
  }
  void check_domain(const ParamVec& th, bool) const {
    if (!(th[1] > 0.0)) throw DomainError("g-and-k: b must be positive");
  }
  void simulate_row(const ParamVec& th, const double* u, double* x, double* jac) const {
    const double z = inv_norm_cdf(u[0]);
    const double t = std::tanh(0.5 * th[2] * z);
    const double lz = std::log1p(z * z);
    const double w = std::exp(th[3] * lz);
    const double skew = 1.0 + 0.8 * t;
    x[0] = th[0] + th[1] * skew * w * z;
    if (jac) {
      jac[0] = 1.0;
      jac[1] = skew * w * z;
      jac[2] = 0.4 * th[1] * (1.0 - t * t) * w * z * z;
      jac[3] = th[1] * skew * w * lz * z;
    }
  }
};

// Stochastic volatility with theta = (logit-like phi, log kappa, log sigma^2).
class StochVol : public GeneratorBase<StochVol> {
 public:
  static constexpr ModelFamily kFamily = ModelFamily::stoch_vol;
  explicit StochVol(Index T = 100) : T_(T) {
    if (T < 1) throw std::invalid_argument("stoch-vol: T must be >= 1");
  }
  Index horizon() const { return T_; }
  Index param_dim() const { return 3; }
  Index data_dim() const { return T_; }
  Index latent_dim() const { return 2 * T_; }
  LatentDraws sample_latent(Index n, std::uint64_t seed, std::uint64_t stream) const {
    return sample_standard_normal(n, 2 * T_, seed, stream);
  }
  void check_domain(const ParamVec&, bool) const {}
  void simulate_row(const ParamVec& th, const double* u, double* y, double* jac) const {
    const double phi = std::tanh(0.5 * th[0]);
    const double dphi = 0.5 * (1.0 - phi * phi);
    const double kappa = std::exp(th[1]);
    const double sigma = std::exp(0.5 * th[2]);
    double h = u[T_] * sigma * std::cosh(0.5 * th[0]);  // sigma / sqrt(1 - phi^2)
    double dh1 = 0.5 * h * phi;
    double dh3 = 0.5 * h;
    for (Index t = 0; t < T_; ++t) {
      if (t > 0) {
        const double eta = sigma * u[T_ + t];
        dh1 = dphi * h + phi * dh1;
        dh3 = phi * dh3 + 0.5 * eta;
        h = phi * h + eta;
      }
      y[t] = u[t] * kappa * std::exp(0.5 * h);
      if (jac) {
        jac[t * 3 + 0] = 0.5 * y[t] * dh1;
        jac[t * 3 + 1] = y[t];
        jac[t * 3 + 2] = 0.5 * y[t] * dh3;
      }
    }
  }

 private:
  Index T_;
};

// y (length T) and dy (T x 3) for one latent vector of length 2T
inline std::pair<Eigen::VectorXd, Eigen::MatrixXd> sv_simulate(const ParamVec& theta,
                                                               const Eigen::VectorXd& u, Index T) {
  if (theta.size() != 3) throw std::invalid_argument("sv_simulate: theta must have 3 entries");
  if (u.size() != 2 * T) throw std::invalid_argument("sv_simulate: latent vector must have length 2T");
  const StochVol model(T);
  Eigen::VectorXd y(T);
  RowMatrix dy(T, 3);
  model.simulate_row(theta, u.data(), y.data(), dy.data());
  return {y, Eigen::MatrixXd(dy)};
}

// Observation times mapped onto an Euler grid.
class ObservationGrid {
 public:
  ObservationGrid() = default;
  ObservationGrid(double dt, std::vector<double> times) : dt_(dt), times_(std::move(times)) {
    if (!(dt > 0.0)) throw std::invalid_argument("observation grid: dt must be positive");
    if (times_.empty()) throw std::invalid_argument("observation grid: no observation times");
    Index prev = 0;
    for (double t : times_) {
      const double k = std::round(t / dt);
      if (!(t > 0.0) || std::abs(k * dt - t) > 1e-9 * std::max(1.0, t))
        throw std::invalid_argument("observation grid: time " + std::to_string(t) +
                                    " is not a positive multiple of dt");
      const Index step = static_cast<Index>(k);
      if (step <= prev) throw std::invalid_argument("observation grid: times must be increasing");
      steps_.push_back(step);
      prev = step;
    }
  }

  static std::vector<double> equispaced(double horizon, int count) {
    std::vector<double> t;
    for (int i = 1; i <= count; ++i) t.push_back(horizon * i / count);
    return t;
  }

  double dt() const { return dt_; }
  const std::vector<double>& times() const { return times_; }
  const std::vector<Index>& steps() const { return steps_; }
  Index size() const { return static_cast<Index>(times_.size()); }
  Index total_steps() const { return steps_.empty() ? 0 : steps_.back(); }

 private:
  double dt_ = 0.0;
  std::vector<double> times_;
  std::vector<Index> steps_;
};

// Stochastic Lotka-Volterra; the parameter is the initial population (x0, y0).
class LotkaVolterra : public GeneratorBase<LotkaVolterra> {
 public:
  static constexpr ModelFamily kFamily = ModelFamily::lotka_volterra;
  static constexpr double kFloor = 1e-8;

  LotkaVolterra() : LotkaVolterra({5.0, 0.025, 6.0}, 1e-3, ObservationGrid::equispaced(1.0, 10)) {}
  LotkaVolterra(std::array<double, 3> rates, double dt, std::vector<double> obs_times)
      : rates_(rates), grid_(dt, std::move(obs_times)) {
    for (double c : rates_)
      if (!(c > 0.0)) throw std::invalid_argument("lotka-volterra: rates must be positive");
  }

  const std::array<double, 3>& rates() const { return rates_; }
  const ObservationGrid& grid() const { return grid_; }
  Index param_dim() const { return 2; }
  Index data_dim() const { return 2 * grid_.size(); }
  Index latent_dim() const { return 3 * grid_.total_steps(); }
  LatentDraws sample_latent(Index n, std::uint64_t seed, std::uint64_t stream) const {
    return brownian_increments(grid_.total_steps(), n, grid_.dt(), 3, seed, stream);
  }
  void check_domain(const ParamVec& th, bool) const {
    if (!(th[0] > 0.0 && th[1] > 0.0))
      throw DomainError("lotka-volterra: initial populations must be positive");
  }

  // Euler-Maruyama for the state and the exact derivative of the Euler map.
  // visit(step, X, J) is called at every step including step 0.
  template <class Visit>
  void run(const ParamVec& th, const double* dw, Index steps, bool with_jac, Visit&& visit,
           std::vector<ClampEvent>* events = nullptr) const {
    const double c1 = rates_[0], c2 = rates_[1], c3 = rates_[2], dt = grid_.dt();
    const double s1 = std::sqrt(c1), s2 = std::sqrt(c2), s3 = std::sqrt(c3);
    Eigen::Vector2d x(th[0], th[1]);
    Eigen::Matrix2d J = Eigen::Matrix2d::Identity();
    visit(Index{0}, x, J);
    for (Index n = 0; n < steps; ++n) {
      const double w1 = dw[3 * n], w2 = dw[3 * n + 1], w3 = dw[3 * n + 2];
      const double a = x[0], b = x[1];
      const double ra = std::sqrt(a), rb = std::sqrt(b), rab = std::sqrt(a * b);
      Eigen::Vector2d next;
      next[0] = a + (c1 * a - c2 * a * b) * dt + s1 * ra * w1 - s2 * rab * w2;
      next[1] = b + (c2 * a * b - c3 * b) * dt + s2 * rab * w2 - s3 * rb * w3;
      if (with_jac) {
        Eigen::Matrix2d m;  // d next / d (a, b)
        m(0, 0) = 1.0 + (c1 - c2 * b) * dt + 0.5 * s1 / ra * w1 - 0.5 * s2 * std::sqrt(b / a) * w2;
        m(0, 1) = -c2 * a * dt - 0.5 * s2 * std::sqrt(a / b) * w2;
        m(1, 0) = c2 * b * dt + 0.5 * s2 * std::sqrt(b / a) * w2;
        m(1, 1) = 1.0 + (c2 * a - c3) * dt + 0.5 * s2 * std::sqrt(a / b) * w2 - 0.5 * s3 / rb * w3;
        J = m * J;
      }
      x = next;
      for (int c = 0; c < 2; ++c) {
        if (x[c] < kFloor) {
          x[c] = kFloor;
          J.row(c).setZero();
          if (events) events->push_back({static_cast<double>(n + 1) * dt, c});
        }
      }
      visit(n + 1, x, J);
    }
  }

  void simulate_row(const ParamVec& th, const double* u, double* x, double* jac) const {
    const auto& steps = grid_.steps();
    std::size_t k = 0;
    run(th, u, grid_.total_steps(), jac != nullptr,
        [&](Index step, const Eigen::Vector2d& s, const Eigen::Matrix2d& J) {
          if (k < steps.size() && step == steps[k]) {
            x[2 * k] = s[0];
            x[2 * k + 1] = s[1];
            if (jac)
              for (int r = 0; r < 2; ++r)
                for (int c = 0; c < 2; ++c) jac[(2 * k + r) * 2 + c] = J(r, c);
            ++k;
          }
        });
  }

 private:
  std::array<double, 3> rates_;
  ObservationGrid grid_;
};

// Full path and Jacobian of one Lotka-Volterra draw (row `path` of W).
inline PathWithSensitivity lv_simulate(const ParamVec& theta2, const LatentDraws& W,
                                       const LotkaVolterra& cfg, Index path = 0) {
  if (theta2.size() != 2) throw std::invalid_argument("lv_simulate: theta must have 2 entries");
  cfg.check_domain(theta2, true);
  if (W.dim() % 3 != 0) throw std::invalid_argument("lv_simulate: expected 3 Brownian dimensions");
  const Index steps = W.dim() / 3;
  PathWithSensitivity out;
  out.dt = cfg.grid().dt();
  cfg.run(
      theta2, W.row(path), steps, true,
      [&](Index step, const Eigen::Vector2d& s, const Eigen::Matrix2d& J) {
        out.times.push_back(static_cast<double>(step) * out.dt);
        out.states.emplace_back(s);
        out.sensitivities.emplace_back(J);
      },
      &out.events);
  return out;
}

// dX = (sqrt(t12)/eps Y + t11 X)dt, dY = -Y/eps^2 dt + sqrt(2)/eps dW.
class MultiscaleSde : public GeneratorBase<MultiscaleSde> {
 public:
  static constexpr ModelFamily kFamily = ModelFamily::multiscale_sde;

  MultiscaleSde(double eps, double dt, std::vector<double> obs_times = ObservationGrid::equispaced(1.0, 10),
                double x0 = 1.0, double y0 = 0.0)
      : eps_(eps), grid_(dt, std::move(obs_times)), x0_(x0), y0_(y0) {
    if (!(eps > 0.0)) throw std::invalid_argument("multiscale-sde: eps must be positive");
    if (dt > eps * eps / 10.0 * (1.0 + 1e-12))
      throw std::invalid_argument("multiscale-sde: dt must be <= eps^2/10 to resolve the fast scale");
  }
  // largest dt allowed for eps
  static double default_dt(double eps) { return eps * eps / 10.0; }

  double eps() const { return eps_; }
  const ObservationGrid& grid() const { return grid_; }
  double x0() const { return x0_; }
  double y0() const { return y0_; }
  Index param_dim() const { return 2; }
  Index data_dim() const { return grid_.size(); }
  Index latent_dim() const { return grid_.total_steps(); }
  LatentDraws sample_latent(Index n, std::uint64_t seed, std::uint64_t stream) const {
    return brownian_increments(grid_.total_steps(), n, grid_.dt(), 1, seed, stream);
  }
  void check_domain(const ParamVec& th, bool need_jacobian) const {
    if (th[1] < 0.0) throw DomainError("multiscale-sde: theta12 must be >= 0");
    if (need_jacobian && !(th[1] > 0.0))
      throw DomainError("multiscale-sde: derivative in theta12 needs theta12 > 0");
  }

  template <class Visit>
  void run(const ParamVec& th, const double* dw, Index steps, bool with_jac, Visit&& visit) const {
    const double dt = grid_.dt(), a = th[0];
    const double rs = std::sqrt(th[1]);
    const double kx = rs / eps_, ky = std::sqrt(2.0) / eps_, inv_eps2 = 1.0 / (eps_ * eps_);
    const double kj = with_jac ? 1.0 / (2.0 * eps_ * rs) : 0.0;
    double x = x0_, y = y0_, j1 = 0.0, j2 = 0.0;
    visit(Index{0}, x, y, j1, j2);
    for (Index n = 0; n < steps; ++n) {
      if (with_jac) {
        j1 += (x + a * j1) * dt;
        j2 += (kj * y + a * j2) * dt;
      }
      const double xn = x + (kx * y + a * x) * dt;
      y += -y * inv_eps2 * dt + ky * dw[n];
      x = xn;
      visit(n + 1, x, y, j1, j2);
    }
  }

  void simulate_row(const ParamVec& th, const double* u, double* out, double* jac) const {
    const auto& steps = grid_.steps();
    std::size_t k = 0;
    run(th, u, grid_.total_steps(), jac != nullptr,
        [&](Index step, double x, double, double j1, double j2) {
          if (k < steps.size() && step == steps[k]) {
            out[k] = x;
            if (jac) {
              jac[2 * k] = j1;
              jac[2 * k + 1] = j2;
            }
            ++k;
          }
        });
  }

 private:
  double eps_;
  ObservationGrid grid_;
  double x0_, y0_;
};

// Path of (X, Y) with the sensitivity of both in theta (Y does not depend on theta).
inline PathWithSensitivity multiscale_path(const ParamVec& theta1, const LatentDraws& W,
                                           const MultiscaleSde& cfg, Index path = 0) {
  if (theta1.size() != 2) throw std::invalid_argument("multiscale: theta must have 2 entries");
  cfg.check_domain(theta1, theta1[1] > 0.0);
  PathWithSensitivity out;
  out.dt = cfg.grid().dt();
  cfg.run(theta1, W.row(path), W.dim(), theta1[1] > 0.0,
          [&](Index step, double x, double y, double j1, double j2) {
            out.times.push_back(static_cast<double>(step) * out.dt);
            out.states.emplace_back(Eigen::Vector2d(x, y));
            Eigen::Matrix2d s = Eigen::Matrix2d::Zero();
            s(0, 0) = j1;
            s(0, 1) = j2;
            out.sensitivities.emplace_back(s);
          });
  return out;
}

// X at the observation times, one row per path of W.
inline SampleSet multiscale_simulate(const ParamVec& theta1, double eps, const LatentDraws& W,
                                     const MultiscaleSde& cfg) {
  if (eps != cfg.eps()) {
    const MultiscaleSde other(eps, cfg.grid().dt(), cfg.grid().times(), cfg.x0(), cfg.y0());
    return other.simulate(theta1, W);
  }
  return cfg.simulate(theta1, W);
}

// dX = t11 X dt + sqrt(2 t12) dW
class CoarseSde : public GeneratorBase<CoarseSde> {
 public:
  static constexpr ModelFamily kFamily = ModelFamily::coarse_sde;

  explicit CoarseSde(double dt = 1e-2, std::vector<double> obs_times = ObservationGrid::equispaced(1.0, 10),
                     double x0 = 1.0)
      : grid_(dt, std::move(obs_times)), x0_(x0) {}

  const ObservationGrid& grid() const { return grid_; }
  double x0() const { return x0_; }
  Index param_dim() const { return 2; }
  Index data_dim() const { return grid_.size(); }
  Index latent_dim() const { return grid_.total_steps(); }
  LatentDraws sample_latent(Index n, std::uint64_t seed, std::uint64_t stream) const {
    return brownian_increments(grid_.total_steps(), n, grid_.dt(), 1, seed, stream);
  }
  void check_domain(const ParamVec& th, bool need_jacobian) const {
    if (th[1] < 0.0) throw DomainError("coarse-sde: theta12 must be >= 0");
    if (need_jacobian && !(th[1] > 0.0))
      throw DomainError("coarse-sde: derivative in theta12 needs theta12 > 0");
  }

  template <class Visit>
  void run(const ParamVec& th, const double* dw, Index steps, bool with_jac, Visit&& visit) const {
    const double dt = grid_.dt(), a = th[0];
    const double diff = std::sqrt(2.0 * th[1]);
    const double kj = with_jac ? 1.0 / diff : 0.0;
    double x = x0_, j1 = 0.0, j2 = 0.0;
    visit(Index{0}, x, j1, j2);
    for (Index n = 0; n < steps; ++n) {
      if (with_jac) {
        j1 += (x + a * j1) * dt;
        j2 += a * j2 * dt + kj * dw[n];
      }
      x += a * x * dt + diff * dw[n];
      visit(n + 1, x, j1, j2);
    }
  }

  void simulate_row(const ParamVec& th, const double* u, double* out, double* jac) const {
    const auto& steps = grid_.steps();
    std::size_t k = 0;
    run(th, u, grid_.total_steps(), jac != nullptr, [&](Index step, double x, double j1, double j2) {
      if (k < steps.size() && step == steps[k]) {
        out[k] = x;
        if (jac) {
          jac[2 * k] = j1;
          jac[2 * k + 1] = j2;
        }
        ++k;
      }
    });
  }

 private:
  ObservationGrid grid_;
  double x0_;
};

inline PathWithSensitivity coarse_simulate(const ParamVec& theta1, const LatentDraws& W,
                                           const CoarseSde& cfg, Index path = 0) {
  if (theta1.size() != 2) throw std::invalid_argument("coarse_simulate: theta must have 2 entries");
  cfg.check_domain(theta1, true);
  PathWithSensitivity out;
  out.dt = cfg.grid().dt();
  cfg.run(theta1, W.row(path), W.dim(), true, [&](Index step, double x, double j1, double j2) {
    out.times.push_back(static_cast<double>(step) * out.dt);
    out.states.emplace_back(Eigen::VectorXd::Constant(1, x));
    Eigen::MatrixXd s(1, 2);
    s << j1, j2;
    out.sensitivities.emplace_back(s);
  });
  return out;
}

template <class G>
concept Generator = requires(const G& g, const ParamVec& th, const LatentDraws& u, Index n,
                             std::uint64_t seed) {
  { g.param_dim() } -> std::convertible_to<Index>;
  { g.data_dim() } -> std::convertible_to<Index>;
  { g.latent_dim() } -> std::convertible_to<Index>;
  { g.sample_latent(n, seed, seed) } -> std::same_as<LatentDraws>;
  { g.simulate(th, u) } -> std::same_as<SampleSet>;
  { g.simulate_with_jacobian(th, u) } -> std::same_as<std::pair<SampleSet, JacobianStack>>;
  g.check_domain(th, true);
};

// Type-erased model over the seven families.
class GeneratorModel {
 public:
  using Variant = std::variant<GaussianLocation, GaussianScale, GAndK, StochVol, LotkaVolterra,
                               MultiscaleSde, CoarseSde>;

  template <class M>
    requires std::constructible_from<Variant, M>
  GeneratorModel(M m) : v_(std::move(m)) {}  // NOLINT(google-explicit-constructor)

  ModelFamily family() const {
    return std::visit([](const auto& m) { return std::decay_t<decltype(m)>::kFamily; }, v_);
  }
  Index param_dim() const { return std::visit([](const auto& m) { return m.param_dim(); }, v_); }
  Index data_dim() const { return std::visit([](const auto& m) { return m.data_dim(); }, v_); }
  Index latent_dim() const { return std::visit([](const auto& m) { return m.latent_dim(); }, v_); }
  LatentDraws sample_latent(Index n, std::uint64_t seed, std::uint64_t stream) const {
    return std::visit([&](const auto& m) { return m.sample_latent(n, seed, stream); }, v_);
  }
  void check_domain(const ParamVec& th, bool need_jacobian) const {
    std::visit([&](const auto& m) { m.check_domain(th, need_jacobian); }, v_);
  }
  SampleSet simulate(const ParamVec& th, const LatentDraws& u) const {
    return std::visit([&](const auto& m) { return m.simulate(th, u); }, v_);
  }
  std::pair<SampleSet, JacobianStack> simulate_with_jacobian(const ParamVec& th,
                                                             const LatentDraws& u) const {
    return std::visit([&](const auto& m) { return m.simulate_with_jacobian(th, u); }, v_);
  }
  JacobianStack jacobian(const ParamVec& th, const LatentDraws& u) const {
    return simulate_with_jacobian(th, u).second;
  }

  const Variant& variant() const { return v_; }
  template <class M>
  const M* get_if() const {
    return std::get_if<M>(&v_);
  }

 private:
  Variant v_;
};

template <Generator G>
SampleSet push_forward(const G& model, const ParamVec& theta, const LatentDraws& u) {
  return model.simulate(theta, u);
}

template <Generator G>
JacobianStack jacobian(const G& model, const ParamVec& theta, const LatentDraws& u) {
  return model.simulate_with_jacobian(theta, u).second;
}

}  // namespace mmdest

#endif  // MMDEST_GENERATORS_HPP_
