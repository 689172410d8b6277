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

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "mmdest/check.hpp"
#include "mmdest/generators.hpp"

namespace {

using namespace mmdest;
using Eigen::VectorXd;

LatentDraws fixed(std::initializer_list<std::initializer_list<double>> rows, LatentLaw law) {
  RowMatrix v(static_cast<Index>(rows.size()), static_cast<Index>(rows.begin()->size()));
  Index i = 0;
  for (const auto& r : rows) {
    Index j = 0;
    for (double x : r) v(i, j++) = x;
    ++i;
  }
  return {v, 0, 0, law, 0.0};
}

VectorXd vec(std::initializer_list<double> xs) {
  VectorXd v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

double sample_var(const std::vector<double>& x) {
  double m = 0.0;
  for (double v : x) m += v;
  m /= static_cast<double>(x.size());
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

std::vector<GeneratorModel> all_models() {
  return {GaussianLocation(3, 0.7),
          GaussianScale(2),
          GAndK(),
          StochVol(20),
          LotkaVolterra({5.0, 0.025, 6.0}, 1e-3, ObservationGrid::equispaced(0.5, 5)),
          MultiscaleSde(0.3, 0.005, ObservationGrid::equispaced(0.9, 3)),
          CoarseSde()};
}

TEST(Generators, LocationExample) {
  const GaussianLocation m(2, 2.0);
  const auto x = m.simulate(vec({1.0, -1.0}), fixed({{0.5, 0.5}}, LatentLaw::standard_normal));
  EXPECT_EQ(x(0, 0), 2.0);
  EXPECT_EQ(x(0, 1), 0.0);
}

TEST(Generators, ScaleExample) {
  const GaussianScale m(1);
  const auto x = m.simulate(vec({std::log(2.0)}), fixed({{1.0}, {-0.5}}, LatentLaw::standard_normal));
  EXPECT_NEAR(x(0, 0), 2.0, 1e-15);
  EXPECT_NEAR(x(1, 0), -1.0, 1e-15);
}

TEST(Generators, GAndKMedianIsA) {
  const GAndK m;
  const auto x = m.simulate(vec({3.0, 1.0, 2.0, 0.5}), fixed({{0.5}}, LatentLaw::uniform));
  EXPECT_EQ(x(0, 0), 3.0);
}

TEST(Generators, GAndKLocationDerivativeIsOne) {
  const GAndK m;
  const auto u = m.sample_latent(50, 3, 0);
  const auto jac = m.jacobian(vec({3.0, 1.0, 2.0, 0.5}), u);
  for (Index i = 0; i < u.size(); ++i) EXPECT_EQ(jac[i](0, 0), 1.0);
}

TEST(Generators, GAndKQuantileIsIncreasing) {
  const GAndK m;
  const VectorXd th = vec({3.0, 1.0, 2.0, 0.5});
  RowMatrix grid(999, 1);
  for (Index i = 0; i < 999; ++i) grid(i, 0) = (static_cast<double>(i) + 1.0) / 1000.0;
  const auto x = m.simulate(th, {grid, 0, 0, LatentLaw::uniform, 0.0});
  for (Index i = 1; i < 999; ++i) EXPECT_GT(x(i, 0), x(i - 1, 0));
}

TEST(Generators, StochVolZeroPersistence) {
  const Index T = 4;
  const StochVol m(T);
  const auto u = m.sample_latent(1, 5, 0);
  const VectorXd th = vec({0.0, 0.3, -1.0});
  const auto [y, dy] = sv_simulate(th, u.values.row(0).transpose(), T);
  // phi = 0: h_1 = sigma u_{T+1}, h_t = eta_t
  const double sigma = std::exp(-0.5), kappa = std::exp(0.3);
  for (Index t = 0; t < T; ++t) {
    const double h = sigma * u.values(0, T + t);
    EXPECT_NEAR(y[t], u.values(0, t) * kappa * std::exp(0.5 * h), 1e-14);
    EXPECT_NEAR(dy(t, 1), y[t], 1e-15);
  }
}

TEST(Generators, StochVolPersistenceShowsInLogAbsReturns) {
  const Index T = 4000;
  const StochVol m(T);
  const auto u = m.sample_latent(1, 6, 0);
  auto lag1 = [&](double th1) {
    const auto y = m.simulate(vec({th1, 0.0, 0.0}), u);
    std::vector<double> a(T);
    for (Index t = 0; t < T; ++t) a[t] = std::log(std::abs(y(0, t)));
    double mean = 0.0;
    for (double v : a) mean += v / static_cast<double>(T);
    double num = 0.0, den = 0.0;
    for (Index t = 0; t < T; ++t) {
      den += (a[t] - mean) * (a[t] - mean);
      if (t > 0) num += (a[t] - mean) * (a[t - 1] - mean);
    }
    return num / den;
  };
  EXPECT_NEAR(lag1(0.0), 0.0, 0.06);
  EXPECT_GT(lag1(4.0), 0.5);
}

TEST(Generators, JacobianMatchesFiniteDifferences) {
  for (const auto& model : all_models()) {
    for (std::uint64_t trial = 0; trial < 20; ++trial) {
      const ParamVec th = random_theta(model, 11, trial);
      const auto u = model.sample_latent(4, 100 + trial, 0);
      const JacobianStack jac = model.jacobian(th, u);
      const JacobianStack fd = std::visit([&](const auto& m) { return fd_jacobian(m, th, u); }, model.variant());
      EXPECT_LT(relative_error(jac.stacked(), fd.stacked()), 1e-6) << to_string(model.family());
    }
  }
}

TEST(Generators, SimulateMatchesSimulateWithJacobian) {
  for (const auto& model : all_models()) {
    const ParamVec th = random_theta(model, 1, 0);
    const auto u = model.sample_latent(3, 2, 0);
    EXPECT_EQ(model.simulate(th, u), model.simulate_with_jacobian(th, u).first) << to_string(model.family());
  }
}

TEST(Generators, Deterministic) {
  for (const auto& model : all_models()) {
    const ParamVec th = random_theta(model, 1, 0);
    EXPECT_EQ(model.simulate(th, model.sample_latent(3, 9, 4)), model.simulate(th, model.sample_latent(3, 9, 4)));
  }
}

TEST(Generators, Validation) {
  const GeneratorModel loc = GaussianLocation(2);
  const auto u = loc.sample_latent(2, 0, 0);
  EXPECT_THROW(loc.simulate(vec({1.0}), u), std::invalid_argument);
  EXPECT_THROW(loc.simulate(vec({1.0, NAN}), u), DomainError);
  EXPECT_THROW(GaussianLocation(3).simulate(vec({1.0, 2.0, 3.0}), u), std::invalid_argument);
  const GAndK gk;
  EXPECT_THROW(gk.simulate(vec({3.0, 0.0, 2.0, 0.5}), gk.sample_latent(2, 0, 0)), DomainError);
  const LotkaVolterra lv;
  EXPECT_THROW(lv.simulate(vec({-1.0, 100.0}), lv.sample_latent(1, 0, 0)), DomainError);
  const CoarseSde c;
  EXPECT_THROW(c.simulate(vec({0.0, -0.1}), c.sample_latent(1, 0, 0)), DomainError);
  EXPECT_THROW(c.jacobian(vec({0.0, 0.0}), c.sample_latent(1, 0, 0)), DomainError);
  EXPECT_NO_THROW(c.simulate(vec({0.0, 0.0}), c.sample_latent(1, 0, 0)));
  EXPECT_THROW(StochVol(0), std::invalid_argument);
  EXPECT_THROW(MultiscaleSde(0.1, 0.01), std::invalid_argument);
  EXPECT_THROW(ObservationGrid(0.1, {0.25}), std::invalid_argument);
  EXPECT_THROW(ObservationGrid(0.1, {0.2, 0.1}), std::invalid_argument);
  EXPECT_THROW(model_family_from_string("ar1"), std::invalid_argument);
}

TEST(Generators, FamilyNames) {
  for (const auto& m : all_models()) EXPECT_EQ(model_family_from_string(to_string(m.family())), m.family());
  EXPECT_NE(all_models()[4].get_if<LotkaVolterra>(), nullptr);
  EXPECT_EQ(all_models()[4].get_if<CoarseSde>(), nullptr);
}

TEST(ObservationGridTest, Steps) {
  const ObservationGrid g(1e-3, ObservationGrid::equispaced(1.0, 10));
  EXPECT_EQ(g.size(), 10);
  EXPECT_EQ(g.steps().front(), 100);
  EXPECT_EQ(g.total_steps(), 1000);
}

TEST(LotkaVolterraTest, InitialSensitivityIsIdentity) {
  const LotkaVolterra lv;
  const auto path = lv_simulate(vec({100.0, 80.0}), lv.sample_latent(1, 1, 0), lv);
  EXPECT_EQ(path.states.front(), vec({100.0, 80.0}));
  EXPECT_EQ(path.sensitivities.front(), Eigen::Matrix2d::Identity());
  EXPECT_EQ(path.times.size(), 1001u);
}

TEST(LotkaVolterraTest, ZeroNoiseIsEulerOde) {
  const double dt = 1e-3;
  const LotkaVolterra lv({5.0, 0.025, 6.0}, dt, {0.2});
  LatentDraws w{RowMatrix::Zero(1, 600), 0, 0, LatentLaw::brownian, dt};
  const auto path = lv_simulate(vec({100.0, 80.0}), w, lv);
  double a = 100.0, b = 80.0;
  for (int n = 0; n < 200; ++n) {
    const double na = a + (5.0 * a - 0.025 * a * b) * dt;
    const double nb = b + (0.025 * a * b - 6.0 * b) * dt;
    a = na;
    b = nb;
  }
  EXPECT_NEAR(path.states.back()[0], a, 1e-9 * a);
  EXPECT_NEAR(path.states.back()[1], b, 1e-9 * b);
}

TEST(LotkaVolterraTest, FineGridSensitivityMatchesFiniteDifferences) {
  const LotkaVolterra lv({5.0, 0.025, 6.0}, 1e-4, {0.1});
  const auto u = lv.sample_latent(3, 4, 0);
  const VectorXd th = vec({90.0, 110.0});
  EXPECT_LT(relative_error(lv.jacobian(th, u).stacked(), fd_jacobian(lv, th, u, 1e-4).stacked()), 1e-6);
}

TEST(MultiscaleTest, FastVariableIsStationaryUnitVariance) {
  const double eps = 0.1;
  const MultiscaleSde m(eps, MultiscaleSde::default_dt(eps), {1.0});
  const auto W = m.sample_latent(2000, 7, 0);
  std::vector<double> y;
  for (Index p = 0; p < W.size(); ++p) y.push_back(multiscale_path(vec({-0.5, 0.5}), W, m, p).states.back()[1]);
  // Euler stationary variance 2a/(1-(1-a)^2) with a = dt/eps^2 = 0.1
  EXPECT_NEAR(sample_var(y), 0.2 / 0.19, 0.08);
}

TEST(MultiscaleTest, NoCouplingIsDeterministic) {
  const MultiscaleSde m(0.3, 0.005);
  const VectorXd th = vec({-0.4, 0.0});
  const auto x1 = m.simulate(th, m.sample_latent(1, 1, 0));
  const auto x2 = m.simulate(th, m.sample_latent(1, 2, 0));
  EXPECT_EQ(x1, x2);
  const double dt = m.grid().dt();
  const double expect = std::pow(1.0 - 0.4 * dt, static_cast<double>(m.grid().total_steps()));
  EXPECT_NEAR(x1(0, 9), expect, 1e-12);
}

TEST(MultiscaleTest, SimulateWithOtherEps) {
  const MultiscaleSde m(0.3, 0.001);
  const auto W = m.sample_latent(2, 1, 0);
  const MultiscaleSde other(0.2, 0.001);
  EXPECT_EQ(multiscale_simulate(vec({-0.5, 0.5}), 0.2, W, m), other.simulate(vec({-0.5, 0.5}), W));
}

TEST(CoarseTest, VarianceGrowsLinearly) {
  const CoarseSde m(1e-2, {0.5, 1.0});
  const auto W = m.sample_latent(4000, 8, 0);
  const auto x = m.simulate(vec({0.0, 0.7}), W);
  std::vector<double> a, b;
  for (Index i = 0; i < x.rows(); ++i) {
    a.push_back(x(i, 0));
    b.push_back(x(i, 1));
  }
  EXPECT_NEAR(sample_var(a), 0.7, 0.7 * 0.07);
  EXPECT_NEAR(sample_var(b), 1.4, 1.4 * 0.07);
}

TEST(CoarseTest, InitialSensitivityIsZero) {
  const CoarseSde m;
  const auto path = coarse_simulate(vec({-0.5, 0.5}), m.sample_latent(1, 1, 0), m);
  EXPECT_EQ(path.sensitivities.front().norm(), 0.0);
  EXPECT_EQ(path.states.front()[0], 1.0);
  EXPECT_EQ(path.states.size(), 101u);
}

}  // namespace
