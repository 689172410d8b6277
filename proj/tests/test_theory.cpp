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
#include <limits>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "mmdest/theory.hpp"

namespace {

using namespace mmdest;
using boost::math::quadrature::gauss_kronrod;
using Eigen::VectorXd;

constexpr double kInf = std::numeric_limits<double>::infinity();

double phi(double r, double var) { return std::exp(-r * r / (2 * var)) / std::sqrt(2 * std::numbers::pi * var); }

template <class F>
double integrate(F f, double lo = -kInf, double hi = kInf) {
  return gauss_kronrod<double, 61>::integrate(f, lo, hi, 15, 1e-13);
}

// one-dimensional location model with a gaussian-density kernel:
// h(y) = E_X d/dtheta k(X, y), g = E d2k/dx dy, C = E h(Y)^2 / g^2
double quad_loc_metric(double l, double s) {
  return integrate([&](double r) {
    const double L = l * l;
    return phi(r, 2 * s * s) * phi(r, L) * (1.0 / L - r * r / (L * L));
  });
}
double quad_loc_h(double l, double s, double r) {  // r = theta - y
  return -r / (l * l + s * s) * phi(r, l * l + s * s);
}
double quad_loc_variance(double l, double s) {
  const double eh2 = integrate([&](double r) {
    const double h = quad_loc_h(l, s, r);
    return phi(r, s * s) * h * h;
  });
  const double g = quad_loc_metric(l, s);
  return eh2 / (g * g);
}

// one-dimensional scale model x = e^theta u
double quad_scale_metric(double l, double theta) {
  const double e = std::exp(theta), L = l * l;
  return integrate([&](double u) {
    return integrate([&](double v) {
      const double x = e * u, y = e * v, r = x - y;
      return phi(u, 1.0) * phi(v, 1.0) * x * y * phi(r, L) * (1.0 / L - r * r / (L * L));
    });
  });
}
double quad_scale_h(double l, double theta, double y) {
  const double e = std::exp(theta), L = l * l;
  return integrate([&](double u) {
    const double x = e * u;
    return phi(u, 1.0) * x * (-(x - y) / L) * phi(x - y, L);
  });
}
double quad_scale_variance(double l, double theta) {
  const double s = std::exp(2 * theta);
  auto h = [&](double y) { return quad_scale_h(l, theta, y); };
  const double mean = integrate([&](double y) { return phi(y, s) * h(y); });
  const double eh2 = integrate([&](double y) {
    const double v = h(y) - mean;
    return phi(y, s) * v * v;
  });
  const double g = quad_scale_metric(l, theta);
  return eh2 / (g * g);
}

TEST(LocationTheory, Examples) {
  EXPECT_NEAR(loc_asym_variance(1.0, 1.0, 1.0), 1.193243, 1e-6);
  EXPECT_NEAR(loc_asym_variance(1e6, 1.0, 1.0), 1.0, 1e-9);
  EXPECT_NEAR(loc_asym_variance(1e6, 2.0, 3.0), 4.0, 1e-9);
  EXPECT_NEAR(loc_metric(1.0, 1.0, 1.0), 0.0767765, 1e-7);
}

TEST(LocationTheory, MatchesQuadrature) {
  for (double l : {0.3, 1.0, 2.5})
    for (double s : {0.5, 1.0, 2.0}) {
      EXPECT_NEAR(loc_metric(l, s, 1.0), quad_loc_metric(l, s), 1e-10 * loc_metric(l, s, 1.0));
      EXPECT_NEAR(loc_asym_variance(l, s, 1.0), quad_loc_variance(l, s), 1e-8 * loc_asym_variance(l, s, 1.0));
    }
}

TEST(LocationTheory, InfluenceMatchesQuadrature) {
  const double l = 1.3, s = 0.8;
  const VectorXd th = VectorXd::Constant(1, 0.5);
  for (double z : {-3.0, -0.2, 0.5, 1.0, 4.0}) {
    // IF(z) = h(z) / g
    const double expect = quad_loc_h(l, s, 0.5 - z) / quad_loc_metric(l, s);
    EXPECT_NEAR(loc_influence(l, s, 1.0, th, VectorXd::Constant(1, z))[0], expect, 1e-10);
  }
}

TEST(LocationTheory, LogSpaceStaysFinite) {
  // (l^2+2s^2)^{d+2} alone overflows here
  const double v = loc_asym_variance(1e3, 1.0, 1e6);
  EXPECT_TRUE(std::isfinite(v));
  EXPECT_GT(v, 1.0);
  EXPECT_TRUE(std::isfinite(loc_gross_sensitivity(1e3, 1.0, 1e6)));
  EXPECT_EQ(loc_asym_variance(1.0, 1.0, 1e6), std::numeric_limits<double>::infinity());
  EXPECT_GE(loc_metric(1.0, 1.0, 1e6), 0.0);
}

TEST(LocationTheory, GrossSensitivityIsGridMaximum) {
  for (double d : {1.0, 2.0, 5.0}) {
    const double l = 1.5, s = 0.7;
    double best = 0.0;
    for (int i = 0; i <= 100000; ++i) {
      const double z = 10.0 * i / 100000.0;
      const VectorXd zz = (VectorXd(2) << z, 0.0).finished();
      best = std::max(best, loc_influence(l, s, d, VectorXd::Zero(2), zz).norm());
    }
    EXPECT_NEAR(best, loc_gross_sensitivity(l, s, d), 1e-8 * best);
  }
}

TEST(LocationTheory, InfluenceApproachesIdentityForLargeL) {
  const VectorXd th = VectorXd::Zero(1), z = VectorXd::Constant(1, 3.0);
  EXPECT_NEAR(loc_influence(1e6, 1.0, 1.0, th, z)[0], 3.0, 1e-10);
}

TEST(LocationTheory, Validation) {
  EXPECT_THROW(loc_asym_variance(0.0, 1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(loc_metric(1.0, -1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(loc_asym_variance(1.0, 1.0, 0.5), std::invalid_argument);
  EXPECT_THROW(loc_influence(1.0, 1.0, 1.0, VectorXd::Zero(2), VectorXd::Zero(1)), std::invalid_argument);
}

TEST(MixtureTheory, ReducesToSingleKernel) {
  for (double d : {1.0, 4.0}) {
    EXPECT_NEAR(mix_asym_variance({1.3}, {2.0}, 0.9, d), loc_asym_variance(1.3, 0.9, d), 1e-13);
    EXPECT_NEAR(mix_asym_variance({1.3, 1.3}, {0.2, 5.0}, 0.9, d), loc_asym_variance(1.3, 0.9, d), 1e-13);
  }
  const VectorXd th = VectorXd::Constant(2, 0.1), z = VectorXd::Constant(2, 1.7);
  EXPECT_LT((mix_influence({0.8}, {3.0}, 1.1, 2.0, th, z) - loc_influence(0.8, 1.1, 2.0, th, z)).norm(), 1e-14);
}

TEST(MixtureTheory, InvariantToWeightScale) {
  const double a = mix_asym_variance({0.5, 2.0, 4.0}, {1.0, 2.0, 3.0}, 1.0, 2.0);
  const double b = mix_asym_variance({0.5, 2.0, 4.0}, {10.0, 20.0, 30.0}, 1.0, 2.0);
  EXPECT_NEAR(a, b, 1e-14 * a);
  EXPECT_NEAR(mix_asym_variance({0.5, 2.0}, {1.0, 3.0}, 1.0, 1.0), mix_asym_variance({2.0, 0.5}, {3.0, 1.0}, 1.0, 1.0),
              1e-14);
}

TEST(MixtureTheory, Validation) {
  EXPECT_THROW(mix_asym_variance({}, {}, 1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(mix_asym_variance({1.0}, {1.0, 2.0}, 1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(mix_asym_variance({1.0, 2.0}, {1.0, 0.0}, 1.0, 1.0), std::invalid_argument);
}

TEST(ScaleTheory, MetricMatchesQuadrature) {
  EXPECT_NEAR(scale_metric(1.0, 0.0, 1.0), quad_scale_metric(1.0, 0.0), 1e-6);
  EXPECT_NEAR(scale_metric(2.0, 0.3, 1.0), quad_scale_metric(2.0, 0.3), 1e-6);
}

TEST(ScaleTheory, VarianceMatchesQuadrature) {
  EXPECT_NEAR(scale_asym_variance(1.0, 0.0, 1.0), 0.6407, 5e-5);
  EXPECT_NEAR(scale_asym_variance(1.0, 0.0, 1.0), quad_scale_variance(1.0, 0.0), 1e-6);
  EXPECT_NEAR(scale_asym_variance(0.5, -0.2, 1.0), quad_scale_variance(0.5, -0.2), 1e-6);
}

TEST(ScaleTheory, MetricTermsSumToMetric) {
  for (double d : {1.0, 2.0, 5.0})
    for (double l : {0.5, 1.0, 2.0}) {
      const auto t = scale_metric_terms(l, 0.1, d);
      const double g = scale_metric(l, 0.1, d);
      EXPECT_NEAR(t.a1 + t.a2 + t.a3, g, 1e-10 * t.a1);
    }
}

TEST(ScaleTheory, SigmaMatchesDirectFormula) {
  for (double d : {1.0, 3.0})
    for (double l : {0.5, 1.0, 2.0}) {
      const double th = 0.2, s = std::exp(2 * th), L = l * l, tp = 2 * std::numbers::pi;
      const double direct = std::pow(tp, -d) * d * d * s * s / ((s + L) * (s + L)) *
                            (scale_c1(l, th, d) * std::pow(L + 3 * s, -d / 2) * std::pow(L + s, -d / 2) -
                             scale_c2(l, th, d) * std::pow(L + 2 * s, -d));
      EXPECT_NEAR(scale_sigma(l, th, d), direct, 1e-9 * direct);
    }
}

TEST(ScaleTheory, VarianceTendsToInverseTwiceDimension) {
  for (double d : {1.0, 3.0, 10.0}) EXPECT_NEAR(scale_asym_variance(1e3, 0.0, d), 1.0 / (2 * d), 1e-4 / d);
  EXPECT_TRUE(std::isfinite(scale_asym_variance(1e6, 0.0, 1.0)));
}

TEST(ScaleTheory, GrossSensitivityIsGridMaximum) {
  for (double l : {0.5, 1.0, 3.0}) {
    double best = 0.0;
    for (int i = 0; i <= 200000; ++i) best = std::max(best, std::abs(scale_influence(l, 0.0, 1.0, 20.0 * i / 200000.0)));
    EXPECT_NEAR(best, scale_gross_sensitivity(l, 0.0, 1.0), 1e-12);
  }
  EXPECT_NEAR(scale_gross_sensitivity(1.0, 0.0, 1.0), 1.8371, 1e-4);
}

TEST(LargeLengthscale, LocationLimitIsSigmaSquared) {
  const Eigen::MatrixXd c = large_l_limit_variance(GaussianLocation(1, 1.5), VectorXd::Constant(1, 0.3), 100000, 1);
  EXPECT_NEAR(c(0, 0), 2.25, 0.05);
}

}  // namespace
