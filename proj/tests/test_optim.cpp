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

#include <gtest/gtest.h>

#include "mmdest/optim.hpp"

namespace {

using namespace mmdest;
using Eigen::MatrixXd;
using Eigen::VectorXd;

VectorXd v1(double x) { return VectorXd::Constant(1, x); }

SampleSet location_data(Index m, double theta, std::uint64_t seed) {
  const GaussianLocation loc(1);
  return loc.simulate(v1(theta), loc.sample_latent(m, seed, 99));
}

FitConfig quick(FitMethod method) {
  FitConfig c;
  c.iterations = 30;
  c.n_sim = 30;
  c.eta0 = 0.5;
  c.method = method;
  c.seed = 4;
  return c;
}

TEST(Schedule, Examples) {
  EXPECT_EQ(step_schedule(ScheduleKind::constant, 0.3, 100), 0.3);
  EXPECT_DOUBLE_EQ(step_schedule(ScheduleKind::robbins_monro, 1.0, 15, 0.75), 0.125);
  EXPECT_DOUBLE_EQ(step_schedule(ScheduleKind::robbins_monro, 2.0, 3, 0.5), 1.0);
  EXPECT_THROW(step_schedule(ScheduleKind::constant, 0.0, 1), std::invalid_argument);
  EXPECT_EQ(schedule_kind_from_string(to_string(ScheduleKind::robbins_monro)), ScheduleKind::robbins_monro);
  EXPECT_EQ(fit_method_from_string(to_string(FitMethod::natural_sgd)), FitMethod::natural_sgd);
  EXPECT_THROW(fit_method_from_string("adam"), std::invalid_argument);
}

TEST(NaturalDirection, Examples) {
  const VectorXd g = VectorXd::Ones(2);
  EXPECT_EQ(natural_direction(MatrixXd::Identity(2, 2), g, 0.0), g);
  // lambda = 0.5 * tr/p = 1
  const VectorXd s = natural_direction(2.0 * MatrixXd::Identity(2, 2), g, 0.5);
  EXPECT_NEAR(s[0], 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(s[1], 1.0 / 3.0, 1e-15);
}

TEST(NaturalDirection, SingularMetricGetsRidge) {
  const MatrixXd g = (MatrixXd(2, 2) << 1.0, 0.0, 0.0, 0.0).finished();
  const VectorXd s = natural_direction(g, VectorXd::Ones(2), 1e-8);
  EXPECT_TRUE(s.allFinite());
  EXPECT_NEAR(s[0], 1.0, 1e-6);
}

TEST(NaturalDirection, NegativeDefiniteFails) {
  EXPECT_THROW(natural_direction(-MatrixXd::Identity(2, 2), VectorXd::Ones(2), 1e-8), FitError);
}

TEST(Fit, Reproducible) {
  const SampleSet data = location_data(100, 1.0, 1);
  const GaussianLocation loc(1);
  FitConfig c = quick(FitMethod::natural_sgd);
  c.minibatch = 40;
  c.record_loss = true;
  const auto a = fit(KernelSpec::gaussian_rbf(1.0), loc, data, v1(0.0), c);
  const auto b = fit(KernelSpec::gaussian_rbf(1.0), loc, data, v1(0.0), c);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].theta, b.records[i].theta);
    if (i > 0) {
      EXPECT_EQ(a.records[i].grad_norm, b.records[i].grad_norm) << i;
    }
  }
  c.seed = 5;
  EXPECT_NE(fit(KernelSpec::gaussian_rbf(1.0), loc, data, v1(0.0), c).theta_hat, a.theta_hat);
}

TEST(Fit, StaysPutWhenDataIsTheFrozenSimulation) {
  const GaussianLocation loc(1);
  FitConfig c = quick(FitMethod::sgd);
  c.frozen_draws = true;
  c.grad_tol = 0.0;
  const SampleSet data = loc.simulate(v1(0.4), loc.sample_latent(c.n_sim, c.seed, 0));
  const auto tr = fit(KernelSpec::gaussian_rbf(1.0), loc, data, v1(0.4), c);
  EXPECT_EQ(tr.records.size(), 31u);
  for (const auto& r : tr.records) EXPECT_EQ(r.theta[0], 0.4);
}

TEST(Fit, LossDecreases) {
  const GaussianLocation loc(1);
  const SampleSet data = location_data(200, 2.0, 2);
  FitConfig c = quick(FitMethod::sgd);
  c.frozen_draws = true;
  c.record_loss = true;
  c.eta0 = 2.0;
  c.n_sim = 200;
  const auto tr = fit(KernelSpec::gaussian_rbf(1.0), loc, data, v1(0.0), c);
  EXPECT_LT(tr.records.back().loss, 0.1 * tr.records[1].loss);
}

TEST(Fit, NaturalGradientFindsLocation) {
  const GaussianLocation loc(1);
  const SampleSet data = location_data(500, 1.5, 3);
  FitConfig c = quick(FitMethod::natural_sgd);
  c.iterations = 200;
  c.n_sim = 200;
  c.eta0 = 0.2;
  c.average_tail = 0.5;
  const auto tr = fit(KernelSpec::gaussian_rbf(1.0), loc, data, v1(0.0), c);
  EXPECT_NEAR(tr.theta_hat[0], data.mean(), 0.1);
  EXPECT_EQ(tr.termination, "iterations");
}

TEST(Fit, FirstIterationDrawsMatchAcrossMethods) {
  const GaussianLocation loc(1);
  const SampleSet data = location_data(50, 1.0, 4);
  const auto a = fit(KernelSpec::gaussian_rbf(1.0), loc, data, v1(0.0), quick(FitMethod::sgd));
  const auto b = fit(KernelSpec::gaussian_rbf(1.0), loc, data, v1(0.0), quick(FitMethod::natural_sgd));
  EXPECT_EQ(a.records[1].grad_norm, b.records[1].grad_norm);
  EXPECT_NE(a.records[1].theta, b.records[1].theta);
}

TEST(Fit, DomainHalving) {
  const GaussianLocation loc(1);
  const SampleSet data = location_data(100, 5.0, 5);
  FitConfig c = quick(FitMethod::sgd);
  c.eta0 = 10.0;
  c.upper = v1(0.5);
  const auto tr = fit(KernelSpec::gaussian_rbf(2.0), loc, data, v1(0.0), c);
  int rejected = 0;
  for (const auto& r : tr.records) {
    EXPECT_LE(r.theta[0], 0.5);
    rejected += r.rejected;
  }
  EXPECT_GT(rejected, 0);
}

TEST(Fit, DomainViolationTerminates) {
  const GaussianLocation loc(1);
  const SampleSet data = location_data(100, 5.0, 5);
  FitConfig c = quick(FitMethod::sgd);
  c.upper = v1(0.5);
  const auto tr = fit(KernelSpec::gaussian_rbf(2.0), loc, data, v1(0.5), c);
  EXPECT_EQ(tr.termination, "domain-violation");
  EXPECT_EQ(tr.records.size(), 1u);
  EXPECT_EQ(tr.theta_hat[0], 0.5);
}

TEST(Fit, GradientTolerance) {
  const GaussianLocation loc(1);
  FitConfig c = quick(FitMethod::sgd);
  c.grad_tol = 1e6;
  const auto tr = fit(KernelSpec::gaussian_rbf(1.0), loc, location_data(20, 0.0, 6), v1(0.3), c);
  EXPECT_EQ(tr.termination, "gradient-tolerance");
  EXPECT_EQ(tr.theta_hat[0], 0.3);
}

TEST(Fit, TailAveraging) {
  const GaussianLocation loc(1);
  FitConfig c = quick(FitMethod::sgd);
  c.average_tail = 1.0;
  const auto tr = fit(KernelSpec::gaussian_rbf(1.0), loc, location_data(20, 0.0, 6), v1(1.0), c);
  double mean = 0.0;
  for (std::size_t i = 1; i < tr.records.size(); ++i) mean += tr.records[i].theta[0];
  mean /= static_cast<double>(tr.records.size() - 1);
  EXPECT_NEAR(tr.theta_hat[0], mean, 1e-14);
}

TEST(Fit, Validation) {
  const GaussianLocation loc(1);
  const SampleSet data = location_data(20, 0.0, 7);
  const auto k = KernelSpec::gaussian_rbf(1.0);
  FitConfig c = quick(FitMethod::sgd);
  EXPECT_THROW(natural_sgd_fit(k, loc, data, v1(0.0), c), std::invalid_argument);
  EXPECT_NO_THROW(sgd_fit(k, loc, data, v1(0.0), c));
  EXPECT_THROW(fit(KernelSpec::matern12(1.0), loc, data, v1(0.0), c), std::invalid_argument);
  EXPECT_THROW(fit(k, loc, data, VectorXd::Zero(2), c), std::invalid_argument);
  EXPECT_THROW(fit(k, GaussianLocation(2), data, VectorXd::Zero(2), c), std::invalid_argument);
  EXPECT_THROW(fit(k, GAndK(), data, (VectorXd(4) << 0, -1, 0, 0).finished(), c), DomainError);
  FitConfig bad = c;
  bad.iterations = 0;
  EXPECT_THROW(fit(k, loc, data, v1(0.0), bad), std::invalid_argument);
  bad = c;
  bad.minibatch = 21;
  EXPECT_THROW(fit(k, loc, data, v1(0.0), bad), std::invalid_argument);
  bad = c;
  bad.n_sim = 1;
  EXPECT_THROW(fit(k, loc, data, v1(0.0), bad), std::invalid_argument);
  bad = c;
  bad.average_tail = 1.5;
  EXPECT_THROW(fit(k, loc, data, v1(0.0), bad), std::invalid_argument);
}

}  // namespace
