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
#include <set>

#include <gtest/gtest.h>

#include "mmdest/latent.hpp"
#include "mmdest/normal.hpp"

namespace {

using namespace mmdest;

double mean(const RowMatrix& v) { return v.mean(); }
double variance(const RowMatrix& v) {
  const double mu = v.mean();
  return (v.array() - mu).square().sum() / static_cast<double>(v.size() - 1);
}

// Known-answer vectors from the Random123 distribution.
TEST(Philox, KnownAnswers) {
  using C = Philox4x32::Counter;
  using K = Philox4x32::Key;
  EXPECT_EQ(Philox4x32::block(C{0, 0, 0, 0}, K{0, 0}), (C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(Philox4x32::block(C{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, K{0xffffffff, 0xffffffff}),
            (C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(Philox4x32::block(C{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, K{0xa4093822, 0x299f31d0}),
            (C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(CounterRng, FillMatchesRandomAccess) {
  const CounterRng rng(99, 4);
  std::vector<double> buf(11);
  rng.fill_uniform(buf.data(), buf.size(), 3);
  for (std::size_t i = 0; i < buf.size(); ++i) EXPECT_EQ(buf[i], rng.uniform(3 + i));
}

TEST(CounterRng, ToUnitStaysOpen) {
  EXPECT_GT(CounterRng::to_unit(0), 0.0);
  EXPECT_LT(CounterRng::to_unit(~std::uint64_t{0}), 1.0);
}

TEST(InvNormCdf, Examples) {
  EXPECT_EQ(inv_norm_cdf(0.5), 0.0);
  EXPECT_NEAR(inv_norm_cdf(0.975), 1.959964, 5e-7);
  EXPECT_NEAR(inv_norm_cdf(0.025), -1.959964, 5e-7);
}

TEST(InvNormCdf, RoundTrip) {
  for (int e = 6; e >= 1; --e) {
    for (double m : {1.0, 2.5, 5.0, 7.5}) {
      const double p = m * std::pow(10.0, -e);
      if (p >= 1.0) continue;
      EXPECT_NEAR(norm_cdf(inv_norm_cdf(p)), p, 1e-10) << p;
      EXPECT_NEAR(norm_cdf(inv_norm_cdf(1.0 - p)), 1.0 - p, 1e-10) << 1.0 - p;
    }
  }
  for (int i = 1; i < 1000; ++i) {
    const double p = i / 1000.0;
    EXPECT_NEAR(norm_cdf(inv_norm_cdf(p)), p, 1e-10);
  }
}

TEST(InvNormCdf, RejectsOutsideUnitInterval) {
  for (double p : {0.0, 1.0, -0.1, 1.5, std::nan("")}) EXPECT_THROW(inv_norm_cdf(p), std::domain_error);
}

TEST(SampleStandardNormal, Moments) {
  const Index n = 100000;
  const auto u = sample_standard_normal(n, 1, 1, 0);
  EXPECT_LT(std::abs(mean(u.values)), 4.0 / std::sqrt(static_cast<double>(n)));
  EXPECT_NEAR(variance(u.values), 1.0, 0.05);
}

TEST(SampleStandardNormal, Deterministic) {
  const auto a = sample_standard_normal(100, 3, 17, 5);
  const auto b = sample_standard_normal(100, 3, 17, 5);
  EXPECT_TRUE((a.values.array() == b.values.array()).all());
  EXPECT_EQ(a.seed, 17u);
  EXPECT_EQ(a.stream, 5u);
}

TEST(SampleStandardNormal, InvalidSizes) {
  EXPECT_THROW(sample_standard_normal(0, 1, 0, 0), std::invalid_argument);
  EXPECT_THROW(sample_standard_normal(1, 0, 0, 0), std::invalid_argument);
}

TEST(SampleUniform, OpenIntervalAndMean) {
  const auto u = sample_uniform(100000, 2, 0);
  EXPECT_GT(u.values.minCoeff(), 0.0);
  EXPECT_LT(u.values.maxCoeff(), 1.0);
  EXPECT_NEAR(mean(u.values), 0.5, 0.01);
  const auto v = sample_uniform(100000, 2, 0);
  EXPECT_TRUE((u.values.array() == v.values.array()).all());
}

TEST(Streams, Uncorrelated) {
  const Index n = 10000;
  const auto a = sample_standard_normal(n, 1, 8, 0).values;
  const auto b = sample_standard_normal(n, 1, 8, 1).values;
  const auto c = sample_standard_normal(n, 1, 9, 0).values;
  auto corr = [](const RowMatrix& x, const RowMatrix& y) {
    const double mx = x.mean(), my = y.mean();
    const double sxy = ((x.array() - mx) * (y.array() - my)).sum();
    return sxy / std::sqrt((x.array() - mx).square().sum() * (y.array() - my).square().sum());
  };
  EXPECT_LT(std::abs(corr(a, b)), 0.02);
  EXPECT_LT(std::abs(corr(a, c)), 0.02);
}

TEST(BrownianIncrements, VarianceAndLayout) {
  const double dt = 0.01;
  const auto w = brownian_increments(1, 100000, dt, 1, 4, 0);
  EXPECT_EQ(w.law, LatentLaw::brownian);
  EXPECT_NEAR(variance(w.values), dt, 0.05 * dt);

  const Index steps = 50, paths = 20000;
  const auto p = brownian_increments(steps, paths, dt, 2, 5, 0);
  ASSERT_EQ(p.dim(), steps * 2);
  RowMatrix endpoint(paths, 1);
  for (Index i = 0; i < paths; ++i) {
    double s = 0.0;
    for (Index k = 0; k < steps; ++k) s += p.values(i, k * 2 + 1);
    endpoint(i, 0) = s;
  }
  EXPECT_NEAR(variance(endpoint), steps * dt, 0.05 * steps * dt);
}

TEST(BrownianIncrements, RejectsNonPositiveDt) {
  EXPECT_THROW(brownian_increments(10, 1, 0.0, 1, 0, 0), std::invalid_argument);
  EXPECT_THROW(brownian_increments(10, 1, -1.0, 1, 0, 0), std::invalid_argument);
}

TEST(SampleWithoutReplacement, DistinctAndInRange) {
  const auto idx = sample_without_replacement(1000, 300, 2, 0);
  const std::set<Index> s(idx.begin(), idx.end());
  EXPECT_EQ(s.size(), 300u);
  EXPECT_GE(*s.begin(), 0);
  EXPECT_LT(*s.rbegin(), 1000);
  EXPECT_EQ(idx, sample_without_replacement(1000, 300, 2, 0));
  EXPECT_THROW(sample_without_replacement(5, 6, 0, 0), std::invalid_argument);
}

TEST(LatentDraws, Head) {
  const auto u = sample_standard_normal(10, 2, 1, 1);
  const auto h = u.head(4);
  EXPECT_EQ(h.size(), 4);
  EXPECT_EQ(h.values(3, 1), u.values(3, 1));
}

}  // namespace
