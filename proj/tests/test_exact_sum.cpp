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

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <gtest/gtest.h>

#include "mmdest/exact_sum.hpp"

namespace {

using mmdest::ExactSum;
// wide enough to hold any sum of the test inputs without rounding
using Wide = boost::multiprecision::number<boost::multiprecision::cpp_bin_float<600, boost::multiprecision::digit_base_2>>;

std::vector<double> wide_range_values(int n, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> mant(-1.0, 1.0);
  std::uniform_int_distribution<int> expo(-60, 60);
  std::vector<double> v(n);
  for (auto& x : v) x = std::ldexp(mant(gen), expo(gen));
  return v;
}

TEST(ExactSum, EmptyIsZero) { EXPECT_EQ(ExactSum().value(), 0.0); }

TEST(ExactSum, CancellationIsExact) {
  ExactSum s;
  for (double x : {1e100, 1.0, -1e100}) s.add(x);
  EXPECT_EQ(s.value(), 1.0);
  ExactSum t;
  for (double x : {0.1, 0.2, -0.3}) t.add(x);
  EXPECT_EQ(t.value(), static_cast<double>(Wide(0.1) + Wide(0.2) - Wide(0.3)));
}

TEST(ExactSum, MatchesMultiprecisionOracle) {
  for (unsigned seed = 1; seed <= 20; ++seed) {
    const auto v = wide_range_values(500, seed);
    ExactSum s;
    Wide ref = 0;
    for (double x : v) {
      s.add(x);
      ref += x;
    }
    EXPECT_EQ(s.value(), static_cast<double>(ref)) << "seed " << seed;
  }
}

TEST(ExactSum, OrderIndependent) {
  auto v = wide_range_values(2000, 7);
  ExactSum a;
  for (double x : v) a.add(x);
  std::mt19937 gen(3);
  for (int r = 0; r < 5; ++r) {
    std::shuffle(v.begin(), v.end(), gen);
    ExactSum b;
    for (double x : v) b += x;
    EXPECT_EQ(a.value(), b.value());
  }
}

TEST(ExactSum, MergeEqualsSequential) {
  const auto v = wide_range_values(1000, 11);
  ExactSum all, lo, hi;
  for (std::size_t i = 0; i < v.size(); ++i) {
    all.add(v[i]);
    (i < 400 ? lo : hi).add(v[i]);
  }
  lo.merge(hi);
  EXPECT_EQ(lo.value(), all.value());
}

TEST(ExactSum, ManyAddsStayExact) {
  ExactSum s;
  const long n = 1L << 22;
  for (long i = 0; i < n; ++i) s.add(0.1);
  EXPECT_EQ(s.value(), static_cast<double>(Wide(0.1) * n));
}

TEST(ExactSum, SubnormalsAndExtremes) {
  ExactSum s;
  const double tiny = std::numeric_limits<double>::denorm_min();
  const double big = std::numeric_limits<double>::max();
  s.add(big);
  s.add(tiny);
  s.add(-big);
  EXPECT_EQ(s.value(), tiny);
}

TEST(ExactSum, NonFinite) {
  ExactSum a;
  a.add(1.0);
  a.add(std::numeric_limits<double>::infinity());
  EXPECT_EQ(a.value(), std::numeric_limits<double>::infinity());
  a.add(-std::numeric_limits<double>::infinity());
  EXPECT_TRUE(std::isnan(a.value()));
  ExactSum b;
  b.add(std::nan(""));
  EXPECT_TRUE(std::isnan(b.value()));
}

}  // namespace
