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

#ifndef MMDEST_LATENT_HPP_
#define MMDEST_LATENT_HPP_

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "mmdest/normal.hpp"
#include "mmdest/types.hpp"

namespace mmdest {

// Philox4x32-10 (Salmon et al. 2011).
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter ctr, Key key) {
    constexpr std::uint32_t kM0 = 0xD2511F53u, kM1 = 0xCD9E8D57u;
    constexpr std::uint32_t kW0 = 0x9E3779B9u, kW1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = std::uint64_t{kM0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kM1} * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
      key[0] += kW0;
      key[1] += kW1;
    }
    return ctr;
  }
};

// Random-access 64-bit words for a (seed, stream) pair.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

  std::uint64_t bits(std::uint64_t index) const {
    const std::uint64_t blk = index >> 1;
    const auto out = Philox4x32::block(
        {static_cast<std::uint32_t>(blk), static_cast<std::uint32_t>(blk >> 32),
         static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)},
        {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)});
    const int lane = static_cast<int>(index & 1u) * 2;
    return (std::uint64_t{out[lane]} << 32) | out[lane + 1];
  }

  // uniform on the open interval (0,1)
  double uniform(std::uint64_t index) const { return to_unit(bits(index)); }

  // fills out[0..count) with uniforms for indices offset, offset+1, ...
  void fill_uniform(double* out, std::uint64_t count, std::uint64_t offset = 0) const {
    std::uint64_t i = 0;
    if ((offset & 1u) && count > 0) {
      out[i++] = uniform(offset);
    }
    for (; i + 1 < count; i += 2) {
      const std::uint64_t blk = (offset + i) >> 1;
      const auto w = Philox4x32::block(
          {static_cast<std::uint32_t>(blk), static_cast<std::uint32_t>(blk >> 32),
           static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)},
          {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)});
      out[i] = to_unit((std::uint64_t{w[0]} << 32) | w[1]);
      out[i + 1] = to_unit((std::uint64_t{w[2]} << 32) | w[3]);
    }
    if (i < count) out[i] = uniform(offset + i);
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  static double to_unit(std::uint64_t b) {
    return (static_cast<double>(b >> 12) + 0.5) * 0x1.0p-52;
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
};

enum class LatentLaw { standard_normal, uniform, brownian };

struct LatentDraws {
  RowMatrix values;  // n x q
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  LatentLaw law = LatentLaw::standard_normal;
  double dt = 0.0;  // brownian only

  Index size() const { return values.rows(); }
  Index dim() const { return values.cols(); }
  const double* row(Index i) const { return values.data() + i * values.cols(); }

  // first `n` draws
  LatentDraws head(Index n) const {
    LatentDraws out = *this;
    out.values = values.topRows(n);
    return out;
  }
};

inline LatentDraws sample_uniform(Index n, Index q, std::uint64_t seed, std::uint64_t stream) {
  if (n < 1 || q < 1) throw std::invalid_argument("sample_uniform: n and q must be positive");
  LatentDraws out{RowMatrix(n, q), seed, stream, LatentLaw::uniform, 0.0};
  CounterRng(seed, stream).fill_uniform(out.values.data(), static_cast<std::uint64_t>(n * q));
  return out;
}

inline LatentDraws sample_uniform(Index n, std::uint64_t seed, std::uint64_t stream) {
  return sample_uniform(n, 1, seed, stream);
}

inline LatentDraws sample_standard_normal(Index n, Index q, std::uint64_t seed,
                                          std::uint64_t stream) {
  if (n < 1 || q < 1) throw std::invalid_argument("sample_standard_normal: n and q must be positive");
  LatentDraws out = sample_uniform(n, q, seed, stream);
  out.law = LatentLaw::standard_normal;
  double* v = out.values.data();
  for (Index i = 0; i < n * q; ++i) v[i] = inv_norm_cdf(v[i]);
  return out;
}

// Increments laid out as row = path, column = step * dims + dim.
inline LatentDraws brownian_increments(Index steps, Index paths, double dt, Index dims,
                                       std::uint64_t seed, std::uint64_t stream) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("brownian_increments: dt must be positive");
  if (steps < 1 || paths < 1 || dims < 1)
    throw std::invalid_argument("brownian_increments: sizes must be positive");
  LatentDraws out = sample_standard_normal(paths, steps * dims, seed, stream);
  out.law = LatentLaw::brownian;
  out.dt = dt;
  out.values *= std::sqrt(dt);
  return out;
}

// k distinct indices from [0, m), partial Fisher-Yates driven by (seed, stream).
inline std::vector<Index> sample_without_replacement(Index m, Index k, std::uint64_t seed,
                                                     std::uint64_t stream) {
  if (k < 0 || k > m) throw std::invalid_argument("sample_without_replacement: k out of range");
  std::vector<Index> idx(static_cast<std::size_t>(m));
  for (Index i = 0; i < m; ++i) idx[i] = i;
  const CounterRng rng(seed, stream);
  for (Index i = 0; i < k; ++i) {
    const double u = rng.uniform(static_cast<std::uint64_t>(i));
    Index j = i + static_cast<Index>(u * static_cast<double>(m - i));
    if (j >= m) j = m - 1;
    std::swap(idx[i], idx[j]);
  }
  idx.resize(static_cast<std::size_t>(k));
  return idx;
}

}  // namespace mmdest

#endif  // MMDEST_LATENT_HPP_
