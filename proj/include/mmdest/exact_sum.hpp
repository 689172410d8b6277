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

#ifndef MMDEST_EXACT_SUM_HPP_
#define MMDEST_EXACT_SUM_HPP_

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>

namespace mmdest {

// Exact accumulator for doubles: a fixed-point number spanning the whole
// double exponent range, held as 32-bit digits in int64 limbs with delayed
// carries. value() is the correctly rounded exact sum, so the result does not
// depend on the order of additions and exactly cancelling terms give zero.
class ExactSum {
 public:
  ExactSum() = default;

  void add(double x) {
    const std::uint64_t bits = std::bit_cast<std::uint64_t>(x);
    const int biased = static_cast<int>((bits >> 52) & 0x7ff);
    if (biased == 0x7ff) {
      special_ += x;
      has_special_ = true;
      return;
    }
    std::uint64_t mant = bits & ((std::uint64_t{1} << 52) - 1);
    if (mant == 0 && biased == 0) return;
    int pos = 0;  // exponent of the mantissa lsb, offset by 1074
    if (biased != 0) {
      mant |= std::uint64_t{1} << 52;
      pos = biased - 1;
    }
    __int128 v = static_cast<__int128>(mant) << (pos & 31);
    if (bits >> 63) v = -v;
    const int k = pos >> 5;
    limb_[k] += static_cast<std::int64_t>(static_cast<std::uint64_t>(v) & kMask);
    v >>= 32;
    limb_[k + 1] += static_cast<std::int64_t>(static_cast<std::uint64_t>(v) & kMask);
    v >>= 32;
    limb_[k + 2] += static_cast<std::int64_t>(v);
    if (++pending_ >= kMaxPending) normalize();
  }

  ExactSum& operator+=(double x) {
    add(x);
    return *this;
  }

  void merge(const ExactSum& other) {
    ExactSum o = other;
    o.normalize();
    normalize();
    for (int i = 0; i < kLimbs; ++i) limb_[i] += o.limb_[i];
    pending_ = 1;
    if (o.has_special_) {
      special_ += o.special_;
      has_special_ = true;
    }
  }

  double value() const {
    if (has_special_) return special_;
    ExactSum t = *this;
    t.normalize();
    bool negative = false;
    if (t.limb_[kLimbs - 1] < 0) {
      negative = true;
      for (auto& l : t.limb_) l = -l;
      t.normalize();
    }
    int h = kLimbs - 1;
    while (h >= 0 && t.limb_[h] == 0) --h;
    if (h < 0) return 0.0;
    // top (up to) three limbs as a 96-bit integer, the rest as a sticky bit
    unsigned __int128 top = 0;
    int low = h;
    for (int i = h; i >= 0 && i >= h - 2; --i) {
      top = (top << 32) | static_cast<std::uint64_t>(t.limb_[i]);
      low = i;
    }
    bool sticky = false;
    for (int i = 0; i < low; ++i) sticky = sticky || t.limb_[i] != 0;
    int bl = 0;
    for (unsigned __int128 c = top; c != 0; c >>= 1) ++bl;
    int shift = bl - 53;
    std::uint64_t m;
    if (shift > 0) {
      m = static_cast<std::uint64_t>(top >> shift);
      const unsigned __int128 rem = top & ((static_cast<unsigned __int128>(1) << shift) - 1);
      const unsigned __int128 half = static_cast<unsigned __int128>(1) << (shift - 1);
      if (rem > half || (rem == half && (sticky || (m & 1u)))) ++m;
    } else {
      m = static_cast<std::uint64_t>(top) << (-shift);
    }
    const double r = std::ldexp(static_cast<double>(m), shift + 32 * low - 1074);
    return negative ? -r : r;
  }

 private:
  static constexpr int kLimbs = 72;
  static constexpr std::uint64_t kMask = 0xffffffffu;
  static constexpr int kMaxPending = 1 << 29;

  // limbs 0..n-2 into [0, 2^32), the signed remainder carried into the top limb
  void normalize() {
    for (int i = 0; i < kLimbs - 1; ++i) {
      const std::int64_t c = limb_[i] >> 32;
      limb_[i] -= c * (std::int64_t{1} << 32);
      limb_[i + 1] += c;
    }
    pending_ = 0;
  }

  std::array<std::int64_t, kLimbs> limb_{};
  int pending_ = 0;
  double special_ = 0.0;
  bool has_special_ = false;
};

}  // namespace mmdest

#endif  // MMDEST_EXACT_SUM_HPP_
