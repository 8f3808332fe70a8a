// Copyright 2026 The bootlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cstdint>

namespace bootlab {

// Philox4x32 with 10 rounds.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter ctr, Key key) {
    for (int r = 0; r < 10; ++r) {
      if (r > 0) {
        key[0] += kW0;
        key[1] += kW1;
      }
      const std::uint64_t p0 = std::uint64_t{kM0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kM1} * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    }
    return ctr;
  }

  static Key key_of(std::uint64_t seed) {
    return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  }

 private:
  static constexpr std::uint32_t kM0 = 0xD2511F53;
  static constexpr std::uint32_t kM1 = 0xCD9E8D57;
  static constexpr std::uint32_t kW0 = 0x9E3779B9;
  static constexpr std::uint32_t kW1 = 0xBB67AE85;
};

// One 32-bit uniform per (stream, index), addressed directly: the counter is
// (index/4 low, index/4 high, stream low, stream high) under the seed key.
class SiteUniforms {
 public:
  SiteUniforms(std::uint64_t seed, std::uint64_t stream) : key_(Philox4x32::key_of(seed)), stream_(stream) {}

  template <typename Fn>
  void fill(std::uint64_t count, Fn&& sink) const {
    for (std::uint64_t blk = 0; blk * 4 < count; ++blk) {
      const auto out = Philox4x32::block({static_cast<std::uint32_t>(blk), static_cast<std::uint32_t>(blk >> 32),
                                          static_cast<std::uint32_t>(stream_),
                                          static_cast<std::uint32_t>(stream_ >> 32)},
                                         key_);
      for (std::uint64_t j = 0; j < 4 && blk * 4 + j < count; ++j) sink(blk * 4 + j, out[j]);
    }
  }

  std::uint32_t at(std::uint64_t index) const {
    const std::uint64_t blk = index / 4;
    const auto out = Philox4x32::block({static_cast<std::uint32_t>(blk), static_cast<std::uint32_t>(blk >> 32),
                                        static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)},
                                       key_);
    return out[index % 4];
  }

 private:
  Philox4x32::Key key_;
  std::uint64_t stream_;
};

// A uniform u infects at probability p iff u < floor(p * 2^32); p >= 1 infects
// everything.
inline std::uint64_t infection_threshold(double p) {
  if (!(p > 0)) return 0;
  if (p >= 1) return std::uint64_t{1} << 32;
  return static_cast<std::uint64_t>(p * 4294967296.0);
}

}  // namespace bootlab
