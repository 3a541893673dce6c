/*
 * Copyright 2026 The calibkit Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef CALIBKIT_RANDOM_H_
#define CALIBKIT_RANDOM_H_

#include <array>
#include <cstdint>

namespace calibkit {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Every draw is
// a pure function of (key, counter), so any element of a generated table can
// be produced independently of the others.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  explicit Philox4x32(std::uint64_t seed) noexcept
      : key_{static_cast<std::uint32_t>(seed),
             static_cast<std::uint32_t>(seed >> 32)} {}

  Counter operator()(Counter counter) const noexcept {
    Key key = key_;
    for (int round = 0; round < 10; ++round) {
      counter = round_once(counter, key);
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    return counter;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static Counter round_once(const Counter& ctr, const Key& key) noexcept {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    return {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }

  Key key_;
};

// Streams keep independent draws for the same (row, column) apart.
enum class RandomStream : std::uint32_t {
  kLatentNormal = 0,
  kLabel = 1,
  kClassMean = 2,
};

// Uniform double in [0, 1) from 53 bits of two 32-bit words.
inline double to_unit_double(std::uint32_t hi, std::uint32_t lo) noexcept {
  const std::uint64_t bits =
      (static_cast<std::uint64_t>(hi) << 32 | lo) >> 11;
  return static_cast<double>(bits) * 0x1.0p-53;
}

// Draws for cell (row, column) of a table keyed by seed.
class CellRandom {
 public:
  explicit CellRandom(std::uint64_t seed) noexcept : philox_(seed) {}

  std::array<double, 2> uniforms(std::uint64_t row, std::uint32_t column,
                                 RandomStream stream) const noexcept;
  double uniform(std::uint64_t row, std::uint32_t column,
                 RandomStream stream) const noexcept {
    return uniforms(row, column, stream)[0];
  }
  // Box-Muller on the two uniforms of the cell.
  double standard_normal(std::uint64_t row, std::uint32_t column,
                         RandomStream stream) const noexcept;

 private:
  Philox4x32 philox_;
};

}  // namespace calibkit

#endif  // CALIBKIT_RANDOM_H_
