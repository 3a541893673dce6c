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

#include "calibkit/random.h"

#include <cmath>
#include <numbers>

namespace calibkit {

std::array<double, 2> CellRandom::uniforms(std::uint64_t row,
                                           std::uint32_t column,
                                           RandomStream stream) const noexcept {
  const Philox4x32::Counter out = philox_(
      {static_cast<std::uint32_t>(row), static_cast<std::uint32_t>(row >> 32),
       column, static_cast<std::uint32_t>(stream)});
  return {to_unit_double(out[0], out[1]), to_unit_double(out[2], out[3])};
}

double CellRandom::standard_normal(std::uint64_t row, std::uint32_t column,
                                   RandomStream stream) const noexcept {
  const auto [u0, u1] = uniforms(row, column, stream);
  // 1 - u0 lies in (0, 1], keeping the log finite.
  const double radius = std::sqrt(-2.0 * std::log(1.0 - u0));
  return radius * std::cos(2.0 * std::numbers::pi * u1);
}

}  // namespace calibkit
