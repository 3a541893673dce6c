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

#include "calibkit/sigmoid.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "calibkit/error.h"

namespace calibkit {

double sigmoid(double z) noexcept {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double inverse_sigmoid(double p, double eps) {
  if (!(eps > 0.0 && eps < 0.5)) {
    std::ostringstream msg;
    msg << "eps must lie in (0, 0.5), got " << eps;
    throw ValidationError(ErrorKind::kInvalidArgument, msg.str());
  }
  if (!(p >= 0.0 && p <= 1.0)) {
    std::ostringstream msg;
    msg << "probability outside [0, 1]: " << p;
    throw ValidationError(ErrorKind::kOutOfRange, msg.str());
  }
  const double clamped = std::clamp(p, eps, 1.0 - eps);
  return std::log(clamped / (1.0 - clamped));
}

}  // namespace calibkit
