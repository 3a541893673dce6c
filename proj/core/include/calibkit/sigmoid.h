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

#ifndef CALIBKIT_SIGMOID_H_
#define CALIBKIT_SIGMOID_H_

namespace calibkit {

inline constexpr double kDefaultProbabilityEps = 1e-7;

// Logistic function. Evaluated in the branch that never overflows exp(), so
// sigmoid(0) is exactly 0.5 and large |z| saturates cleanly.
double sigmoid(double z) noexcept;

// Log-odds of p after clamping to [eps, 1 - eps]. Throws ValidationError when
// p is outside [0, 1] or eps is outside (0, 0.5).
double inverse_sigmoid(double p, double eps = kDefaultProbabilityEps);

}  // namespace calibkit

#endif  // CALIBKIT_SIGMOID_H_
