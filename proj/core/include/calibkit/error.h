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

#ifndef CALIBKIT_ERROR_H_
#define CALIBKIT_ERROR_H_

#include <stdexcept>
#include <string>

namespace calibkit {

enum class ErrorKind {
  kIo,
  kParse,
  kShapeMismatch,
  kUnknownSampleId,
  kSampleOrderMismatch,
  kDuplicateSampleId,
  kNonBinaryLabel,
  kNonFinite,
  kOutOfRange,
  kDuplicateClass,
  kClassMismatch,
  kInvalidArgument,
  kUndefined,
};

// Raised for malformed inputs or violated preconditions. The CLI maps it to
// exit code 2.
class ValidationError : public std::runtime_error {
 public:
  ValidationError(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Raised when an optimizer or metric produces a non-finite quantity. The CLI
// maps it to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace calibkit

#endif  // CALIBKIT_ERROR_H_
