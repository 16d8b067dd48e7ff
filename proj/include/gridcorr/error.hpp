// Copyright 2026 The gridcorr Authors
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

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace gridcorr {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Operand shapes or channel counts do not fit the operation.
class ShapeError : public Error {
  public:
    using Error::Error;
};

/// Invalid argument value (non-positive spacing, bad stride, ...).
class ArgumentError : public Error {
  public:
    using Error::Error;
};

/// Configuration document failed validation.
class ConfigError : public Error {
  public:
    using Error::Error;
};

/// File could not be read/written or has a malformed layout.
class IoError : public Error {
  public:
    using Error::Error;
};

/// A simulation or rollout produced non-finite or runaway values.
///
/// `step()` is the rollout step (or simulation step) that failed and `stage()`
/// the Runge-Kutta stage when known (-1 otherwise).
class DivergenceError : public Error {
  public:
    DivergenceError(const std::string& what, std::int64_t step, int stage = -1)
        : Error(what), step_(step), stage_(stage) {}

    std::int64_t step() const noexcept { return step_; }
    int stage() const noexcept { return stage_; }

  private:
    std::int64_t step_;
    int stage_;
};

/// A requested time step violates the explicit stability bound.
class StabilityError : public Error {
  public:
    StabilityError(const std::string& what, double limit) : Error(what), limit_(limit) {}
    double limit() const noexcept { return limit_; }

  private:
    double limit_;
};

}  // namespace gridcorr
