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
#include <functional>
#include <string>
#include <vector>

#include "gridcorr/tensor.hpp"

/// Explicit one-step schemes and autoregressive rollout.
namespace gridcorr::integrator {

enum class Scheme { Rk4, Euler };

std::string to_string(Scheme scheme);
Scheme parse_scheme(const std::string& name);

/// du/dt = H(u, t).
using Rhs = std::function<Tensor(const Tensor& u, double t)>;
/// One full model step u_k -> u_{k+1}.
using Stepper = std::function<Tensor(const Tensor& u, double t)>;

inline constexpr double kDivergenceThreshold = 1.0e6;

/// u + dt/6 (s1 + 2 s2 + 2 s3 + s4); stages at t, t + dt/2, t + dt/2, t + dt.
/// Throws DivergenceError with the stage index (1..4) on non-finite slopes.
Tensor rk4_step(const Rhs& rhs, const Tensor& u, double t, double dt);
Tensor euler_step(const Rhs& rhs, const Tensor& u, double t, double dt);
Tensor step(Scheme scheme, const Rhs& rhs, const Tensor& u, double t, double dt);

/// [u_0, ..., u_steps]. Throws DivergenceError carrying the failing step
/// (1-based) when a state leaves [-threshold, threshold] or is non-finite.
std::vector<Tensor> rollout(const Stepper& stepper, const Tensor& u0, std::int64_t steps, double t0, double dt,
                            double threshold = kDivergenceThreshold);

}  // namespace gridcorr::integrator
