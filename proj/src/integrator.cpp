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

#include "gridcorr/integrator.hpp"

#include <cmath>

namespace gridcorr::integrator {

std::string to_string(Scheme scheme) { return scheme == Scheme::Rk4 ? "rk4" : "euler"; }

Scheme parse_scheme(const std::string& name) {
    if (name == "rk4") return Scheme::Rk4;
    if (name == "euler") return Scheme::Euler;
    throw ArgumentError("unknown integrator: " + name);
}

namespace {

void require_dt(double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ArgumentError("time step must be positive");
}

Tensor checked(const Rhs& rhs, const Tensor& u, double t, int stage) {
    Tensor s = rhs(u, t);
    if (s.shape() != u.shape())
        throw ShapeError("rhs returned " + shape_string(s.shape()) + " for state " + shape_string(u.shape()));
    if (!all_finite(s)) throw DivergenceError("non-finite slope at stage " + std::to_string(stage), -1, stage);
    return s;
}

}  // namespace

Tensor rk4_step(const Rhs& rhs, const Tensor& u, double t, double dt) {
    require_dt(dt);
    const Tensor s1 = checked(rhs, u, t, 1);
    const Tensor s2 = checked(rhs, axpy(0.5 * dt, s1, u), t + 0.5 * dt, 2);
    const Tensor s3 = checked(rhs, axpy(0.5 * dt, s2, u), t + 0.5 * dt, 3);
    const Tensor s4 = checked(rhs, axpy(dt, s3, u), t + dt, 4);
    const Tensor slope = add(add(s1, s4), scale(add(s2, s3), 2.0));
    return axpy(dt / 6.0, slope, u);
}

Tensor euler_step(const Rhs& rhs, const Tensor& u, double t, double dt) {
    require_dt(dt);
    return axpy(dt, checked(rhs, u, t, 1), u);
}

Tensor step(Scheme scheme, const Rhs& rhs, const Tensor& u, double t, double dt) {
    return scheme == Scheme::Rk4 ? rk4_step(rhs, u, t, dt) : euler_step(rhs, u, t, dt);
}

std::vector<Tensor> rollout(const Stepper& stepper, const Tensor& u0, std::int64_t steps, double t0, double dt,
                            double threshold) {
    if (steps < 0) throw ArgumentError("rollout: steps must be >= 0");
    require_dt(dt);
    std::vector<Tensor> states{u0};
    states.reserve(static_cast<std::size_t>(steps) + 1);
    for (std::int64_t k = 1; k <= steps; ++k) {
        Tensor next;
        try {
            next = stepper(states.back(), t0 + static_cast<double>(k - 1) * dt);
        } catch (const DivergenceError& e) {
            throw DivergenceError("rollout diverged at step " + std::to_string(k) + ": " + e.what(), k, e.stage());
        }
        const double peak = max_abs(next);
        if (!std::isfinite(peak) || peak > threshold)
            throw DivergenceError("rollout diverged at step " + std::to_string(k), k);
        states.push_back(std::move(next));
    }
    return states;
}

}  // namespace gridcorr::integrator
