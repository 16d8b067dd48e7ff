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

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "gridcorr/error.hpp"
#include "gridcorr/integrator.hpp"
#include "gridcorr/stencil.hpp"
#include "test_util.hpp"

using namespace gridcorr;
namespace integ = gridcorr::integrator;

namespace {

integ::Rhs decay(double lambda) {
    return [lambda](const Tensor& u, double) { return scale(u, -lambda); };
}

double integrate(integ::Scheme scheme, double dt, double t_end) {
    Tensor u = Tensor::full({1}, 1.0);
    const auto steps = static_cast<int>(std::lround(t_end / dt));
    for (int k = 0; k < steps; ++k) u = integ::step(scheme, decay(1.0), u, k * dt, dt);
    return u.item();
}

// Fourth-order central difference along one axis of a periodic n x n field.
std::vector<double> fd_axis(const std::vector<double>& f, std::size_t n, double h, bool along_x) {
    std::vector<double> out(n * n);
    auto at = [&](std::size_t i, std::size_t j, long d) {
        const std::size_t ii = along_x ? i : (i + n + d) % n, jj = along_x ? (j + n + d) % n : j;
        return f[ii * n + jj];
    };
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            out[i * n + j] = (at(i, j, -2) / 12 - 2 * at(i, j, -1) / 3 + 2 * at(i, j, 1) / 3 - at(i, j, 2) / 12) / h;
    return out;
}

}  // namespace

TEST(Schemes, Names) {
    EXPECT_EQ(integ::parse_scheme("rk4"), integ::Scheme::Rk4);
    EXPECT_EQ(integ::parse_scheme(integ::to_string(integ::Scheme::Euler)), integ::Scheme::Euler);
    EXPECT_THROW(integ::parse_scheme("heun"), ArgumentError);
}

TEST(Rk4, ZeroRhsIsIdentity) {
    const Tensor u = Tensor::from_data({2, 4, 4}, tu::random_values(32, 1));
    auto zero = [](const Tensor& x, double) { return Tensor::zeros(x.shape()); };
    EXPECT_EQ(tu::max_abs_diff(integ::rk4_step(zero, u, 0.0, 0.3).data(), u.data()), 0.0);
    EXPECT_EQ(tu::max_abs_diff(integ::euler_step(zero, u, 0.0, 0.3).data(), u.data()), 0.0);
}

TEST(Rk4, StabilityPolynomial) {
    const double h = 0.1;
    const double expect = 1 - h + h * h / 2 - h * h * h / 6 + h * h * h * h / 24;
    const double got = integ::rk4_step(decay(1.0), Tensor::full({1}, 1.0), 0.0, h).item();
    EXPECT_NEAR(got, expect, 1e-15);
    EXPECT_NEAR(got, 0.90483750, 5e-9);
    EXPECT_DOUBLE_EQ(integ::euler_step(decay(1.0), Tensor::full({1}, 1.0), 0.0, h).item(), 0.9);
}

TEST(Rk4, LinearSystemTaylorPolynomial) {
    // u' = A u for a non-normal 2x2 A acting on a [2,1,1] state.
    const std::vector<double> a{-0.3, 1.2, -0.8, 0.1};
    const Tensor A = Tensor::from_data({2, 2}, a);
    auto rhs = [&](const Tensor& u, double) { return channel_mix(u, A, Tensor::zeros({2})); };
    const double h = 0.37;
    const std::vector<double> u0{0.6, -1.1};
    const Tensor got = integ::rk4_step(rhs, Tensor::from_data({2, 1, 1}, u0), 0.0, h);
    std::vector<double> term = u0, acc = u0;
    for (int k = 1; k <= 4; ++k) {
        const std::vector<double> next{(a[0] * term[0] + a[1] * term[1]) * h / k, (a[2] * term[0] + a[3] * term[1]) * h / k};
        term = next;
        acc[0] += term[0];
        acc[1] += term[1];
    }
    EXPECT_LT(tu::max_abs_diff(got.data(), acc), 1e-15);
}

TEST(Rk4, FourthOrderConvergence) {
    const double exact = std::exp(-1.0);
    const double e1 = std::abs(integrate(integ::Scheme::Rk4, 0.1, 1.0) - exact);
    const double e2 = std::abs(integrate(integ::Scheme::Rk4, 0.05, 1.0) - exact);
    EXPECT_GE(e1 / e2, 14.0);
    EXPECT_LE(e1 / e2, 18.0);
}

TEST(Euler, FirstOrderConvergence) {
    const double exact = std::exp(-1.0);
    const double e1 = std::abs(integrate(integ::Scheme::Euler, 0.01, 1.0) - exact);
    const double e2 = std::abs(integrate(integ::Scheme::Euler, 0.005, 1.0) - exact);
    EXPECT_NEAR(e1 / e2, 2.0, 0.4);
}

TEST(Rk4, StageTimes) {
    std::vector<double> times;
    auto rhs = [&](const Tensor& u, double t) {
        times.push_back(t);
        return Tensor::zeros(u.shape());
    };
    integ::rk4_step(rhs, Tensor::zeros({1}), 2.0, 0.5);
    EXPECT_EQ(times, (std::vector<double>{2.0, 2.25, 2.25, 2.5}));
}

TEST(Rk4, TimeDependentExactForCubic) {
    // u' = t^3 is integrated exactly by Simpson weights.
    auto rhs = [](const Tensor& u, double t) { return Tensor::full(u.shape(), t * t * t); };
    const double got = integ::rk4_step(rhs, Tensor::zeros({1}), 1.0, 0.5).item();
    EXPECT_NEAR(got, (std::pow(1.5, 4) - 1.0) / 4, 1e-15);
}

TEST(Rk4, NonFiniteStageIsReported) {
    int calls = 0;
    auto rhs = [&](const Tensor& u, double) {
        return ++calls == 3 ? Tensor::full(u.shape(), std::numeric_limits<double>::quiet_NaN()) : Tensor::zeros(u.shape());
    };
    try {
        integ::rk4_step(rhs, Tensor::zeros({1}), 0.0, 0.1);
        FAIL() << "expected divergence";
    } catch (const DivergenceError& e) {
        EXPECT_EQ(e.stage(), 3);
    }
}

TEST(Rk4, Errors) {
    EXPECT_THROW(integ::rk4_step(decay(1.0), Tensor::zeros({1}), 0.0, 0.0), ArgumentError);
    EXPECT_THROW(integ::euler_step(decay(1.0), Tensor::zeros({1}), 0.0, -1.0), ArgumentError);
    auto wrong = [](const Tensor&, double) { return Tensor::zeros({2}); };
    EXPECT_THROW(integ::rk4_step(wrong, Tensor::zeros({1}), 0.0, 0.1), ShapeError);
}

TEST(Rollout, Contract) {
    const integ::Stepper st = [](const Tensor& u, double t) { return integ::rk4_step(decay(1.0), u, t, 0.1); };
    const Tensor u0 = Tensor::full({1}, 1.0);
    const auto zero = integ::rollout(st, u0, 0, 0.0, 0.1);
    ASSERT_EQ(zero.size(), 1u);
    EXPECT_EQ(zero[0].item(), 1.0);
    EXPECT_EQ(integ::rollout(st, u0, 7, 0.0, 0.1).size(), 8u);
    EXPECT_THROW(integ::rollout(st, u0, -1, 0.0, 0.1), ArgumentError);
}

TEST(Rollout, Deterministic) {
    const Tensor kernel = stencil::build_kernel(stencil::classical_params());
    auto rhs = [&](const Tensor& u, double) { return sub(stencil::laplacian(u, kernel, 0.1, 0.1), mul(u, u)); };
    const integ::Stepper st = [&](const Tensor& u, double t) { return integ::rk4_step(rhs, u, t, 1e-3); };
    const Tensor u0 = Tensor::from_data({1, 8, 8}, tu::random_values(64, 2));
    const auto a = integ::rollout(st, u0, 6, 0.0, 1e-3);
    const auto b = integ::rollout(st, u0, 6, 0.0, 1e-3);
    for (std::size_t k = 0; k < a.size(); ++k) EXPECT_EQ(tu::max_abs_diff(a[k].data(), b[k].data()), 0.0);
}

TEST(Rollout, DivergenceCarriesStep) {
    const integ::Stepper grow = [](const Tensor& u, double) { return scale(u, 10.0); };
    try {
        integ::rollout(grow, Tensor::full({1}, 1.0), 20, 0.0, 0.1);
        FAIL() << "expected divergence";
    } catch (const DivergenceError& e) {
        EXPECT_EQ(e.step(), 7);
    }
    EXPECT_NO_THROW(integ::rollout(grow, Tensor::full({1}, 1.0), 20, 0.0, 0.1, 1e30));
    const integ::Stepper nan = [](const Tensor& u, double) { return scale(u, std::numeric_limits<double>::quiet_NaN()); };
    EXPECT_THROW(integ::rollout(nan, Tensor::full({1}, 1.0), 3, 0.0, 0.1), DivergenceError);
}

TEST(Rollout, DiffusionMatchesReferenceFd) {
    const std::size_t n = 16;
    const double h = tu::kTwoPi / n, nu = 0.05, dt = 0.01;
    const Tensor kernel = stencil::build_kernel(stencil::classical_params());
    auto rhs = [&](const Tensor& u, double) { return scale(stencil::laplacian(u, kernel, h, h), nu); };
    const integ::Stepper st = [&](const Tensor& u, double t) { return integ::rk4_step(rhs, u, t, dt); };
    const auto init = tu::random_values(n * n, 3);
    const auto states = integ::rollout(st, Tensor::from_data({1, n, n}, init), 10, 0.0, dt);

    auto ref_rhs = [&](const std::vector<double>& f) {
        const auto xx = fd_axis(fd_axis(f, n, h, true), n, h, true);
        const auto yy = fd_axis(fd_axis(f, n, h, false), n, h, false);
        std::vector<double> out(n * n);
        for (std::size_t k = 0; k < out.size(); ++k) out[k] = nu * (xx[k] + yy[k]);
        return out;
    };
    auto axpy_ref = [](double a, const std::vector<double>& x, const std::vector<double>& y) {
        std::vector<double> out(y);
        for (std::size_t k = 0; k < out.size(); ++k) out[k] += a * x[k];
        return out;
    };
    std::vector<double> u = init;
    for (int s = 1; s <= 10; ++s) {
        const auto k1 = ref_rhs(u), k2 = ref_rhs(axpy_ref(dt / 2, k1, u)), k3 = ref_rhs(axpy_ref(dt / 2, k2, u)),
                   k4 = ref_rhs(axpy_ref(dt, k3, u));
        for (std::size_t k = 0; k < u.size(); ++k) u[k] += dt / 6 * (k1[k] + 2 * k2[k] + 2 * k3[k] + k4[k]);
        EXPECT_LT(tu::max_abs_diff(states[s].data(), u), 1e-10) << "step " << s;
    }
}

TEST(Rollout, GradientThroughChain) {
    const std::size_t n = 8;
    const double h = 0.5, dt = 0.01;
    auto params = stencil::classical_params();
    std::vector<double> p(params.begin(), params.end());
    for (double& v : p) v += 0.05;
    Tensor filter = Tensor::leaf({p.size()}, p);
    Tensor u0 = Tensor::leaf({1, n, n}, tu::random_values(n * n, 4, -0.5, 0.5));
    const Tensor target = Tensor::from_data({1, n, n}, tu::random_values(n * n, 5, -0.5, 0.5));
    auto loss = [&] {
        const Tensor kernel = stencil::build_kernel(filter);
        auto rhs = [&](const Tensor& u, double) {
            const auto g = stencil::gradient(u, kernel, h, h);
            return sub(scale(stencil::laplacian_from(g, kernel, h, h), 0.1), mul(u, g.x));
        };
        const integ::Stepper st = [&](const Tensor& u, double t) { return integ::rk4_step(rhs, u, t, dt); };
        const auto states = integ::rollout(st, u0, 6, 0.0, dt);
        Tensor total = mse(states[1], target);
        for (std::size_t k = 2; k < states.size(); ++k) total = add(total, mse(states[k], target));
        return total;
    };
    EXPECT_LT(tu::gradient_error(filter, loss), 1e-4);
    EXPECT_LT(tu::gradient_error(u0, loss), 1e-4);
}
