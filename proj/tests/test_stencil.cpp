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
#include <random>

#include "gridcorr/error.hpp"
#include "gridcorr/stencil.hpp"
#include "test_util.hpp"

using namespace gridcorr;
using namespace gridcorr::stencil;
using gridcorr::tu::kTwoPi;

namespace {

FilterParams random_params(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    FilterParams p;
    for (double& a : p) a = d(rng);
    return p;
}

double kernel_at(const Tensor& k, int k1, int k2) { return k.data()[(k2 + 2) * 5 + (k1 + 2)]; }

// Max error of derivative_x(f) against fx on an n^2 grid over [0, 2pi)^2.
double dx_error(const Tensor& kernel, std::size_t n, const std::function<double(double, double)>& f,
                const std::function<double(double, double)>& fx) {
    const double h = kTwoPi / static_cast<double>(n);
    const Tensor d = derivative_x(tu::field(n, kTwoPi, f), kernel, h);
    return tu::max_abs_diff(d.data(), tu::sample(n, kTwoPi, fx));
}

}  // namespace

TEST(BuildKernel, ZeroParams) { EXPECT_EQ(max_abs(build_kernel(FilterParams{})), 0.0); }

TEST(BuildKernel, ClassicalCenterRow) {
    const Tensor k = build_kernel(classical_params());
    const double row[5] = {1.0 / 12, -2.0 / 3, 0.0, 2.0 / 3, -1.0 / 12};
    for (int k2 = -2; k2 <= 2; ++k2)
        for (int k1 = -2; k1 <= 2; ++k1) EXPECT_EQ(kernel_at(k, k1, k2), k2 == 0 ? row[k1 + 2] : 0.0);
}

TEST(BuildKernel, TemplateLayout) {
    const FilterParams a{1, 2, 3, 4, 5, 6, 7};
    const double expect[5][5] = {{1, 4, 7, -4, -1},
                                 {2, 5, -14, -5, -2},
                                 {3, 6, 0, -6, -3},
                                 {-2, -5, 14, 5, 2},
                                 {-1, -4, -7, 4, 1}};
    const Tensor k = build_kernel(a);
    for (int r = 0; r < 5; ++r)
        for (int c = 0; c < 5; ++c) EXPECT_EQ(k.data()[r * 5 + c], expect[r][c]);
}

TEST(BuildKernel, StructuralZeros) {
    std::mt19937_64 rng(1);
    for (int t = 0; t < 100; ++t) {
        const Tensor k = build_kernel(random_params(rng));
        EXPECT_EQ(kernel_at(k, 0, 0), 0.0);
        double total = 0.0;
        for (double v : k.data()) total += v;
        EXPECT_NEAR(total, 0.0, 1e-15);
    }
}

TEST(BuildKernel, GradientMatchesFiniteDifferences) {
    Tensor p = Tensor::leaf({7}, tu::random_values(7, 3));
    const Tensor f = Tensor::from_data({2, 8, 8}, tu::random_values(128, 4));
    const Tensor w = Tensor::from_data({2, 8, 8}, tu::random_values(128, 5));
    auto loss = [&] {
        const Tensor k = build_kernel(p);
        return add(sum(mul(derivative_x(f, k, 0.3), w)), sum(mul(laplacian(f, k, 0.3, 0.4), w)));
    };
    EXPECT_LT(tu::gradient_error(p, loss), 1e-5);
}

TEST(Transpose, Involution) {
    std::mt19937_64 rng(2);
    const Tensor k = build_kernel(random_params(rng));
    const Tensor tt = transpose_kernel(transpose_kernel(k));
    EXPECT_EQ(std::vector<double>(tt.data().begin(), tt.data().end()),
              std::vector<double>(k.data().begin(), k.data().end()));
    EXPECT_EQ(max_abs(transpose_kernel(Tensor::zeros({5, 5}))), 0.0);
}

TEST(Transpose, ClassicalBecomesColumnStencil) {
    const Tensor t = transpose_kernel(build_kernel(classical_params()));
    const double col[5] = {1.0 / 12, -2.0 / 3, 0.0, 2.0 / 3, -1.0 / 12};
    for (int k2 = -2; k2 <= 2; ++k2)
        for (int k1 = -2; k1 <= 2; ++k1) EXPECT_EQ(kernel_at(t, k1, k2), k1 == 0 ? col[k2 + 2] : 0.0);
}

TEST(Moments, StructuralIdentities) {
    std::mt19937_64 rng(7);
    for (int t = 0; t < 1000; ++t) {
        const FilterParams a = random_params(rng);
        const Tensor k = build_kernel(a);
        EXPECT_EQ(moment(k.data(), 0, 0), 0.0);
        EXPECT_EQ(moment(k.data(), 0, 1), 0.0);
        EXPECT_EQ(moment(k.data(), 0, 2), 0.0);
        EXPECT_NEAR(moment(k.data(), 0, 3), -12.0 * a[6], 1e-14);
        EXPECT_NEAR(moment(k.data(), 3, 0), -16.0 * a[2] - 2.0 * a[5], 1e-14);
        EXPECT_NEAR(moment(k.data(), 1, 0), -4.0 * a[2] - 2.0 * a[5], 1e-14);
    }
}

TEST(Moments, BruteForceDefinition) {
    const auto v = tu::random_values(25, 8);
    for (int a1 = 0; a1 <= 4; ++a1)
        for (int a2 = 0; a2 <= 4; ++a2) {
            double ref = 0.0;
            for (int k2 = -2; k2 <= 2; ++k2)
                for (int k1 = -2; k1 <= 2; ++k1) ref += std::pow(k1, a1) * std::pow(k2, a2) * v[(k2 + 2) * 5 + k1 + 2];
            EXPECT_NEAR(moment(v, a1, a2), ref, 1e-13);
        }
}

TEST(Derivative, ConstantFieldIsZero) {
    std::mt19937_64 rng(9);
    const Tensor k = build_kernel(random_params(rng));
    const Tensor c = Tensor::full({10, 10}, 3.7);
    EXPECT_EQ(max_abs(derivative_x(c, k, 0.1)), 0.0);
    EXPECT_EQ(max_abs(derivative_y(c, k, 0.1)), 0.0);
    EXPECT_EQ(max_abs(laplacian(c, k, 0.1, 0.1)), 0.0);
}

TEST(Derivative, ClassicalOnSines) {
    const Tensor k = build_kernel(classical_params());
    const auto cosx = [](double x, double) { return std::cos(x); };
    EXPECT_LT(dx_error(k, 64, [](double x, double) { return std::sin(x); }, cosx), 1e-5);
    const std::size_t n = 64;
    const double h = kTwoPi / n;
    const Tensor dy = derivative_y(tu::field(n, kTwoPi, [](double, double y) { return std::sin(y); }), k, h);
    EXPECT_LT(tu::max_abs_diff(dy.data(), tu::sample(n, kTwoPi, [](double, double y) { return std::cos(y); })), 1e-5);
}

TEST(Derivative, ClassicalRichardsonOrder) {
    const Tensor k = build_kernel(classical_params());
    auto f = [](double x, double) { return std::sin(x); };
    auto fx = [](double x, double) { return std::cos(x); };
    const double e1 = dx_error(k, 32, f, fx), e2 = dx_error(k, 64, f, fx);
    const double order = std::log2(e1 / e2);
    EXPECT_GE(order, 3.8);
    EXPECT_LE(order, 4.2);
}

TEST(Derivative, YIsTransposeOfX) {
    std::mt19937_64 rng(10);
    const Tensor k = build_kernel(random_params(rng));
    const Tensor f = Tensor::from_data({9, 9}, tu::random_values(81, 11));
    const Tensor a = derivative_y(f, k, 0.2);
    const Tensor b = transpose_last2(derivative_x(transpose_last2(f), k, 0.2));
    EXPECT_LT(tu::max_abs_diff(a.data(), b.data()), 1e-14 * tu::max_abs_value(a.data()));
}

TEST(Derivative, ShiftEquivariant) {
    std::mt19937_64 rng(12);
    const Tensor k = build_kernel(random_params(rng));
    const std::size_t n = 8;
    const auto v = tu::random_values(n * n, 13);
    std::vector<double> s(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) s[i * n + (j + 1) % n] = v[i * n + j];
    const Tensor a = derivative_x(Tensor::from_data({n, n}, v), k, 0.5);
    const Tensor b = derivative_x(Tensor::from_data({n, n}, s), k, 0.5);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) EXPECT_EQ(b.data()[i * n + (j + 1) % n], a.data()[i * n + j]);
}

TEST(Derivative, RejectsNonPositiveSpacing) {
    const Tensor k = build_kernel(classical_params());
    EXPECT_THROW(derivative_x(Tensor::zeros({8, 8}), k, 0.0), ArgumentError);
    EXPECT_THROW(derivative_y(Tensor::zeros({8, 8}), k, -1.0), ArgumentError);
}

// a7 = 0, a6 = -8 a3 and unit gain pin a3 = 1/12; the remaining a1, a2, a4, a5
// form an odd-odd block that is invisible to functions of one variable.
TEST(Derivative, FourthOrderUnderConstraints) {
    std::mt19937_64 rng(14);
    std::uniform_real_distribution<double> d(-0.2, 0.2);
    for (int t = 0; t < 5; ++t) {
        FilterParams a{d(rng), d(rng), 1.0 / 12, d(rng), d(rng), -8.0 / 12, 0.0};
        const Tensor k = build_kernel(a);
        for (int which = 0; which < 2; ++which) {
            auto f = [which](double x, double) { return which ? std::cos(2 * x) : std::sin(x); };
            auto fx = [which](double x, double) { return which ? -2 * std::sin(2 * x) : std::cos(x); };
            const double e32 = dx_error(k, 32, f, fx), e64 = dx_error(k, 64, f, fx), e128 = dx_error(k, 128, f, fx);
            EXPECT_GE(std::log2(e32 / e64), 3.8);
            EXPECT_GE(std::log2(e64 / e128), 3.8);
        }
    }
}

TEST(Laplacian, ClassicalOnSines) {
    const std::size_t n = 64;
    const double h = kTwoPi / n;
    const Tensor k = build_kernel(classical_params());
    const Tensor lap = laplacian(tu::field(n, kTwoPi, [](double x, double y) { return std::sin(x) + std::sin(y); }), k, h, h);
    EXPECT_LT(tu::max_abs_diff(lap.data(), tu::sample(n, kTwoPi, [](double x, double y) { return -std::sin(x) - std::sin(y); })),
              1e-3);
}

TEST(Padding, Examples) {
    const Tensor f = Tensor::from_data({3, 3}, {1, 2, 3, 4, 5, 6, 7, 8, 9});
    const Tensor p0 = pad_periodic(f, 0);
    EXPECT_EQ(std::vector<double>(p0.data().begin(), p0.data().end()), std::vector<double>(f.data().begin(), f.data().end()));
    const Tensor p1 = pad_periodic(f, 1);
    ASSERT_EQ(p1.shape(), (Shape{5, 5}));
    EXPECT_EQ(p1.data()[0], 9.0);
    EXPECT_EQ(p1.data()[4], 7.0);
    EXPECT_EQ(p1.data()[20], 3.0);
    EXPECT_EQ(p1.data()[24], 1.0);
    const Tensor g = Tensor::from_data({2, 6, 6}, tu::random_values(72, 15));
    const Tensor back = crop(pad_periodic(g, 2), 2);
    EXPECT_EQ(std::vector<double>(back.data().begin(), back.data().end()), std::vector<double>(g.data().begin(), g.data().end()));
    EXPECT_THROW(pad_periodic(f, 4), ArgumentError);
}

TEST(SumRules, Classical) {
    const SumRuleReport r = verify_sum_rules(classical_params());
    EXPECT_EQ(*r.constraint_a7, 0.0);
    EXPECT_NEAR(*r.constraint_a6_8a3, 0.0, 1e-15);
    EXPECT_NEAR(r.gain, 1.0, 1e-15);
}

TEST(SumRules, ZeroParamsAllZero) {
    const SumRuleReport r = verify_sum_rules(FilterParams{});
    for (const auto& m : r.moments) EXPECT_EQ(m.value, 0.0);
    EXPECT_EQ(*r.constraint_a7, 0.0);
    EXPECT_EQ(*r.constraint_a6_8a3, 0.0);
}

TEST(SumRules, CsvSchema) {
    const std::string csv = to_csv(verify_sum_rules(classical_params()));
    EXPECT_EQ(csv.rfind("alpha1,alpha2,moment_value\n", 0), 0u);
    std::size_t rows = 0;
    for (char c : csv) rows += c == '\n';
    EXPECT_EQ(rows, 1u + 15u + 2u);  // header, |alpha| <= 4, two constraints
    EXPECT_NE(csv.find("constraint_a7,,0\n"), std::string::npos);
    EXPECT_NE(csv.find("constraint_a6_8a3,,"), std::string::npos);
}
