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

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gridcorr/tensor.hpp"

/// Constrained 5x5 derivative filters and the periodic stencil machinery
/// built on them.
///
/// Orientation: kernel[row][col] with col offset k1 = col - 2 (horizontal,
/// x) and row offset k2 = row - 2 (vertical, y); the top row is k2 = -2. The
/// filter is applied by cross-correlation, so kernel entries are stencil
/// weights at those offsets.
///
/// The seven learnable scalars fill the antisymmetric template
///
///      a1   a4    a7  -a4  -a1
///      a2   a5 -2a7  -a5  -a2
///      a3   a6     0  -a6  -a3
///     -a2  -a5  2a7   a5   a2
///     -a1  -a4  -a7   a4   a1
///
/// whose moments (0,0), (0,1), (0,2) vanish for every parameter choice.
namespace gridcorr::stencil {

inline constexpr std::size_t kParamCount = 7;
inline constexpr std::size_t kSize = 5;

using FilterParams = std::array<double, kParamCount>;

/// a3 = 1/12, a6 = -2/3: the classical fourth-order central difference.
FilterParams classical_params();

/// Fills the template from a [7] tensor; differentiable in the parameters.
Tensor build_kernel(const Tensor& params);
Tensor build_kernel(const FilterParams& params);

Tensor transpose_kernel(const Tensor& kernel);

/// sum_{k1,k2} k1^alpha1 k2^alpha2 g[k2+2][k1+2] over a 25-entry kernel.
double moment(std::span<const double> kernel, int alpha1, int alpha2);

/// Cross-correlation with the kernel, divided by the spacing.
Tensor derivative_x(const Tensor& field, const Tensor& kernel, double dx);
/// Same with the transposed kernel (vertical direction).
Tensor derivative_y(const Tensor& field, const Tensor& kernel, double dy);

/// d/dx(d/dx f) + d/dy(d/dy f), both passes with the same kernel.
Tensor laplacian(const Tensor& field, const Tensor& kernel, double dx, double dy);

struct Gradient {
    Tensor x;
    Tensor y;
};

Gradient gradient(const Tensor& field, const Tensor& kernel, double dx, double dy);
/// Second pass of the composed Laplacian, reusing an existing gradient.
Tensor laplacian_from(const Gradient& grad, const Tensor& kernel, double dx, double dy);

/// Wrap-around halo of `width` cells on every side of a [H,W] or [C,H,W] field.
Tensor pad_periodic(const Tensor& field, std::size_t width);
/// Removes a halo of `width` cells.
Tensor crop(const Tensor& field, std::size_t width);

struct MomentEntry {
    int alpha1;
    int alpha2;
    double value;
};

struct SumRuleReport {
    std::vector<MomentEntry> moments;  // every (alpha1, alpha2) with alpha1 + alpha2 <= 4
    double gain = 0.0;                 // moment (1,0)
    std::optional<double> constraint_a7;
    std::optional<double> constraint_a6_8a3;
};

SumRuleReport verify_sum_rules(const FilterParams& params);
/// Moments only, for unconstrained kernels.
SumRuleReport kernel_moments(std::span<const double> kernel);

/// alpha1,alpha2,moment_value rows followed by the constraint rows.
std::string to_csv(const SumRuleReport& report);

}  // namespace gridcorr::stencil
