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

#include "gridcorr/stencil.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace gridcorr::stencil {
namespace {

// Template entry -> (parameter index, coefficient); index -1 means structural zero.
struct Slot {
    int param;
    double coeff;
};

constexpr std::array<Slot, kSize * kSize> kTemplate = {{
    {0, 1}, {3, 1}, {6, 1}, {3, -1}, {0, -1},
    {1, 1}, {4, 1}, {6, -2}, {4, -1}, {1, -1},
    {2, 1}, {5, 1}, {-1, 0}, {5, -1}, {2, -1},
    {1, -1}, {4, -1}, {6, 2}, {4, 1}, {1, 1},
    {0, -1}, {3, -1}, {6, -1}, {3, 1}, {0, 1},
}};

void require_spacing(const char* op, double h) {
    if (!(h > 0.0)) throw ArgumentError(std::string(op) + ": grid spacing must be positive, got " + std::to_string(h));
}

double ipow(int base, int e) {
    double r = 1.0;
    for (int i = 0; i < e; ++i) r *= base;
    return r;
}

}  // namespace

FilterParams classical_params() { return {0.0, 0.0, 1.0 / 12.0, 0.0, 0.0, -2.0 / 3.0, 0.0}; }

Tensor build_kernel(const Tensor& params) {
    if (params.shape() != Shape{kParamCount})
        throw ShapeError("build_kernel: expected [7] parameters, got " + shape_string(params.shape()));
    const auto a = params.data();
    std::vector<double> k(kSize * kSize, 0.0);
    for (std::size_t i = 0; i < k.size(); ++i)
        if (kTemplate[i].param >= 0) k[i] = kTemplate[i].coeff * a[static_cast<std::size_t>(kTemplate[i].param)];
    return Tensor::make_result({kSize, kSize}, std::move(k), {params}, [](detail::Node& self) {
        auto& g = self.parents[0]->grad_buffer();
        for (std::size_t i = 0; i < kTemplate.size(); ++i)
            if (kTemplate[i].param >= 0)
                g[static_cast<std::size_t>(kTemplate[i].param)] += kTemplate[i].coeff * self.grad[i];
    });
}

Tensor build_kernel(const FilterParams& params) {
    return build_kernel(Tensor::from_data({kParamCount}, std::vector<double>(params.begin(), params.end())));
}

Tensor transpose_kernel(const Tensor& kernel) {
    if (kernel.shape() != Shape{kSize, kSize})
        throw ShapeError("transpose_kernel: expected 5x5, got " + shape_string(kernel.shape()));
    return transpose_last2(kernel);
}

double moment(std::span<const double> kernel, int alpha1, int alpha2) {
    if (kernel.size() != kSize * kSize) throw ShapeError("moment: kernel must have 25 entries");
    auto g = [&](int k1, int k2) { return kernel[static_cast<std::size_t>((k2 + 2) * 5 + (k1 + 2))]; };
    // Mirror offsets are summed pairwise so antisymmetric kernels cancel exactly.
    double rows[5];
    for (int k2 = -2; k2 <= 2; ++k2) {
        double acc = 0.0;
        for (int k1 = 2; k1 >= 1; --k1) acc += ipow(k1, alpha1) * g(k1, k2) + ipow(-k1, alpha1) * g(-k1, k2);
        rows[k2 + 2] = acc + ipow(0, alpha1) * g(0, k2);
    }
    double acc = 0.0;
    for (int k2 = 2; k2 >= 1; --k2) acc += ipow(k2, alpha2) * rows[k2 + 2] + ipow(-k2, alpha2) * rows[2 - k2];
    return acc + ipow(0, alpha2) * rows[2];
}

Tensor derivative_x(const Tensor& field, const Tensor& kernel, double dx) {
    require_spacing("derivative_x", dx);
    return scale(cross_correlate2d(field, kernel), 1.0 / dx);
}

Tensor derivative_y(const Tensor& field, const Tensor& kernel, double dy) {
    require_spacing("derivative_y", dy);
    return scale(cross_correlate2d(field, transpose_kernel(kernel)), 1.0 / dy);
}

Gradient gradient(const Tensor& field, const Tensor& kernel, double dx, double dy) {
    return {derivative_x(field, kernel, dx), derivative_y(field, kernel, dy)};
}

Tensor laplacian_from(const Gradient& grad, const Tensor& kernel, double dx, double dy) {
    return add(derivative_x(grad.x, kernel, dx), derivative_y(grad.y, kernel, dy));
}

Tensor laplacian(const Tensor& field, const Tensor& kernel, double dx, double dy) {
    return laplacian_from(gradient(field, kernel, dx, dy), kernel, dx, dy);
}

Tensor pad_periodic(const Tensor& field, std::size_t width) {
    const auto& s = field.shape();
    if (s.size() != 2 && s.size() != 3)
        throw ShapeError("pad_periodic: expected [H,W] or [C,H,W], got " + shape_string(s));
    const std::size_t c = s.size() == 3 ? s[0] : 1;
    const std::size_t h = s[s.size() - 2], w = s[s.size() - 1];
    if (width > std::min(h, w))
        throw ArgumentError("pad_periodic: width " + std::to_string(width) + " exceeds field " + shape_string(s));
    const std::size_t ph = h + 2 * width, pw = w + 2 * width;
    std::vector<std::size_t> index(c * ph * pw);
    for (std::size_t ch = 0; ch < c; ++ch)
        for (std::size_t i = 0; i < ph; ++i)
            for (std::size_t j = 0; j < pw; ++j)
                index[(ch * ph + i) * pw + j] = (ch * h + (i + h - width) % h) * w + (j + w - width) % w;
    Shape out = s;
    out[s.size() - 2] = ph;
    out[s.size() - 1] = pw;
    return gather(field, std::move(out), std::move(index));
}

Tensor crop(const Tensor& field, std::size_t width) {
    const auto& s = field.shape();
    if (s.size() != 2 && s.size() != 3) throw ShapeError("crop: expected [H,W] or [C,H,W], got " + shape_string(s));
    const std::size_t c = s.size() == 3 ? s[0] : 1;
    const std::size_t ph = s[s.size() - 2], pw = s[s.size() - 1];
    if (2 * width >= ph || 2 * width >= pw)
        throw ArgumentError("crop: width " + std::to_string(width) + " too large for " + shape_string(s));
    const std::size_t h = ph - 2 * width, w = pw - 2 * width;
    std::vector<std::size_t> index(c * h * w);
    for (std::size_t ch = 0; ch < c; ++ch)
        for (std::size_t i = 0; i < h; ++i)
            for (std::size_t j = 0; j < w; ++j) index[(ch * h + i) * w + j] = (ch * ph + i + width) * pw + j + width;
    Shape out = s;
    out[s.size() - 2] = h;
    out[s.size() - 1] = w;
    return gather(field, std::move(out), std::move(index));
}

SumRuleReport kernel_moments(std::span<const double> kernel) {
    SumRuleReport report;
    for (int order = 0; order <= 4; ++order)
        for (int a1 = 0; a1 <= order; ++a1) report.moments.push_back({a1, order - a1, moment(kernel, a1, order - a1)});
    report.gain = moment(kernel, 1, 0);
    return report;
}

SumRuleReport verify_sum_rules(const FilterParams& params) {
    NoGradGuard no_grad;
    const Tensor k = build_kernel(params);
    SumRuleReport report = kernel_moments(k.data());
    report.constraint_a7 = params[6];
    report.constraint_a6_8a3 = params[5] + 8.0 * params[2];
    return report;
}

std::string to_csv(const SumRuleReport& report) {
    std::ostringstream os;
    char buf[64];
    os << "alpha1,alpha2,moment_value\n";
    for (const auto& m : report.moments) {
        std::snprintf(buf, sizeof buf, "%.17g", m.value);
        os << m.alpha1 << ',' << m.alpha2 << ',' << buf << '\n';
    }
    auto row = [&](const char* name, const std::optional<double>& v) {
        if (v)
            std::snprintf(buf, sizeof buf, "%.17g", *v);
        else
            std::snprintf(buf, sizeof buf, "NaN");
        os << name << ",," << buf << '\n';
    };
    row("constraint_a7", report.constraint_a7);
    row("constraint_a6_8a3", report.constraint_a6_8a3);
    return os.str();
}

}  // namespace gridcorr::stencil
