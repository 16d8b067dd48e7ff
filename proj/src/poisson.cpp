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

#include "gridcorr/poisson.hpp"

#include <cmath>
#include <complex>
#include <memory>

#include "gridcorr/fft.hpp"
#include "gridcorr/stencil.hpp"

namespace gridcorr::poisson {

using detail::Node;

std::vector<double> wavenumbers(std::size_t n, double length) {
    std::vector<double> eta(n);
    const double base = 2.0 * M_PI / length;
    for (std::size_t k = 0; k < n; ++k) {
        eta[k] = base * static_cast<double>(fft::signed_frequency(k, n));
    }
    return eta;
}

namespace {

void require_square(const char* op, const Tensor& field, const Grid& grid) {
    const bool plane = field.ndim() == 2 || (field.ndim() == 3 && field.dim(0) == 1);
    if (!plane) throw ShapeError(std::string(op) + ": expected a [H,W] field, got " + shape_string(field.shape()));
    const std::size_t h = field.dim(field.ndim() - 2), w = field.dim(field.ndim() - 1);
    if (h != w) throw ShapeError(std::string(op) + ": grid must be square, got " + shape_string(field.shape()));
    if (h % 2 != 0) throw ShapeError(std::string(op) + ": grid size must be even, got " + std::to_string(h));
    if (h != grid.n) throw ShapeError(std::string(op) + ": field does not match grid size " + std::to_string(grid.n));
}

// Applies a real-valued or purely imaginary Fourier multiplier to a real field.
// symbol(kx_index, ky_index) returns the complex multiplier.
template <typename Symbol>
std::vector<double> apply_multiplier(std::span<const double> field, std::size_t n, Symbol symbol) {
    std::vector<fft::Complex> buf(field.begin(), field.end());
    fft::transform2d(buf, n, n, false);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) buf[i * n + j] *= symbol(i, j);
    fft::transform2d(buf, n, n, true);
    std::vector<double> out(n * n);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = buf[k].real();
    return out;
}

std::vector<double> inverse_laplacian(std::span<const double> psi, std::size_t n, const std::vector<double>& eta) {
    return apply_multiplier(psi, n, [&](std::size_t i, std::size_t j) -> fft::Complex {
        const double k2 = eta[i] * eta[i] + eta[j] * eta[j];
        return k2 == 0.0 ? 0.0 : -1.0 / k2;
    });
}

}  // namespace

Tensor solve_poisson_spectral(const Tensor& psi, const Grid& grid) {
    require_square("solve_poisson_spectral", psi, grid);
    const std::size_t n = grid.n;
    auto eta = std::make_shared<std::vector<double>>(wavenumbers(n, grid.length));
    return Tensor::make_result({n, n}, inverse_laplacian(psi.data(), n, *eta), {psi}, [n, eta](Node& self) {
        const auto back = inverse_laplacian(self.grad, n, *eta);
        accumulate_grad(self.parents[0], back);
    });
}

Tensor spectral_derivative(const Tensor& field, const Grid& grid, bool along_x) {
    require_square("spectral_derivative", field, grid);
    const std::size_t n = grid.n;
    auto eta = std::make_shared<std::vector<double>>(wavenumbers(n, grid.length));
    auto symbol = [n, eta, along_x](std::size_t i, std::size_t j) -> fft::Complex {
        const std::size_t k = along_x ? j : i;
        if (k == n / 2) return 0.0;
        return {0.0, (*eta)[k]};
    };
    return Tensor::make_result({n, n}, apply_multiplier(field.data(), n, symbol), {field}, [n, symbol](Node& self) {
        // The adjoint of an odd imaginary multiplier is its negation.
        auto back = apply_multiplier(self.grad, n, symbol);
        for (double& v : back) v = -v;
        accumulate_grad(self.parents[0], back);
    });
}

Tensor laplacian_spectral(const Tensor& field, const Grid& grid) {
    require_square("laplacian_spectral", field, grid);
    const std::size_t n = grid.n;
    const auto eta = wavenumbers(n, grid.length);
    auto out = apply_multiplier(field.data(), n, [&](std::size_t i, std::size_t j) -> fft::Complex {
        return -(eta[i] * eta[i] + eta[j] * eta[j]);
    });
    return Tensor::from_data({n, n}, std::move(out), field.dtype());
}

namespace {

void require_velocity(const char* op, const Tensor& velocity, const Tensor& forcing, const Grid& grid) {
    if (velocity.ndim() != 3 || velocity.dim(0) != 2 || velocity.dim(1) != grid.n || velocity.dim(2) != grid.n)
        throw ShapeError(std::string(op) + ": velocity " + shape_string(velocity.shape()) + " is not [2," +
                         std::to_string(grid.n) + "," + std::to_string(grid.n) + "]");
    if (forcing.defined() && forcing.shape() != velocity.shape())
        throw ShapeError(std::string(op) + ": forcing " + shape_string(forcing.shape()) + " vs velocity " +
                         shape_string(velocity.shape()));
}

Tensor assemble(const Tensor& ux, const Tensor& uy, const Tensor& vx, const Tensor& vy, const Tensor& div_f) {
    // -2 (u_y v_x - u_x v_y)
    Tensor psi = scale(sub(mul(uy, vx), mul(ux, vy)), -2.0);
    if (div_f.defined()) psi = add(psi, div_f);
    return psi;
}

}  // namespace

Tensor vorticity_source(const Tensor& velocity, const Tensor& forcing, const Tensor& kernel, const Grid& grid) {
    require_velocity("vorticity_source", velocity, forcing, grid);
    const double h = grid.spacing();
    const auto g = stencil::gradient(velocity, kernel, h, h);
    Tensor div_f;
    if (forcing.defined()) {
        const auto gf = stencil::gradient(forcing, kernel, h, h);
        div_f = add(channel(gf.x, 0), channel(gf.y, 1));
    }
    return assemble(channel(g.x, 0), channel(g.y, 0), channel(g.x, 1), channel(g.y, 1), div_f);
}

Tensor vorticity_source_spectral(const Tensor& velocity, const Tensor& forcing, const Grid& grid) {
    require_velocity("vorticity_source_spectral", velocity, forcing, grid);
    const Tensor u = channel(velocity, 0), v = channel(velocity, 1);
    Tensor div_f;
    if (forcing.defined())
        div_f = add(spectral_derivative(channel(forcing, 0), grid, true),
                    spectral_derivative(channel(forcing, 1), grid, false));
    return assemble(spectral_derivative(u, grid, true), spectral_derivative(u, grid, false),
                    spectral_derivative(v, grid, true), spectral_derivative(v, grid, false), div_f);
}

}  // namespace gridcorr::poisson
