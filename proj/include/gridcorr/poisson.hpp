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

#include <vector>

#include "gridcorr/pde_systems.hpp"
#include "gridcorr/tensor.hpp"

/// Periodic pressure from the velocity field via a spectral Poisson solve.
namespace gridcorr::poisson {

/// Angular wavenumbers 2*pi*k/L for k in FFT order; the Nyquist entry is
/// positive for even n.
std::vector<double> wavenumbers(std::size_t n, double length);

/// psi = -2 (u_y v_x - u_x v_y) + div f, using stencil derivatives.
///
/// `velocity` is [2,H,W]; `forcing` is [2,H,W] or undefined (zero). Returns [H,W].
Tensor vorticity_source(const Tensor& velocity, const Tensor& forcing, const Tensor& kernel, const Grid& grid);

/// Same source term with spectral derivatives.
Tensor vorticity_source_spectral(const Tensor& velocity, const Tensor& forcing, const Grid& grid);

/// Spectral derivative of a [H,W] field along x (columns) or y (rows).
/// The Nyquist mode is dropped so the output stays real.
Tensor spectral_derivative(const Tensor& field, const Grid& grid, bool along_x);

/// Solves lap p = psi with mean(p) = 0; psi is [H,W] (or [1,H,W]).
///
/// Differentiable: the operator is self-adjoint, so the backward pass is the
/// same solve applied to the incoming gradient.
Tensor solve_poisson_spectral(const Tensor& psi, const Grid& grid);

/// Spectral Laplacian of a [H,W] field (no gradient tracking).
Tensor laplacian_spectral(const Tensor& field, const Grid& grid);

}  // namespace gridcorr::poisson
