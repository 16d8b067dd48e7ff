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

#include <cstddef>
#include <string>

#include "gridcorr/tensor.hpp"

/// Right-hand sides of the supported systems on square periodic grids.
///
/// Every RHS takes the raw state u (pointwise terms) and a corrected state
/// used only inside derivative terms. Pass the same tensor twice for a plain
/// finite-difference evaluation. States are [2,H,W] tensors holding (u, v).
namespace gridcorr {

enum class SystemKind { Burgers, GrayScott, FitzHughNagumo, NavierStokes };

std::string to_string(SystemKind kind);
/// Accepts burgers, gray_scott (gs), fitzhugh_nagumo (fn), navier_stokes (ns).
SystemKind parse_system_kind(const std::string& name);

struct SystemSpec {
    SystemKind kind = SystemKind::Burgers;
    double nu = 0.002;  // Burgers viscosity
    double du = 2.0e-5;  // Gray-Scott
    double dv = 5.0e-6;
    double feed = 0.04;
    double kill = 0.06;
    double gamma = 1.0;  // FitzHugh-Nagumo diffusion
    double alpha = 0.01;
    double beta = 0.25;
    double re = 1000.0;  // Navier-Stokes
    double length = 1.0;  // square domain [0, length)^2

    static SystemSpec defaults(SystemKind kind);
    void validate() const;
    std::size_t channels() const { return 2; }
    /// Largest diffusion coefficient, used by stability bounds.
    double max_diffusivity() const;
};

struct Grid {
    std::size_t n = 0;
    double length = 1.0;
    double spacing() const { return length / static_cast<double>(n); }
};

/// Body force f(x, y, u) = A trig(k s) n - drag u.
///
/// The sinusoid varies along `axis` (y by default) and pushes perpendicular
/// to it, so the default is a shear force along x.
struct ForcingSpec {
    enum class Family { F1, F2, F3, F4, F5, F6, Custom };
    enum class Trig { Sin, Cos };
    enum class Axis { X, Y };

    Family family = Family::F6;
    double amplitude = 0.0;
    double wavenumber = 0.0;
    Trig trig = Trig::Sin;
    Axis axis = Axis::Y;
    double drag = 0.0;

    /// f1..f6 (index 1..6).
    static ForcingSpec preset(int index);
    /// sin(4y) n_x - 0.1 u, the training force of the Kolmogorov setup.
    static ForcingSpec kolmogorov();
    static ForcingSpec custom(double amplitude, double wavenumber, Trig trig, Axis axis, double drag);
    static ForcingSpec none() { return preset(6); }

    bool is_zero() const { return amplitude == 0.0 && drag == 0.0; }
    std::string family_name() const;
};

ForcingSpec::Family parse_forcing_family(const std::string& name);

/// [2,H,W] force field; differentiable in `state` through the drag term.
Tensor evaluate_forcing(const ForcingSpec& spec, const Grid& grid, const Tensor& state);

/// Channel c of a [C,H,W] tensor as a [H,W] map.
Tensor channel(const Tensor& state, std::size_t c);

Tensor rhs_burgers(const Tensor& state, const Tensor& corrected, const Tensor& kernel, const SystemSpec& spec,
                   const Grid& grid);
Tensor rhs_gray_scott(const Tensor& state, const Tensor& corrected, const Tensor& kernel, const SystemSpec& spec,
                      const Grid& grid);
Tensor rhs_fitzhugh_nagumo(const Tensor& state, const Tensor& corrected, const Tensor& kernel,
                           const SystemSpec& spec, const Grid& grid);

/// -(u.grad)u + (1/Re + re_map) lap u - grad p + f.
///
/// `pressure` is [H,W] and required. `forcing` ([2,H,W]) and `re_map`
/// ([H,W]) may be undefined tensors, meaning zero.
Tensor rhs_navier_stokes(const Tensor& state, const Tensor& corrected, const Tensor& pressure, const Tensor& kernel,
                         const SystemSpec& spec, const Grid& grid, const Tensor& forcing, const Tensor& re_map);

/// Dispatches on spec.kind for the three pressure-free systems.
Tensor rhs_reaction_advection(const Tensor& state, const Tensor& corrected, const Tensor& kernel,
                              const SystemSpec& spec, const Grid& grid);

/// (1/Re) * outer(vec_a, vec_b).
Tensor re_embedding_map(const Tensor& vec_a, const Tensor& vec_b, double re);

}  // namespace gridcorr
