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

#include "gridcorr/pde_systems.hpp"

#include <cmath>

#include "gridcorr/stencil.hpp"

namespace gridcorr {

std::string to_string(SystemKind kind) {
    switch (kind) {
        case SystemKind::Burgers: return "burgers";
        case SystemKind::GrayScott: return "gray_scott";
        case SystemKind::FitzHughNagumo: return "fitzhugh_nagumo";
        case SystemKind::NavierStokes: return "navier_stokes";
    }
    return "unknown";
}

SystemKind parse_system_kind(const std::string& name) {
    if (name == "burgers") return SystemKind::Burgers;
    if (name == "gray_scott" || name == "gs") return SystemKind::GrayScott;
    if (name == "fitzhugh_nagumo" || name == "fn") return SystemKind::FitzHughNagumo;
    if (name == "navier_stokes" || name == "ns") return SystemKind::NavierStokes;
    throw ArgumentError("unknown system kind: " + name);
}

SystemSpec SystemSpec::defaults(SystemKind kind) {
    SystemSpec s;
    s.kind = kind;
    switch (kind) {
        case SystemKind::Burgers: s.length = 1.0; break;
        case SystemKind::GrayScott: s.length = 1.0; break;
        case SystemKind::FitzHughNagumo: s.length = 128.0; break;
        case SystemKind::NavierStokes: s.length = 2.0 * M_PI; break;
    }
    return s;
}

void SystemSpec::validate() const {
    auto positive = [](double v, const char* what) {
        if (!(v > 0.0)) throw ArgumentError(std::string("system: ") + what + " must be positive");
    };
    positive(length, "domain length");
    switch (kind) {
        case SystemKind::Burgers: positive(nu, "nu"); break;
        case SystemKind::GrayScott:
            positive(du, "du");
            positive(dv, "dv");
            break;
        case SystemKind::FitzHughNagumo: positive(gamma, "gamma"); break;
        case SystemKind::NavierStokes: positive(re, "re"); break;
    }
}

double SystemSpec::max_diffusivity() const {
    switch (kind) {
        case SystemKind::Burgers: return nu;
        case SystemKind::GrayScott: return std::max(du, dv);
        case SystemKind::FitzHughNagumo: return gamma;
        case SystemKind::NavierStokes: return 1.0 / re;
    }
    return 0.0;
}

// ---- forcing ---------------------------------------------------------------

ForcingSpec ForcingSpec::custom(double amplitude, double wavenumber, Trig trig, Axis axis, double drag) {
    ForcingSpec f;
    f.family = Family::Custom;
    f.amplitude = amplitude;
    f.wavenumber = wavenumber;
    f.trig = trig;
    f.axis = axis;
    f.drag = drag;
    return f;
}

ForcingSpec ForcingSpec::preset(int index) {
    using T = Trig;
    ForcingSpec f;
    switch (index) {
        case 1: f = custom(1.0, 4.0, T::Cos, Axis::Y, 0.1); break;
        case 2: f = custom(1.0, 4.0, T::Sin, Axis::Y, 0.4); break;
        case 3: f = custom(1.0, 2.0, T::Cos, Axis::Y, 0.1); break;
        case 4: f = custom(1.0, 2.0, T::Sin, Axis::Y, 0.1); break;
        case 5: f = custom(1.0, 4.0, T::Cos, Axis::Y, 0.4); break;
        case 6: f = custom(0.0, 0.0, T::Sin, Axis::Y, 0.0); break;
        default: throw ArgumentError("forcing preset must be in 1..6, got " + std::to_string(index));
    }
    f.family = static_cast<Family>(index - 1);
    return f;
}

ForcingSpec ForcingSpec::kolmogorov() { return custom(1.0, 4.0, Trig::Sin, Axis::Y, 0.1); }

std::string ForcingSpec::family_name() const {
    if (family == Family::Custom) return "custom";
    return "f" + std::to_string(static_cast<int>(family) + 1);
}

ForcingSpec::Family parse_forcing_family(const std::string& name) {
    if (name == "custom") return ForcingSpec::Family::Custom;
    if (name.size() == 2 && name[0] == 'f' && name[1] >= '1' && name[1] <= '6')
        return static_cast<ForcingSpec::Family>(name[1] - '1');
    throw ArgumentError("unknown forcing family: " + name);
}

Tensor evaluate_forcing(const ForcingSpec& spec, const Grid& grid, const Tensor& state) {
    if (state.ndim() != 3 || state.dim(0) != 2 || state.dim(1) != grid.n || state.dim(2) != grid.n)
        throw ShapeError("evaluate_forcing: state " + shape_string(state.shape()) + " does not match a 2-channel " +
                         std::to_string(grid.n) + "^2 grid");
    const std::size_t n = grid.n;
    std::vector<double> base(2 * n * n, 0.0);
    if (spec.amplitude != 0.0) {
        // Sinusoid along `axis`, pushing along the other direction.
        const std::size_t target = spec.axis == ForcingSpec::Axis::Y ? 0 : 1;
        const double h = grid.spacing();
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                const double s = (spec.axis == ForcingSpec::Axis::Y ? static_cast<double>(i) : static_cast<double>(j)) * h;
                const double arg = spec.wavenumber * s;
                const double v = spec.trig == ForcingSpec::Trig::Sin ? std::sin(arg) : std::cos(arg);
                base[(target * n + i) * n + j] = spec.amplitude * v;
            }
    }
    Tensor force = Tensor::from_data({2, n, n}, std::move(base), state.dtype());
    if (spec.drag != 0.0) force = axpy(-spec.drag, state, force);
    return force;
}

// ---- right-hand sides -------------------------------------------------------------

Tensor channel(const Tensor& state, std::size_t c) {
    const Tensor s = slice_channels(state, c, 1);
    return s.reshape({state.dim(1), state.dim(2)});
}

namespace {

void require_state(const char* op, const Tensor& state, const Tensor& corrected, const Grid& grid) {
    if (state.ndim() != 3 || state.dim(0) != 2)
        throw ShapeError(std::string(op) + ": expected a 2-channel state, got " + shape_string(state.shape()));
    if (corrected.shape() != state.shape())
        throw ShapeError(std::string(op) + ": corrected state " + shape_string(corrected.shape()) + " vs state " +
                         shape_string(state.shape()));
    if (state.dim(1) != grid.n || state.dim(2) != grid.n)
        throw ShapeError(std::string(op) + ": state " + shape_string(state.shape()) + " does not match grid " +
                         std::to_string(grid.n));
}

void require_kind(const char* op, const SystemSpec& spec, SystemKind kind) {
    if (spec.kind != kind)
        throw ArgumentError(std::string(op) + ": system is " + to_string(spec.kind) + ", expected " + to_string(kind));
}

Tensor advection(const Tensor& state, const stencil::Gradient& grad) {
    return add(mul_map(channel(state, 0), grad.x), mul_map(channel(state, 1), grad.y));
}

}  // namespace

Tensor rhs_burgers(const Tensor& state, const Tensor& corrected, const Tensor& kernel, const SystemSpec& spec,
                   const Grid& grid) {
    require_kind("rhs_burgers", spec, SystemKind::Burgers);
    require_state("rhs_burgers", state, corrected, grid);
    const double h = grid.spacing();
    const auto grad = stencil::gradient(corrected, kernel, h, h);
    const Tensor lap = stencil::laplacian_from(grad, kernel, h, h);
    return sub(scale(lap, spec.nu), advection(state, grad));
}

Tensor rhs_gray_scott(const Tensor& state, const Tensor& corrected, const Tensor& kernel, const SystemSpec& spec,
                      const Grid& grid) {
    require_kind("rhs_gray_scott", spec, SystemKind::GrayScott);
    require_state("rhs_gray_scott", state, corrected, grid);
    const double h = grid.spacing();
    const Tensor lap = stencil::laplacian(corrected, kernel, h, h);
    const Tensor u = channel(state, 0), v = channel(state, 1);
    const Tensor uvv = mul(u, mul(v, v));
    // Du lap u - u v^2 + F (1 - u)
    const Tensor du = add(sub(scale(channel(lap, 0), spec.du), uvv), add(scale(u, -spec.feed), spec.feed));
    // Dv lap v + u v^2 - (F + k) v
    const Tensor dv = add(add(scale(channel(lap, 1), spec.dv), uvv), scale(v, -(spec.feed + spec.kill)));
    return concat_channels({du, dv});
}

Tensor rhs_fitzhugh_nagumo(const Tensor& state, const Tensor& corrected, const Tensor& kernel,
                           const SystemSpec& spec, const Grid& grid) {
    require_kind("rhs_fitzhugh_nagumo", spec, SystemKind::FitzHughNagumo);
    require_state("rhs_fitzhugh_nagumo", state, corrected, grid);
    const double h = grid.spacing();
    const Tensor diffusion = scale(stencil::laplacian(corrected, kernel, h, h), spec.gamma);
    const Tensor u = channel(state, 0), v = channel(state, 1);
    // u - u^3 - v + alpha
    const Tensor mu = add(sub(sub(u, mul(u, mul(u, u))), v), spec.alpha);
    // beta (u - v)
    const Tensor mv = scale(sub(u, v), spec.beta);
    return add(diffusion, concat_channels({mu, mv}));
}

Tensor rhs_navier_stokes(const Tensor& state, const Tensor& corrected, const Tensor& pressure, const Tensor& kernel,
                         const SystemSpec& spec, const Grid& grid, const Tensor& forcing, const Tensor& re_map) {
    require_kind("rhs_navier_stokes", spec, SystemKind::NavierStokes);
    require_state("rhs_navier_stokes", state, corrected, grid);
    if (!pressure.defined()) throw ArgumentError("rhs_navier_stokes: pressure field is required");
    const Tensor p = pressure.ndim() == 3 ? pressure.reshape({grid.n, grid.n}) : pressure;
    if (p.shape() != Shape{grid.n, grid.n})
        throw ShapeError("rhs_navier_stokes: pressure " + shape_string(pressure.shape()) + " does not match grid");
    const double h = grid.spacing();
    const auto grad = stencil::gradient(corrected, kernel, h, h);
    const Tensor lap = stencil::laplacian_from(grad, kernel, h, h);
    const Tensor diffusion =
        re_map.defined() ? mul_map(add(re_map, 1.0 / spec.re), lap) : scale(lap, 1.0 / spec.re);
    const auto grad_p = stencil::gradient(p, kernel, h, h);
    Tensor out = sub(diffusion, advection(state, grad));
    out = sub(out, concat_channels({grad_p.x, grad_p.y}));
    if (forcing.defined()) out = add(out, forcing);
    return out;
}

Tensor rhs_reaction_advection(const Tensor& state, const Tensor& corrected, const Tensor& kernel,
                              const SystemSpec& spec, const Grid& grid) {
    switch (spec.kind) {
        case SystemKind::Burgers: return rhs_burgers(state, corrected, kernel, spec, grid);
        case SystemKind::GrayScott: return rhs_gray_scott(state, corrected, kernel, spec, grid);
        case SystemKind::FitzHughNagumo: return rhs_fitzhugh_nagumo(state, corrected, kernel, spec, grid);
        case SystemKind::NavierStokes: break;
    }
    throw ArgumentError("rhs_reaction_advection: navier_stokes needs a pressure field");
}

Tensor re_embedding_map(const Tensor& vec_a, const Tensor& vec_b, double re) {
    if (!(re > 0.0)) throw ArgumentError("re_embedding_map: Reynolds number must be positive");
    return scale(outer(vec_a, vec_b), 1.0 / re);
}

}  // namespace gridcorr
