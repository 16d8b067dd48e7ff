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

#include "gridcorr/model.hpp"

#include <random>

#include "gridcorr/poisson.hpp"
#include "gridcorr/stencil.hpp"

namespace gridcorr {

std::string to_string(FilterMode mode) {
    switch (mode) {
        case FilterMode::Symmetric: return "symmetric";
        case FilterMode::Free: return "free";
        case FilterMode::FixedFd: return "fixed_fd";
    }
    return "unknown";
}

FilterMode parse_filter_mode(const std::string& name) {
    if (name == "symmetric") return FilterMode::Symmetric;
    if (name == "free") return FilterMode::Free;
    if (name == "fixed_fd") return FilterMode::FixedFd;
    throw ArgumentError("unknown filter mode: " + name);
}

std::size_t nn_input_channels(SystemKind kind) {
    // state, derivatives of both channels; Navier-Stokes adds p, grad p, f, Re map
    return kind == SystemKind::NavierStokes ? 12 : 6;
}

void ModelOptions::validate() const {
    system.validate();
    if (grid < 5) throw ArgumentError("model: grid must be at least 5 points per axis");
    if (!(dt > 0.0)) throw ArgumentError("model: dt must be positive");
    if (correction_block) {
        correction.validate();
        correction.validate_grid(grid);
    }
    if (nn_block) {
        nn.validate();
        nn.validate_grid(grid);
    }
    if (system.kind == SystemKind::NavierStokes && grid % 2 != 0)
        throw ArgumentError("model: Navier-Stokes needs an even grid for the pressure solve");
}

Model::Model(ModelOptions options) : opts_(std::move(options)) {
    const std::size_t channels = opts_.system.channels();
    opts_.correction.in_channels = opts_.correction.out_channels = channels;
    opts_.correction.output_bias = false;
    opts_.nn.in_channels = nn_input_channels(opts_.system.kind);
    opts_.nn.out_channels = channels;
    opts_.validate();

    std::mt19937_64 rng(opts_.seed);
    const auto classical = stencil::classical_params();
    auto init = opts_.filter_init.value_or(classical);
    if (!opts_.filter_init && opts_.filter_jitter > 0.0) {
        std::uniform_real_distribution<double> eps(-opts_.filter_jitter, opts_.filter_jitter);
        for (double& a : init) a += eps(rng);
    }
    fixed_kernel_ = stencil::build_kernel(classical);
    switch (opts_.filter_mode) {
        case FilterMode::Symmetric:
        case FilterMode::FixedFd:
            filter_ = params_.add("filter.params", {stencil::kParamCount},
                                  std::vector<double>(init.begin(), init.end()), opts_.dtype)
                          .value;
            break;
        case FilterMode::Free: {
            std::vector<double> k(stencil::kSize * stencil::kSize);
            if (opts_.free_filter_random) {
                std::uniform_real_distribution<double> d(-0.2, 0.2);  // 1/sqrt(fan_in)
                for (double& v : k) v = d(rng);
            } else {
                const Tensor k0 = stencil::build_kernel(init);
                std::copy(k0.data().begin(), k0.data().end(), k.begin());
            }
            filter_ = params_.add("filter.kernel", {stencil::kSize, stencil::kSize}, std::move(k), opts_.dtype).value;
            break;
        }
    }
    if (opts_.correction_block)
        correction_ = SpectralBlock("correction", opts_.correction, params_, rng, opts_.dtype, opts_.zero_init_heads);
    if (opts_.nn_block) nn_ = SpectralBlock("nn", opts_.nn, params_, rng, opts_.dtype, opts_.zero_init_heads);
    if (opts_.system.kind == SystemKind::NavierStokes && opts_.re_embedding) {
        re_a_ = params_.add("re.vec_a", {opts_.grid}, std::vector<double>(opts_.grid, 0.0), opts_.dtype).value;
        re_b_ = params_.add("re.vec_b", {opts_.grid}, std::vector<double>(opts_.grid, 1.0), opts_.dtype).value;
    }
}

void Model::set_physics(const SystemSpec& system, const ForcingSpec& forcing) {
    if (system.kind != opts_.system.kind) throw ArgumentError("set_physics: cannot change the system kind");
    system.validate();
    opts_.system = system;
    opts_.forcing = forcing;
}

Tensor Model::kernel() const {
    switch (opts_.filter_mode) {
        case FilterMode::Symmetric: return stencil::build_kernel(filter_);
        case FilterMode::Free: return filter_;
        case FilterMode::FixedFd: return fixed_kernel_;
    }
    return fixed_kernel_;
}

Tensor Model::corrected(const Tensor& u) const {
    return opts_.correction_block ? correction_block_forward(correction_, u) : u;
}

Tensor Model::re_map() const {
    if (!re_a_.defined()) return {};
    return re_embedding_map(re_a_, re_b_, opts_.system.re);
}

Tensor Model::pressure(const Tensor& u, const Tensor& u_hat) const {
    const Grid g = grid();
    const Tensor force = evaluate_forcing(opts_.forcing, g, u);
    const Tensor psi = opts_.spectral_psi ? poisson::vorticity_source_spectral(u_hat, force, g)
                                          : poisson::vorticity_source(u_hat, force, kernel(), g);
    return poisson::solve_poisson_spectral(psi, g);
}

Tensor Model::rhs_with_kernel(const Tensor& u, const Tensor& k) const {
    const Grid g = grid();
    const Tensor u_hat = corrected(u);
    if (opts_.system.kind != SystemKind::NavierStokes)
        return rhs_reaction_advection(u, u_hat, k, opts_.system, g);
    const Tensor force = evaluate_forcing(opts_.forcing, g, u);
    const Tensor psi = opts_.spectral_psi ? poisson::vorticity_source_spectral(u_hat, force, g)
                                          : poisson::vorticity_source(u_hat, force, k, g);
    const Tensor p = poisson::solve_poisson_spectral(psi, g);
    return rhs_navier_stokes(u, u_hat, p, k, opts_.system, g, force, re_map());
}

Tensor Model::rhs(const Tensor& u, double) const { return rhs_with_kernel(u, kernel()); }

Tensor Model::nn_input_stack(const Tensor& u, double) const {
    const Grid g = grid();
    const double h = g.spacing();
    const Tensor k = kernel();
    const Tensor u_hat = corrected(u);
    const auto grad = stencil::gradient(u_hat, k, h, h);
    const Tensor du = concat_channels({channel(grad.x, 0), channel(grad.y, 0), channel(grad.x, 1), channel(grad.y, 1)});
    if (opts_.system.kind != SystemKind::NavierStokes) return concat_channels({u, du});

    const Tensor force = evaluate_forcing(opts_.forcing, g, u);
    const Tensor psi = opts_.spectral_psi ? poisson::vorticity_source_spectral(u_hat, force, g)
                                          : poisson::vorticity_source(u_hat, force, k, g);
    const Tensor p = poisson::solve_poisson_spectral(psi, g);
    const auto gp = stencil::gradient(p, k, h, h);
    Tensor re = re_map();
    re = re.defined() ? add(re, 1.0 / opts_.system.re) : Tensor::full({g.n, g.n}, 1.0 / opts_.system.re, u.dtype());
    return concat_channels({u, p, du, gp.x, gp.y, force, re});
}

Tensor Model::step(const Tensor& u, double t) const {
    if (u.ndim() != 3 || u.dim(0) != opts_.system.channels() || u.dim(1) != opts_.grid || u.dim(2) != opts_.grid)
        throw ShapeError("model: state " + shape_string(u.shape()) + " does not match the model grid " +
                         std::to_string(opts_.grid));
    const Tensor k = kernel();
    const integrator::Rhs h = [this, &k](const Tensor& s, double) { return rhs_with_kernel(s, k); };
    Tensor next = integrator::step(opts_.scheme, h, u, t, opts_.dt);
    if (opts_.nn_block) next = add(next, nn_block_forward(nn_, nn_input_stack(u, t)));
    return next;
}

std::vector<Tensor> Model::rollout(const Tensor& u0, std::int64_t steps, double t0) const {
    return integrator::rollout([this](const Tensor& u, double t) { return step(u, t); }, u0, steps, t0, opts_.dt,
                               opts_.divergence_threshold);
}

}  // namespace gridcorr
