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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gridcorr/integrator.hpp"
#include "gridcorr/pde_systems.hpp"
#include "gridcorr/spectral_correction.hpp"
#include "gridcorr/stencil.hpp"
#include "gridcorr/tensor.hpp"

namespace gridcorr {

enum class FilterMode { Symmetric, Free, FixedFd };

std::string to_string(FilterMode mode);
FilterMode parse_filter_mode(const std::string& name);

struct ModelOptions {
    SystemSpec system;
    ForcingSpec forcing;  // used by Navier-Stokes only
    std::size_t grid = 25;
    double dt = 1.0e-3;  // coarse time step

    FilterMode filter_mode = FilterMode::Symmetric;
    std::optional<stencil::FilterParams> filter_init;  // classical stencil when empty
    double filter_jitter = 1.0e-3;  // uniform perturbation of the default init
    bool free_filter_random = true;  // free kernel: standard random init, else the stencil init
    integrator::Scheme scheme = integrator::Scheme::Rk4;
    bool correction_block = true;
    BlockConfig correction;  // channel counts are filled in by the model
    bool nn_block = false;
    BlockConfig nn;
    bool re_embedding = true;  // Navier-Stokes only
    bool spectral_psi = false;  // spectral derivatives inside the Poisson source
    bool zero_init_heads = true;

    Dtype dtype = Dtype::Float64;
    std::uint64_t seed = 0;
    double divergence_threshold = integrator::kDivergenceThreshold;

    void validate() const;
};

/// Number of NN-block input channels for a system.
std::size_t nn_input_channels(SystemKind kind);

/// Learnable coarse solver: corrected-state derivatives inside the known
/// equation, RK4 (or Euler) time marching, and an optional additive NN block.
///
/// Parameter names: filter.params (or filter.kernel for the free filter),
/// correction.*, nn.*, re.vec_a, re.vec_b.
class Model {
  public:
    explicit Model(ModelOptions options);
    Model(const Model&) = delete;
    Model& operator=(const Model&) = delete;

    const ModelOptions& options() const { return opts_; }
    ParameterSet& parameters() { return params_; }
    const ParameterSet& parameters() const { return params_; }
    Grid grid() const { return {opts_.grid, opts_.system.length}; }

    /// Evaluation-time change of physical parameters (generalization tests).
    void set_physics(const SystemSpec& system, const ForcingSpec& forcing);

    /// Current 5x5 derivative kernel.
    Tensor kernel() const;
    /// u + correction(u), or u when the correction block is off.
    Tensor corrected(const Tensor& u) const;
    /// Pressure from the corrected state (Navier-Stokes).
    Tensor pressure(const Tensor& u, const Tensor& u_hat) const;
    /// Right-hand side H(u, t) of the learnable PDE block.
    Tensor rhs(const Tensor& u, double t) const;
    Tensor nn_input_stack(const Tensor& u, double t) const;
    /// u_{k+1} = integrator(u_k) + NN(stack(u_k)).
    Tensor step(const Tensor& u, double t) const;
    std::vector<Tensor> rollout(const Tensor& u0, std::int64_t steps, double t0 = 0.0) const;

  private:
    Tensor re_map() const;
    Tensor rhs_with_kernel(const Tensor& u, const Tensor& kernel) const;

    ModelOptions opts_;
    ParameterSet params_;
    Tensor filter_;  // [7] params or [5,5] kernel
    Tensor fixed_kernel_;
    SpectralBlock correction_;
    SpectralBlock nn_;
    Tensor re_a_, re_b_;
};

}  // namespace gridcorr
