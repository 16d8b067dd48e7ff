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
#include <random>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "gridcorr/pde_systems.hpp"
#include "gridcorr/tensor.hpp"

/// Reference trajectories: initial conditions, high-resolution solvers,
/// downsampling and the noise / sparsity perturbations.
namespace gridcorr::datagen {

/// Contiguous run of stored snapshots. `origin` is the snapshot index in the
/// unperturbed trajectory.
struct Segment {
    std::size_t start = 0;
    std::size_t length = 0;
    std::size_t origin = 0;
};

/// Time-major stack [n_t, C, n, n] plus the metadata needed to reproduce it.
struct TrajectorySet {
    std::size_t steps = 0;
    std::size_t channels = 2;
    std::size_t size = 0;
    std::vector<double> values;
    double dt = 0.0;  // snapshot interval
    SystemSpec system;
    ForcingSpec forcing;
    std::uint64_t seed = 0;
    std::vector<std::string> channel_names{"u", "v"};
    /// Stored snapshots split into contiguous runs; one run unless sparsified.
    std::vector<Segment> segments;
    nlohmann::json extra = nlohmann::json::object();

    std::size_t frame_size() const { return channels * size * size; }
    std::span<const double> frame(std::size_t t) const;
    Tensor snapshot(std::size_t t, Dtype dtype = Dtype::Float64) const;
    void push(std::span<const double> frame);
    /// Throws IoError if the layout or metadata is inconsistent.
    void validate() const;
};

struct IcOptions {
    int max_mode = 8;
    double amplitude = 1.0;
};

/// Smooth random periodic field with |kx|, |ky| <= max_mode (zero mean),
/// scaled so that max |f| == 1.
std::vector<double> band_limited_field(std::size_t n, int max_mode, std::mt19937_64& rng);

/// Per-system initial state on an n x n grid, deterministic in `seed`.
Tensor generate_ic(const SystemSpec& system, std::size_t n, std::uint64_t seed, const IcOptions& options = {});

/// Largest stable dt: 0.5 dx^2 / (4 D_max), and 0.5 dx / max_speed when advective.
double stability_limit(const SystemSpec& system, std::size_t n, double max_speed);

struct SimulationPlan {
    double dt = 1.0e-3;
    std::int64_t snapshots = 100;
    std::int64_t save_every = 1;    // solver steps between stored snapshots
    std::int64_t warmup_steps = 0;  // solver steps discarded before the first snapshot
    std::size_t record_stride = 1;  // spatial stride applied while recording
};

/// Fourth-order FD + RK4 reference for Burgers / Gray-Scott / FitzHugh-Nagumo,
/// dealiased pseudo-spectral RK4 in vorticity form for Navier-Stokes.
TrajectorySet simulate_reference(const SystemSpec& system, const ForcingSpec& forcing, const Tensor& ic,
                                 const SimulationPlan& plan, std::uint64_t seed = 0);

struct DownsampleSpec {
    std::size_t space_stride = 1;
    std::size_t time_stride = 1;
};

/// Strided point sampling; dt is multiplied by the time stride.
TrajectorySet downsample(const TrajectorySet& traj, const DownsampleSpec& spec);

/// x + scale * std_c(x) * N(0, 1), with std taken per channel.
TrajectorySet add_noise(const TrajectorySet& traj, double scale, std::uint64_t seed);

/// Splits the trajectory into blocks of `rollout_len` snapshots and deletes
/// round(drop_fraction * blocks) of them at random. Each kept block keeps the
/// following snapshot too, so a full rollout window survives.
TrajectorySet sparsify(const TrajectorySet& traj, double drop_fraction, std::size_t rollout_len,
                       std::uint64_t seed);

void write_trajectory(const std::string& path, const TrajectorySet& traj);
TrajectorySet read_trajectory(const std::string& path);

}  // namespace gridcorr::datagen
