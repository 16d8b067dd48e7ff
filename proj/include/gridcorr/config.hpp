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

#include <json.hpp>

#include "gridcorr/datagen.hpp"
#include "gridcorr/model.hpp"
#include "gridcorr/stencil.hpp"
#include "gridcorr/training.hpp"

/// Run configuration: one JSON document with sections system, grid, filter,
/// correction, nn_block, train and paths. Every field has a per-system
/// default and unknown keys are rejected.
namespace gridcorr {

struct GridConfig {
    std::size_t fine = 100;  // reference grid
    std::size_t coarse = 25;  // training grid
    double dt_sim = 1.0e-3;
    std::int64_t save_every = 1;
    std::size_t time_stride = 1;
    double warmup = 0.1;  // seconds discarded before the first snapshot
    std::int64_t snapshots = 400;  // coarse snapshots per trajectory
    datagen::IcOptions ic;

    std::size_t space_stride() const { return fine / coarse; }
    double coarse_dt() const { return (dt_sim * static_cast<double>(save_every)) * static_cast<double>(time_stride); }
};

struct AblationConfig {
    FilterMode filter_mode = FilterMode::Symmetric;
    integrator::Scheme integrator = integrator::Scheme::Rk4;
    bool correction_block = true;
    bool nn_block = false;
};

struct RunConfig {
    SystemSpec system;
    ForcingSpec forcing;
    GridConfig grid;
    std::optional<stencil::FilterParams> filter_init;  // classical stencil when empty
    double filter_jitter = 1.0e-3;
    bool free_filter_random = true;
    bool spectral_psi = false;
    BlockConfig correction;
    BlockConfig nn;
    bool re_embedding = true;
    training::TrainConfig train;
    AblationConfig ablation;
    double noise = 0.0;  // label noise fraction applied at training time
    double sparse_drop = 0.0;  // fraction of rollout windows removed at training time
    Dtype dtype = Dtype::Float64;
    std::uint64_t model_seed = 0;
    std::string data_dir = "data";
    std::string checkpoint = "model.gct";
    std::string loss_log = "loss.csv";
    std::string metrics = "metrics.csv";

    static RunConfig defaults(SystemKind kind);
};

/// Parses and validates a configuration; throws ConfigError.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig parse_config_text(const std::string& text);
nlohmann::json to_json(const RunConfig& cfg);

/// Hash of the canonical resolved configuration.
std::string config_hash(const RunConfig& cfg);
/// Hash of what a model and a dataset must agree on: system, coarse grid, dt.
std::string grid_hash(const SystemSpec& system, std::size_t n, double dt);

ModelOptions model_options(const RunConfig& cfg, double dt);

/// Reference-simulation plan (fine grid) for the configured recipe.
datagen::SimulationPlan simulation_plan(const RunConfig& cfg);

}  // namespace gridcorr
