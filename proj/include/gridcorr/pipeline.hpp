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
#include <memory>
#include <string>
#include <vector>

#include "gridcorr/config.hpp"
#include "gridcorr/datagen.hpp"
#include "gridcorr/metrics.hpp"
#include "gridcorr/model.hpp"
#include "gridcorr/training.hpp"

/// End-to-end operations behind the command-line tool and the C API.
namespace gridcorr::pipeline {

struct SeedFailure {
    std::uint64_t seed = 0;
    std::string error;
    int kind = 0;  // 1 stability/divergence, 2 other
};

struct GenerateResult {
    std::vector<std::string> files;
    std::string manifest;
    std::vector<SeedFailure> failures;
};

/// Worker count from GRIDCORR_THREADS (default: hardware concurrency).
unsigned worker_count();

/// One coarse trajectory for `seed`, following the configured recipe.
datagen::TrajectorySet generate_trajectory(const RunConfig& cfg, std::uint64_t seed);

/// Writes traj_<seed>.gct for each seed in [first, last] plus manifest.json.
GenerateResult generate(const RunConfig& cfg, const std::string& out_dir, std::uint64_t first, std::uint64_t last,
                        unsigned threads);

/// Loads a manifest.json (paths relative to it) or a single trajectory file.
std::vector<datagen::TrajectorySet> load_dataset(const std::string& path);

struct Bundle {
    RunConfig config;
    double dt = 0.0;
    std::unique_ptr<Model> model;
    training::AdamState adam;
    std::size_t epochs_done = 0;
};

Bundle create(const RunConfig& cfg, double dt);
void save(const Bundle& bundle, const std::string& path);
Bundle load(const std::string& path);

/// Identity of what a model and a dataset must agree on.
std::string data_key(const datagen::TrajectorySet& traj);
std::string model_key(const Bundle& bundle);

/// Trains on `data` after applying the configured noise / sparsity. Throws
/// ConfigError when the data do not match the model grid.
std::vector<training::EpochLog> train(Bundle& bundle, const std::vector<datagen::TrajectorySet>& data,
                                      const training::EpochCallback& on_epoch = {});

struct Evaluation {
    std::vector<metrics::Report> reports;
    std::vector<std::string> ids;
};

/// Rolls the model out from each trajectory's first snapshot over the
/// whole trajectory (or `steps` steps when >= 0). The model physics follow
/// each trajectory's metadata. Diverged rollouts are flagged, not thrown.
Evaluation evaluate(Bundle& bundle, const std::vector<datagen::TrajectorySet>& data, std::int64_t steps = -1,
                    bool contiguous = false);

datagen::TrajectorySet rollout(const Bundle& bundle, const Tensor& initial, std::int64_t steps);

/// Reads an initial state: first snapshot of a trajectory file or a bare
/// [C,n,n] GCT1 record.
Tensor read_initial_state(const std::string& path);

/// Time-averaged (k,E) or per-snapshot (snapshot,k,E) spectra CSV. The first
/// line is a comment with the Parseval check.
std::string spectra_csv(const datagen::TrajectorySet& traj, bool per_snapshot);

}  // namespace gridcorr::pipeline
