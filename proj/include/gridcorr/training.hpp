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
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "gridcorr/datagen.hpp"
#include "gridcorr/model.hpp"

/// Autoregressive rollout training.
namespace gridcorr::training {

struct TrainConfig {
    double lr = 5.0e-3;
    std::size_t batch_size = 16;
    std::size_t epochs = 500;
    std::size_t rollout_steps = 20;
    std::int64_t lr_every = 200;
    double lr_gamma = 0.96;
    bool schedule_per_epoch = false;  // count decay intervals in epochs instead of optimizer steps
    std::uint64_t seed = 0;

    void validate() const;
};

/// One training example: initial state plus the following labels.
struct Sample {
    Tensor initial;
    std::vector<Tensor> labels;
};

struct WindowRef {
    std::size_t trajectory = 0;
    std::size_t start = 0;  // stored-snapshot index of the initial state
};

/// Non-overlapping windows of rollout+1 snapshots (stride = rollout), never
/// crossing a segment boundary.
std::vector<WindowRef> make_windows(const std::vector<datagen::TrajectorySet>& data, std::size_t rollout);

Sample make_sample(const datagen::TrajectorySet& traj, std::size_t start, std::size_t rollout, Dtype dtype);

/// Mean squared error over all predicted steps, channels and points.
Tensor sample_loss(const Model& model, const Sample& sample);

/// Mean of sample_loss over the batch.
Tensor rollout_loss(const Model& model, std::span<const Sample> batch);

struct AdamState {
    std::vector<std::vector<double>> m;
    std::vector<std::vector<double>> v;
    std::int64_t step = 0;

    static AdamState for_parameters(const ParameterSet& params);
};

/// Bias-corrected Adam step using the gradients stored on the parameters.
void adam_update(ParameterSet& params, AdamState& state, double lr, double beta1 = 0.9, double beta2 = 0.999,
                 double eps = 1.0e-8);

/// lr * gamma^floor(step / every).
double step_decay(double lr, std::int64_t step, std::int64_t every = 200, double gamma = 0.96);

struct EpochLog {
    std::size_t epoch = 0;
    std::int64_t step = 0;  // optimizer steps taken after this epoch
    double lr = 0.0;
    double loss = 0.0;  // mean sample loss over the epoch
};

using EpochCallback = std::function<void(const EpochLog&)>;

/// Runs cfg.epochs epochs numbered from first_epoch + 1; windows are
/// reshuffled each epoch from cfg.seed and the epoch index. Resume by passing
/// the saved optimizer state and the count of epochs already run.
std::vector<EpochLog> train(Model& model, const std::vector<datagen::TrajectorySet>& data, const TrainConfig& cfg,
                            AdamState& state, const EpochCallback& on_epoch = {}, std::size_t first_epoch = 0);

std::string loss_log_csv(const std::vector<EpochLog>& log);

// ---- checkpoints ---------------------------------------------------------

struct NamedArray {
    std::string name;
    Shape shape;
    std::vector<double> values;
};

struct Checkpoint {
    std::vector<NamedArray> parameters;
    AdamState adam;
    nlohmann::json meta = nlohmann::json::object();  // caller-defined fields (config, hashes, ...)
};

Checkpoint capture(const ParameterSet& params, const AdamState& state, nlohmann::json meta);
/// Copies values into `params`; names and shapes must match exactly.
void restore(const Checkpoint& ckpt, ParameterSet& params, AdamState& state);

void write_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::string& path);

}  // namespace gridcorr::training
