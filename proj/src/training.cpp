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

#include "gridcorr/training.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "gridcorr/gct1.hpp"

namespace gridcorr::training {

void TrainConfig::validate() const {
    if (!(lr > 0.0)) throw ArgumentError("train: lr must be positive");
    if (batch_size < 1) throw ArgumentError("train: batch size must be >= 1");
    if (rollout_steps < 1) throw ArgumentError("train: rollout steps must be >= 1");
    if (lr_every < 1) throw ArgumentError("train: lr decay interval must be >= 1");
    if (!(lr_gamma > 0.0)) throw ArgumentError("train: lr gamma must be positive");
}

std::vector<WindowRef> make_windows(const std::vector<datagen::TrajectorySet>& data, std::size_t rollout) {
    if (rollout < 1) throw ArgumentError("make_windows: rollout must be >= 1");
    std::vector<WindowRef> out;
    for (std::size_t k = 0; k < data.size(); ++k)
        for (const auto& seg : data[k].segments)
            for (std::size_t s = 0; s + rollout < seg.length; s += rollout) out.push_back({k, seg.start + s});
    return out;
}

Sample make_sample(const datagen::TrajectorySet& traj, std::size_t start, std::size_t rollout, Dtype dtype) {
    if (start + rollout >= traj.steps) throw ArgumentError("make_sample: window runs past the trajectory");
    Sample s;
    s.initial = traj.snapshot(start, dtype);
    for (std::size_t k = 1; k <= rollout; ++k) s.labels.push_back(traj.snapshot(start + k, dtype));
    return s;
}

Tensor sample_loss(const Model& model, const Sample& sample) {
    if (sample.labels.empty()) throw ArgumentError("sample_loss: empty label window");
    const auto pred = model.rollout(sample.initial, static_cast<std::int64_t>(sample.labels.size()));
    Tensor total;
    for (std::size_t k = 0; k < sample.labels.size(); ++k) {
        const Tensor e = mse(pred[k + 1], sample.labels[k]);
        total = total.defined() ? add(total, e) : e;
    }
    return scale(total, 1.0 / static_cast<double>(sample.labels.size()));
}

Tensor rollout_loss(const Model& model, std::span<const Sample> batch) {
    if (batch.empty()) throw ArgumentError("rollout_loss: empty batch");
    const std::size_t len = batch.front().labels.size();
    Tensor total;
    for (const auto& s : batch) {
        if (s.labels.size() != len) throw ArgumentError("rollout_loss: label windows differ in length");
        const Tensor l = sample_loss(model, s);
        total = total.defined() ? add(total, l) : l;
    }
    return scale(total, 1.0 / static_cast<double>(batch.size()));
}

AdamState AdamState::for_parameters(const ParameterSet& params) {
    AdamState s;
    for (const auto& p : params.items()) {
        s.m.emplace_back(p.value.numel(), 0.0);
        s.v.emplace_back(p.value.numel(), 0.0);
    }
    return s;
}

void adam_update(ParameterSet& params, AdamState& state, double lr, double beta1, double beta2, double eps) {
    auto& items = params.items();
    if (state.m.size() != items.size() || state.v.size() != items.size())
        throw ShapeError("adam_update: optimizer state does not match the parameter set");
    ++state.step;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
    for (std::size_t k = 0; k < items.size(); ++k) {
        Tensor& value = items[k].value;
        const auto g = value.grad();
        auto& m = state.m[k];
        auto& v = state.v[k];
        if (m.size() != value.numel() || v.size() != value.numel())
            throw ShapeError("adam_update: moment shape mismatch for " + items[k].name);
        auto x = value.mutable_data();
        const bool has_grad = g.size() == x.size();
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double gi = has_grad ? g[i] : 0.0;
            m[i] = beta1 * m[i] + (1.0 - beta1) * gi;
            v[i] = beta2 * v[i] + (1.0 - beta2) * gi * gi;
            x[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
            if (value.dtype() == Dtype::Float32) x[i] = static_cast<double>(static_cast<float>(x[i]));
        }
    }
}

double step_decay(double lr, std::int64_t step, std::int64_t every, double gamma) {
    if (step < 0 || every < 1) throw ArgumentError("step_decay: step must be >= 0 and every >= 1");
    return lr * std::pow(gamma, static_cast<double>(step / every));
}

std::vector<EpochLog> train(Model& model, const std::vector<datagen::TrajectorySet>& data, const TrainConfig& cfg,
                            AdamState& state, const EpochCallback& on_epoch, std::size_t first_epoch) {
    cfg.validate();
    ParameterSet& params = model.parameters();
    if (state.m.empty() && state.step == 0) state = AdamState::for_parameters(params);
    const auto windows = make_windows(data, cfg.rollout_steps);
    if (cfg.epochs > 0 && windows.empty())
        throw ArgumentError("train: no rollout window of " + std::to_string(cfg.rollout_steps) + " steps fits the data");
    const Dtype dtype = model.options().dtype;

    std::vector<EpochLog> log;
    for (std::size_t epoch = first_epoch; epoch < first_epoch + cfg.epochs; ++epoch) {
        std::vector<std::size_t> order(windows.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::mt19937_64 rng(cfg.seed * 1000003ULL + epoch);
        std::shuffle(order.begin(), order.end(), rng);

        double epoch_loss = 0.0;
        double lr = 0.0;
        for (std::size_t b = 0; b < order.size(); b += cfg.batch_size) {
            const std::size_t count = std::min(cfg.batch_size, order.size() - b);
            params.zero_grad();
            for (std::size_t i = b; i < b + count; ++i) {
                const WindowRef& w = windows[order[i]];
                const Sample s = make_sample(data[w.trajectory], w.start, cfg.rollout_steps, dtype);
                Tensor loss;
                try {
                    loss = sample_loss(model, s);
                } catch (const DivergenceError& e) {
                    throw DivergenceError("training diverged in epoch " + std::to_string(epoch + 1) + " at optimizer step " +
                                              std::to_string(state.step) + ": " + e.what(),
                                          e.step(), e.stage());
                }
                epoch_loss += loss.item();
                backward(scale(loss, 1.0 / static_cast<double>(count)));
            }
            const std::int64_t clock = cfg.schedule_per_epoch ? static_cast<std::int64_t>(epoch) : state.step;
            lr = step_decay(cfg.lr, clock, cfg.lr_every, cfg.lr_gamma);
            adam_update(params, state, lr);
        }
        EpochLog entry{epoch + 1, state.step, lr, epoch_loss / static_cast<double>(order.size())};
        log.push_back(entry);
        if (on_epoch) on_epoch(entry);
    }
    return log;
}

std::string loss_log_csv(const std::vector<EpochLog>& log) {
    std::ostringstream os;
    os.precision(17);
    os << "epoch,step,lr,loss\n";
    for (const auto& e : log) os << e.epoch << ',' << e.step << ',' << e.lr << ',' << e.loss << '\n';
    return os.str();
}

// ---- checkpoints ---------------------------------------------------------

Checkpoint capture(const ParameterSet& params, const AdamState& state, nlohmann::json meta) {
    Checkpoint c;
    for (const auto& p : params.items()) {
        const auto d = p.value.data();
        c.parameters.push_back({p.name, p.value.shape(), std::vector<double>(d.begin(), d.end())});
    }
    c.adam = state.m.empty() ? AdamState::for_parameters(params) : state;
    c.meta = std::move(meta);
    return c;
}

void restore(const Checkpoint& ckpt, ParameterSet& params, AdamState& state) {
    auto& items = params.items();
    if (ckpt.parameters.size() != items.size())
        throw IoError("checkpoint holds " + std::to_string(ckpt.parameters.size()) + " parameters, model has " +
                      std::to_string(items.size()));
    for (std::size_t k = 0; k < items.size(); ++k) {
        const auto& src = ckpt.parameters[k];
        if (src.name != items[k].name || src.shape != items[k].value.shape())
            throw IoError("checkpoint parameter " + src.name + shape_string(src.shape) + " does not match model " +
                          items[k].name + shape_string(items[k].value.shape()));
        auto dst = items[k].value.mutable_data();
        std::copy(src.values.begin(), src.values.end(), dst.begin());
    }
    state = ckpt.adam;
}

void write_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    std::size_t total = 0;
    for (const auto& p : ckpt.parameters) total += p.values.size();
    gct1::Record rec;
    rec.code = gct1::Code::Float64;
    rec.dims = {3, total};
    rec.values.reserve(3 * total);
    nlohmann::json entries = nlohmann::json::array();
    std::size_t offset = 0;
    for (const auto& p : ckpt.parameters) {
        rec.values.insert(rec.values.end(), p.values.begin(), p.values.end());
        entries.push_back({{"name", p.name}, {"offset", offset}, {"shape", p.shape}});
        offset += p.values.size();
    }
    if (ckpt.adam.m.size() != ckpt.parameters.size()) throw IoError("checkpoint: optimizer state does not match");
    for (const auto& m : ckpt.adam.m) rec.values.insert(rec.values.end(), m.begin(), m.end());
    for (const auto& v : ckpt.adam.v) rec.values.insert(rec.values.end(), v.begin(), v.end());
    rec.meta = ckpt.meta;
    rec.meta["kind"] = "checkpoint";
    rec.meta["parameters"] = entries;
    rec.meta["step"] = ckpt.adam.step;
    gct1::write(path, rec);
}

Checkpoint read_checkpoint(const std::string& path) {
    const auto rec = gct1::read(path);
    if (rec.dims.size() != 2 || rec.dims[0] != 3) throw IoError(path + ": not a checkpoint container");
    const std::size_t total = rec.dims[1];
    Checkpoint c;
    try {
        if (rec.meta.value("kind", "") != "checkpoint") throw IoError(path + ": not a checkpoint file");
        for (const auto& e : rec.meta.at("parameters")) {
            NamedArray a;
            a.name = e.at("name").get<std::string>();
            a.shape = e.at("shape").get<Shape>();
            const auto offset = e.at("offset").get<std::size_t>();
            const std::size_t n = shape_numel(a.shape);
            if (offset + n > total) throw IoError(path + ": parameter " + a.name + " runs past the payload");
            a.values.assign(rec.values.begin() + static_cast<std::ptrdiff_t>(offset),
                            rec.values.begin() + static_cast<std::ptrdiff_t>(offset + n));
            auto m0 = rec.values.begin() + static_cast<std::ptrdiff_t>(total + offset);
            auto v0 = rec.values.begin() + static_cast<std::ptrdiff_t>(2 * total + offset);
            c.adam.m.emplace_back(m0, m0 + static_cast<std::ptrdiff_t>(n));
            c.adam.v.emplace_back(v0, v0 + static_cast<std::ptrdiff_t>(n));
            c.parameters.push_back(std::move(a));
        }
        c.adam.step = rec.meta.at("step").get<std::int64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path + ": malformed checkpoint metadata: " + e.what());
    }
    c.meta = rec.meta;
    c.meta.erase("parameters");
    c.meta.erase("kind");
    c.meta.erase("step");
    return c;
}

}  // namespace gridcorr::training
