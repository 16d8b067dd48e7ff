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

#include "gridcorr/config.hpp"

#include <cmath>
#include <cstdio>

#include "gridcorr/serialize.hpp"

namespace gridcorr {

using nlohmann::json;

RunConfig RunConfig::defaults(SystemKind kind) {
    RunConfig c;
    c.system = SystemSpec::defaults(kind);
    c.forcing = ForcingSpec::none();
    auto& g = c.grid;
    switch (kind) {
        case SystemKind::Burgers:
            g = {100, 25, 1.0e-3, 1, 1, 0.1, 400, {8, 0.1}};
            c.correction = {2, 12, 12, 2, 2, 50};
            c.train.rollout_steps = 20;
            break;
        case SystemKind::GrayScott:
            // Explicit stability sets dt_sim; two solver steps per stored step.
            g = {128, 32, 0.25, 2, 4, 0.0, 1000, {4, 1.0}};
            c.correction = {2, 12, 20, 2, 2, 50};
            c.train.rollout_steps = 50;
            c.ablation.nn_block = true;
            break;
        case SystemKind::FitzHughNagumo:
            g = {128, 64, 2.0e-3, 1, 4, 9.0, 1375, {8, 1.0}};
            c.correction = {2, 12, 20, 2, 2, 50};
            c.train.rollout_steps = 32;
            c.ablation.nn_block = true;
            break;
        case SystemKind::NavierStokes:
            g = {256, 64, 1.75e-3, 1, 4, 40.0, 4800, {4, 1.0}};
            c.correction = {2, 25, 20, 2, 2, 128};
            c.train.rollout_steps = 32;
            c.forcing = ForcingSpec::kolmogorov();
            c.ablation.nn_block = true;
            break;
    }
    const std::size_t m = g.coarse / 2 - 2;
    c.nn = {5, m, m, 2, 2, c.correction.projection};
    return c;
}

namespace {

template <typename T>
void opt(const json& j, const char* key, T& out, const std::string& where) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(where + "." + key + ": wrong type");
    }
}

void parse_block(const json& j, BlockConfig& b, const std::string& where) {
    reject_unknown_keys(j, {"layers", "modes", "width", "projection"}, where);
    opt(j, "layers", b.layers, where);
    opt(j, "modes", b.modes, where);
    opt(j, "width", b.width, where);
    opt(j, "projection", b.projection, where);
}

json block_json(const BlockConfig& b) {
    return {{"layers", b.layers}, {"modes", b.modes}, {"width", b.width}, {"projection", b.projection}};
}

template <typename F>
auto as_config_error(const std::string& where, F&& f) {
    try {
        return f();
    } catch (const ArgumentError& e) {
        throw ConfigError(where + ": " + e.what());
    } catch (const ShapeError& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

}  // namespace

RunConfig parse_config(const json& doc) {
    if (!doc.is_object()) throw ConfigError("config: expected a JSON object");
    reject_unknown_keys(doc, {"system", "grid", "filter", "correction", "nn_block", "train", "paths"}, "config");

    // system first: it selects every other default
    json sys = doc.value("system", json::object());
    if (!sys.is_object()) throw ConfigError("system: expected an object");
    json forcing = sys.value("forcing", json());
    sys.erase("forcing");
    if (!sys.contains("kind")) throw ConfigError("system.kind is required");
    SystemKind kind;
    try {
        kind = parse_system_kind(sys.at("kind").get<std::string>());
    } catch (const std::exception& e) {
        throw ConfigError(std::string("system.kind: ") + e.what());
    }
    RunConfig c = RunConfig::defaults(kind);
    c.system = sys.get<SystemSpec>();
    if (!forcing.is_null()) c.forcing = forcing.get<ForcingSpec>();

    if (doc.contains("grid")) {
        const json& g = doc.at("grid");
        const std::string w = "grid";
        reject_unknown_keys(g, {"fine", "coarse", "dt_sim", "save_every", "time_stride", "warmup", "snapshots", "ic"}, w);
        opt(g, "fine", c.grid.fine, w);
        opt(g, "coarse", c.grid.coarse, w);
        opt(g, "dt_sim", c.grid.dt_sim, w);
        opt(g, "save_every", c.grid.save_every, w);
        opt(g, "time_stride", c.grid.time_stride, w);
        opt(g, "warmup", c.grid.warmup, w);
        opt(g, "snapshots", c.grid.snapshots, w);
        if (g.contains("ic")) {
            reject_unknown_keys(g.at("ic"), {"max_mode", "amplitude"}, "grid.ic");
            opt(g.at("ic"), "max_mode", c.grid.ic.max_mode, "grid.ic");
            opt(g.at("ic"), "amplitude", c.grid.ic.amplitude, "grid.ic");
        }
        if (!doc.contains("nn_block") || !doc.at("nn_block").contains("modes")) {
            const std::size_t m = c.grid.coarse >= 8 ? c.grid.coarse / 2 - 2 : 1;
            c.nn.modes = c.nn.width = m;
        }
    }
    if (doc.contains("filter")) {
        const json& f = doc.at("filter");
        reject_unknown_keys(f, {"init", "jitter", "free_init", "psi_derivatives"}, "filter");
        if (f.contains("init")) {
            std::vector<double> p;
            opt(f, "init", p, "filter");
            if (p.size() != stencil::kParamCount) throw ConfigError("filter.init must hold 7 values");
            stencil::FilterParams a{};
            std::copy(p.begin(), p.end(), a.begin());
            c.filter_init = a;
        }
        opt(f, "jitter", c.filter_jitter, "filter");
        if (!(c.filter_jitter >= 0.0)) throw ConfigError("filter.jitter must be >= 0");
        std::string free_init = "random";
        opt(f, "free_init", free_init, "filter");
        if (free_init != "random" && free_init != "stencil") throw ConfigError("filter.free_init must be random or stencil");
        c.free_filter_random = free_init == "random";
        std::string psi = "stencil";
        opt(f, "psi_derivatives", psi, "filter");
        if (psi != "stencil" && psi != "spectral") throw ConfigError("filter.psi_derivatives must be stencil or spectral");
        c.spectral_psi = psi == "spectral";
    }
    if (doc.contains("correction")) parse_block(doc.at("correction"), c.correction, "correction");
    if (doc.contains("nn_block")) {
        json nb = doc.at("nn_block");
        if (!nb.is_object()) throw ConfigError("nn_block: expected an object");
        opt(nb, "re_embedding", c.re_embedding, "nn_block");
        nb.erase("re_embedding");
        parse_block(nb, c.nn, "nn_block");
    }
    if (doc.contains("train")) {
        const json& t = doc.at("train");
        const std::string w = "train";
        reject_unknown_keys(t, {"lr", "batch_size", "epochs", "rollout_steps", "lr_every", "lr_gamma", "schedule", "seed",
                                "model_seed", "noise", "sparse_drop", "dtype", "ablation"},
                            w);
        opt(t, "lr", c.train.lr, w);
        opt(t, "batch_size", c.train.batch_size, w);
        opt(t, "epochs", c.train.epochs, w);
        opt(t, "rollout_steps", c.train.rollout_steps, w);
        opt(t, "lr_every", c.train.lr_every, w);
        opt(t, "lr_gamma", c.train.lr_gamma, w);
        opt(t, "seed", c.train.seed, w);
        opt(t, "model_seed", c.model_seed, w);
        opt(t, "noise", c.noise, w);
        opt(t, "sparse_drop", c.sparse_drop, w);
        std::string schedule = "steps", dtype = "float64";
        opt(t, "schedule", schedule, w);
        opt(t, "dtype", dtype, w);
        if (schedule != "steps" && schedule != "epochs") throw ConfigError("train.schedule must be steps or epochs");
        c.train.schedule_per_epoch = schedule == "epochs";
        if (dtype != "float64" && dtype != "float32") throw ConfigError("train.dtype must be float64 or float32");
        c.dtype = dtype == "float32" ? Dtype::Float32 : Dtype::Float64;
        if (t.contains("ablation")) {
            const json& a = t.at("ablation");
            const std::string wa = "train.ablation";
            reject_unknown_keys(a, {"filter_mode", "integrator", "correction_block", "nn_block"}, wa);
            std::string fm = to_string(c.ablation.filter_mode), integ = integrator::to_string(c.ablation.integrator);
            opt(a, "filter_mode", fm, wa);
            opt(a, "integrator", integ, wa);
            opt(a, "correction_block", c.ablation.correction_block, wa);
            opt(a, "nn_block", c.ablation.nn_block, wa);
            c.ablation.filter_mode = as_config_error(wa, [&] { return parse_filter_mode(fm); });
            c.ablation.integrator = as_config_error(wa, [&] { return integrator::parse_scheme(integ); });
        }
    }
    if (doc.contains("paths")) {
        const json& p = doc.at("paths");
        reject_unknown_keys(p, {"data_dir", "checkpoint", "loss_log", "metrics"}, "paths");
        opt(p, "data_dir", c.data_dir, "paths");
        opt(p, "checkpoint", c.checkpoint, "paths");
        opt(p, "loss_log", c.loss_log, "paths");
        opt(p, "metrics", c.metrics, "paths");
    }

    // cross-field validation
    const auto& g = c.grid;
    if (g.fine < 5 || g.coarse < 5) throw ConfigError("grid: fine and coarse sizes must be >= 5");
    if (g.fine % g.coarse != 0) throw ConfigError("grid: coarse size must divide the fine size");
    if (!(g.dt_sim > 0.0)) throw ConfigError("grid.dt_sim must be positive");
    if (g.save_every < 1 || g.time_stride < 1 || g.snapshots < 1) throw ConfigError("grid: strides and counts must be >= 1");
    if (!(g.warmup >= 0.0)) throw ConfigError("grid.warmup must be >= 0");
    if (g.ic.max_mode < 1 || static_cast<std::size_t>(2 * g.ic.max_mode) >= g.fine)
        throw ConfigError("grid.ic.max_mode out of range for the fine grid");
    if (!(c.noise >= 0.0)) throw ConfigError("train.noise must be >= 0");
    if (!(c.sparse_drop >= 0.0 && c.sparse_drop < 1.0)) throw ConfigError("train.sparse_drop must be in [0, 1)");
    as_config_error("train", [&] { c.train.validate(); return 0; });
    as_config_error("correction", [&] {
        c.correction.validate();
        if (c.ablation.correction_block) c.correction.validate_grid(g.coarse);
        return 0;
    });
    as_config_error("nn_block", [&] {
        c.nn.validate();
        if (c.ablation.nn_block) c.nn.validate_grid(g.coarse);
        return 0;
    });
    if (c.system.kind == SystemKind::NavierStokes && (g.coarse % 2 != 0 || g.fine % 2 != 0))
        throw ConfigError("grid: Navier-Stokes needs even grid sizes");
    return c;
}

RunConfig parse_config_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    return parse_config(doc);
}

json to_json(const RunConfig& c) {
    json sys = c.system;
    sys["forcing"] = c.forcing;
    json filter = {{"psi_derivatives", c.spectral_psi ? "spectral" : "stencil"}, {"jitter", c.filter_jitter},
                   {"free_init", c.free_filter_random ? "random" : "stencil"}};
    if (c.filter_init) filter["init"] = *c.filter_init;
    json nn = block_json(c.nn);
    nn["re_embedding"] = c.re_embedding;
    return {{"system", sys},
            {"grid",
             {{"fine", c.grid.fine},
              {"coarse", c.grid.coarse},
              {"dt_sim", c.grid.dt_sim},
              {"save_every", c.grid.save_every},
              {"time_stride", c.grid.time_stride},
              {"warmup", c.grid.warmup},
              {"snapshots", c.grid.snapshots},
              {"ic", {{"max_mode", c.grid.ic.max_mode}, {"amplitude", c.grid.ic.amplitude}}}}},
            {"filter", filter},
            {"correction", block_json(c.correction)},
            {"nn_block", nn},
            {"train",
             {{"lr", c.train.lr},
              {"batch_size", c.train.batch_size},
              {"epochs", c.train.epochs},
              {"rollout_steps", c.train.rollout_steps},
              {"lr_every", c.train.lr_every},
              {"lr_gamma", c.train.lr_gamma},
              {"schedule", c.train.schedule_per_epoch ? "epochs" : "steps"},
              {"seed", c.train.seed},
              {"model_seed", c.model_seed},
              {"noise", c.noise},
              {"sparse_drop", c.sparse_drop},
              {"dtype", c.dtype == Dtype::Float32 ? "float32" : "float64"},
              {"ablation",
               {{"filter_mode", to_string(c.ablation.filter_mode)},
                {"integrator", integrator::to_string(c.ablation.integrator)},
                {"correction_block", c.ablation.correction_block},
                {"nn_block", c.ablation.nn_block}}}}},
            {"paths",
             {{"data_dir", c.data_dir}, {"checkpoint", c.checkpoint}, {"loss_log", c.loss_log}, {"metrics", c.metrics}}}};
}

std::string config_hash(const RunConfig& cfg) { return fnv1a_hex(to_json(cfg).dump()); }

std::string grid_hash(const SystemSpec& system, std::size_t n, double dt) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", dt);
    const json j = {{"system", system}, {"n", n}, {"dt", buf}};
    return fnv1a_hex(j.dump());
}

ModelOptions model_options(const RunConfig& cfg, double dt) {
    ModelOptions o;
    o.system = cfg.system;
    o.forcing = cfg.forcing;
    o.grid = cfg.grid.coarse;
    o.dt = dt;
    o.filter_mode = cfg.ablation.filter_mode;
    o.filter_init = cfg.filter_init;
    o.filter_jitter = cfg.filter_jitter;
    o.free_filter_random = cfg.free_filter_random;
    o.scheme = cfg.ablation.integrator;
    o.correction_block = cfg.ablation.correction_block;
    o.correction = cfg.correction;
    o.nn_block = cfg.ablation.nn_block;
    o.nn = cfg.nn;
    o.re_embedding = cfg.re_embedding;
    o.spectral_psi = cfg.spectral_psi;
    o.dtype = cfg.dtype;
    o.seed = cfg.model_seed;
    return o;
}

datagen::SimulationPlan simulation_plan(const RunConfig& cfg) {
    const auto& g = cfg.grid;
    datagen::SimulationPlan p;
    p.dt = g.dt_sim;
    p.save_every = g.save_every;
    p.snapshots = (g.snapshots - 1) * static_cast<std::int64_t>(g.time_stride) + 1;
    p.warmup_steps = static_cast<std::int64_t>(std::llround(g.warmup / g.dt_sim));
    p.record_stride = g.space_stride();
    return p;
}

}  // namespace gridcorr
