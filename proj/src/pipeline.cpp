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

#include "gridcorr/pipeline.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "gridcorr/gct1.hpp"
#include "gridcorr/serialize.hpp"

namespace gridcorr::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

unsigned worker_count() {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("GRIDCORR_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) n = static_cast<unsigned>(v);
    }
    return n;
}

datagen::TrajectorySet generate_trajectory(const RunConfig& cfg, std::uint64_t seed) {
    const Tensor ic = datagen::generate_ic(cfg.system, cfg.grid.fine, seed, cfg.grid.ic);
    auto fine = datagen::simulate_reference(cfg.system, cfg.forcing, ic, simulation_plan(cfg), seed);
    auto traj = datagen::downsample(fine, {1, cfg.grid.time_stride});
    traj.extra["config_hash"] = config_hash(cfg);
    traj.extra["grid_hash"] = data_key(traj);
    return traj;
}

GenerateResult generate(const RunConfig& cfg, const std::string& out_dir, std::uint64_t first, std::uint64_t last,
                        unsigned threads) {
    if (last < first) throw ArgumentError("generate: empty seed range");
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create " + out_dir + ": " + ec.message());

    const std::size_t count = static_cast<std::size_t>(last - first + 1);
    std::vector<std::string> names(count);
    std::vector<std::string> errors(count);
    std::vector<int> kinds(count, 0);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < count; k = next++) {
            const std::uint64_t seed = first + k;
            try {
                const auto traj = generate_trajectory(cfg, seed);
                names[k] = "traj_" + std::to_string(seed) + ".gct";
                datagen::write_trajectory((fs::path(out_dir) / names[k]).string(), traj);
            } catch (const StabilityError& e) {
                errors[k] = e.what();
                kinds[k] = 1;
            } catch (const DivergenceError& e) {
                errors[k] = e.what();
                kinds[k] = 1;
            } catch (const std::exception& e) {
                errors[k] = e.what();
                kinds[k] = 2;
            }
        }
    };
    const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    GenerateResult result;
    json entries = json::array(), failures = json::array();
    for (std::size_t k = 0; k < count; ++k) {
        if (kinds[k] == 0) {
            entries.push_back({{"seed", first + k}, {"file", names[k]}});
            result.files.push_back((fs::path(out_dir) / names[k]).string());
        } else {
            failures.push_back({{"seed", first + k}, {"error", errors[k]}});
            result.failures.push_back({first + k, errors[k], kinds[k]});
        }
    }
    const json manifest = {{"kind", "manifest"},
                           {"config", to_json(cfg)},
                           {"config_hash", config_hash(cfg)},
                           {"dt", cfg.grid.coarse_dt()},
                           {"grid", cfg.grid.coarse},
                           {"trajectories", entries},
                           {"failures", failures}};
    result.manifest = (fs::path(out_dir) / "manifest.json").string();
    std::ofstream f(result.manifest);
    if (!f) throw IoError("cannot write " + result.manifest);
    f << manifest.dump(2) << '\n';
    return result;
}

std::vector<datagen::TrajectorySet> load_dataset(const std::string& path) {
    if (fs::path(path).extension() != ".json") return {datagen::read_trajectory(path)};
    std::ifstream f(path);
    if (!f) throw IoError("cannot open " + path);
    json m;
    try {
        m = json::parse(f);
    } catch (const json::exception& e) {
        throw IoError(path + ": invalid manifest: " + e.what());
    }
    if (m.value("kind", "") != "manifest" || !m.contains("trajectories")) throw IoError(path + ": not a manifest");
    std::vector<datagen::TrajectorySet> out;
    const fs::path base = fs::path(path).parent_path();
    for (const auto& e : m.at("trajectories")) out.push_back(datagen::read_trajectory((base / e.at("file").get<std::string>()).string()));
    if (out.empty()) throw IoError(path + ": manifest lists no trajectories");
    return out;
}

// ---- models --------------------------------------------------------------

std::string data_key(const datagen::TrajectorySet& traj) {
    SystemSpec kind_only = SystemSpec::defaults(traj.system.kind);
    kind_only.length = traj.system.length;
    return grid_hash(kind_only, traj.size, traj.dt);
}

std::string model_key(const Bundle& b) {
    SystemSpec kind_only = SystemSpec::defaults(b.config.system.kind);
    kind_only.length = b.config.system.length;
    return grid_hash(kind_only, b.config.grid.coarse, b.dt);
}

Bundle create(const RunConfig& cfg, double dt) {
    Bundle b;
    b.config = cfg;
    b.dt = dt;
    b.model = std::make_unique<Model>(model_options(cfg, dt));
    b.adam = training::AdamState::for_parameters(b.model->parameters());
    return b;
}

void save(const Bundle& b, const std::string& path) {
    json meta = {{"config", to_json(b.config)},
                 {"config_hash", config_hash(b.config)},
                 {"grid_hash", model_key(b)},
                 {"dt", b.dt},
                 {"grid", b.config.grid.coarse},
                 {"epochs_done", b.epochs_done}};
    training::write_checkpoint(path, training::capture(b.model->parameters(), b.adam, meta));
}

Bundle load(const std::string& path) {
    const auto ckpt = training::read_checkpoint(path);
    Bundle b;
    try {
        b.config = parse_config(ckpt.meta.at("config"));
        b.dt = ckpt.meta.at("dt").get<double>();
        b.epochs_done = ckpt.meta.value("epochs_done", std::size_t{0});
        if (ckpt.meta.value("config_hash", "") != config_hash(b.config))
            throw IoError(path + ": config hash does not match the embedded config");
    } catch (const json::exception& e) {
        throw IoError(path + ": malformed checkpoint metadata: " + e.what());
    } catch (const ConfigError& e) {
        throw IoError(path + ": embedded config rejected: " + e.what());
    }
    b.model = std::make_unique<Model>(model_options(b.config, b.dt));
    training::restore(ckpt, b.model->parameters(), b.adam);
    return b;
}

namespace {

void require_compatible(const Bundle& b, const datagen::TrajectorySet& traj, std::size_t index) {
    if (data_key(traj) != model_key(b))
        throw ConfigError("trajectory " + std::to_string(index) + " (" + to_string(traj.system.kind) + ", " +
                          std::to_string(traj.size) + "^2, dt " + std::to_string(traj.dt) +
                          ") does not match the model grid (" + to_string(b.config.system.kind) + ", " +
                          std::to_string(b.config.grid.coarse) + "^2, dt " + std::to_string(b.dt) + ")");
}

}  // namespace

std::vector<training::EpochLog> train(Bundle& b, const std::vector<datagen::TrajectorySet>& data,
                                      const training::EpochCallback& on_epoch) {
    std::vector<datagen::TrajectorySet> prepared;
    for (std::size_t k = 0; k < data.size(); ++k) {
        require_compatible(b, data[k], k);
        auto t = data[k];
        if (b.config.noise > 0.0) t = datagen::add_noise(t, b.config.noise, b.config.train.seed * 7919 + k);
        if (b.config.sparse_drop > 0.0)
            t = datagen::sparsify(t, b.config.sparse_drop, b.config.train.rollout_steps, b.config.train.seed * 104729 + k);
        prepared.push_back(std::move(t));
    }
    auto log = training::train(*b.model, prepared, b.config.train, b.adam, on_epoch, b.epochs_done);
    b.epochs_done += log.size();
    return log;
}

Evaluation evaluate(Bundle& b, const std::vector<datagen::TrajectorySet>& data, std::int64_t steps, bool contiguous) {
    Evaluation out;
    NoGradGuard no_grad;
    const SystemSpec base_system = b.config.system;
    const ForcingSpec base_forcing = b.config.forcing;
    for (std::size_t k = 0; k < data.size(); ++k) {
        const auto& traj = data[k];
        require_compatible(b, traj, k);
        if (traj.segments.size() > 1) throw ArgumentError("evaluate: sparsified trajectories cannot be evaluated");
        const std::int64_t n = steps < 0 ? static_cast<std::int64_t>(traj.steps) - 1
                                         : std::min<std::int64_t>(steps, static_cast<std::int64_t>(traj.steps) - 1);
        b.model->set_physics(traj.system, traj.forcing);
        metrics::Report r;
        try {
            const auto pred = b.model->rollout(traj.snapshot(0, b.config.dtype), n);
            std::vector<double> flat;
            flat.reserve(pred.size() * traj.frame_size());
            for (const auto& p : pred) flat.insert(flat.end(), p.data().begin(), p.data().end());
            const std::size_t len = pred.size() * traj.frame_size();
            r = metrics::evaluate({flat, pred.size(), traj.frame_size()},
                                  {std::span<const double>(traj.values).subspan(0, len), pred.size(), traj.frame_size()},
                                  traj.dt, contiguous);
        } catch (const DivergenceError&) {
            r.diverged = true;
            r.rmse = r.mae = r.mnad = r.hct = std::nan("");
        }
        out.reports.push_back(std::move(r));
        out.ids.push_back(std::to_string(traj.seed));
    }
    b.model->set_physics(base_system, base_forcing);
    return out;
}

datagen::TrajectorySet rollout(const Bundle& b, const Tensor& initial, std::int64_t steps) {
    const auto& opts = b.model->options();
    if (initial.ndim() != 3 || initial.dim(0) != opts.system.channels() || initial.dim(1) != opts.grid ||
        initial.dim(2) != opts.grid)
        throw ConfigError("rollout: initial state " + shape_string(initial.shape()) + " does not match the model grid " +
                          std::to_string(opts.grid));
    NoGradGuard no_grad;
    const auto states = b.model->rollout(initial, steps);
    datagen::TrajectorySet t;
    t.size = opts.grid;
    t.dt = b.dt;
    t.system = opts.system;
    t.forcing = opts.forcing;
    for (const auto& s : states) t.push(s.data());
    t.segments = {{0, t.steps, 0}};
    t.extra["source"] = "rollout";
    t.extra["config_hash"] = config_hash(b.config);
    return t;
}

Tensor read_initial_state(const std::string& path) {
    const auto rec = gct1::read(path);
    if (rec.meta.value("kind", "") == "trajectory") return datagen::read_trajectory(path).snapshot(0);
    if (rec.dims.size() != 3 || rec.code == gct1::Code::Complex128)
        throw IoError(path + ": expected a trajectory or a real [C,n,n] state");
    return Tensor::from_data({rec.dims[0], rec.dims[1], rec.dims[2]}, rec.values);
}

std::string spectra_csv(const datagen::TrajectorySet& traj, bool per_snapshot) {
    if (traj.channels != 2) throw ShapeError("spectra: expected a two-component velocity trajectory");
    if (traj.steps == 0) throw ArgumentError("spectra: empty trajectory");
    std::vector<std::vector<metrics::SpectrumBin>> all;
    double worst = 0.0;
    for (std::size_t t = 0; t < traj.steps; ++t) {
        const auto frame = traj.frame(t);
        auto bins = metrics::energy_spectrum(frame, traj.size);
        double total = 0.0, direct = 0.0, mean_u = 0.0, mean_v = 0.0;
        const std::size_t plane = traj.size * traj.size;
        for (const auto& b : bins) total += b.energy;
        for (std::size_t k = 0; k < plane; ++k) {
            mean_u += frame[k];
            mean_v += frame[plane + k];
        }
        mean_u /= static_cast<double>(plane);
        mean_v /= static_cast<double>(plane);
        for (std::size_t k = 0; k < plane; ++k)
            direct += 0.5 * ((frame[k] - mean_u) * (frame[k] - mean_u) + (frame[plane + k] - mean_v) * (frame[plane + k] - mean_v));
        direct /= static_cast<double>(plane);
        if (direct > 0.0) worst = std::max(worst, std::abs(total - direct) / direct);
        all.push_back(std::move(bins));
    }
    std::ostringstream os;
    os.precision(12);
    os << "# parseval_max_rel_error=" << worst << (worst < 1e-10 ? " ok" : " MISMATCH") << '\n';
    if (per_snapshot) {
        os << "snapshot,k,E\n";
        for (std::size_t t = 0; t < all.size(); ++t)
            for (const auto& b : all[t]) os << t << ',' << b.k << ',' << b.energy << '\n';
    } else {
        os << "k,E\n";
        for (std::size_t i = 0; i < all.front().size(); ++i) {
            double e = 0.0;
            for (const auto& bins : all) e += bins[i].energy;
            os << all.front()[i].k << ',' << e / static_cast<double>(all.size()) << '\n';
        }
    }
    return os.str();
}

}  // namespace gridcorr::pipeline
