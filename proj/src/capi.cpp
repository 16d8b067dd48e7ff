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

#include "gridcorr.h"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>

#include "gridcorr/pipeline.hpp"
#include "gridcorr/stencil.hpp"

struct gc_model {
    gridcorr::pipeline::Bundle bundle;
};

namespace {

thread_local std::string g_error;

template <typename F>
gc_status guarded(F&& f) {
    using namespace gridcorr;
    g_error.clear();
    try {
        f();
        return GC_OK;
    } catch (const ConfigError& e) {
        g_error = e.what();
        return GC_ERR_CONFIG;
    } catch (const DivergenceError& e) {
        g_error = e.what();
        return GC_ERR_DIVERGED;
    } catch (const StabilityError& e) {
        g_error = e.what();
        return GC_ERR_DIVERGED;
    } catch (const IoError& e) {
        g_error = e.what();
        return GC_ERR_IO;
    } catch (const ArgumentError& e) {
        g_error = e.what();
        return GC_ERR_INVALID_ARG;
    } catch (const ShapeError& e) {
        g_error = e.what();
        return GC_ERR_INVALID_ARG;
    } catch (const std::exception& e) {
        g_error = e.what();
        return GC_ERR_INTERNAL;
    } catch (...) {
        g_error = "unknown error";
        return GC_ERR_INTERNAL;
    }
}

void require(bool ok, const char* what) {
    if (!ok) throw gridcorr::ArgumentError(what);
}

void write_text(const char* path, const std::string& text) {
    std::ofstream f(path);
    if (!f) throw gridcorr::IoError(std::string("cannot write ") + path);
    f << text;
    if (!f) throw gridcorr::IoError(std::string("write failed: ") + path);
}

}  // namespace

extern "C" {

const char* gc_last_error(void) { return g_error.c_str(); }
const char* gc_version(void) { return "0.1.0"; }

gc_status gc_config_resolve(const char* config_json, char** resolved_json) {
    return guarded([&] {
        require(config_json && resolved_json, "gc_config_resolve: null argument");
        const std::string text = gridcorr::to_json(gridcorr::parse_config_text(config_json)).dump(2);
        char* out = new char[text.size() + 1];
        std::memcpy(out, text.c_str(), text.size() + 1);
        *resolved_json = out;
    });
}

void gc_string_free(char* s) { delete[] s; }

gc_status gc_generate(const char* config_json, const char* out_dir, uint64_t seed_first, uint64_t seed_last,
                      unsigned threads) {
    return guarded([&] {
        require(config_json && out_dir, "gc_generate: null argument");
        const auto cfg = gridcorr::parse_config_text(config_json);
        const unsigned n = threads == 0 ? gridcorr::pipeline::worker_count() : threads;
        const auto res = gridcorr::pipeline::generate(cfg, out_dir, seed_first, seed_last, n);
        if (!res.failures.empty()) {
            std::string msg = std::to_string(res.failures.size()) + " seed(s) failed:";
            bool numeric = true;
            for (const auto& f : res.failures) {
                msg += "\n  seed " + std::to_string(f.seed) + ": " + f.error;
                numeric = numeric && f.kind == 1;
            }
            if (numeric) throw gridcorr::DivergenceError(msg, -1);
            throw gridcorr::Error(msg);
        }
    });
}

gc_status gc_model_create(const char* config_json, double dt, gc_model** out) {
    return guarded([&] {
        require(config_json && out, "gc_model_create: null argument");
        const auto cfg = gridcorr::parse_config_text(config_json);
        auto* m = new gc_model{gridcorr::pipeline::create(cfg, dt > 0.0 ? dt : cfg.grid.coarse_dt())};
        *out = m;
    });
}

gc_status gc_model_load(const char* path, gc_model** out) {
    return guarded([&] {
        require(path && out, "gc_model_load: null argument");
        *out = new gc_model{gridcorr::pipeline::load(path)};
    });
}

gc_status gc_model_save(const gc_model* model, const char* path) {
    return guarded([&] {
        require(model && path, "gc_model_save: null argument");
        gridcorr::pipeline::save(model->bundle, path);
    });
}

void gc_model_free(gc_model* model) { delete model; }

gc_status gc_model_info(const gc_model* model, size_t* grid, size_t* channels, double* dt, size_t* parameter_count,
                        uint64_t* optimizer_step) {
    return guarded([&] {
        require(model, "gc_model_info: null model");
        const auto& b = model->bundle;
        if (grid) *grid = b.model->options().grid;
        if (channels) *channels = b.model->options().system.channels();
        if (dt) *dt = b.dt;
        if (parameter_count) *parameter_count = b.model->parameters().total_size();
        if (optimizer_step) *optimizer_step = static_cast<uint64_t>(b.adam.step);
    });
}

gc_status gc_train(gc_model* model, const char* data_path, long epochs, const char* loss_csv_path) {
    return guarded([&] {
        require(model && data_path, "gc_train: null argument");
        auto& b = model->bundle;
        const std::size_t configured = b.config.train.epochs;
        if (epochs >= 0) b.config.train.epochs = static_cast<std::size_t>(epochs);
        struct Restore {
            std::size_t& slot;
            std::size_t value;
            ~Restore() { slot = value; }
        } restore{b.config.train.epochs, configured};
        const auto data = gridcorr::pipeline::load_dataset(data_path);
        std::ofstream log;
        if (loss_csv_path) {
            log.open(loss_csv_path);
            if (!log) throw gridcorr::IoError(std::string("cannot write ") + loss_csv_path);
            log << "epoch,step,lr,loss\n";
            log.precision(17);
        }
        gridcorr::pipeline::train(b, data, [&](const gridcorr::training::EpochLog& e) {
            if (log.is_open()) log << e.epoch << ',' << e.step << ',' << e.lr << ',' << e.loss << '\n' << std::flush;
        });
    });
}

gc_status gc_evaluate(gc_model* model, const char* data_path, int contiguous_hct, const char* metrics_csv_path,
                      double* mean_rmse) {
    return guarded([&] {
        require(model && data_path, "gc_evaluate: null argument");
        const auto data = gridcorr::pipeline::load_dataset(data_path);
        const auto ev = gridcorr::pipeline::evaluate(model->bundle, data, -1, contiguous_hct != 0);
        if (metrics_csv_path) write_text(metrics_csv_path, gridcorr::metrics::reports_csv(ev.reports, ev.ids));
        if (mean_rmse) *mean_rmse = gridcorr::metrics::mean_report(ev.reports).rmse;
    });
}

gc_status gc_rollout(const gc_model* model, const double* initial, size_t initial_len, size_t steps, double* out,
                     size_t out_len) {
    return guarded([&] {
        require(model && initial && out, "gc_rollout: null argument");
        const auto& opts = model->bundle.model->options();
        const std::size_t frame = opts.system.channels() * opts.grid * opts.grid;
        require(initial_len == frame, "gc_rollout: initial state length does not match the model grid");
        require(out_len == (steps + 1) * frame, "gc_rollout: output buffer must hold (steps + 1) frames");
        const auto ic = gridcorr::Tensor::from_data({opts.system.channels(), opts.grid, opts.grid},
                                                    std::vector<double>(initial, initial + initial_len));
        const auto traj = gridcorr::pipeline::rollout(model->bundle, ic, static_cast<std::int64_t>(steps));
        std::memcpy(out, traj.values.data(), traj.values.size() * sizeof(double));
    });
}

gc_status gc_rollout_file(const gc_model* model, const char* initial_path, size_t steps, const char* out_path) {
    return guarded([&] {
        require(model && initial_path && out_path, "gc_rollout_file: null argument");
        const auto ic = gridcorr::pipeline::read_initial_state(initial_path);
        const auto traj = gridcorr::pipeline::rollout(model->bundle, ic, static_cast<std::int64_t>(steps));
        gridcorr::datagen::write_trajectory(out_path, traj);
    });
}

gc_status gc_verify_filter_params(const double params[7], const char* out_csv_path) {
    return guarded([&] {
        require(params && out_csv_path, "gc_verify_filter_params: null argument");
        gridcorr::stencil::FilterParams p{};
        std::copy(params, params + 7, p.begin());
        write_text(out_csv_path, gridcorr::stencil::to_csv(gridcorr::stencil::verify_sum_rules(p)));
    });
}

gc_status gc_verify_filter_model(const gc_model* model, const char* out_csv_path) {
    return guarded([&] {
        require(model && out_csv_path, "gc_verify_filter_model: null argument");
        const auto& m = *model->bundle.model;
        if (m.options().filter_mode == gridcorr::FilterMode::Free) {
            const auto k = m.kernel();
            write_text(out_csv_path, gridcorr::stencil::to_csv(gridcorr::stencil::kernel_moments(k.data())));
            return;
        }
        auto p = gridcorr::stencil::classical_params();
        if (m.options().filter_mode == gridcorr::FilterMode::Symmetric) {
            const auto d = m.parameters().get("filter.params").value.data();
            std::copy(d.begin(), d.end(), p.begin());
        }
        write_text(out_csv_path, gridcorr::stencil::to_csv(gridcorr::stencil::verify_sum_rules(p)));
    });
}

gc_status gc_spectra_file(const char* trajectory_path, int per_snapshot, const char* out_csv_path) {
    return guarded([&] {
        require(trajectory_path && out_csv_path, "gc_spectra_file: null argument");
        const auto traj = gridcorr::datagen::read_trajectory(trajectory_path);
        write_text(out_csv_path, gridcorr::pipeline::spectra_csv(traj, per_snapshot != 0));
    });
}

}  // extern "C"
