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

// Command-line front end. Every command goes through the C API.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gridcorr.h"

namespace {

int exit_code(gc_status s) {
    switch (s) {
        case GC_OK: return 0;
        case GC_ERR_CONFIG:
        case GC_ERR_INVALID_ARG: return 2;
        case GC_ERR_DIVERGED: return 3;
        case GC_ERR_IO: return 4;
        default: return 1;
    }
}

int report(gc_status s, const char* what) {
    if (s != GC_OK) std::cerr << "gridcorr " << what << ": " << gc_last_error() << '\n';
    return exit_code(s);
}

struct ModelHandle {
    gc_model* ptr = nullptr;
    ~ModelHandle() { gc_model_free(ptr); }
};

// Reads --config (if any) and applies --system; returns the JSON text or
// nullopt after printing an error.
std::optional<std::string> build_config(const std::string& path, const std::string& system) {
    nlohmann::json doc = nlohmann::json::object();
    if (!path.empty()) {
        std::ifstream f(path);
        if (!f) {
            std::cerr << "gridcorr: cannot open config " << path << '\n';
            return std::nullopt;
        }
        try {
            doc = nlohmann::json::parse(f);
        } catch (const nlohmann::json::exception& e) {
            std::cerr << "gridcorr: " << path << ": invalid JSON: " << e.what() << '\n';
            return std::nullopt;
        }
    }
    if (!system.empty()) {
        if (!doc.is_object()) doc = nlohmann::json::object();
        auto& sys = doc["system"];
        if (sys.is_object() && sys.contains("kind") && sys["kind"] != system) {
            std::cerr << "gridcorr: --system " << system << " conflicts with the config system " << sys["kind"] << '\n';
            return std::nullopt;
        }
        sys["kind"] = system;
    }
    return doc.dump();
}

bool parse_seeds(const std::string& text, std::uint64_t& first, std::uint64_t& last) {
    const auto dots = text.find("..");
    try {
        if (dots == std::string::npos) {
            first = last = std::stoull(text);
        } else {
            first = std::stoull(text.substr(0, dots));
            last = std::stoull(text.substr(dots + 2));
        }
    } catch (const std::exception&) {
        return false;
    }
    return first <= last;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gridcorr: learnable coarse-grid PDE solver"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(gc_version()));

    // gen
    std::string gen_system, gen_config, gen_out = "data", gen_seeds = "1..5";
    unsigned gen_threads = 0;
    auto* gen = app.add_subcommand("gen", "Generate reference trajectories and a manifest");
    gen->add_option("--system", gen_system, "burgers | gray_scott | fitzhugh_nagumo | navier_stokes");
    gen->add_option("--config", gen_config, "Run configuration (JSON)")->check(CLI::ExistingFile);
    gen->add_option("--out", gen_out, "Output directory")->capture_default_str();
    gen->add_option("--seeds", gen_seeds, "Seed or inclusive range a..b")->capture_default_str();
    gen->add_option("--threads", gen_threads, "Worker count (0: GRIDCORR_THREADS or all cores)");

    // train
    std::string tr_config, tr_system, tr_data, tr_ckpt = "model.gct", tr_log;
    long tr_epochs = -1;
    bool tr_resume = false;
    auto* train = app.add_subcommand("train", "Train a model on a manifest or trajectory file");
    train->add_option("--config", tr_config, "Run configuration (JSON)")->check(CLI::ExistingFile);
    train->add_option("--system", tr_system, "System kind when no config is given");
    train->add_option("--data", tr_data, "manifest.json or trajectory file")->required();
    train->add_option("--ckpt", tr_ckpt, "Checkpoint to write")->capture_default_str();
    train->add_option("--loss-log", tr_log, "Loss CSV (default: <ckpt>.loss.csv)");
    train->add_option("--epochs", tr_epochs, "Override the configured epoch count");
    train->add_flag("--resume", tr_resume, "Continue from --ckpt, keeping the optimizer state");

    // eval
    std::string ev_ckpt, ev_data, ev_metrics = "metrics.csv";
    bool ev_contiguous = false;
    auto* eval = app.add_subcommand("eval", "Roll out on test trajectories and write metrics");
    eval->add_option("--ckpt", ev_ckpt, "Checkpoint")->required()->check(CLI::ExistingFile);
    eval->add_option("--data", ev_data, "manifest.json or trajectory file")->required();
    eval->add_option("--metrics", ev_metrics, "Metrics CSV")->capture_default_str();
    eval->add_flag("--contiguous", ev_contiguous, "HCT as time to the first PCC drop");

    // rollout
    std::string ro_ckpt, ro_ic, ro_out = "rollout.gct";
    std::size_t ro_steps = 0;
    auto* roll = app.add_subcommand("rollout", "Autoregressive rollout from an initial state");
    roll->add_option("--ckpt", ro_ckpt, "Checkpoint")->required()->check(CLI::ExistingFile);
    roll->add_option("--ic", ro_ic, "Trajectory (first snapshot) or [C,n,n] GCT1 file")->required();
    roll->add_option("--steps", ro_steps, "Number of steps")->required();
    roll->add_option("--out", ro_out, "Output trajectory")->capture_default_str();

    // verify-filter
    std::string vf_ckpt, vf_out = "/dev/stdout";
    std::vector<double> vf_params;
    auto* verify = app.add_subcommand("verify-filter", "Moment and constraint table of a derivative filter");
    auto* vf_ck = verify->add_option("--ckpt", vf_ckpt, "Checkpoint")->check(CLI::ExistingFile);
    auto* vf_pa = verify->add_option("--params", vf_params, "Seven filter parameters a1..a7")->expected(7)->delimiter(',');
    vf_ck->excludes(vf_pa);
    verify->add_option("--out", vf_out, "CSV output")->capture_default_str();

    // spectra
    std::string sp_traj, sp_out = "spectra.csv";
    bool sp_per = false;
    auto* spectra = app.add_subcommand("spectra", "Energy spectra of a velocity trajectory");
    spectra->add_option("--traj", sp_traj, "Trajectory file")->required();
    spectra->add_option("--out", sp_out, "CSV output")->capture_default_str();
    spectra->add_flag("--per-snapshot", sp_per, "One spectrum per snapshot instead of the time average");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    if (gen->parsed()) {
        if (gen_system.empty() && gen_config.empty()) {
            std::cerr << "gridcorr gen: --system or --config is required\n";
            return 2;
        }
        const auto cfg = build_config(gen_config, gen_system);
        if (!cfg) return 2;
        std::uint64_t first = 0, last = 0;
        if (!parse_seeds(gen_seeds, first, last)) {
            std::cerr << "gridcorr gen: bad --seeds " << gen_seeds << '\n';
            return 2;
        }
        return report(gc_generate(cfg->c_str(), gen_out.c_str(), first, last, gen_threads), "gen");
    }

    if (train->parsed()) {
        ModelHandle m;
        gc_status s;
        if (tr_resume) {
            s = gc_model_load(tr_ckpt.c_str(), &m.ptr);
        } else {
            if (tr_config.empty() && tr_system.empty()) {
                std::cerr << "gridcorr train: --config or --system is required\n";
                return 2;
            }
            const auto cfg = build_config(tr_config, tr_system);
            if (!cfg) return 2;
            s = gc_model_create(cfg->c_str(), 0.0, &m.ptr);
        }
        if (s != GC_OK) return report(s, "train");
        const std::string log = tr_log.empty() ? tr_ckpt + ".loss.csv" : tr_log;
        s = gc_train(m.ptr, tr_data.c_str(), tr_epochs, log.c_str());
        if (s != GC_OK) return report(s, "train");
        return report(gc_model_save(m.ptr, tr_ckpt.c_str()), "train");
    }

    if (eval->parsed()) {
        ModelHandle m;
        gc_status s = gc_model_load(ev_ckpt.c_str(), &m.ptr);
        if (s != GC_OK) return report(s, "eval");
        double rmse = 0.0;
        s = gc_evaluate(m.ptr, ev_data.c_str(), ev_contiguous ? 1 : 0, ev_metrics.c_str(), &rmse);
        if (s == GC_OK) std::cout << "mean rmse " << rmse << '\n';
        return report(s, "eval");
    }

    if (roll->parsed()) {
        ModelHandle m;
        gc_status s = gc_model_load(ro_ckpt.c_str(), &m.ptr);
        if (s != GC_OK) return report(s, "rollout");
        return report(gc_rollout_file(m.ptr, ro_ic.c_str(), ro_steps, ro_out.c_str()), "rollout");
    }

    if (verify->parsed()) {
        if (!vf_ckpt.empty()) {
            ModelHandle m;
            gc_status s = gc_model_load(vf_ckpt.c_str(), &m.ptr);
            if (s != GC_OK) return report(s, "verify-filter");
            return report(gc_verify_filter_model(m.ptr, vf_out.c_str()), "verify-filter");
        }
        if (vf_params.size() != 7) {
            std::cerr << "gridcorr verify-filter: --ckpt or --params a1,...,a7 is required\n";
            return 2;
        }
        return report(gc_verify_filter_params(vf_params.data(), vf_out.c_str()), "verify-filter");
    }

    if (spectra->parsed()) return report(gc_spectra_file(sp_traj.c_str(), sp_per ? 1 : 0, sp_out.c_str()), "spectra");
    return 2;
}
