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

// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "gridcorr/integrator.hpp"
#include "gridcorr/metrics.hpp"
#include "gridcorr/model.hpp"
#include "gridcorr/pipeline.hpp"
#include "gridcorr/poisson.hpp"
#include "gridcorr/stencil.hpp"
#include "test_util.hpp"

using namespace gridcorr;
using tu::kTwoPi;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

int failures = 0;

void report(int id, const std::function<Outcome()>& check) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = check();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failures;
    std::printf("criterion %d: %s  %s  [%.1fs]\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
    std::fflush(stdout);
}

Outcome stencil_structure() {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    double worst_zero = 0.0, worst = 0.0;
    for (int t = 0; t < 1000; ++t) {
        stencil::FilterParams a;
        for (double& x : a) x = d(rng);
        const Tensor k = stencil::build_kernel(a);
        for (int m = 0; m <= 2; ++m) worst_zero = std::max(worst_zero, std::abs(stencil::moment(k.data(), 0, m)));
        worst = std::max(worst, std::abs(stencil::moment(k.data(), 0, 3) + 12.0 * a[6]));
        worst = std::max(worst, std::abs(stencil::moment(k.data(), 3, 0) + 16.0 * a[2] + 2.0 * a[5]));
    }
    return {worst_zero == 0.0 && worst <= 1e-14, fmt("max |M00,M01,M02| %.1e, max identity residual %.1e", worst_zero, worst)};
}

Outcome fourth_order() {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> d(-0.5, 0.5);
    double worst = 1e9;
    for (int t = 0; t < 5; ++t) {
        const double a3 = 0.05 + 0.1 * (d(rng) + 0.5);
        stencil::FilterParams a{d(rng), d(rng), a3, d(rng), d(rng), -8.0 * a3, 0.0};
        const double gain = -4.0 * a[2] - 2.0 * a[5];
        for (double& x : a) x /= gain;
        const Tensor k = stencil::build_kernel(a);
        struct Case {
            std::function<double(double, double)> f, df;
            bool along_x;
        };
        const std::vector<Case> cases{
            {[](double x, double) { return std::sin(x); }, [](double x, double) { return std::cos(x); }, true},
            {[](double x, double) { return std::cos(2 * x); }, [](double x, double) { return -2 * std::sin(2 * x); }, true},
            {[](double, double y) { return std::sin(3 * y); }, [](double, double y) { return 3 * std::cos(3 * y); }, false},
            {[](double, double y) { return std::cos(y); }, [](double, double y) { return -std::sin(y); }, false},
        };
        for (const auto& c : cases) {
            std::vector<double> err;
            for (std::size_t n : {32, 64, 128}) {
                const double h = kTwoPi / static_cast<double>(n);
                const Tensor f = tu::field(n, kTwoPi, c.f);
                const Tensor df = c.along_x ? stencil::derivative_x(f, k, h) : stencil::derivative_y(f, k, h);
                err.push_back(tu::max_abs_diff(df.data(), tu::sample(n, kTwoPi, c.df)));
            }
            worst = std::min({worst, std::log2(err[0] / err[1]), std::log2(err[1] / err[2])});
        }
    }
    return {worst >= 3.8, fmt("min observed order %.3f", worst)};
}

Outcome rk4_order() {
    const integrator::Rhs rhs = [](const Tensor& u, double) { return scale(u, -1.0); };
    const Tensor one = Tensor::from_data({1}, {1.0});
    const double v = integrator::rk4_step(rhs, one, 0.0, 0.1).item();
    auto err = [&](int steps) {
        Tensor u = one;
        for (int s = 0; s < steps; ++s) u = integrator::rk4_step(rhs, u, s / double(steps), 1.0 / steps);
        return std::abs(u.item() - std::exp(-1.0));
    };
    const double ratio = err(10) / err(20);
    const bool ok = std::abs(v - 0.90483750) <= 1e-12 && ratio >= 14 && ratio <= 18;
    return {ok, fmt("one-step %.10f, error ratio %.3f", v, ratio)};
}

Outcome poisson_solver() {
    const std::size_t n = 64;
    const Grid g{n, kTwoPi};
    double worst = 0.0, worst_mean = 0.0;
    const std::vector<std::pair<std::function<double(double, double)>, std::function<double(double, double)>>> cases{
        {[](double x, double y) { return -std::cos(x) - std::cos(y); }, [](double x, double y) { return std::cos(x) + std::cos(y); }},
        {[](double x, double) { return -4 * std::sin(2 * x); }, [](double x, double) { return std::sin(2 * x); }},
    };
    for (const auto& [src, sol] : cases) {
        const Tensor p = poisson::solve_poisson_spectral(tu::field(n, kTwoPi, src), g);
        const auto exact = tu::sample(n, kTwoPi, sol);
        double num = 0, den = 0, mean = 0;
        for (std::size_t k = 0; k < exact.size(); ++k) {
            num += (p.data()[k] - exact[k]) * (p.data()[k] - exact[k]);
            den += exact[k] * exact[k];
            mean += p.data()[k];
        }
        worst = std::max(worst, std::sqrt(num / den));
        worst_mean = std::max(worst_mean, std::abs(mean) / static_cast<double>(n * n));
    }
    return {worst < 1e-12 && worst_mean <= 1e-12, fmt("max rel L2 %.2e, max |mean| %.2e", worst, worst_mean)};
}

BlockConfig tiny_block() {
    BlockConfig c;
    c.layers = 1;
    c.modes = 3;
    c.width = 3;
    c.projection = 4;
    return c;
}

ModelOptions ns_options() {
    ModelOptions o;
    o.system = SystemSpec::defaults(SystemKind::NavierStokes);
    o.system.length = kTwoPi;
    o.forcing = ForcingSpec::kolmogorov();
    o.grid = 16;
    o.dt = 0.01;
    o.correction = tiny_block();
    o.nn = tiny_block();
    o.nn_block = true;
    o.seed = 12;
    return o;
}

Tensor random_state(std::size_t n, std::uint64_t seed, double amp) {
    return Tensor::from_data({2, n, n}, tu::random_values(2 * n * n, seed, -amp, amp));
}

Outcome gradient_integrity() {
    auto o = ns_options();
    o.zero_init_heads = false;
    Model m(o);
    std::uint64_t seed = 100;
    for (auto& p : m.parameters().items()) {
        const auto r = tu::random_values(p.value.numel(), seed++, -0.05, 0.05);
        auto d = p.value.mutable_data();
        for (std::size_t k = 0; k < d.size(); ++k) d[k] += r[k];
    }
    auto a = m.parameters().get("re.vec_a").value.mutable_data();
    const auto ra = tu::random_values(a.size(), 99, -1.0, 1.0);
    std::copy(ra.begin(), ra.end(), a.begin());
    const Tensor u0 = random_state(16, 6, 0.5);
    const std::vector<Tensor> targets{random_state(16, 7, 0.5), random_state(16, 8, 0.5), random_state(16, 9, 0.5)};
    auto loss = [&] {
        const auto s = m.rollout(u0, 3);
        Tensor total = mse(s[1], targets[0]);
        for (std::size_t k = 1; k < 3; ++k) total = add(total, mse(s[k + 1], targets[k]));
        return scale(total, 1.0 / 3.0);
    };
    double worst = 0.0;
    std::string name;
    for (auto& p : m.parameters().items()) {
        const double e = tu::gradient_error(p.value, loss, 1e-5, 16);
        if (e >= worst) worst = e, name = p.name;
    }
    return {worst < 1e-4, fmt("%zu groups, max relative error %.2e (%s)", m.parameters().items().size(), worst, name.c_str())};
}

Outcome zero_init() {
    bool exact = true;
    for (SystemKind kind : {SystemKind::Burgers, SystemKind::NavierStokes}) {
        ModelOptions o = ns_options();
        if (kind == SystemKind::Burgers) {
            o.system = SystemSpec::defaults(SystemKind::Burgers);
            o.forcing = ForcingSpec::none();
            o.grid = 25;
        }
        Model full(o);
        o.correction_block = false;
        o.nn_block = false;
        Model pde(o);
        const Tensor u0 = random_state(o.grid, 4, 0.3);
        const auto x = full.rollout(u0, 10), y = pde.rollout(u0, 10);
        for (std::size_t k = 0; k < x.size(); ++k)
            exact = exact && std::equal(x[k].data().begin(), x[k].data().end(), y[k].data().begin(), y[k].data().end());
    }

    const std::size_t n = 25;
    ModelOptions o;
    o.system = SystemSpec::defaults(SystemKind::Burgers);
    o.system.length = kTwoPi;
    o.system.nu = 0.05;
    o.grid = n;
    o.dt = 0.01;
    o.correction = tiny_block();
    o.nn = tiny_block();
    o.nn_block = true;
    o.filter_init = stencil::classical_params();
    Model m(o);
    const auto init = tu::random_values(2 * n * n, 5, -0.5, 0.5);
    const auto states = m.rollout(Tensor::from_data({2, n, n}, init), 10);

    const double h = kTwoPi / n;
    auto d = [&](const std::vector<double>& f, std::size_t c, bool along_x) {
        std::vector<double> out(n * n);
        auto at = [&](std::size_t i, std::size_t j, long s) {
            const std::size_t ii = along_x ? i : (i + n + s) % n, jj = along_x ? (j + n + s) % n : j;
            return f[c * n * n + ii * n + jj];
        };
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                out[i * n + j] = (at(i, j, -2) / 12 - 2 * at(i, j, -1) / 3 + 2 * at(i, j, 1) / 3 - at(i, j, 2) / 12) / h;
        return out;
    };
    auto rhs = [&](const std::vector<double>& f) {
        std::vector<double> out(2 * n * n);
        for (std::size_t c = 0; c < 2; ++c) {
            const auto dx = d(f, c, true), dy = d(f, c, false);
            const auto dxx = d(dx, 0, true), dyy = d(dy, 0, false);
            for (std::size_t k = 0; k < n * n; ++k)
                out[c * n * n + k] = o.system.nu * (dxx[k] + dyy[k]) - (f[k] * dx[k] + f[n * n + k] * dy[k]);
        }
        return out;
    };
    auto axpy = [](double a, const std::vector<double>& x, std::vector<double> y) {
        for (std::size_t k = 0; k < y.size(); ++k) y[k] += a * x[k];
        return y;
    };
    std::vector<double> u = init;
    double worst = 0.0;
    for (int s = 1; s <= 10; ++s) {
        const auto k1 = rhs(u), k2 = rhs(axpy(o.dt / 2, k1, u)), k3 = rhs(axpy(o.dt / 2, k2, u)), k4 = rhs(axpy(o.dt, k3, u));
        for (std::size_t k = 0; k < u.size(); ++k) u[k] += o.dt / 6 * (k1[k] + 2 * k2[k] + 2 * k3[k] + k4[k]);
        worst = std::max(worst, tu::max_abs_diff(states[s].data(), u));
    }
    return {exact && worst < 1e-10, fmt("bit-exact %s, max diff vs reference FD %.2e", exact ? "yes" : "no", worst)};
}

Outcome metrics_checks() {
    const std::vector<double> pcc{0.9, 0.85, 0.7, 0.9};
    const double h = metrics::hct_from_pcc(pcc, 1.0);
    const auto truth = tu::random_values(500, 2), pred = tu::random_values(500, 3);
    double worst = 0.0;
    for (const auto& [a, b] : {std::pair{3.0, -7.0}, std::pair{1e-3, 5.0}, std::pair{-2.5, 0.25}}) {
        std::vector<double> ta(truth), pa(pred);
        for (double& v : ta) v = a * v + b;
        for (double& v : pa) v = a * v + b;
        worst = std::max(worst, std::abs(metrics::mnad(pa, ta) - metrics::mnad(pred, truth)));
    }
    const std::size_t n = 32;
    const auto vel = tu::field2(n, kTwoPi, [](double, double y) { return std::sin(4 * y); }, [](double, double) { return 0.0; });
    double total = 0.0, shell4 = 0.0;
    for (const auto& b : metrics::energy_spectrum(vel.data(), n)) {
        total += b.energy;
        if (b.k == 4) shell4 = b.energy;
    }
    const double frac = shell4 / total;
    const bool ok = h == 3.0 && worst <= 1e-12 && std::abs(frac - 1.0) <= 1e-14;
    return {ok, fmt("HCT %.17g, MNAD affine drift %.1e, shell-4 fraction %.15f", h, worst, frac)};
}

struct SmokeRun {
    double first_loss = 0.0, last_loss = 0.0;
    double untrained = 0.0, trained = 0.0;
    bool diverged = false;
    double seconds = 0.0;
};

RunConfig smoke_config() {
    RunConfig cfg = RunConfig::defaults(SystemKind::Burgers);
    cfg.grid.snapshots = 100;
    cfg.train.rollout_steps = 10;
    cfg.train.epochs = 50;
    cfg.train.batch_size = 1;
    return cfg;
}

struct SmokeData {
    std::vector<datagen::TrajectorySet> train, test;
};

const SmokeData& smoke_data() {
    static const SmokeData data = [] {
        const RunConfig cfg = smoke_config();
        return SmokeData{{pipeline::generate_trajectory(cfg, 1)},
                         {pipeline::generate_trajectory(cfg, 2), pipeline::generate_trajectory(cfg, 3)}};
    }();
    return data;
}

SmokeRun smoke(const char* label, const std::function<void(RunConfig&)>& tweak) {
    const auto t0 = std::chrono::steady_clock::now();
    RunConfig cfg = smoke_config();
    tweak(cfg);
    const auto& data = smoke_data();
    SmokeRun r;
    auto b = pipeline::create(cfg, data.train[0].dt);
    const auto before = pipeline::evaluate(b, data.test);
    const auto log = pipeline::train(b, data.train);
    const auto after = pipeline::evaluate(b, data.test);
    r.first_loss = log.front().loss;
    r.last_loss = log.back().loss;
    r.untrained = metrics::mean_report(before.reports).rmse;
    r.trained = metrics::mean_report(after.reports).rmse;
    for (const auto& e : log) r.diverged = r.diverged || !std::isfinite(e.loss);
    for (const auto& rep : after.reports) r.diverged = r.diverged || rep.diverged;
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("  smoke %-22s loss %.3e -> %.3e, test rmse %.4e -> %.4e (%.0fs)\n", label, r.first_loss, r.last_loss,
                r.untrained, r.trained, r.seconds);
    return r;
}

std::optional<SmokeRun> full_run;

SmokeRun& full_model() {
    if (!full_run) full_run = smoke("full", [](RunConfig&) {});
    return *full_run;
}

Outcome training_smoke() {
    const auto& r = full_model();
    const double lr = r.last_loss / r.first_loss, rr = r.trained / r.untrained;
    return {lr < 0.5 && rr < 0.5 && r.seconds < 600,
            fmt("loss ratio %.3f, test rmse ratio %.3f, %.0fs", lr, rr, r.seconds)};
}

Outcome ablation_order() {
    const double full = full_model().trained;
    struct Variant {
        const char* name;
        std::function<void(RunConfig&)> tweak;
    };
    const std::vector<Variant> variants{
        {"free filter", [](RunConfig& c) { c.ablation.filter_mode = FilterMode::Free; }},
        {"fixed FD", [](RunConfig& c) { c.ablation.filter_mode = FilterMode::FixedFd; }},
        {"no correction", [](RunConfig& c) { c.ablation.correction_block = false; }},
        {"Euler", [](RunConfig& c) { c.ablation.integrator = integrator::Scheme::Euler; }},
    };
    bool ok = true;
    std::string detail = fmt("full %.4e", full);
    for (const auto& v : variants) {
        const double rmse = smoke(v.name, v.tweak).trained;
        ok = ok && full <= rmse;
        detail += fmt(", %s %.4e", v.name, rmse);
    }
    const double stencil_free = smoke("free filter, stencil init", [](RunConfig& c) {
                                    c.ablation.filter_mode = FilterMode::Free;
                                    c.free_filter_random = false;
                                }).trained;
    std::printf("  info: free filter from the stencil init reaches %.4e\n", stencil_free);
    return {ok, detail};
}

Outcome robustness() {
    const double clean = full_model().trained;
    const auto noisy = smoke("full, 1% label noise", [](RunConfig& c) { c.noise = 0.01; });
    const double ratio = noisy.trained / clean;
    return {!noisy.diverged && std::isfinite(ratio) && ratio < 3.0,
            fmt("noisy/clean test rmse %.3f, diverged %s", ratio, noisy.diverged ? "yes" : "no")};
}

}  // namespace

int main() {
    report(1, stencil_structure);
    report(2, fourth_order);
    report(3, rk4_order);
    report(4, poisson_solver);
    report(5, gradient_integrity);
    report(6, zero_init);
    report(7, training_smoke);
    report(8, ablation_order);
    report(9, metrics_checks);
    report(10, robustness);
    std::printf("%s: %d criteria failed\n", failures ? "FAIL" : "PASS", failures);
    return failures ? 1 : 0;
}
