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

#include "gridcorr/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gridcorr/fft.hpp"
#include "gridcorr/gct1.hpp"
#include "gridcorr/integrator.hpp"
#include "gridcorr/poisson.hpp"
#include "gridcorr/serialize.hpp"
#include "gridcorr/stencil.hpp"

namespace gridcorr::datagen {

using fft::Complex;

// ---- TrajectorySet ----------------------------------------------------------

std::span<const double> TrajectorySet::frame(std::size_t t) const {
    if (t >= steps) throw ArgumentError("trajectory: snapshot " + std::to_string(t) + " out of range");
    return std::span<const double>(values).subspan(t * frame_size(), frame_size());
}

Tensor TrajectorySet::snapshot(std::size_t t, Dtype dtype) const {
    const auto f = frame(t);
    return Tensor::from_data({channels, size, size}, std::vector<double>(f.begin(), f.end()), dtype);
}

void TrajectorySet::push(std::span<const double> f) {
    if (f.size() != frame_size()) throw ShapeError("trajectory: frame size mismatch");
    values.insert(values.end(), f.begin(), f.end());
    ++steps;
}

void TrajectorySet::validate() const {
    if (values.size() != steps * frame_size()) throw IoError("trajectory: payload does not match dimensions");
    if (!(dt > 0.0)) throw IoError("trajectory: dt must be positive");
    if (channel_names.size() != channels) throw IoError("trajectory: channel names do not match channel count");
    std::size_t covered = 0;
    for (const auto& s : segments) {
        if (s.start != covered || s.length == 0) throw IoError("trajectory: segments must tile the snapshots");
        covered += s.length;
    }
    if (covered != steps) throw IoError("trajectory: segments must tile the snapshots");
    for (double v : values)
        if (!std::isfinite(v)) throw IoError("trajectory: non-finite value");
}

// ---- initial conditions --------------------------------------------------

std::vector<double> band_limited_field(std::size_t n, int max_mode, std::mt19937_64& rng) {
    if (max_mode < 1 || static_cast<std::size_t>(2 * max_mode) >= n)
        throw ArgumentError("band_limited_field: max_mode must be in [1, n/2)");
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<Complex> spec(n * n, 0.0);
    for (int kx = -max_mode; kx <= max_mode; ++kx)
        for (int ky = -max_mode; ky <= max_mode; ++ky) {
            const double re = normal(rng), im = normal(rng);
            if (kx == 0 && ky == 0) continue;
            const std::size_t i = static_cast<std::size_t>((kx + static_cast<int>(n)) % static_cast<int>(n));
            const std::size_t j = static_cast<std::size_t>((ky + static_cast<int>(n)) % static_cast<int>(n));
            spec[i * n + j] = Complex(re, im);
        }
    auto field = fft::inverse_real(spec, n, n);
    double peak = 0.0;
    for (double v : field) peak = std::max(peak, std::abs(v));
    for (double& v : field) v /= peak;
    return field;
}

namespace {

// Spectral derivative helpers on n x n real fields with domain length L.
std::vector<Complex> spectrum(std::span<const double> f, std::size_t n) { return fft::forward_real(f, n, n); }

}  // namespace

Tensor generate_ic(const SystemSpec& system, std::size_t n, std::uint64_t seed, const IcOptions& options) {
    system.validate();
    std::mt19937_64 rng(seed);
    const std::size_t plane = n * n;
    std::vector<double> out(2 * plane);
    switch (system.kind) {
        case SystemKind::Burgers:
        case SystemKind::FitzHughNagumo:
            for (std::size_t c = 0; c < 2; ++c) {
                const auto f = band_limited_field(n, options.max_mode, rng);
                for (std::size_t k = 0; k < plane; ++k) out[c * plane + k] = options.amplitude * f[k];
            }
            break;
        case SystemKind::GrayScott: {
            // Smooth patches of (u, v) = (0.5, 0.25) on the (1, 0) background.
            const auto f = band_limited_field(n, options.max_mode, rng);
            for (std::size_t k = 0; k < plane; ++k) {
                const double m = std::pow(0.5 * (f[k] + 1.0), 4.0) * options.amplitude;
                out[k] = 1.0 - 0.5 * m;
                out[plane + k] = 0.25 * m;
            }
            break;
        }
        case SystemKind::NavierStokes: {
            // Divergence-free velocity from a random vorticity: u = psi_y, v = -psi_x, lap psi = -w.
            const auto w = band_limited_field(n, options.max_mode, rng);
            const auto eta = poisson::wavenumbers(n, system.length);
            auto wh = spectrum(w, n);
            std::vector<Complex> uh(plane), vh(plane);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) {
                    const double k2 = eta[i] * eta[i] + eta[j] * eta[j];
                    const Complex psi = k2 == 0.0 ? 0.0 : wh[i * n + j] / k2;
                    const double ky = i == n / 2 ? 0.0 : eta[i], kx = j == n / 2 ? 0.0 : eta[j];
                    uh[i * n + j] = Complex(0.0, ky) * psi;
                    vh[i * n + j] = -Complex(0.0, kx) * psi;
                }
            const auto u = fft::inverse_real(uh, n, n), v = fft::inverse_real(vh, n, n);
            double peak = 0.0;
            for (std::size_t k = 0; k < plane; ++k) peak = std::max({peak, std::abs(u[k]), std::abs(v[k])});
            for (std::size_t k = 0; k < plane; ++k) {
                out[k] = options.amplitude * u[k] / peak;
                out[plane + k] = options.amplitude * v[k] / peak;
            }
            break;
        }
    }
    return Tensor::from_data({2, n, n}, std::move(out));
}

double stability_limit(const SystemSpec& system, std::size_t n, double max_speed) {
    const double dx = system.length / static_cast<double>(n);
    double limit = 0.5 * dx * dx / (4.0 * system.max_diffusivity());
    const bool advective = system.kind == SystemKind::Burgers || system.kind == SystemKind::NavierStokes;
    if (advective && max_speed > 0.0) limit = std::min(limit, 0.5 * dx / max_speed);
    return limit;
}

// ---- reference solvers ------------------------------------------------------

namespace {

void record(TrajectorySet& traj, std::span<const double> state, std::size_t n, std::size_t stride) {
    if (stride == 1) {
        traj.push(state);
        return;
    }
    const std::size_t m = n / stride;
    std::vector<double> frame(traj.channels * m * m);
    for (std::size_t c = 0; c < traj.channels; ++c)
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j)
                frame[(c * m + i) * m + j] = state[(c * n + i * stride) * n + j * stride];
    traj.push(frame);
}

void check_finite(std::span<const double> state, std::int64_t step) {
    for (double v : state)
        if (!std::isfinite(v))
            throw DivergenceError("reference simulation produced non-finite values at step " + std::to_string(step),
                                  step);
}

// Vorticity-form Navier-Stokes on an n x n periodic grid, 2/3-rule dealiasing.
class SpectralNs {
  public:
    SpectralNs(const SystemSpec& sys, const ForcingSpec& force, std::size_t n)
        : n_(n), re_(sys.re), drag_(force.drag), eta_(poisson::wavenumbers(n, sys.length)), mask_(n * n) {
        const double cutoff = (2.0 / 3.0) * static_cast<double>(n / 2);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                const double ki = std::abs(static_cast<double>(fft::signed_frequency(i, n)));
                const double kj = std::abs(static_cast<double>(fft::signed_frequency(j, n)));
                mask_[i * n + j] = (ki < cutoff && kj < cutoff) ? 1.0 : 0.0;
            }
        // Curl of the static part of the force; the drag part contributes -drag * w.
        ForcingSpec still = force;
        still.drag = 0.0;
        const Grid grid{n, sys.length};
        const Tensor f = evaluate_forcing(still, grid, Tensor::zeros({2, n, n}));
        const auto fx = spectrum(f.data().subspan(0, n * n), n_);
        const auto fy = spectrum(f.data().subspan(n * n, n * n), n_);
        curl_f_.resize(n * n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                curl_f_[i * n + j] = Complex(0.0, kx(j)) * fy[i * n + j] - Complex(0.0, ky(i)) * fx[i * n + j];
    }

    std::vector<Complex> vorticity(std::span<const double> velocity) const {
        const auto uh = spectrum(velocity.subspan(0, n_ * n_), n_);
        const auto vh = spectrum(velocity.subspan(n_ * n_, n_ * n_), n_);
        std::vector<Complex> w(n_ * n_);
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < n_; ++j)
                w[i * n_ + j] = Complex(0.0, kx(j)) * vh[i * n_ + j] - Complex(0.0, ky(i)) * uh[i * n_ + j];
        return w;
    }

    std::vector<double> velocity(const std::vector<Complex>& wh) const {
        std::vector<Complex> uh(n_ * n_), vh(n_ * n_);
        velocity_spectra(wh, uh, vh);
        auto u = fft::inverse_real(uh, n_, n_);
        const auto v = fft::inverse_real(vh, n_, n_);
        u.insert(u.end(), v.begin(), v.end());
        return u;
    }

    std::vector<Complex> rhs(const std::vector<Complex>& wh) const {
        const std::size_t p = n_ * n_;
        std::vector<Complex> uh(p), vh(p), wx(p), wy(p);
        velocity_spectra(wh, uh, vh);
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < n_; ++j) {
                wx[i * n_ + j] = Complex(0.0, kx(j)) * wh[i * n_ + j];
                wy[i * n_ + j] = Complex(0.0, ky(i)) * wh[i * n_ + j];
            }
        const auto u = fft::inverse_real(uh, n_, n_), v = fft::inverse_real(vh, n_, n_);
        const auto gx = fft::inverse_real(wx, n_, n_), gy = fft::inverse_real(wy, n_, n_);
        std::vector<double> adv(p);
        for (std::size_t k = 0; k < p; ++k) adv[k] = u[k] * gx[k] + v[k] * gy[k];
        const auto ah = spectrum(adv, n_);
        std::vector<Complex> out(p);
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < n_; ++j) {
                const std::size_t k = i * n_ + j;
                const double k2 = eta_[i] * eta_[i] + eta_[j] * eta_[j];
                out[k] = -mask_[k] * ah[k] - (k2 / re_ + drag_) * wh[k] + curl_f_[k];
            }
        return out;
    }

  private:
    // The Nyquist wavenumber is dropped from first derivatives.
    double kx(std::size_t j) const { return j == n_ / 2 ? 0.0 : eta_[j]; }
    double ky(std::size_t i) const { return i == n_ / 2 ? 0.0 : eta_[i]; }

    void velocity_spectra(const std::vector<Complex>& wh, std::vector<Complex>& uh, std::vector<Complex>& vh) const {
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < n_; ++j) {
                const std::size_t k = i * n_ + j;
                const double k2 = eta_[i] * eta_[i] + eta_[j] * eta_[j];
                const Complex psi = k2 == 0.0 ? 0.0 : wh[k] / k2;
                uh[k] = Complex(0.0, ky(i)) * psi;
                vh[k] = -Complex(0.0, kx(j)) * psi;
            }
    }

    std::size_t n_;
    double re_, drag_;
    std::vector<double> eta_;
    std::vector<double> mask_;
    std::vector<Complex> curl_f_;
};

std::vector<Complex> axpy_c(double a, const std::vector<Complex>& x, const std::vector<Complex>& y) {
    std::vector<Complex> out(y.size());
    for (std::size_t k = 0; k < y.size(); ++k) out[k] = y[k] + a * x[k];
    return out;
}

void simulate_spectral_ns(TrajectorySet& traj, const SystemSpec& system, const ForcingSpec& forcing,
                          const Tensor& ic, const SimulationPlan& plan) {
    const std::size_t n = ic.dim(1);
    if (n % 2 != 0) throw ArgumentError("simulate_reference: Navier-Stokes needs an even grid");
    const SpectralNs solver(system, forcing, n);
    auto w = solver.vorticity(ic.data());
    const double dt = plan.dt;
    std::int64_t step = 0;
    auto advance = [&] {
        const auto s1 = solver.rhs(w);
        const auto s2 = solver.rhs(axpy_c(0.5 * dt, s1, w));
        const auto s3 = solver.rhs(axpy_c(0.5 * dt, s2, w));
        const auto s4 = solver.rhs(axpy_c(dt, s3, w));
        for (std::size_t k = 0; k < w.size(); ++k) w[k] += dt / 6.0 * (s1[k] + 2.0 * s2[k] + 2.0 * s3[k] + s4[k]);
        ++step;
        for (const auto& c : w)
            if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
                throw DivergenceError("reference simulation diverged at step " + std::to_string(step), step);
    };
    for (std::int64_t s = 0; s < plan.warmup_steps; ++s) advance();
    for (std::int64_t snap = 0; snap < plan.snapshots; ++snap) {
        if (snap > 0)
            for (std::int64_t s = 0; s < plan.save_every; ++s) advance();
        const auto vel = solver.velocity(w);
        check_finite(vel, step);
        record(traj, vel, n, plan.record_stride);
    }
}

void simulate_fd(TrajectorySet& traj, const SystemSpec& system, const Tensor& ic, const SimulationPlan& plan) {
    const std::size_t n = ic.dim(1);
    const Grid grid{n, system.length};
    const Tensor kernel = stencil::build_kernel(stencil::classical_params());
    const integrator::Rhs rhs = [&](const Tensor& u, double) {
        return rhs_reaction_advection(u, u, kernel, system, grid);
    };
    Tensor u = ic.detach();
    std::int64_t step = 0;
    auto advance = [&] {
        try {
            u = integrator::rk4_step(rhs, u, 0.0, plan.dt);
        } catch (const DivergenceError&) {
            throw DivergenceError("reference simulation diverged at step " + std::to_string(step + 1), step + 1);
        }
        ++step;
    };
    for (std::int64_t s = 0; s < plan.warmup_steps; ++s) advance();
    for (std::int64_t snap = 0; snap < plan.snapshots; ++snap) {
        if (snap > 0)
            for (std::int64_t s = 0; s < plan.save_every; ++s) advance();
        check_finite(u.data(), step);
        record(traj, u.data(), n, plan.record_stride);
    }
}

}  // namespace

TrajectorySet simulate_reference(const SystemSpec& system, const ForcingSpec& forcing, const Tensor& ic,
                                 const SimulationPlan& plan, std::uint64_t seed) {
    system.validate();
    if (ic.ndim() != 3 || ic.dim(0) != 2 || ic.dim(1) != ic.dim(2))
        throw ShapeError("simulate_reference: expected a [2,n,n] initial state, got " + shape_string(ic.shape()));
    if (plan.snapshots < 1 || plan.save_every < 1 || plan.warmup_steps < 0 || plan.record_stride < 1)
        throw ArgumentError("simulate_reference: invalid plan");
    const std::size_t n = ic.dim(1);
    if (n % plan.record_stride != 0) throw ArgumentError("simulate_reference: record stride must divide the grid");
    const double limit = stability_limit(system, n, max_abs(ic));
    if (!(plan.dt > 0.0) || plan.dt > limit)
        throw StabilityError("simulate_reference: dt " + std::to_string(plan.dt) + " exceeds the stability limit " +
                                 std::to_string(limit),
                             limit);

    NoGradGuard no_grad;
    TrajectorySet traj;
    traj.size = n / plan.record_stride;
    traj.dt = plan.dt * static_cast<double>(plan.save_every);
    traj.system = system;
    traj.forcing = system.kind == SystemKind::NavierStokes ? forcing : ForcingSpec::none();
    traj.seed = seed;
    traj.values.reserve(static_cast<std::size_t>(plan.snapshots) * traj.frame_size());
    if (system.kind == SystemKind::NavierStokes)
        simulate_spectral_ns(traj, system, forcing, ic, plan);
    else
        simulate_fd(traj, system, ic, plan);
    traj.segments = {{0, traj.steps, 0}};
    return traj;
}

// ---- perturbations -------------------------------------------------------

TrajectorySet downsample(const TrajectorySet& traj, const DownsampleSpec& spec) {
    if (spec.space_stride < 1 || spec.time_stride < 1) throw ArgumentError("downsample: strides must be positive");
    if (traj.size % spec.space_stride != 0)
        throw ArgumentError("downsample: space stride " + std::to_string(spec.space_stride) + " does not divide grid " +
                            std::to_string(traj.size));
    if (traj.segments.size() > 1) throw ArgumentError("downsample: cannot downsample a sparsified trajectory");
    TrajectorySet out = traj;
    out.values.clear();
    out.steps = 0;
    out.size = traj.size / spec.space_stride;
    out.dt = traj.dt * static_cast<double>(spec.time_stride);
    for (std::size_t t = 0; t < traj.steps; t += spec.time_stride) record(out, traj.frame(t), traj.size, spec.space_stride);
    out.segments = {{0, out.steps, 0}};
    return out;
}

TrajectorySet add_noise(const TrajectorySet& traj, double scale, std::uint64_t seed) {
    if (!(scale >= 0.0)) throw ArgumentError("add_noise: scale must be >= 0");
    TrajectorySet out = traj;
    if (scale == 0.0) return out;
    const std::size_t plane = traj.size * traj.size;
    std::vector<double> sigma(traj.channels);
    for (std::size_t c = 0; c < traj.channels; ++c) {
        double s = 0.0, s2 = 0.0;
        std::size_t count = 0;
        for (std::size_t t = 0; t < traj.steps; ++t) {
            const auto f = traj.frame(t).subspan(c * plane, plane);
            for (double v : f) {
                s += v;
                s2 += v * v;
            }
            count += plane;
        }
        const double mean = s / static_cast<double>(count);
        sigma[c] = std::sqrt(std::max(0.0, s2 / static_cast<double>(count) - mean * mean));
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t t = 0; t < traj.steps; ++t)
        for (std::size_t c = 0; c < traj.channels; ++c) {
            double* f = &out.values[t * traj.frame_size() + c * plane];
            for (std::size_t k = 0; k < plane; ++k) f[k] += scale * sigma[c] * normal(rng);
        }
    out.extra["noise_scale"] = scale;
    out.extra["noise_seed"] = seed;
    return out;
}

TrajectorySet sparsify(const TrajectorySet& traj, double drop_fraction, std::size_t rollout_len,
                       std::uint64_t seed) {
    if (!(drop_fraction >= 0.0 && drop_fraction < 1.0)) throw ArgumentError("sparsify: drop fraction must be in [0, 1)");
    if (rollout_len < 1) throw ArgumentError("sparsify: rollout length must be >= 1");
    if (traj.segments.size() > 1) throw ArgumentError("sparsify: trajectory is already sparse");
    if (drop_fraction == 0.0) return traj;
    const std::size_t blocks = traj.steps / rollout_len;
    const auto drop = static_cast<std::size_t>(std::llround(drop_fraction * static_cast<double>(blocks)));
    if (blocks == 0 || drop >= blocks)
        throw ArgumentError("sparsify: dropping " + std::to_string(drop) + " of " + std::to_string(blocks) +
                            " windows leaves none");
    std::vector<std::size_t> order(blocks);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::size_t> kept(order.begin() + static_cast<std::ptrdiff_t>(drop), order.end());
    std::sort(kept.begin(), kept.end());

    TrajectorySet out = traj;
    out.values.clear();
    out.steps = 0;
    out.segments.clear();
    for (std::size_t b : kept) {
        const std::size_t begin = b * rollout_len;
        const std::size_t end = std::min(traj.steps, begin + rollout_len + 1);
        out.segments.push_back({out.steps, end - begin, begin});
        for (std::size_t t = begin; t < end; ++t) out.push(traj.frame(t));
    }
    out.extra["sparsify"] = {{"drop_fraction", drop_fraction}, {"rollout", rollout_len}, {"seed", seed},
                             {"blocks", blocks}, {"kept", kept.size()}};
    return out;
}

// ---- file format ---------------------------------------------------------

void write_trajectory(const std::string& path, const TrajectorySet& traj) {
    traj.validate();
    gct1::Record rec;
    rec.code = gct1::Code::Float64;
    rec.dims = {traj.steps, traj.channels, traj.size, traj.size};
    rec.values = traj.values;
    nlohmann::json segs = nlohmann::json::array();
    for (const auto& s : traj.segments) segs.push_back({s.start, s.length, s.origin});
    rec.meta = {{"kind", "trajectory"},
                {"system", traj.system},
                {"forcing", traj.forcing},
                {"dt", traj.dt},
                {"domain", traj.system.length},
                {"seed", traj.seed},
                {"channels", traj.channel_names},
                {"segments", segs},
                {"extra", traj.extra}};
    gct1::write(path, rec);
}

TrajectorySet read_trajectory(const std::string& path) {
    const auto rec = gct1::read(path);
    if (rec.dims.size() != 4 || rec.dims[2] != rec.dims[3])
        throw IoError(path + ": expected a [n_t, C, n, n] trajectory");
    TrajectorySet traj;
    try {
        const auto& m = rec.meta;
        if (m.value("kind", "") != "trajectory") throw IoError(path + ": not a trajectory file");
        traj.steps = rec.dims[0];
        traj.channels = rec.dims[1];
        traj.size = rec.dims[2];
        traj.values = rec.values;
        traj.system = m.at("system").get<SystemSpec>();
        traj.forcing = m.at("forcing").get<ForcingSpec>();
        traj.dt = m.at("dt").get<double>();
        traj.seed = m.at("seed").get<std::uint64_t>();
        traj.channel_names = m.at("channels").get<std::vector<std::string>>();
        for (const auto& s : m.at("segments"))
            traj.segments.push_back({s.at(0).get<std::size_t>(), s.at(1).get<std::size_t>(), s.at(2).get<std::size_t>()});
        traj.extra = m.value("extra", nlohmann::json::object());
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path + ": malformed trajectory metadata: " + e.what());
    } catch (const ConfigError& e) {
        throw IoError(path + ": malformed trajectory metadata: " + e.what());
    }
    traj.validate();
    return traj;
}

}  // namespace gridcorr::datagen
