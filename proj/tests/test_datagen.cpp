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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "gridcorr/datagen.hpp"
#include "gridcorr/error.hpp"
#include "gridcorr/fft.hpp"
#include "test_util.hpp"

using namespace gridcorr;
using namespace gridcorr::datagen;
using gridcorr::tu::kTwoPi;

namespace {

TrajectorySet counting_trajectory(std::size_t steps, std::size_t n) {
    TrajectorySet t;
    t.size = n;
    t.dt = 0.5;
    t.seed = 3;
    std::vector<double> frame(2 * n * n);
    for (std::size_t s = 0; s < steps; ++s) {
        for (std::size_t k = 0; k < frame.size(); ++k) frame[k] = static_cast<double>(s * 100000 + k);
        t.push(frame);
    }
    t.segments = {{0, steps, 0}};
    return t;
}

double energy(std::span<const double> f) {
    double e = 0;
    for (double v : f) e += v * v;
    return e;
}

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("gridcorr_test_" + name)).string();
}

}  // namespace

TEST(InitialCondition, DeterministicPerSeed) {
    const auto s = SystemSpec::defaults(SystemKind::Burgers);
    const Tensor a = generate_ic(s, 32, 5), b = generate_ic(s, 32, 5), c = generate_ic(s, 32, 6);
    EXPECT_EQ(tu::max_abs_diff(a.data(), b.data()), 0.0);
    EXPECT_GT(tu::max_abs_diff(a.data(), c.data()), 0.0);
}

TEST(InitialCondition, BandLimitedAndNormalized) {
    const std::size_t n = 32;
    const auto s = SystemSpec::defaults(SystemKind::Burgers);
    IcOptions opt;
    opt.max_mode = 5;
    opt.amplitude = 0.7;
    const Tensor ic = generate_ic(s, n, 9, opt);
    for (std::size_t c = 0; c < 2; ++c) {
        const auto plane = ic.data().subspan(c * n * n, n * n);
        EXPECT_NEAR(tu::max_abs_value(plane), 0.7, 1e-15);
        const auto spec = fft::forward_real(plane, n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                const long ki = fft::signed_frequency(i, n), kj = fft::signed_frequency(j, n);
                if (std::abs(ki) > 5 || std::abs(kj) > 5 || (ki == 0 && kj == 0)) {
                    EXPECT_LT(std::abs(spec[i * n + j]), 1e-11);
                }
            }
    }
    std::mt19937_64 rng(1);
    EXPECT_THROW(band_limited_field(16, 8, rng), ArgumentError);
}

TEST(InitialCondition, NavierStokesDivergenceFree) {
    const std::size_t n = 32;
    auto s = SystemSpec::defaults(SystemKind::NavierStokes);
    s.length = kTwoPi;
    const Tensor ic = generate_ic(s, n, 4);
    const auto uh = fft::forward_real(ic.data().subspan(0, n * n), n, n);
    const auto vh = fft::forward_real(ic.data().subspan(n * n), n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double kx = static_cast<double>(fft::signed_frequency(j, n));
            const double ky = static_cast<double>(fft::signed_frequency(i, n));
            EXPECT_LT(std::abs(kx * uh[i * n + j] + ky * vh[i * n + j]), 1e-10);
        }
}

TEST(InitialCondition, GrayScottRange) {
    const Tensor ic = generate_ic(SystemSpec::defaults(SystemKind::GrayScott), 32, 2);
    const std::size_t p = 32 * 32;
    for (std::size_t k = 0; k < p; ++k) {
        EXPECT_GE(ic.data()[k], 0.5);
        EXPECT_LE(ic.data()[k], 1.0);
        EXPECT_GE(ic.data()[p + k], 0.0);
        EXPECT_LE(ic.data()[p + k], 0.25);
    }
}

TEST(Reference, ZeroStaysZero) {
    SimulationPlan plan;
    plan.snapshots = 5;
    plan.save_every = 3;
    const auto t = simulate_reference(SystemSpec::defaults(SystemKind::Burgers), ForcingSpec::none(),
                                      Tensor::zeros({2, 16, 16}), plan);
    EXPECT_EQ(t.steps, 5u);
    EXPECT_EQ(tu::max_abs_value(t.values), 0.0);
    EXPECT_DOUBLE_EQ(t.dt, 3e-3);
}

TEST(Reference, BurgersEnergyNonIncreasing) {
    const auto s = SystemSpec::defaults(SystemKind::Burgers);
    IcOptions opt;
    opt.max_mode = 4;
    opt.amplitude = 0.5;
    SimulationPlan plan;
    plan.snapshots = 40;
    plan.save_every = 5;
    const auto t = simulate_reference(s, ForcingSpec::none(), generate_ic(s, 64, 1, opt), plan);
    for (std::size_t k = 1; k < t.steps; ++k) EXPECT_LE(energy(t.frame(k)), energy(t.frame(k - 1))) << k;
}

TEST(Reference, SelfConvergence) {
    const auto s = SystemSpec::defaults(SystemKind::Burgers);
    IcOptions opt;
    opt.max_mode = 4;
    opt.amplitude = 0.2;
    const Tensor fine = generate_ic(s, 256, 7, opt);
    auto run = [&](std::size_t n) {
        const std::size_t st = 256 / n;
        std::vector<double> ic(2 * n * n);
        for (std::size_t c = 0; c < 2; ++c)
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) ic[(c * n + i) * n + j] = fine.data()[(c * 256 + st * i) * 256 + st * j];
        SimulationPlan plan;
        plan.dt = 5e-4;
        plan.snapshots = 2;
        plan.save_every = 200;
        plan.record_stride = n / 64;
        const auto t = simulate_reference(s, ForcingSpec::none(), Tensor::from_data({2, n, n}, ic), plan);
        return std::vector<double>(t.frame(1).begin(), t.frame(1).end());
    };
    const auto a = run(64), b = run(128), c = run(256);
    const double e128 = tu::max_abs_diff(b, c);
    EXPECT_LT(e128, 1e-4);
    EXPECT_GT(tu::max_abs_diff(a, c) / e128, 10.0);
}

TEST(Reference, StabilityCheck) {
    const auto s = SystemSpec::defaults(SystemKind::Burgers);
    SimulationPlan plan;
    plan.dt = 0.1;
    try {
        simulate_reference(s, ForcingSpec::none(), generate_ic(s, 32, 1), plan);
        FAIL() << "expected a stability error";
    } catch (const StabilityError& e) {
        EXPECT_NEAR(e.limit(), stability_limit(s, 32, 1.0), 1e-15);
    }
    const double dx = 1.0 / 32;
    EXPECT_DOUBLE_EQ(stability_limit(s, 32, 0.0), 0.5 * dx * dx / (4 * 0.002));
    EXPECT_DOUBLE_EQ(stability_limit(s, 32, 100.0), 0.5 * dx / 100.0);
}

TEST(Reference, WarmupIsDiscardedAndReproducible) {
    const auto s = SystemSpec::defaults(SystemKind::FitzHughNagumo);
    IcOptions opt;
    opt.max_mode = 4;
    const Tensor ic = generate_ic(s, 16, 3, opt);
    SimulationPlan plan;
    plan.dt = 0.05;
    plan.snapshots = 6;
    const auto full = simulate_reference(s, ForcingSpec::none(), ic, plan);
    plan.warmup_steps = 2;
    plan.snapshots = 4;
    const auto warm = simulate_reference(s, ForcingSpec::none(), ic, plan);
    const auto again = simulate_reference(s, ForcingSpec::none(), ic, plan);
    EXPECT_EQ(warm.values, again.values);
    for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(tu::max_abs_diff(warm.frame(k), full.frame(k + 2)), 0.0);
}

TEST(Reference, SpectralNavierStokesTaylorGreen) {
    const std::size_t n = 32;
    auto s = SystemSpec::defaults(SystemKind::NavierStokes);
    s.length = kTwoPi;
    s.re = 50.0;
    const Tensor ic = tu::field2(
        n, kTwoPi, [](double x, double y) { return std::sin(x) * std::cos(y); },
        [](double x, double y) { return -std::cos(x) * std::sin(y); });
    SimulationPlan plan;
    plan.dt = 0.01;
    plan.snapshots = 2;
    plan.save_every = 50;
    const auto t = simulate_reference(s, ForcingSpec::none(), ic, plan);
    const double decay = std::exp(-2.0 * 0.5 / s.re);
    std::vector<double> expect(ic.data().begin(), ic.data().end());
    for (double& v : expect) v *= decay;
    EXPECT_LT(tu::max_abs_diff(t.frame(1), expect), 1e-10);
}

TEST(Reference, NavierStokesDragDecay) {
    const std::size_t n = 16;
    auto s = SystemSpec::defaults(SystemKind::NavierStokes);
    s.length = kTwoPi;
    s.re = 1e12;
    // A shear flow u = sin(y) is steady without viscosity; linear drag damps it.
    const Tensor ic = tu::field2(n, kTwoPi, [](double, double y) { return std::sin(y); }, [](double, double) { return 0.0; });
    ForcingSpec drag = ForcingSpec::none();
    drag.drag = 0.4;
    SimulationPlan plan;
    plan.dt = 0.01;
    plan.snapshots = 2;
    plan.save_every = 100;
    const auto t = simulate_reference(s, drag, ic, plan);
    std::vector<double> expect(ic.data().begin(), ic.data().end());
    for (double& v : expect) v *= std::exp(-0.4);
    EXPECT_LT(tu::max_abs_diff(t.frame(1), expect), 1e-9);
}

TEST(Downsample, IdentityAndIndices) {
    const auto t = counting_trajectory(6, 100);
    const auto same = downsample(t, {1, 1});
    EXPECT_EQ(same.values, t.values);
    const auto d = downsample(t, {4, 2});
    EXPECT_EQ(d.size, 25u);
    EXPECT_EQ(d.steps, 3u);
    EXPECT_DOUBLE_EQ(d.dt, 1.0);
    for (std::size_t i = 0; i < 25; ++i)
        for (std::size_t j = 0; j < 25; ++j)
            EXPECT_EQ(d.frame(1)[i * 25 + j], t.frame(2)[(4 * i) * 100 + 4 * j]);
    EXPECT_EQ(d.frame(0)[24], 96.0);
}

TEST(Downsample, Composition) {
    const auto t = counting_trajectory(8, 16);
    const auto twice = downsample(downsample(t, {2, 2}), {2, 1});
    const auto once = downsample(t, {4, 2});
    EXPECT_EQ(twice.values, once.values);
    EXPECT_EQ(twice.dt, once.dt);
    EXPECT_THROW(downsample(t, {3, 1}), ArgumentError);
    EXPECT_THROW(downsample(t, {0, 1}), ArgumentError);
}

TEST(Noise, ScaleZeroAndDeterminism) {
    const auto t = counting_trajectory(4, 16);
    EXPECT_EQ(add_noise(t, 0.0, 1).values, t.values);
    EXPECT_EQ(add_noise(t, 0.01, 1).values, add_noise(t, 0.01, 1).values);
    EXPECT_NE(add_noise(t, 0.01, 1).values, add_noise(t, 0.01, 2).values);
    EXPECT_THROW(add_noise(t, -0.1, 1), ArgumentError);
}

TEST(Noise, StatisticalScale) {
    const auto s = SystemSpec::defaults(SystemKind::Burgers);
    TrajectorySet t;
    t.size = 64;
    t.dt = 1.0;
    for (std::uint64_t k = 0; k < 4; ++k) t.push(generate_ic(s, 64, k).data());
    t.segments = {{0, t.steps, 0}};
    const auto noisy = add_noise(t, 0.05, 3);
    const std::size_t plane = 64 * 64;
    for (std::size_t c = 0; c < 2; ++c) {
        double s1 = 0, s2 = 0, d2 = 0;
        std::size_t count = 0;
        for (std::size_t f = 0; f < t.steps; ++f)
            for (std::size_t k = 0; k < plane; ++k) {
                const double v = t.frame(f)[c * plane + k];
                const double d = noisy.frame(f)[c * plane + k] - v;
                s1 += v;
                s2 += v * v;
                d2 += d * d;
                ++count;
            }
        const double mean = s1 / count;
        const double sd = std::sqrt(s2 / count - mean * mean);
        EXPECT_NEAR(std::sqrt(d2 / count) / sd, 0.05, 0.005);
    }
}

TEST(Sparsify, CountsAndDeterminism) {
    const auto t = counting_trajectory(400, 4);
    EXPECT_EQ(sparsify(t, 0.0, 20, 1).values, t.values);
    const auto s = sparsify(t, 0.2, 20, 7);
    EXPECT_EQ(s.segments.size(), 16u);
    EXPECT_EQ(s.values, sparsify(t, 0.2, 20, 7).values);
    EXPECT_NE(s.values, sparsify(t, 0.2, 20, 8).values);
    for (const auto& seg : s.segments) {
        EXPECT_EQ(seg.origin % 20, 0u);
        for (std::size_t k = 0; k < seg.length; ++k)
            EXPECT_EQ(s.frame(seg.start + k)[0], t.frame(seg.origin + k)[0]);
    }
    EXPECT_NO_THROW(s.validate());
    EXPECT_THROW(sparsify(t, 0.99, 20, 1), ArgumentError);
    EXPECT_THROW(sparsify(t, 1.0, 20, 1), ArgumentError);
    EXPECT_THROW(downsample(s, {2, 1}), ArgumentError);
}

TEST(Files, RoundTripBitExact) {
    const auto s = SystemSpec::defaults(SystemKind::NavierStokes);
    SimulationPlan plan;
    plan.dt = 0.01;
    plan.snapshots = 3;
    auto t = simulate_reference(s, ForcingSpec::preset(3), generate_ic(s, 32, 8), plan, 8);
    t = add_noise(t, 0.01, 4);
    const std::string path = temp_path("traj.gct");
    write_trajectory(path, t);
    const auto r = read_trajectory(path);
    EXPECT_EQ(r.values, t.values);
    EXPECT_EQ(r.steps, t.steps);
    EXPECT_EQ(r.dt, t.dt);
    EXPECT_EQ(r.seed, 8u);
    EXPECT_EQ(r.system.re, t.system.re);
    EXPECT_EQ(r.forcing.family, ForcingSpec::Family::F3);
    EXPECT_EQ(r.channel_names, t.channel_names);
    EXPECT_EQ(r.extra, t.extra);

    const auto sp = sparsify(counting_trajectory(40, 4), 0.25, 10, 2);
    write_trajectory(path, sp);
    const auto rs = read_trajectory(path);
    ASSERT_EQ(rs.segments.size(), sp.segments.size());
    for (std::size_t k = 0; k < rs.segments.size(); ++k) EXPECT_EQ(rs.segments[k].origin, sp.segments[k].origin);
    std::filesystem::remove(path);
}

TEST(Files, Errors) {
    EXPECT_THROW(read_trajectory(temp_path("missing.gct")), IoError);
    const std::string path = temp_path("junk.gct");
    std::ofstream(path) << "not a container";
    EXPECT_THROW(read_trajectory(path), IoError);
    std::filesystem::remove(path);
    TrajectorySet bad = counting_trajectory(2, 4);
    bad.values.pop_back();
    EXPECT_THROW(bad.validate(), IoError);
}
