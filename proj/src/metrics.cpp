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

#include "gridcorr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "gridcorr/error.hpp"
#include "gridcorr/fft.hpp"

namespace gridcorr::metrics {

namespace {

void require_same(const char* op, std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw ShapeError(std::string(op) + ": sizes differ (" + std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()) + ")");
    if (a.empty()) throw ShapeError(std::string(op) + ": empty input");
}

std::span<const double> snapshot(const TrajectoryView& t, std::size_t k) {
    return t.values.subspan(k * t.frame, t.frame);
}

void require_views(const char* op, const TrajectoryView& pred, const TrajectoryView& truth) {
    if (pred.steps != truth.steps || pred.frame != truth.frame)
        throw ShapeError(std::string(op) + ": trajectories differ in length or frame size");
    if (pred.values.size() != pred.steps * pred.frame || truth.values.size() != truth.steps * truth.frame)
        throw ShapeError(std::string(op) + ": buffer does not match steps x frame");
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

double rmse(std::span<const double> pred, std::span<const double> truth) {
    require_same("rmse", pred, truth);
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) s += (pred[i] - truth[i]) * (pred[i] - truth[i]);
    return std::sqrt(s / static_cast<double>(pred.size()));
}

double mae(std::span<const double> pred, std::span<const double> truth) {
    require_same("mae", pred, truth);
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) s += std::abs(pred[i] - truth[i]);
    return s / static_cast<double>(pred.size());
}

double mnad(std::span<const double> pred, std::span<const double> truth) {
    require_same("mnad", pred, truth);
    const auto [lo, hi] = std::minmax_element(truth.begin(), truth.end());
    const double range = *hi - *lo;
    if (!(range > 0.0)) throw ArgumentError("mnad: ground truth has zero range");
    return mae(pred, truth) / range;
}

double pcc(std::span<const double> pred, std::span<const double> truth) {
    require_same("pcc", pred, truth);
    const double n = static_cast<double>(pred.size());
    double mp = 0.0, mt = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        mp += pred[i];
        mt += truth[i];
    }
    mp /= n;
    mt /= n;
    double cov = 0.0, vp = 0.0, vt = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double a = pred[i] - mp, b = truth[i] - mt;
        cov += a * b;
        vp += a * a;
        vt += b * b;
    }
    if (!(vp > 0.0) || !(vt > 0.0)) throw ArgumentError("pcc: zero variance");
    return cov / std::sqrt(vp * vt);
}

std::vector<double> pcc_curve(const TrajectoryView& pred, const TrajectoryView& truth) {
    require_views("pcc_curve", pred, truth);
    std::vector<double> out(pred.steps);
    for (std::size_t k = 0; k < pred.steps; ++k) out[k] = pcc(snapshot(pred, k), snapshot(truth, k));
    return out;
}

double hct_from_pcc(std::span<const double> values, double dt, bool contiguous) {
    std::size_t count = 0;
    for (double v : values) {
        if (v > 0.8)
            ++count;
        else if (contiguous)
            break;
    }
    return dt * static_cast<double>(count);
}

double hct(const TrajectoryView& pred, const TrajectoryView& truth, double dt, bool contiguous) {
    const auto curve = pcc_curve(pred, truth);
    return hct_from_pcc(std::span<const double>(curve).subspan(std::min<std::size_t>(1, curve.size())), dt,
                        contiguous);
}

Report evaluate(const TrajectoryView& pred, const TrajectoryView& truth, double dt, bool contiguous) {
    require_views("evaluate", pred, truth);
    Report r;
    r.rmse = rmse(pred.values, truth.values);
    r.mae = mae(pred.values, truth.values);
    r.mnad = mnad(pred.values, truth.values);
    r.pcc = pcc_curve(pred, truth);
    r.hct = hct_from_pcc(std::span<const double>(r.pcc).subspan(std::min<std::size_t>(1, r.pcc.size())), dt,
                         contiguous);
    return r;
}

Report mean_report(const std::vector<Report>& reports) {
    Report m;
    if (reports.empty()) return m;
    for (const auto& r : reports) {
        if (r.diverged) {
            m.diverged = true;
            m.rmse = m.mae = m.mnad = m.hct = kNaN;
            return m;
        }
        m.rmse += r.rmse;
        m.mae += r.mae;
        m.mnad += r.mnad;
        m.hct += r.hct;
    }
    const double n = static_cast<double>(reports.size());
    m.rmse /= n;
    m.mae /= n;
    m.mnad /= n;
    m.hct /= n;
    return m;
}

std::string reports_csv(const std::vector<Report>& reports, const std::vector<std::string>& ids) {
    if (ids.size() != reports.size()) throw ArgumentError("reports_csv: one id per report required");
    std::ostringstream os;
    os.precision(10);
    auto cell = [&](double v, bool diverged) {
        if (diverged || !std::isfinite(v))
            os << "NaN";
        else
            os << v;
    };
    auto row = [&](const std::string& id, const Report& r) {
        os << id << ',';
        cell(r.rmse, r.diverged);
        os << ',';
        cell(r.mae, r.diverged);
        os << ',';
        cell(r.mnad, r.diverged);
        os << ',';
        cell(r.hct, r.diverged);
        os << '\n';
    };
    os << "trajectory_id,rmse,mae,mnad,hct\n";
    for (std::size_t k = 0; k < reports.size(); ++k) row(ids[k], reports[k]);
    row("mean", mean_report(reports));
    return os.str();
}

std::vector<SpectrumBin> energy_spectrum(std::span<const double> velocity, std::size_t n) {
    if (n == 0 || velocity.size() != 2 * n * n)
        throw ShapeError("energy_spectrum: expected a square [2,n,n] velocity field");
    const auto uh = fft::forward_real(velocity.subspan(0, n * n), n, n);
    const auto vh = fft::forward_real(velocity.subspan(n * n, n * n), n, n);
    const auto kmax = static_cast<std::size_t>(std::floor(std::sqrt(2.0) * static_cast<double>(n) / 2.0)) + 1;
    std::vector<SpectrumBin> bins(kmax);
    for (std::size_t k = 0; k < kmax; ++k) bins[k].k = k + 1;
    const double norm = 1.0 / (static_cast<double>(n * n) * static_cast<double>(n * n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double kx = static_cast<double>(fft::signed_frequency(j, n));
            const double ky = static_cast<double>(fft::signed_frequency(i, n));
            const auto shell = static_cast<std::size_t>(std::llround(std::sqrt(kx * kx + ky * ky)));
            if (shell == 0) continue;
            bins[shell - 1].energy += 0.5 * (std::norm(uh[i * n + j]) + std::norm(vh[i * n + j])) * norm;
        }
    return bins;
}

}  // namespace gridcorr::metrics
