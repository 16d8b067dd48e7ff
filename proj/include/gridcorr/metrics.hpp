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

#include <cstddef>
#include <span>
#include <string>
#include <vector>

/// Evaluation metrics. Trajectories are flat time-major buffers of
/// `steps` snapshots of `frame` values each.
namespace gridcorr::metrics {

struct TrajectoryView {
    std::span<const double> values;
    std::size_t steps = 0;
    std::size_t frame = 0;
};

double rmse(std::span<const double> pred, std::span<const double> truth);
double mae(std::span<const double> pred, std::span<const double> truth);
/// mean |pred - truth| / (max(truth) - min(truth)).
double mnad(std::span<const double> pred, std::span<const double> truth);
/// Pearson correlation of two flattened snapshots.
double pcc(std::span<const double> pred, std::span<const double> truth);

/// PCC per snapshot.
std::vector<double> pcc_curve(const TrajectoryView& pred, const TrajectoryView& truth);

/// dt * #{k : pcc[k] > 0.8}; with `contiguous`, only the leading run counts.
double hct_from_pcc(std::span<const double> pcc_values, double dt, bool contiguous = false);

/// HCT over predicted steps (snapshot 0, the shared initial state, is skipped).
double hct(const TrajectoryView& pred, const TrajectoryView& truth, double dt, bool contiguous = false);

struct Report {
    double rmse = 0.0;
    double mae = 0.0;
    double mnad = 0.0;
    double hct = 0.0;
    std::vector<double> pcc;
    bool diverged = false;
};

Report evaluate(const TrajectoryView& pred, const TrajectoryView& truth, double dt, bool contiguous = false);

/// Per-trajectory rows, then a mean row over the non-diverged ones
/// (or NaN when any diverged). Columns: trajectory_id,rmse,mae,mnad,hct.
std::string reports_csv(const std::vector<Report>& reports, const std::vector<std::string>& ids);

/// Means over trajectories; NaN if any diverged.
Report mean_report(const std::vector<Report>& reports);

struct SpectrumBin {
    std::size_t k = 0;
    double energy = 0.0;
};

/// E(k) = 1/2 sum over the shell round(|k|) = k of (|u_hat|^2 + |v_hat|^2) / (HW)^2,
/// for k = 1 .. floor(sqrt(2) n / 2). `velocity` is [2,n,n].
std::vector<SpectrumBin> energy_spectrum(std::span<const double> velocity, std::size_t n);

}  // namespace gridcorr::metrics
