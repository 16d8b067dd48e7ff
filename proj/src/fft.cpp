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

#include "gridcorr/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

namespace gridcorr::fft {
namespace {

// The FFTW planner is not thread-safe; executing an existing plan on new
// arrays is. Plans are created once per shape and direction and never freed.
using Key = std::tuple<std::size_t, std::size_t, bool>;

fftw_plan plan_for(std::size_t rows, std::size_t cols, bool inverse) {
    static std::mutex mutex;
    static std::map<Key, fftw_plan> cache;
    std::lock_guard lock(mutex);
    const Key key{rows, cols, inverse};
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    std::vector<Complex> scratch(rows * cols);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    const int sign = inverse ? FFTW_BACKWARD : FFTW_FORWARD;
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan plan = rows == 1 ? fftw_plan_dft_1d(static_cast<int>(cols), buf, buf, sign, flags)
                               : fftw_plan_dft_2d(static_cast<int>(rows), static_cast<int>(cols), buf, buf, sign, flags);
    return cache.emplace(key, plan).first->second;
}

void execute(std::span<Complex> data, std::size_t rows, std::size_t cols, bool inverse) {
    auto* buf = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plan_for(rows, cols, inverse), buf, buf);
}

}  // namespace

void transform(std::span<Complex> line, bool inverse) {
    if (line.size() <= 1) return;
    execute(line, 1, line.size(), inverse);
}

void transform2d(std::span<Complex> data, std::size_t rows, std::size_t cols, bool inverse) {
    if (data.empty()) return;
    execute(data, rows, cols, inverse);
    if (inverse) {
        const double scale = 1.0 / static_cast<double>(rows * cols);
        for (auto& v : data) v *= scale;
    }
}

std::vector<Complex> forward_real(std::span<const double> field, std::size_t rows, std::size_t cols) {
    std::vector<Complex> spec(field.begin(), field.end());
    transform2d(spec, rows, cols, false);
    return spec;
}

std::vector<double> inverse_real(std::span<const Complex> spectrum, std::size_t rows, std::size_t cols) {
    std::vector<Complex> tmp(spectrum.begin(), spectrum.end());
    transform2d(tmp, rows, cols, true);
    std::vector<double> out(tmp.size());
    for (std::size_t i = 0; i < tmp.size(); ++i) out[i] = tmp[i].real();
    return out;
}

}  // namespace gridcorr::fft
