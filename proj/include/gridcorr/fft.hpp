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

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

/// Discrete Fourier transforms on contiguous complex buffers.
///
/// Convention used throughout the project: the forward transform is
/// unnormalized, X[k] = sum_n x[n] exp(-2 pi i k n / N), and the inverse
/// carries the 1/N factor. Backed by FFTW; any length is supported.
namespace gridcorr::fft {

using Complex = std::complex<double>;

/// In-place 1D transform. The inverse is *not* scaled by 1/N here.
void transform(std::span<Complex> line, bool inverse);

/// In-place 2D transform of a row-major rows x cols buffer. The inverse is
/// scaled by 1/(rows*cols).
void transform2d(std::span<Complex> data, std::size_t rows, std::size_t cols, bool inverse);

/// Forward 2D transform of a real field.
std::vector<Complex> forward_real(std::span<const double> field, std::size_t rows, std::size_t cols);

/// Inverse 2D transform, returning the real part.
std::vector<double> inverse_real(std::span<const Complex> spectrum, std::size_t rows, std::size_t cols);

/// Signed frequency index of bin k for a length-n transform (k <= n/2 maps to
/// itself, larger bins wrap to k - n).
inline long signed_frequency(std::size_t k, std::size_t n) {
    return k <= n / 2 ? static_cast<long>(k) : static_cast<long>(k) - static_cast<long>(n);
}

}  // namespace gridcorr::fft
