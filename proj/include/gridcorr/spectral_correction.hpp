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
#include <random>
#include <string>
#include <vector>

#include "gridcorr/tensor.hpp"

/// Fourier-layer networks used for the correction block and the NN block.
namespace gridcorr {

struct BlockConfig {
    std::size_t layers = 2;
    std::size_t modes = 12;
    std::size_t width = 12;
    std::size_t in_channels = 2;
    std::size_t out_channels = 2;
    std::size_t projection = 50;  // hidden width of the output head
    bool output_bias = true;  // off when the output only feeds derivatives

    void validate() const;
    /// Throws if the retained modes do not fit an n x n grid.
    void validate_grid(std::size_t n) const;
};

/// Closed-form trainable parameter count of a block.
std::size_t block_parameter_count(const BlockConfig& cfg);

/// gelu(channel_mix(v, W, b) + spectral_conv(v, R)); R is [2,width,width,modes,modes,2].
Tensor spectral_layer_forward(const Tensor& v, const Tensor& spectral, const Tensor& weight, const Tensor& bias,
                              std::size_t modes);

/// Zeroes every entry of a [H,W,2] spectrum outside the retained block
/// (rows [0,m) and [H-m,H), columns [0,m)).
Tensor truncate_spectrum(const Tensor& spectrum, std::size_t modes);

/// Lift P, L spectral layers, head Q = fc2(gelu(fc1(.))).
///
/// Parameters are registered in the caller's ParameterSet under `prefix`.
/// The block keeps shared handles to them, so in-place updates to the set
/// are visible here.
class SpectralBlock {
  public:
    SpectralBlock() = default;
    SpectralBlock(const std::string& prefix, const BlockConfig& cfg, ParameterSet& params, std::mt19937_64& rng,
                  Dtype dtype, bool zero_head);

    Tensor forward(const Tensor& x) const;
    const BlockConfig& config() const { return cfg_; }
    bool defined() const { return lift_w_.defined(); }

  private:
    struct Layer {
        Tensor spectral, weight, bias;
    };
    BlockConfig cfg_;
    Tensor lift_w_, lift_b_;
    std::vector<Layer> layers_;
    Tensor fc1_w_, fc1_b_, fc2_w_, fc2_b_;
};

/// u + block(u).
Tensor correction_block_forward(const SpectralBlock& block, const Tensor& u);

/// block(stack); the stack channel count must match the block input.
Tensor nn_block_forward(const SpectralBlock& block, const Tensor& stack);

}  // namespace gridcorr
