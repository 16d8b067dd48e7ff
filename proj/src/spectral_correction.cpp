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

#include "gridcorr/spectral_correction.hpp"

#include <cmath>

namespace gridcorr {

void BlockConfig::validate() const {
    if (layers < 1) throw ArgumentError("block: layer count must be >= 1");
    if (modes < 1) throw ArgumentError("block: modes must be >= 1");
    if (width < 1 || in_channels < 1 || out_channels < 1 || projection < 1)
        throw ArgumentError("block: widths and channel counts must be >= 1");
}

void BlockConfig::validate_grid(std::size_t n) const {
    if (2 * modes > n)
        throw ShapeError("block: " + std::to_string(modes) + " modes do not fit a " + std::to_string(n) + "^2 grid");
}

std::size_t block_parameter_count(const BlockConfig& c) {
    const std::size_t lift = c.in_channels * c.width + c.width;
    const std::size_t layer = 2 * c.width * c.width * c.modes * c.modes * 2 + c.width * c.width + c.width;
    const std::size_t head = c.width * c.projection + c.projection + c.projection * c.out_channels +
                             (c.output_bias ? c.out_channels : 0);
    return lift + c.layers * layer + head;
}

Tensor spectral_layer_forward(const Tensor& v, const Tensor& spectral, const Tensor& weight, const Tensor& bias,
                              std::size_t modes) {
    return gelu(add(channel_mix(v, weight, bias), spectral_conv2d(v, spectral, modes)));
}

Tensor truncate_spectrum(const Tensor& spectrum, std::size_t modes) {
    if (spectrum.ndim() != 3 || spectrum.dim(2) != 2)
        throw ShapeError("truncate_spectrum: expected [H,W,2], got " + shape_string(spectrum.shape()));
    const std::size_t h = spectrum.dim(0), w = spectrum.dim(1);
    if (2 * modes > h || modes > w) throw ShapeError("truncate_spectrum: too many modes for the spectrum");
    std::vector<double> mask(spectrum.numel(), 0.0);
    for (std::size_t i = 0; i < h; ++i) {
        if (i >= modes && i < h - modes) continue;
        for (std::size_t j = 0; j < modes; ++j) mask[(i * w + j) * 2] = mask[(i * w + j) * 2 + 1] = 1.0;
    }
    return mul(spectrum, Tensor::from_data(spectrum.shape(), std::move(mask), spectrum.dtype()));
}

namespace {

std::vector<double> uniform(std::size_t n, double bound, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(-bound, bound);
    std::vector<double> out(n);
    for (double& v : out) v = dist(rng);
    return out;
}

}  // namespace

SpectralBlock::SpectralBlock(const std::string& prefix, const BlockConfig& cfg, ParameterSet& params,
                             std::mt19937_64& rng, Dtype dtype, bool zero_head)
    : cfg_(cfg) {
    cfg_.validate();
    const std::size_t w = cfg.width, m = cfg.modes, p = cfg.projection;
    auto dense = [&](const std::string& name, std::size_t out, std::size_t in, bool zero) {
        const double bound = zero ? 0.0 : 1.0 / std::sqrt(static_cast<double>(in));
        Tensor weight = params.add(prefix + name + ".weight", {out, in}, uniform(out * in, bound, rng), dtype).value;
        Tensor bias = params.add(prefix + name + ".bias", {out}, uniform(out, bound, rng), dtype).value;
        return std::pair{weight, bias};
    };
    std::tie(lift_w_, lift_b_) = dense(".lift", w, cfg.in_channels, false);
    const double s = 1.0 / static_cast<double>(w * w);
    for (std::size_t l = 0; l < cfg.layers; ++l) {
        const std::string base = prefix + ".layer" + std::to_string(l);
        Layer layer;
        layer.spectral =
            params.add(base + ".spectral", {2, w, w, m, m, 2}, uniform(2 * w * w * m * m * 2, s, rng), dtype).value;
        std::tie(layer.weight, layer.bias) = dense(".layer" + std::to_string(l), w, w, false);
        layers_.push_back(layer);
    }
    std::tie(fc1_w_, fc1_b_) = dense(".head1", p, w, false);
    if (cfg.output_bias) {
        std::tie(fc2_w_, fc2_b_) = dense(".head2", cfg.out_channels, p, zero_head);
    } else {
        const double bound = zero_head ? 0.0 : 1.0 / std::sqrt(static_cast<double>(p));
        fc2_w_ = params.add(prefix + ".head2.weight", {cfg.out_channels, p}, uniform(cfg.out_channels * p, bound, rng), dtype)
                     .value;
        fc2_b_ = Tensor::zeros({cfg.out_channels}, dtype);
    }
}

Tensor SpectralBlock::forward(const Tensor& x) const {
    if (!defined()) throw ArgumentError("spectral block used before construction");
    if (x.ndim() != 3 || x.dim(0) != cfg_.in_channels)
        throw ShapeError("spectral block expects " + std::to_string(cfg_.in_channels) + " input channels, got " +
                         shape_string(x.shape()));
    cfg_.validate_grid(std::min(x.dim(1), x.dim(2)));
    Tensor v = channel_mix(x, lift_w_, lift_b_);
    for (const Layer& layer : layers_) v = spectral_layer_forward(v, layer.spectral, layer.weight, layer.bias, cfg_.modes);
    return channel_mix(gelu(channel_mix(v, fc1_w_, fc1_b_)), fc2_w_, fc2_b_);
}

Tensor correction_block_forward(const SpectralBlock& block, const Tensor& u) {
    if (block.config().in_channels != block.config().out_channels)
        throw ShapeError("correction block must map a state onto itself");
    return add(u, block.forward(u));
}

Tensor nn_block_forward(const SpectralBlock& block, const Tensor& stack) { return block.forward(stack); }

}  // namespace gridcorr
