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
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "gridcorr/error.hpp"

/// Minimal reverse-mode differentiable array core.
///
/// A Tensor is a cheap handle onto a graph node holding a row-major buffer.
/// Every op whose inputs require gradients records its parents and a backward
/// closure on the result; the graph formed by those links is the tape.
/// `backward(loss)` walks it once in reverse topological order and accumulates
/// gradients additively into leaf tensors (Parameters). Intermediate gradients
/// are released as soon as they have been propagated.
///
/// Storage is always double. A float32 tensor rounds every value it produces
/// to single precision, so numerics follow float32 while the rest of the code
/// stays monomorphic.
namespace gridcorr {

enum class Dtype : std::uint8_t { Float32 = 0, Float64 = 1 };

using Shape = std::vector<std::size_t>;

std::string shape_string(const Shape& shape);
std::size_t shape_numel(const Shape& shape);

class Tensor;

namespace detail {

struct Node {
    Shape shape;
    Dtype dtype = Dtype::Float64;
    std::vector<double> data;
    std::vector<double> grad;
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(Node&)> backward;

    /// Gradient buffer, zero-initialized on first use.
    std::vector<double>& grad_buffer();
};

}  // namespace detail

/// True while graph recording is enabled on this thread (the default).
bool grad_enabled() noexcept;

/// Disables graph recording for the lifetime of the guard.
class NoGradGuard {
  public:
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

  private:
    bool previous_;
};

class Tensor {
  public:
    Tensor() = default;

    static Tensor zeros(Shape shape, Dtype dtype = Dtype::Float64);
    static Tensor full(Shape shape, double value, Dtype dtype = Dtype::Float64);
    static Tensor from_data(Shape shape, std::vector<double> data, Dtype dtype = Dtype::Float64);
    static Tensor scalar(double value, Dtype dtype = Dtype::Float64);

    /// Leaf tensor that accumulates gradients during backward.
    static Tensor leaf(Shape shape, std::vector<double> data, Dtype dtype = Dtype::Float64);

    bool defined() const noexcept { return node_ != nullptr; }
    const Shape& shape() const;
    std::size_t ndim() const { return shape().size(); }
    std::size_t dim(std::size_t i) const;
    std::size_t numel() const;
    Dtype dtype() const;

    std::span<const double> data() const;
    /// Writable view; only meaningful on leaves and freshly built tensors.
    std::span<double> mutable_data();
    double item() const;
    double at(std::size_t flat) const { return data()[flat]; }

    bool requires_grad() const;
    /// Gradient accumulated by backward; empty span if none has arrived.
    std::span<const double> grad() const;
    void zero_grad();

    /// Same values, no graph history.
    Tensor detach() const;
    Tensor reshape(Shape shape) const;

    /// Internal: result construction for ops defined outside this file.
    static Tensor make_result(Shape shape, std::vector<double> data, std::initializer_list<Tensor> inputs,
                              std::function<void(detail::Node&)> backward);
    static Tensor make_result(Shape shape, std::vector<double> data, std::span<const Tensor> inputs,
                              std::function<void(detail::Node&)> backward);
    const std::shared_ptr<detail::Node>& node() const { return node_; }

  private:
    explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
    std::shared_ptr<detail::Node> node_;
};

/// Accumulates `values` into `parent`'s gradient when it requires one.
void accumulate_grad(const std::shared_ptr<detail::Node>& parent, std::span<const double> values);

/// Named trainable tensor.
struct Parameter {
    std::string name;
    Tensor value;

    std::span<const double> gradient() const { return value.grad(); }
};

/// Ordered collection of parameters with unique names.
class ParameterSet {
  public:
    Parameter& add(std::string name, Shape shape, std::vector<double> init, Dtype dtype = Dtype::Float64);
    Parameter& get(const std::string& name);
    const Parameter& get(const std::string& name) const;
    bool contains(const std::string& name) const;

    std::vector<Parameter>& items() { return items_; }
    const std::vector<Parameter>& items() const { return items_; }
    std::size_t total_size() const;
    void zero_grad();

  private:
    std::vector<Parameter> items_;
};

/// Runs reverse-mode differentiation from a scalar loss.
void backward(const Tensor& loss);

// ---- elementwise ----------------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, double b);
Tensor scale(const Tensor& a, double s);
Tensor neg(const Tensor& a);

/// Multiplies each channel of a [C,H,W] tensor by the same [H,W] map.
Tensor mul_map(const Tensor& map, const Tensor& field);

/// a*x + y with a scalar; convenience for integrator stages.
Tensor axpy(double a, const Tensor& x, const Tensor& y);

Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
Tensor mse(const Tensor& pred, const Tensor& target);

/// Exact (erf-based) GELU.
Tensor gelu(const Tensor& x);

// ---- structural -----------------------------------------------------------

/// out.flat[i] = x.flat[index[i]]; backward scatters-adds.
Tensor gather(const Tensor& x, Shape out_shape, std::vector<std::size_t> index);
/// Channels [begin, begin+count) of a [C,H,W] tensor.
Tensor slice_channels(const Tensor& x, std::size_t begin, std::size_t count);
/// Concatenates [C_i,H,W] tensors (or [H,W], treated as one channel) along channels.
Tensor concat_channels(const std::vector<Tensor>& parts);
/// Swaps the last two axes.
Tensor transpose_last2(const Tensor& x);
/// Outer product of two vectors: [n] x [m] -> [n,m].
Tensor outer(const Tensor& a, const Tensor& b);

// ---- spatial --------------------------------------------------------------

/// Circular 5x5 cross-correlation applied to every channel of a [C,H,W] (or
/// [H,W]) field: out[i,j] = sum kernel[k2+2,k1+2] * field[(i+k2)%H, (j+k1)%W].
Tensor cross_correlate2d(const Tensor& field, const Tensor& kernel);

/// Per-pixel affine map across channels: [Cin,H,W] -> [Cout,H,W].
Tensor channel_mix(const Tensor& x, const Tensor& weights, const Tensor& bias);

/// 2D DFT of a real [H,W] field -> [H,W,2] (re, im); unnormalized.
Tensor fft2(const Tensor& field);
/// Real part of the 2D inverse DFT of a [H,W,2] spectrum, scaled by 1/(HW).
Tensor ifft2(const Tensor& spectrum);

/// Truncated Fourier-space channel mix on [Cin,H,W].
///
/// weights has shape [2, Cin, Cout, modes, modes, 2]: block 0 mixes rows
/// kx in [0, modes), block 1 rows kx in [H-modes, H); columns ky in [0, modes).
/// Output is the real part of the inverse DFT of the mixed, zero-padded
/// spectrum.
Tensor spectral_conv2d(const Tensor& x, const Tensor& weights, std::size_t modes);

/// True if every value is finite.
bool all_finite(const Tensor& x);
double max_abs(const Tensor& x);

}  // namespace gridcorr
