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

#include "gridcorr/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <unordered_set>

#include "gridcorr/fft.hpp"

namespace gridcorr {

using detail::Node;

namespace {

thread_local bool g_grad_enabled = true;

void round_to(Dtype dtype, std::vector<double>& data) {
    if (dtype != Dtype::Float32) return;
    for (auto& v : data) v = static_cast<double>(static_cast<float>(v));
}

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape())
        throw ShapeError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                         shape_string(b.shape()));
}

void require_defined(const char* op, const Tensor& t) {
    if (!t.defined()) throw ArgumentError(std::string(op) + ": undefined tensor");
}

}  // namespace

std::string shape_string(const Shape& shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
    os << ']';
    return os.str();
}

std::size_t shape_numel(const Shape& shape) {
    std::size_t n = 1;
    for (auto s : shape) n *= s;
    return n;
}

std::vector<double>& Node::grad_buffer() {
    if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
    return grad;
}

bool grad_enabled() noexcept { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

// ---- Tensor ----------------------------------------------------------------

Tensor Tensor::from_data(Shape shape, std::vector<double> data, Dtype dtype) {
    if (shape_numel(shape) != data.size())
        throw ShapeError("tensor: shape " + shape_string(shape) + " does not match buffer length " +
                         std::to_string(data.size()));
    auto node = std::make_shared<Node>();
    node->shape = std::move(shape);
    node->dtype = dtype;
    node->data = std::move(data);
    round_to(dtype, node->data);
    return Tensor(std::move(node));
}

Tensor Tensor::zeros(Shape shape, Dtype dtype) { return full(std::move(shape), 0.0, dtype); }

Tensor Tensor::full(Shape shape, double value, Dtype dtype) {
    const std::size_t n = shape_numel(shape);
    return from_data(std::move(shape), std::vector<double>(n, value), dtype);
}

Tensor Tensor::scalar(double value, Dtype dtype) { return from_data({1}, {value}, dtype); }

Tensor Tensor::leaf(Shape shape, std::vector<double> data, Dtype dtype) {
    Tensor t = from_data(std::move(shape), std::move(data), dtype);
    t.node_->requires_grad = true;
    return t;
}

const Shape& Tensor::shape() const {
    require_defined("shape", *this);
    return node_->shape;
}

std::size_t Tensor::dim(std::size_t i) const {
    const auto& s = shape();
    if (i >= s.size()) throw ShapeError("dim index out of range for " + shape_string(s));
    return s[i];
}

std::size_t Tensor::numel() const { return node_ ? node_->data.size() : 0; }
Dtype Tensor::dtype() const { return node_ ? node_->dtype : Dtype::Float64; }

std::span<const double> Tensor::data() const {
    require_defined("data", *this);
    return node_->data;
}

std::span<double> Tensor::mutable_data() {
    require_defined("mutable_data", *this);
    return node_->data;
}

double Tensor::item() const {
    if (numel() != 1) throw ShapeError("item: tensor " + shape_string(shape()) + " is not a scalar");
    return node_->data[0];
}

bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }

std::span<const double> Tensor::grad() const {
    require_defined("grad", *this);
    return node_->grad;
}

void Tensor::zero_grad() {
    if (node_) node_->grad.assign(node_->data.size(), 0.0);
}

Tensor Tensor::detach() const { return from_data(shape(), node_->data, node_->dtype); }

Tensor Tensor::reshape(Shape new_shape) const {
    if (shape_numel(new_shape) != numel())
        throw ShapeError("reshape: " + shape_string(shape()) + " -> " + shape_string(new_shape));
    std::vector<std::size_t> index(numel());
    for (std::size_t i = 0; i < index.size(); ++i) index[i] = i;
    return gather(*this, std::move(new_shape), std::move(index));
}

Tensor Tensor::make_result(Shape shape, std::vector<double> data, std::initializer_list<Tensor> inputs,
                           std::function<void(Node&)> backward) {
    return make_result(std::move(shape), std::move(data), std::span<const Tensor>(inputs.begin(), inputs.size()),
                       std::move(backward));
}

Tensor Tensor::make_result(Shape shape, std::vector<double> data, std::span<const Tensor> inputs,
                           std::function<void(Node&)> backward) {
    auto node = std::make_shared<Node>();
    node->shape = std::move(shape);
    node->data = std::move(data);
    bool any_grad = false;
    for (const auto& in : inputs) {
        require_defined("op input", in);
        if (in.dtype() == Dtype::Float32) node->dtype = Dtype::Float32;
        any_grad = any_grad || in.requires_grad();
    }
    round_to(node->dtype, node->data);
    if (any_grad && g_grad_enabled) {
        node->requires_grad = true;
        for (const auto& in : inputs) node->parents.push_back(in.node_);
        node->backward = std::move(backward);
    }
    return Tensor(std::move(node));
}

void accumulate_grad(const std::shared_ptr<Node>& parent, std::span<const double> values) {
    if (!parent || !parent->requires_grad) return;
    auto& g = parent->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += values[i];
}

// ---- parameters ------------------------------------------------------------

Parameter& ParameterSet::add(std::string name, Shape shape, std::vector<double> init, Dtype dtype) {
    if (contains(name)) throw ArgumentError("duplicate parameter name: " + name);
    items_.push_back(Parameter{std::move(name), Tensor::leaf(std::move(shape), std::move(init), dtype)});
    return items_.back();
}

Parameter& ParameterSet::get(const std::string& name) {
    for (auto& p : items_)
        if (p.name == name) return p;
    throw ArgumentError("unknown parameter: " + name);
}

const Parameter& ParameterSet::get(const std::string& name) const {
    for (const auto& p : items_)
        if (p.name == name) return p;
    throw ArgumentError("unknown parameter: " + name);
}

bool ParameterSet::contains(const std::string& name) const {
    return std::any_of(items_.begin(), items_.end(), [&](const Parameter& p) { return p.name == name; });
}

std::size_t ParameterSet::total_size() const {
    std::size_t n = 0;
    for (const auto& p : items_) n += p.value.numel();
    return n;
}

void ParameterSet::zero_grad() {
    for (auto& p : items_) p.value.zero_grad();
}

// ---- backward ----------------------------------------------------------------

void backward(const Tensor& loss) {
    if (!loss.defined() || loss.numel() != 1)
        throw ShapeError("backward: loss must be a scalar, got " +
                         (loss.defined() ? shape_string(loss.shape()) : std::string("undefined")));
    if (!loss.requires_grad()) return;

    // Iterative post-order DFS; every node appears once.
    std::vector<Node*> order;
    std::unordered_set<Node*> visited;
    std::vector<std::pair<Node*, std::size_t>> stack;
    Node* root = loss.node().get();
    stack.emplace_back(root, 0);
    visited.insert(root);
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->parents.size()) {
            Node* parent = node->parents[next++].get();
            if (parent->requires_grad && visited.insert(parent).second) stack.emplace_back(parent, 0);
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }

    root->grad_buffer()[0] += 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* node = *it;
        if (!node->backward) continue;  // leaf
        if (!node->grad.empty()) node->backward(*node);
        node->grad.clear();
        node->grad.shrink_to_fit();
    }
}

// ---- elementwise -------------------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b) {
    require_same_shape("add", a, b);
    std::vector<double> out(a.numel());
    auto x = a.data(), y = b.data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] + y[i];
    return Tensor::make_result(a.shape(), std::move(out), {a, b}, [](Node& self) {
        accumulate_grad(self.parents[0], self.grad);
        accumulate_grad(self.parents[1], self.grad);
    });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    require_same_shape("sub", a, b);
    std::vector<double> out(a.numel());
    auto x = a.data(), y = b.data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] - y[i];
    return Tensor::make_result(a.shape(), std::move(out), {a, b}, [](Node& self) {
        accumulate_grad(self.parents[0], self.grad);
        if (self.parents[1]->requires_grad) {
            auto& g = self.parents[1]->grad_buffer();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] -= self.grad[i];
        }
    });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    require_same_shape("mul", a, b);
    std::vector<double> out(a.numel());
    auto x = a.data(), y = b.data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * y[i];
    return Tensor::make_result(a.shape(), std::move(out), {a, b}, [](Node& self) {
        const auto& pa = self.parents[0];
        const auto& pb = self.parents[1];
        if (pa->requires_grad) {
            auto& g = pa->grad_buffer();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * pb->data[i];
        }
        if (pb->requires_grad) {
            auto& g = pb->grad_buffer();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * pa->data[i];
        }
    });
}

Tensor add(const Tensor& a, double b) {
    std::vector<double> out(a.data().begin(), a.data().end());
    for (auto& v : out) v += b;
    return Tensor::make_result(a.shape(), std::move(out), {a},
                               [](Node& self) { accumulate_grad(self.parents[0], self.grad); });
}

Tensor scale(const Tensor& a, double s) {
    std::vector<double> out(a.data().begin(), a.data().end());
    for (auto& v : out) v *= s;
    return Tensor::make_result(a.shape(), std::move(out), {a}, [s](Node& self) {
        auto& g = self.parents[0]->grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += s * self.grad[i];
    });
}

Tensor neg(const Tensor& a) { return scale(a, -1.0); }

Tensor mul_map(const Tensor& map, const Tensor& field) {
    if (map.ndim() != 2 || field.ndim() != 3 || field.dim(1) != map.dim(0) || field.dim(2) != map.dim(1))
        throw ShapeError("mul_map: map " + shape_string(map.shape()) + " does not broadcast over field " +
                         shape_string(field.shape()));
    const std::size_t plane = map.numel();
    const std::size_t channels = field.dim(0);
    std::vector<double> out(field.numel());
    auto m = map.data(), f = field.data();
    for (std::size_t c = 0; c < channels; ++c)
        for (std::size_t p = 0; p < plane; ++p) out[c * plane + p] = m[p] * f[c * plane + p];
    return Tensor::make_result(field.shape(), std::move(out), {map, field}, [plane, channels](Node& self) {
        const auto& pm = self.parents[0];
        const auto& pf = self.parents[1];
        if (pm->requires_grad) {
            auto& g = pm->grad_buffer();
            for (std::size_t c = 0; c < channels; ++c)
                for (std::size_t p = 0; p < plane; ++p) g[p] += self.grad[c * plane + p] * pf->data[c * plane + p];
        }
        if (pf->requires_grad) {
            auto& g = pf->grad_buffer();
            for (std::size_t c = 0; c < channels; ++c)
                for (std::size_t p = 0; p < plane; ++p) g[c * plane + p] += self.grad[c * plane + p] * pm->data[p];
        }
    });
}

Tensor axpy(double a, const Tensor& x, const Tensor& y) {
    require_same_shape("axpy", x, y);
    std::vector<double> out(x.numel());
    auto xs = x.data(), ys = y.data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * xs[i] + ys[i];
    return Tensor::make_result(x.shape(), std::move(out), {x, y}, [a](Node& self) {
        if (self.parents[0]->requires_grad) {
            auto& g = self.parents[0]->grad_buffer();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += a * self.grad[i];
        }
        accumulate_grad(self.parents[1], self.grad);
    });
}

Tensor sum(const Tensor& a) {
    double acc = 0.0;
    for (double v : a.data()) acc += v;
    return Tensor::make_result({1}, {acc}, {a}, [](Node& self) {
        auto& g = self.parents[0]->grad_buffer();
        for (auto& v : g) v += self.grad[0];
    });
}

Tensor mean(const Tensor& a) { return scale(sum(a), 1.0 / static_cast<double>(a.numel())); }

Tensor mse(const Tensor& pred, const Tensor& target) {
    require_same_shape("mse", pred, target);
    const auto p = pred.data(), t = target.data();
    const double n = static_cast<double>(pred.numel());
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double d = p[i] - t[i];
        acc += d * d;
    }
    return Tensor::make_result({1}, {acc / n}, {pred, target}, [n](Node& self) {
        const auto& pp = self.parents[0];
        const auto& pt = self.parents[1];
        const double s = 2.0 * self.grad[0] / n;
        if (pp->requires_grad) {
            auto& g = pp->grad_buffer();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += s * (pp->data[i] - pt->data[i]);
        }
        if (pt->requires_grad) {
            auto& g = pt->grad_buffer();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] -= s * (pp->data[i] - pt->data[i]);
        }
    });
}

Tensor gelu(const Tensor& x) {
    std::vector<double> out(x.numel());
    auto xs = x.data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = 0.5 * xs[i] * (1.0 + std::erf(xs[i] * std::numbers::sqrt2 / 2.0));
    return Tensor::make_result(x.shape(), std::move(out), {x}, [](Node& self) {
        const auto& px = self.parents[0];
        auto& g = px->grad_buffer();
        const double inv_sqrt_2pi = 0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2;
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double v = px->data[i];
            const double cdf = 0.5 * (1.0 + std::erf(v * std::numbers::sqrt2 / 2.0));
            const double pdf = inv_sqrt_2pi * std::exp(-0.5 * v * v);
            g[i] += self.grad[i] * (cdf + v * pdf);
        }
    });
}

// ---- structural --------------------------------------------------------------

Tensor gather(const Tensor& x, Shape out_shape, std::vector<std::size_t> index) {
    if (shape_numel(out_shape) != index.size())
        throw ShapeError("gather: index length does not match " + shape_string(out_shape));
    const auto xs = x.data();
    std::vector<double> out(index.size());
    for (std::size_t i = 0; i < index.size(); ++i) {
        if (index[i] >= xs.size()) throw ShapeError("gather: index out of range");
        out[i] = xs[index[i]];
    }
    auto idx = std::make_shared<const std::vector<std::size_t>>(std::move(index));
    return Tensor::make_result(std::move(out_shape), std::move(out), {x}, [idx](Node& self) {
        auto& g = self.parents[0]->grad_buffer();
        for (std::size_t i = 0; i < idx->size(); ++i) g[(*idx)[i]] += self.grad[i];
    });
}

Tensor slice_channels(const Tensor& x, std::size_t begin, std::size_t count) {
    if (x.ndim() != 3 || begin + count > x.dim(0))
        throw ShapeError("slice_channels: cannot take [" + std::to_string(begin) + ", " +
                         std::to_string(begin + count) + ") of " + shape_string(x.shape()));
    const std::size_t plane = x.dim(1) * x.dim(2);
    std::vector<double> out(x.data().begin() + begin * plane, x.data().begin() + (begin + count) * plane);
    return Tensor::make_result({count, x.dim(1), x.dim(2)}, std::move(out), {x}, [begin, plane](Node& self) {
        auto& g = self.parents[0]->grad_buffer();
        for (std::size_t i = 0; i < self.grad.size(); ++i) g[begin * plane + i] += self.grad[i];
    });
}

Tensor concat_channels(const std::vector<Tensor>& parts) {
    if (parts.empty()) throw ShapeError("concat_channels: no inputs");
    const auto& s0 = parts.front().shape();
    const std::size_t h = s0[s0.size() - 2], w = s0[s0.size() - 1];
    std::size_t channels = 0;
    std::vector<double> out;
    for (const auto& p : parts) {
        const auto& s = p.shape();
        if ((s.size() != 2 && s.size() != 3) || s[s.size() - 2] != h || s[s.size() - 1] != w)
            throw ShapeError("concat_channels: " + shape_string(s) + " incompatible with " + shape_string(s0));
        channels += s.size() == 3 ? s[0] : 1;
        out.insert(out.end(), p.data().begin(), p.data().end());
    }
    return Tensor::make_result({channels, h, w}, std::move(out), std::span<const Tensor>(parts), [](Node& self) {
        std::size_t offset = 0;
        for (const auto& parent : self.parents) {
            const std::size_t n = parent->data.size();
            accumulate_grad(parent, std::span<const double>(self.grad).subspan(offset, n));
            offset += n;
        }
    });
}

Tensor transpose_last2(const Tensor& x) {
    const auto& s = x.shape();
    if (s.size() < 2) throw ShapeError("transpose_last2: need at least 2 dims, got " + shape_string(s));
    const std::size_t h = s[s.size() - 2], w = s[s.size() - 1];
    const std::size_t batch = x.numel() / (h * w);
    Shape out_shape = s;
    std::swap(out_shape[s.size() - 2], out_shape[s.size() - 1]);
    std::vector<std::size_t> index(x.numel());
    for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t i = 0; i < w; ++i)
            for (std::size_t j = 0; j < h; ++j) index[b * h * w + i * h + j] = b * h * w + j * w + i;
    return gather(x, std::move(out_shape), std::move(index));
}

Tensor outer(const Tensor& a, const Tensor& b) {
    if (a.ndim() != 1 || b.ndim() != 1)
        throw ShapeError("outer: expected vectors, got " + shape_string(a.shape()) + " and " + shape_string(b.shape()));
    const std::size_t n = a.numel(), m = b.numel();
    std::vector<double> out(n * m);
    auto x = a.data(), y = b.data();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) out[i * m + j] = x[i] * y[j];
    return Tensor::make_result({n, m}, std::move(out), {a, b}, [n, m](Node& self) {
        const auto& pa = self.parents[0];
        const auto& pb = self.parents[1];
        if (pa->requires_grad) {
            auto& g = pa->grad_buffer();
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < m; ++j) g[i] += self.grad[i * m + j] * pb->data[j];
        }
        if (pb->requires_grad) {
            auto& g = pb->grad_buffer();
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < m; ++j) g[j] += self.grad[i * m + j] * pa->data[i];
        }
    });
}

// ---- spatial -----------------------------------------------------------------

namespace {

struct PlaneDims {
    std::size_t channels, h, w;
};

PlaneDims plane_dims(const char* op, const Tensor& field) {
    const auto& s = field.shape();
    if (s.size() == 2) return {1, s[0], s[1]};
    if (s.size() == 3) return {s[0], s[1], s[2]};
    throw ShapeError(std::string(op) + ": expected [H,W] or [C,H,W], got " + shape_string(s));
}

constexpr std::size_t kTaps = 5;
constexpr std::size_t kHalo = 2;

// Periodic copy with a halo of 2 on every side: (H+4) x (W+4) per channel.
std::vector<double> wrap_pad(std::span<const double> f, const PlaneDims& d) {
    const std::size_t ph = d.h + 2 * kHalo, pw = d.w + 2 * kHalo;
    std::vector<double> padded(d.channels * ph * pw);
    for (std::size_t c = 0; c < d.channels; ++c)
        for (std::size_t i = 0; i < ph; ++i) {
            const std::size_t src_i = (i + d.h - kHalo) % d.h;
            for (std::size_t j = 0; j < pw; ++j) {
                const std::size_t src_j = (j + d.w - kHalo) % d.w;
                padded[(c * ph + i) * pw + j] = f[(c * d.h + src_i) * d.w + src_j];
            }
        }
    return padded;
}

}  // namespace

Tensor cross_correlate2d(const Tensor& field, const Tensor& kernel) {
    const PlaneDims d = plane_dims("cross_correlate2d", field);
    if (kernel.shape() != Shape{kTaps, kTaps})
        throw ShapeError("cross_correlate2d: kernel must be 5x5, got " + shape_string(kernel.shape()));
    if (d.h < kTaps || d.w < kTaps)
        throw ShapeError("cross_correlate2d: field " + shape_string(field.shape()) + " smaller than 5x5");

    const std::size_t ph = d.h + 2 * kHalo, pw = d.w + 2 * kHalo;
    auto padded = std::make_shared<std::vector<double>>(wrap_pad(field.data(), d));
    const auto k = kernel.data();
    std::vector<double> out(field.numel(), 0.0);
    // Mirrored taps are added pairwise (within a row, then across rows), so an
    // antisymmetric kernel maps constants to exactly zero.
    std::vector<double> rows(kTaps * d.w);
    for (std::size_t c = 0; c < d.channels; ++c)
        for (std::size_t i = 0; i < d.h; ++i) {
            for (std::size_t a = 0; a < kTaps; ++a) {
                const double* p = &(*padded)[(c * ph + i + a) * pw];
                const double* ka = &k[a * kTaps];
                double* r = &rows[a * d.w];
                for (std::size_t j = 0; j < d.w; ++j)
                    r[j] = (ka[4] * p[j + 4] + ka[0] * p[j]) + (ka[3] * p[j + 3] + ka[1] * p[j + 1]) + ka[2] * p[j + 2];
            }
            double* orow = &out[(c * d.h + i) * d.w];
            const double *r0 = &rows[0], *r1 = r0 + d.w, *r2 = r1 + d.w, *r3 = r2 + d.w, *r4 = r3 + d.w;
            for (std::size_t j = 0; j < d.w; ++j) orow[j] = (r4[j] + r0[j]) + (r3[j] + r1[j]) + r2[j];
        }

    return Tensor::make_result(field.shape(), std::move(out), {field, kernel}, [d, padded, ph, pw](Node& self) {
        const auto& pf = self.parents[0];
        const auto& pk = self.parents[1];
        const auto& g = self.grad;
        if (pk->requires_grad) {
            auto& gk = pk->grad_buffer();
            for (std::size_t a = 0; a < kTaps; ++a)
                for (std::size_t b = 0; b < kTaps; ++b) {
                    double acc = 0.0;
                    for (std::size_t c = 0; c < d.channels; ++c)
                        for (std::size_t i = 0; i < d.h; ++i) {
                            const double* src = &(*padded)[(c * ph + i + a) * pw + b];
                            const double* grow = &g[(c * d.h + i) * d.w];
                            for (std::size_t j = 0; j < d.w; ++j) acc += src[j] * grow[j];
                        }
                    gk[a * kTaps + b] += acc;
                }
        }
        if (pf->requires_grad) {
            const auto& k = pk->data;
            std::vector<double> gpad(d.channels * ph * pw, 0.0);
            for (std::size_t c = 0; c < d.channels; ++c)
                for (std::size_t i = 0; i < d.h; ++i) {
                    const double* grow = &g[(c * d.h + i) * d.w];
                    for (std::size_t a = 0; a < kTaps; ++a) {
                        double* prow = &gpad[(c * ph + i + a) * pw];
                        for (std::size_t b = 0; b < kTaps; ++b) {
                            const double kv = k[a * kTaps + b];
                            double* dst = prow + b;
                            for (std::size_t j = 0; j < d.w; ++j) dst[j] += kv * grow[j];
                        }
                    }
                }
            auto& gf = pf->grad_buffer();
            for (std::size_t c = 0; c < d.channels; ++c)
                for (std::size_t i = 0; i < ph; ++i) {
                    const std::size_t dst_i = (i + d.h - kHalo) % d.h;
                    for (std::size_t j = 0; j < pw; ++j) {
                        const std::size_t dst_j = (j + d.w - kHalo) % d.w;
                        gf[(c * d.h + dst_i) * d.w + dst_j] += gpad[(c * ph + i) * pw + j];
                    }
                }
        }
    });
}

Tensor channel_mix(const Tensor& x, const Tensor& weights, const Tensor& bias) {
    if (x.ndim() != 3) throw ShapeError("channel_mix: expected [C,H,W], got " + shape_string(x.shape()));
    const std::size_t cin = x.dim(0);
    if (weights.ndim() != 2 || weights.dim(1) != cin)
        throw ShapeError("channel_mix: weights " + shape_string(weights.shape()) + " do not accept input " +
                         shape_string(x.shape()));
    const std::size_t cout = weights.dim(0);
    if (bias.shape() != Shape{cout})
        throw ShapeError("channel_mix: bias " + shape_string(bias.shape()) + " vs " + std::to_string(cout) + " outputs");
    const std::size_t plane = x.dim(1) * x.dim(2);
    const auto xs = x.data(), ws = weights.data(), bs = bias.data();
    std::vector<double> out(cout * plane);
    for (std::size_t o = 0; o < cout; ++o) {
        double* orow = &out[o * plane];
        std::fill(orow, orow + plane, bs[o]);
        for (std::size_t c = 0; c < cin; ++c) {
            const double w = ws[o * cin + c];
            const double* src = &xs[c * plane];
            for (std::size_t p = 0; p < plane; ++p) orow[p] += w * src[p];
        }
    }
    return Tensor::make_result({cout, x.dim(1), x.dim(2)}, std::move(out), {x, weights, bias},
                               [cin, cout, plane](Node& self) {
                                   const auto& px = self.parents[0];
                                   const auto& pw = self.parents[1];
                                   const auto& pb = self.parents[2];
                                   const auto& g = self.grad;
                                   if (px->requires_grad) {
                                       auto& gx = px->grad_buffer();
                                       for (std::size_t o = 0; o < cout; ++o)
                                           for (std::size_t c = 0; c < cin; ++c) {
                                               const double w = pw->data[o * cin + c];
                                               double* dst = &gx[c * plane];
                                               const double* src = &g[o * plane];
                                               for (std::size_t p = 0; p < plane; ++p) dst[p] += w * src[p];
                                           }
                                   }
                                   if (pw->requires_grad) {
                                       auto& gw = pw->grad_buffer();
                                       for (std::size_t o = 0; o < cout; ++o)
                                           for (std::size_t c = 0; c < cin; ++c) {
                                               double acc = 0.0;
                                               const double* a = &g[o * plane];
                                               const double* b = &px->data[c * plane];
                                               for (std::size_t p = 0; p < plane; ++p) acc += a[p] * b[p];
                                               gw[o * cin + c] += acc;
                                           }
                                   }
                                   if (pb->requires_grad) {
                                       auto& gb = pb->grad_buffer();
                                       for (std::size_t o = 0; o < cout; ++o) {
                                           double acc = 0.0;
                                           for (std::size_t p = 0; p < plane; ++p) acc += g[o * plane + p];
                                           gb[o] += acc;
                                       }
                                   }
                               });
}

Tensor fft2(const Tensor& field) {
    if (field.ndim() != 2) throw ShapeError("fft2: expected a 2D field, got " + shape_string(field.shape()));
    const std::size_t h = field.dim(0), w = field.dim(1);
    const auto spec = fft::forward_real(field.data(), h, w);
    std::vector<double> out(2 * spec.size());
    for (std::size_t i = 0; i < spec.size(); ++i) {
        out[2 * i] = spec[i].real();
        out[2 * i + 1] = spec[i].imag();
    }
    return Tensor::make_result({h, w, 2}, std::move(out), {field}, [h, w](Node& self) {
        // d/dx of a real loss through an unnormalized DFT: Re(sum_k g_k e^{+i theta}).
        std::vector<fft::Complex> g(h * w);
        for (std::size_t i = 0; i < g.size(); ++i) g[i] = {self.grad[2 * i], self.grad[2 * i + 1]};
        fft::transform2d(g, h, w, true);
        const double n = static_cast<double>(h * w);
        auto& gx = self.parents[0]->grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += n * g[i].real();
    });
}

Tensor ifft2(const Tensor& spectrum) {
    if (spectrum.ndim() != 3 || spectrum.dim(2) != 2)
        throw ShapeError("ifft2: expected [H,W,2] spectrum, got " + shape_string(spectrum.shape()));
    const std::size_t h = spectrum.dim(0), w = spectrum.dim(1);
    const auto s = spectrum.data();
    std::vector<fft::Complex> spec(h * w);
    for (std::size_t i = 0; i < spec.size(); ++i) spec[i] = {s[2 * i], s[2 * i + 1]};
    auto out = fft::inverse_real(spec, h, w);
    return Tensor::make_result({h, w}, std::move(out), {spectrum}, [h, w](Node& self) {
        const auto g = fft::forward_real(self.grad, h, w);
        const double inv_n = 1.0 / static_cast<double>(h * w);
        auto& gs = self.parents[0]->grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) {
            gs[2 * i] += inv_n * g[i].real();
            gs[2 * i + 1] += inv_n * g[i].imag();
        }
    });
}

namespace {

// Twiddle tables for the truncated transform. Row r of the retained set
// addresses frequency kx = r for r < m and H - 2m + r otherwise.
struct SpectralTables {
    std::size_t h, w, m;
    std::vector<double> cw, sw;  // [m][W]: cos/sin(2 pi ky j / W)
    std::vector<double> ch, sh;  // [2m][H]: cos/sin(2 pi kx_r i / H)

    SpectralTables(std::size_t h_, std::size_t w_, std::size_t m_) : h(h_), w(w_), m(m_) {
        cw.resize(m * w);
        sw.resize(m * w);
        for (std::size_t ky = 0; ky < m; ++ky)
            for (std::size_t j = 0; j < w; ++j) {
                const double a = 2.0 * std::numbers::pi * static_cast<double>((ky * j) % w) / static_cast<double>(w);
                cw[ky * w + j] = std::cos(a);
                sw[ky * w + j] = std::sin(a);
            }
        ch.resize(2 * m * h);
        sh.resize(2 * m * h);
        for (std::size_t r = 0; r < 2 * m; ++r) {
            const std::size_t kx = r < m ? r : h - 2 * m + r;
            for (std::size_t i = 0; i < h; ++i) {
                const double a = 2.0 * std::numbers::pi * static_cast<double>((kx * i) % h) / static_cast<double>(h);
                ch[r * h + i] = std::cos(a);
                sh[r * h + i] = std::sin(a);
            }
        }
    }
};

}  // namespace

Tensor spectral_conv2d(const Tensor& x, const Tensor& weights, std::size_t modes) {
    if (x.ndim() != 3) throw ShapeError("spectral_conv2d: expected [C,H,W], got " + shape_string(x.shape()));
    const std::size_t cin = x.dim(0), h = x.dim(1), w = x.dim(2), m = modes;
    if (m == 0 || h < 2 * m || w < 2 * m)
        throw ShapeError("spectral_conv2d: modes " + std::to_string(m) + " too large for grid " +
                         shape_string(x.shape()));
    if (weights.ndim() != 6 || weights.dim(0) != 2 || weights.dim(1) != cin || weights.dim(3) != m ||
        weights.dim(4) != m || weights.dim(5) != 2)
        throw ShapeError("spectral_conv2d: weights " + shape_string(weights.shape()) + " incompatible with input " +
                         shape_string(x.shape()) + " and modes " + std::to_string(m));
    const std::size_t cout = weights.dim(2);
    const std::size_t rows = 2 * m;
    auto tab = std::make_shared<const SpectralTables>(h, w, m);
    const auto xs = x.data();
    const auto R = weights.data();
    auto widx = [cin, cout, m](std::size_t b, std::size_t c, std::size_t o, std::size_t q, std::size_t ky) {
        return ((((b * cin + c) * cout + o) * m + q) * m + ky) * 2;
    };

    // A[c][i][ky] = sum_j x e^{-i 2pi ky j/W}
    std::vector<double> are(cin * h * m), aim(cin * h * m);
    for (std::size_t c = 0; c < cin; ++c)
        for (std::size_t i = 0; i < h; ++i) {
            const double* row = &xs[(c * h + i) * w];
            for (std::size_t ky = 0; ky < m; ++ky) {
                const double* cs = &tab->cw[ky * w];
                const double* sn = &tab->sw[ky * w];
                double re = 0.0, im = 0.0;
                for (std::size_t j = 0; j < w; ++j) {
                    re += row[j] * cs[j];
                    im -= row[j] * sn[j];
                }
                are[(c * h + i) * m + ky] = re;
                aim[(c * h + i) * m + ky] = im;
            }
        }

    // X[c][r][ky] = sum_i A e^{-i 2pi kx_r i/H}
    auto xre = std::make_shared<std::vector<double>>(cin * rows * m, 0.0);
    auto xim = std::make_shared<std::vector<double>>(cin * rows * m, 0.0);
    for (std::size_t c = 0; c < cin; ++c)
        for (std::size_t r = 0; r < rows; ++r) {
            double* dre = &(*xre)[(c * rows + r) * m];
            double* dim_ = &(*xim)[(c * rows + r) * m];
            for (std::size_t i = 0; i < h; ++i) {
                const double cr = tab->ch[r * h + i], sr = tab->sh[r * h + i];
                const double* sre = &are[(c * h + i) * m];
                const double* sim = &aim[(c * h + i) * m];
                for (std::size_t ky = 0; ky < m; ++ky) {
                    dre[ky] += sre[ky] * cr + sim[ky] * sr;
                    dim_[ky] += sim[ky] * cr - sre[ky] * sr;
                }
            }
        }

    // Z[o][r][ky] = sum_c R X
    std::vector<double> zre(cout * rows * m, 0.0), zim(cout * rows * m, 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t b = r < m ? 0 : 1, q = r < m ? r : r - m;
        for (std::size_t c = 0; c < cin; ++c) {
            const double* sre = &(*xre)[(c * rows + r) * m];
            const double* sim = &(*xim)[(c * rows + r) * m];
            for (std::size_t o = 0; o < cout; ++o) {
                const double* wr = &R[widx(b, c, o, q, 0)];
                double* dre = &zre[(o * rows + r) * m];
                double* dim_ = &zim[(o * rows + r) * m];
                for (std::size_t ky = 0; ky < m; ++ky) {
                    const double wre = wr[2 * ky], wim = wr[2 * ky + 1];
                    dre[ky] += wre * sre[ky] - wim * sim[ky];
                    dim_[ky] += wre * sim[ky] + wim * sre[ky];
                }
            }
        }
    }

    // B[o][i][ky] = sum_r Z e^{+i 2pi kx_r i/H};  out = Re sum_ky B e^{+i 2pi ky j/W} / (HW)
    const double inv_n = 1.0 / static_cast<double>(h * w);
    std::vector<double> out(cout * h * w, 0.0);
    std::vector<double> bre(m), bim(m);
    for (std::size_t o = 0; o < cout; ++o)
        for (std::size_t i = 0; i < h; ++i) {
            std::fill(bre.begin(), bre.end(), 0.0);
            std::fill(bim.begin(), bim.end(), 0.0);
            for (std::size_t r = 0; r < rows; ++r) {
                const double cr = tab->ch[r * h + i], sr = tab->sh[r * h + i];
                const double* sre = &zre[(o * rows + r) * m];
                const double* sim = &zim[(o * rows + r) * m];
                for (std::size_t ky = 0; ky < m; ++ky) {
                    bre[ky] += sre[ky] * cr - sim[ky] * sr;
                    bim[ky] += sim[ky] * cr + sre[ky] * sr;
                }
            }
            double* orow = &out[(o * h + i) * w];
            for (std::size_t ky = 0; ky < m; ++ky) {
                const double* cs = &tab->cw[ky * w];
                const double* sn = &tab->sw[ky * w];
                const double br = bre[ky] * inv_n, bi = bim[ky] * inv_n;
                for (std::size_t j = 0; j < w; ++j) orow[j] += br * cs[j] - bi * sn[j];
            }
        }

    return Tensor::make_result(
        {cout, h, w}, std::move(out), {x, weights},
        [=](Node& self) {
            const auto& px = self.parents[0];
            const auto& pw = self.parents[1];
            const auto& g = self.grad;
            const auto& Rw = pw->data;

            // gB[o][i][ky] = sum_j g e^{-i 2pi ky j/W} / (HW)
            std::vector<double> gbre(cout * h * m), gbim(cout * h * m);
            for (std::size_t o = 0; o < cout; ++o)
                for (std::size_t i = 0; i < h; ++i) {
                    const double* grow = &g[(o * h + i) * w];
                    for (std::size_t ky = 0; ky < m; ++ky) {
                        const double* cs = &tab->cw[ky * w];
                        const double* sn = &tab->sw[ky * w];
                        double re = 0.0, im = 0.0;
                        for (std::size_t j = 0; j < w; ++j) {
                            re += grow[j] * cs[j];
                            im -= grow[j] * sn[j];
                        }
                        gbre[(o * h + i) * m + ky] = re * inv_n;
                        gbim[(o * h + i) * m + ky] = im * inv_n;
                    }
                }

            // gZ[o][r][ky] = sum_i gB e^{-i 2pi kx_r i/H}
            std::vector<double> gzre(cout * rows * m, 0.0), gzim(cout * rows * m, 0.0);
            for (std::size_t o = 0; o < cout; ++o)
                for (std::size_t r = 0; r < rows; ++r) {
                    double* dre = &gzre[(o * rows + r) * m];
                    double* dim_ = &gzim[(o * rows + r) * m];
                    for (std::size_t i = 0; i < h; ++i) {
                        const double cr = tab->ch[r * h + i], sr = tab->sh[r * h + i];
                        const double* sre = &gbre[(o * h + i) * m];
                        const double* sim = &gbim[(o * h + i) * m];
                        for (std::size_t ky = 0; ky < m; ++ky) {
                            dre[ky] += sre[ky] * cr + sim[ky] * sr;
                            dim_[ky] += sim[ky] * cr - sre[ky] * sr;
                        }
                    }
                }

            // gX = sum_o conj(R) gZ ; gR += conj(X) gZ
            std::vector<double> gxre(cin * rows * m, 0.0), gxim(cin * rows * m, 0.0);
            std::vector<double>* gR = pw->requires_grad ? &pw->grad_buffer() : nullptr;
            for (std::size_t r = 0; r < rows; ++r) {
                const std::size_t b = r < m ? 0 : 1, q = r < m ? r : r - m;
                for (std::size_t c = 0; c < cin; ++c) {
                    const double* sxre = &(*xre)[(c * rows + r) * m];
                    const double* sxim = &(*xim)[(c * rows + r) * m];
                    double* dre = &gxre[(c * rows + r) * m];
                    double* dim_ = &gxim[(c * rows + r) * m];
                    for (std::size_t o = 0; o < cout; ++o) {
                        const std::size_t base = widx(b, c, o, q, 0);
                        const double* wr = &Rw[base];
                        const double* gre = &gzre[(o * rows + r) * m];
                        const double* gim = &gzim[(o * rows + r) * m];
                        for (std::size_t ky = 0; ky < m; ++ky) {
                            const double wre = wr[2 * ky], wim = wr[2 * ky + 1];
                            dre[ky] += wre * gre[ky] + wim * gim[ky];
                            dim_[ky] += wre * gim[ky] - wim * gre[ky];
                        }
                        if (gR) {
                            double* dst = &(*gR)[base];
                            for (std::size_t ky = 0; ky < m; ++ky) {
                                dst[2 * ky] += sxre[ky] * gre[ky] + sxim[ky] * gim[ky];
                                dst[2 * ky + 1] += sxre[ky] * gim[ky] - sxim[ky] * gre[ky];
                            }
                        }
                    }
                }
            }

            if (!px->requires_grad) return;
            // gA[c][i][ky] = sum_r gX e^{+i 2pi kx_r i/H};  gx = Re sum_ky gA e^{+i 2pi ky j/W}
            auto& gx = px->grad_buffer();
            std::vector<double> tre(m), tim(m);
            for (std::size_t c = 0; c < cin; ++c)
                for (std::size_t i = 0; i < h; ++i) {
                    std::fill(tre.begin(), tre.end(), 0.0);
                    std::fill(tim.begin(), tim.end(), 0.0);
                    for (std::size_t r = 0; r < rows; ++r) {
                        const double cr = tab->ch[r * h + i], sr = tab->sh[r * h + i];
                        const double* sre = &gxre[(c * rows + r) * m];
                        const double* sim = &gxim[(c * rows + r) * m];
                        for (std::size_t ky = 0; ky < m; ++ky) {
                            tre[ky] += sre[ky] * cr - sim[ky] * sr;
                            tim[ky] += sim[ky] * cr + sre[ky] * sr;
                        }
                    }
                    double* dst = &gx[(c * h + i) * w];
                    for (std::size_t ky = 0; ky < m; ++ky) {
                        const double* cs = &tab->cw[ky * w];
                        const double* sn = &tab->sw[ky * w];
                        for (std::size_t j = 0; j < w; ++j) dst[j] += tre[ky] * cs[j] - tim[ky] * sn[j];
                    }
                }
        });
}

bool all_finite(const Tensor& x) {
    for (double v : x.data())
        if (!std::isfinite(v)) return false;
    return true;
}

double max_abs(const Tensor& x) {
    double m = 0.0;
    for (double v : x.data()) {
        if (std::isnan(v)) return v;
        m = std::max(m, std::abs(v));
    }
    return m;
}

}  // namespace gridcorr
