#pragma once

// Layer kernels with forward and backward passes. Activations are (H, W, C)
// row-major tensors; vectors are rank-1 tensors or spans.
//
// Parameter layouts:
//   conv2d weights  (kernel, kernel, in_channels, out_channels), then bias[out]
//   dense weights   (out_features, in_features),                 then bias[out]

#include <algorithm>
#include <cmath>
#include <concepts>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "leafnet/error.hpp"
#include "leafnet/tensor.hpp"

namespace leafnet::nn {

inline std::size_t conv_output_extent(std::size_t in, std::size_t kernel, std::size_t stride, std::size_t padding) {
    if (stride == 0 || kernel == 0 || kernel > in + 2 * padding) {
        throw Error(ErrorCode::InvalidShape, "kernel " + std::to_string(kernel) + " does not fit input extent " +
                                                 std::to_string(in) + " with padding " + std::to_string(padding));
    }
    return (in + 2 * padding - kernel) / stride + 1;
}

inline std::size_t pool_output_extent(std::size_t in, std::size_t window, std::size_t stride) {
    if (stride == 0 || window == 0 || window > in) {
        throw Error(ErrorCode::InvalidShape,
                    "pool window " + std::to_string(window) + " exceeds input extent " + std::to_string(in));
    }
    return (in - window) / stride + 1;
}

// ---------------------------------------------------------------- conv2d

/// Cross-correlation with zero padding:
///   out[i,j,o] = bias[o] + sum in[i*s+di-p, j*s+dj-p, c] * w[di,dj,c,o]
template <std::floating_point T>
Tensor<T> conv2d_forward(const Tensor<T>& input, std::span<const T> weights, std::span<const T> bias,
                         std::size_t kernel, std::size_t stride, std::size_t padding) {
    if (input.rank() != 3) {
        throw Error(ErrorCode::InvalidShape, "conv2d expects (H, W, C) input, got " + shape_string(input.shape()));
    }
    const std::size_t in_h = input.dim(0), in_w = input.dim(1), in_c = input.dim(2);
    const std::size_t out_c = bias.size();
    if (out_c == 0 || weights.size() != kernel * kernel * in_c * out_c) {
        throw Error(ErrorCode::InvalidShape, "conv2d weight count does not match kernel and channels");
    }
    const std::size_t out_h = conv_output_extent(in_h, kernel, stride, padding);
    const std::size_t out_w = conv_output_extent(in_w, kernel, stride, padding);
    Tensor<T> output({out_h, out_w, out_c});
    const T* in = input.values().data();
    T* out = output.values().data();
    for (std::size_t i = 0; i < out_h; ++i) {
        for (std::size_t j = 0; j < out_w; ++j) {
            T* cell = out + (i * out_w + j) * out_c;
            std::copy(bias.begin(), bias.end(), cell);
            for (std::size_t di = 0; di < kernel; ++di) {
                const std::ptrdiff_t row = static_cast<std::ptrdiff_t>(i * stride + di) - static_cast<std::ptrdiff_t>(padding);
                if (row < 0 || row >= static_cast<std::ptrdiff_t>(in_h)) {
                    continue;
                }
                for (std::size_t dj = 0; dj < kernel; ++dj) {
                    const std::ptrdiff_t col = static_cast<std::ptrdiff_t>(j * stride + dj) - static_cast<std::ptrdiff_t>(padding);
                    if (col < 0 || col >= static_cast<std::ptrdiff_t>(in_w)) {
                        continue;
                    }
                    const T* pixel = in + (static_cast<std::size_t>(row) * in_w + static_cast<std::size_t>(col)) * in_c;
                    const T* w = weights.data() + (di * kernel + dj) * in_c * out_c;
                    for (std::size_t c = 0; c < in_c; ++c) {
                        const T x = pixel[c];
                        const T* wc = w + c * out_c;
                        for (std::size_t o = 0; o < out_c; ++o) {
                            cell[o] += x * wc[o];
                        }
                    }
                }
            }
        }
    }
    return output;
}

template <std::floating_point T>
struct ConvGradients {
    Tensor<T> grad_input;
    std::vector<T> grad_weights;
    std::vector<T> grad_bias;
};

template <std::floating_point T>
ConvGradients<T> conv2d_backward(const Tensor<T>& grad_output, const Tensor<T>& input, std::span<const T> weights,
                                 std::size_t kernel, std::size_t stride, std::size_t padding) {
    if (input.rank() != 3 || grad_output.rank() != 3) {
        throw Error(ErrorCode::InvalidShape, "conv2d backward expects rank-3 tensors");
    }
    const std::size_t in_h = input.dim(0), in_w = input.dim(1), in_c = input.dim(2);
    const std::size_t out_c = grad_output.dim(2);
    const std::size_t out_h = conv_output_extent(in_h, kernel, stride, padding);
    const std::size_t out_w = conv_output_extent(in_w, kernel, stride, padding);
    if (grad_output.dim(0) != out_h || grad_output.dim(1) != out_w || weights.size() != kernel * kernel * in_c * out_c) {
        throw Error(ErrorCode::InvalidShape, "conv2d backward shapes do not match the forward pass");
    }
    ConvGradients<T> grads{Tensor<T>(input.shape()), std::vector<T>(weights.size(), T{0}), std::vector<T>(out_c, T{0})};
    const T* in = input.values().data();
    const T* g = grad_output.values().data();
    T* gin = grads.grad_input.values().data();
    for (std::size_t i = 0; i < out_h; ++i) {
        for (std::size_t j = 0; j < out_w; ++j) {
            const T* gcell = g + (i * out_w + j) * out_c;
            for (std::size_t o = 0; o < out_c; ++o) {
                grads.grad_bias[o] += gcell[o];
            }
            for (std::size_t di = 0; di < kernel; ++di) {
                const std::ptrdiff_t row = static_cast<std::ptrdiff_t>(i * stride + di) - static_cast<std::ptrdiff_t>(padding);
                if (row < 0 || row >= static_cast<std::ptrdiff_t>(in_h)) {
                    continue;
                }
                for (std::size_t dj = 0; dj < kernel; ++dj) {
                    const std::ptrdiff_t col = static_cast<std::ptrdiff_t>(j * stride + dj) - static_cast<std::ptrdiff_t>(padding);
                    if (col < 0 || col >= static_cast<std::ptrdiff_t>(in_w)) {
                        continue;
                    }
                    const std::size_t offset = (static_cast<std::size_t>(row) * in_w + static_cast<std::size_t>(col)) * in_c;
                    const std::size_t wbase = (di * kernel + dj) * in_c * out_c;
                    for (std::size_t c = 0; c < in_c; ++c) {
                        const T x = in[offset + c];
                        const T* wc = weights.data() + wbase + c * out_c;
                        T* gwc = grads.grad_weights.data() + wbase + c * out_c;
                        T acc{0};
                        for (std::size_t o = 0; o < out_c; ++o) {
                            gwc[o] += x * gcell[o];
                            acc += wc[o] * gcell[o];
                        }
                        gin[offset + c] += acc;
                    }
                }
            }
        }
    }
    return grads;
}

// ------------------------------------------------------------- maxpool2d

template <std::floating_point T>
struct PoolResult {
    Tensor<T> output;
    /// Flat input index of the selected element, one per output element.
    std::vector<std::size_t> argmax;
};

/// Channel-wise window maximum; ties go to the first element in row-major
/// scan order of the window.
template <std::floating_point T>
PoolResult<T> maxpool2d_forward(const Tensor<T>& input, std::size_t window, std::size_t stride) {
    if (input.rank() != 3) {
        throw Error(ErrorCode::InvalidShape, "maxpool2d expects (H, W, C) input, got " + shape_string(input.shape()));
    }
    const std::size_t in_w = input.dim(1), channels = input.dim(2);
    const std::size_t out_h = pool_output_extent(input.dim(0), window, stride);
    const std::size_t out_w = pool_output_extent(in_w, window, stride);
    PoolResult<T> result{Tensor<T>({out_h, out_w, channels}), std::vector<std::size_t>(out_h * out_w * channels)};
    for (std::size_t i = 0; i < out_h; ++i) {
        for (std::size_t j = 0; j < out_w; ++j) {
            for (std::size_t c = 0; c < channels; ++c) {
                std::size_t best = ((i * stride) * in_w + j * stride) * channels + c;
                for (std::size_t di = 0; di < window; ++di) {
                    for (std::size_t dj = 0; dj < window; ++dj) {
                        const std::size_t idx = ((i * stride + di) * in_w + (j * stride + dj)) * channels + c;
                        if (input[idx] > input[best]) {
                            best = idx;
                        }
                    }
                }
                const std::size_t out_idx = (i * out_w + j) * channels + c;
                result.output[out_idx] = input[best];
                result.argmax[out_idx] = best;
            }
        }
    }
    return result;
}

template <std::floating_point T>
Tensor<T> maxpool2d_backward(const Tensor<T>& grad_output, std::span<const std::size_t> argmax, const Shape& input_shape) {
    if (grad_output.size() != argmax.size()) {
        throw Error(ErrorCode::InvalidShape, "maxpool2d backward: gradient and argmax sizes differ");
    }
    Tensor<T> grad_input(input_shape);
    for (std::size_t k = 0; k < argmax.size(); ++k) {
        if (argmax[k] >= grad_input.size()) {
            throw Error(ErrorCode::InvalidShape, "maxpool2d backward: argmax outside input");
        }
        grad_input[argmax[k]] += grad_output[k];
    }
    return grad_input;
}

// ------------------------------------------------------------------ relu

template <std::floating_point T>
Tensor<T> relu(const Tensor<T>& input) {
    Tensor<T> out = input;
    for (auto& v : out.values()) {
        v = v > T{0} ? v : T{0};
    }
    return out;
}

/// Passes gradient where input > 0; the derivative at 0 is taken as 0.
template <std::floating_point T>
Tensor<T> relu_backward(const Tensor<T>& grad_output, const Tensor<T>& input) {
    if (grad_output.size() != input.size()) {
        throw Error(ErrorCode::InvalidShape, "relu backward: size mismatch");
    }
    Tensor<T> grad = grad_output;
    for (std::size_t i = 0; i < grad.size(); ++i) {
        if (!(input[i] > T{0})) {
            grad[i] = T{0};
        }
    }
    return grad;
}

// ----------------------------------------------------------------- dense

/// out = W x + b with W stored (out, in).
template <std::floating_point T>
std::vector<T> dense_forward(std::span<const T> input, std::span<const T> weights, std::span<const T> bias) {
    const std::size_t out_n = bias.size();
    if (out_n == 0 || weights.size() != out_n * input.size()) {
        throw Error(ErrorCode::InvalidShape, "dense: input length " + std::to_string(input.size()) +
                                                 " does not match weights");
    }
    std::vector<T> out(bias.begin(), bias.end());
    for (std::size_t o = 0; o < out_n; ++o) {
        const T* row = weights.data() + o * input.size();
        T acc{0};
        for (std::size_t i = 0; i < input.size(); ++i) {
            acc += row[i] * input[i];
        }
        out[o] += acc;
    }
    return out;
}

template <std::floating_point T>
struct DenseGradients {
    std::vector<T> grad_input;
    std::vector<T> grad_weights;
    std::vector<T> grad_bias;
};

template <std::floating_point T>
DenseGradients<T> dense_backward(std::span<const T> grad_output, std::span<const T> input, std::span<const T> weights) {
    const std::size_t out_n = grad_output.size(), in_n = input.size();
    if (weights.size() != out_n * in_n) {
        throw Error(ErrorCode::InvalidShape, "dense backward: shapes do not match the forward pass");
    }
    DenseGradients<T> grads{std::vector<T>(in_n, T{0}), std::vector<T>(weights.size()),
                            std::vector<T>(grad_output.begin(), grad_output.end())};
    for (std::size_t o = 0; o < out_n; ++o) {
        const T g = grad_output[o];
        const T* row = weights.data() + o * in_n;
        T* grow = grads.grad_weights.data() + o * in_n;
        for (std::size_t i = 0; i < in_n; ++i) {
            grow[i] = g * input[i];
            grads.grad_input[i] += g * row[i];
        }
    }
    return grads;
}

// ------------------------------------------------------ softmax and loss

/// exp(x_i - max x) / sum_j exp(x_j - max x)
template <std::floating_point T>
std::vector<T> softmax(std::span<const T> logits) {
    if (logits.empty()) {
        throw Error(ErrorCode::EmptyInput, "softmax of an empty vector");
    }
    const T peak = *std::max_element(logits.begin(), logits.end());
    std::vector<T> out(logits.size());
    T total{0};
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - peak);
        total += out[i];
    }
    for (auto& v : out) {
        v /= total;
    }
    return out;
}

/// Vector-Jacobian product of softmax: p * (g - <g, p>).
template <std::floating_point T>
std::vector<T> softmax_backward(std::span<const T> grad_output, std::span<const T> probabilities) {
    if (grad_output.size() != probabilities.size()) {
        throw Error(ErrorCode::InvalidShape, "softmax backward: size mismatch");
    }
    T dot{0};
    for (std::size_t i = 0; i < probabilities.size(); ++i) {
        dot += grad_output[i] * probabilities[i];
    }
    std::vector<T> grad(probabilities.size());
    for (std::size_t i = 0; i < probabilities.size(); ++i) {
        grad[i] = probabilities[i] * (grad_output[i] - dot);
    }
    return grad;
}

inline constexpr double probability_floor = 1e-12;

/// -ln(p[target]) with p clamped to at least 1e-12.
template <std::floating_point T>
T cross_entropy(std::span<const T> probabilities, std::span<const T> one_hot_target) {
    if (probabilities.size() != one_hot_target.size() || probabilities.empty()) {
        throw Error(ErrorCode::InvalidShape, "cross entropy: dimension mismatch");
    }
    T loss{0};
    for (std::size_t i = 0; i < probabilities.size(); ++i) {
        if (one_hot_target[i] != T{0}) {
            loss -= one_hot_target[i] * std::log(std::max(probabilities[i], static_cast<T>(probability_floor)));
        }
    }
    return loss;
}

template <std::floating_point T>
T cross_entropy(std::span<const T> probabilities, std::size_t target) {
    if (target >= probabilities.size()) {
        throw Error(ErrorCode::InvalidShape, "cross entropy: target outside probability vector");
    }
    return -std::log(std::max(probabilities[target], static_cast<T>(probability_floor)));
}

/// Gradient of cross_entropy(softmax(z), target) with respect to z.
template <std::floating_point T>
std::vector<T> softmax_cross_entropy_gradient(std::span<const T> probabilities, std::size_t target) {
    std::vector<T> grad(probabilities.begin(), probabilities.end());
    grad.at(target) -= T{1};
    return grad;
}

/// Lowest index among the maxima.
template <typename T>
std::size_t argmax(std::span<const T> values) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] > values[best]) {
            best = i;
        }
    }
    return best;
}

} // namespace leafnet::nn
