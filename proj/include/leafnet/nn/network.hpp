#pragma once

#include <concepts>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "leafnet/error.hpp"
#include "leafnet/nn/layers.hpp"
#include "leafnet/nn/model.hpp"
#include "leafnet/tensor.hpp"

namespace leafnet::nn {

/// Per-layer flat parameter arrays: weights followed by biases.
template <std::floating_point T>
using LayerParameters = std::vector<std::vector<T>>;

/// Activations recorded by a forward pass: activations[0] is the input and
/// activations[i + 1] the output of layer i.
template <std::floating_point T>
struct ForwardTrace {
    std::vector<Tensor<T>> activations;
    std::vector<std::vector<std::size_t>> argmax;

    const Tensor<T>& output() const { return activations.back(); }
};

/// Called with (layer index, gradient with respect to that layer's input)
/// right after the layer's backward pass; may modify the gradient.
template <std::floating_point T>
using BackwardHook = std::function<void(std::size_t, Tensor<T>&)>;

/// A sequential network bound to concrete parameters.
template <std::floating_point T>
class Network {
public:
    Network(ModelConfig config, LayerParameters<T> parameters)
        : config_(std::move(config)), shapes_(infer_shapes(config_)), parameters_(std::move(parameters)) {
        if (parameters_.size() != config_.layers.size()) {
            throw Error(ErrorCode::InvalidShape, "parameter arrays do not match the layer count");
        }
        for (std::size_t i = 0; i < config_.layers.size(); ++i) {
            const auto layout = parameter_layout(config_.layers[i], shapes_[i]);
            if (parameters_[i].size() != layout.total()) {
                throw Error(ErrorCode::InvalidShape, "layer " + std::to_string(i) + " expects " +
                                                         std::to_string(layout.total()) + " parameters, got " +
                                                         std::to_string(parameters_[i].size()));
            }
            layouts_.push_back(layout);
        }
    }

    const ModelConfig& config() const noexcept { return config_; }
    const std::vector<Shape>& shapes() const noexcept { return shapes_; }
    const LayerParameters<T>& parameters() const noexcept { return parameters_; }
    LayerParameters<T>& parameters() noexcept { return parameters_; }

    LayerParameters<T> zero_gradients() const {
        LayerParameters<T> grads;
        grads.reserve(parameters_.size());
        for (const auto& p : parameters_) {
            grads.emplace_back(p.size(), T{0});
        }
        return grads;
    }

    ForwardTrace<T> forward(const Tensor<T>& input) const {
        if (input.shape() != shapes_.front()) {
            throw Error(ErrorCode::InvalidShape, "input " + shape_string(input.shape()) + " does not match model input " +
                                                     shape_string(shapes_.front()));
        }
        ForwardTrace<T> trace;
        trace.activations.reserve(config_.layers.size() + 1);
        trace.argmax.resize(config_.layers.size());
        trace.activations.push_back(input);
        for (std::size_t i = 0; i < config_.layers.size(); ++i) {
            const auto& layer = config_.layers[i];
            const auto& x = trace.activations.back();
            Tensor<T> y;
            switch (layer.kind) {
            case LayerKind::Conv2d:
                y = conv2d_forward(x, weights(i), biases(i), layer.kernel, layer.stride, layer.padding);
                break;
            case LayerKind::MaxPool2d: {
                auto pooled = maxpool2d_forward(x, layer.window, layer.stride);
                y = std::move(pooled.output);
                trace.argmax[i] = std::move(pooled.argmax);
                break;
            }
            case LayerKind::Relu:
                y = relu(x);
                break;
            case LayerKind::Flatten:
                y = x.reshaped({x.size()});
                break;
            case LayerKind::Dense:
                y = Tensor<T>({layer.out_features}, dense_forward(x.values(), weights(i), biases(i)));
                break;
            case LayerKind::Softmax:
                y = Tensor<T>(x.shape(), softmax(x.values()));
                break;
            }
            trace.activations.push_back(std::move(y));
        }
        return trace;
    }

    /// Softmax output for one input.
    std::vector<T> probabilities(const Tensor<T>& input) const { return forward(input).output().storage(); }

    /// Backpropagates `grad_output` (gradient w.r.t. the network output)
    /// through every layer, adding parameter gradients into `grads`.
    Tensor<T> backward(const ForwardTrace<T>& trace, Tensor<T> grad_output, LayerParameters<T>& grads,
                       const BackwardHook<T>& hook = {}) const {
        return backprop(trace, config_.layers.size(), std::move(grad_output), grads, hook);
    }

    /// Forward pass plus fused softmax / cross-entropy backward, whose logit
    /// gradient is p - onehot(label). Adds parameter gradients into `grads`
    /// and returns the loss; `predicted` receives the argmax class.
    T accumulate_gradient(const Tensor<T>& input, std::size_t label, LayerParameters<T>& grads,
                          std::size_t* predicted = nullptr, const BackwardHook<T>& hook = {}) const {
        if (label >= config_.num_classes) {
            throw Error(ErrorCode::InvalidLabel, "label " + std::to_string(label) + " outside " +
                                                     std::to_string(config_.num_classes) + " classes");
        }
        const auto trace = forward(input);
        const auto probs = trace.output().values();
        if (predicted != nullptr) {
            *predicted = argmax(probs);
        }
        const T loss = cross_entropy(probs, label);
        Tensor<T> grad(trace.output().shape(), softmax_cross_entropy_gradient(probs, label));
        const std::size_t top = config_.layers.size() - 1;
        if (hook) {
            hook(top, grad);
        }
        backprop(trace, top, std::move(grad), grads, hook);
        return loss;
    }

    /// Cross-entropy of the prediction for one labeled input.
    T loss(const Tensor<T>& input, std::size_t label) const {
        return cross_entropy(std::span<const T>(forward(input).output().values()), label);
    }

private:
    std::span<const T> weights(std::size_t layer) const {
        return std::span<const T>(parameters_[layer]).first(layouts_[layer].weights);
    }
    std::span<const T> biases(std::size_t layer) const {
        return std::span<const T>(parameters_[layer]).subspan(layouts_[layer].weights);
    }

    static void add_into(std::vector<T>& dst, std::size_t offset, const std::vector<T>& src) {
        for (std::size_t k = 0; k < src.size(); ++k) {
            dst[offset + k] += src[k];
        }
    }

    /// Runs layers [0, top) in reverse; `grad` is the gradient w.r.t. the
    /// output of layer top - 1.
    Tensor<T> backprop(const ForwardTrace<T>& trace, std::size_t top, Tensor<T> grad, LayerParameters<T>& grads,
                       const BackwardHook<T>& hook) const {
        if (grads.size() != parameters_.size()) {
            throw Error(ErrorCode::InvalidShape, "gradient buffers do not match the layer count");
        }
        for (std::size_t i = top; i-- > 0;) {
            const auto& layer = config_.layers[i];
            const auto& x = trace.activations[i];
            if (grad.shape() != trace.activations[i + 1].shape()) {
                throw Error(ErrorCode::InvalidShape, "gradient shape does not match layer output");
            }
            switch (layer.kind) {
            case LayerKind::Conv2d: {
                auto g = conv2d_backward(grad, x, weights(i), layer.kernel, layer.stride, layer.padding);
                add_into(grads[i], 0, g.grad_weights);
                add_into(grads[i], layouts_[i].weights, g.grad_bias);
                grad = std::move(g.grad_input);
                break;
            }
            case LayerKind::MaxPool2d:
                grad = maxpool2d_backward(grad, std::span<const std::size_t>(trace.argmax[i]), x.shape());
                break;
            case LayerKind::Relu:
                grad = relu_backward(grad, x);
                break;
            case LayerKind::Flatten:
                grad = std::move(grad).reshaped(x.shape());
                break;
            case LayerKind::Dense: {
                auto g = dense_backward(std::span<const T>(grad.values()), std::span<const T>(x.values()), weights(i));
                add_into(grads[i], 0, g.grad_weights);
                add_into(grads[i], layouts_[i].weights, g.grad_bias);
                grad = Tensor<T>(x.shape(), std::move(g.grad_input));
                break;
            }
            case LayerKind::Softmax:
                grad = Tensor<T>(x.shape(), softmax_backward(std::span<const T>(grad.values()),
                                                             std::span<const T>(trace.activations[i + 1].values())));
                break;
            }
            if (hook) {
                hook(i, grad);
            }
        }
        return grad;
    }

    ModelConfig config_;
    std::vector<Shape> shapes_;
    std::vector<ParameterLayout> layouts_;
    LayerParameters<T> parameters_;
};

} // namespace leafnet::nn
