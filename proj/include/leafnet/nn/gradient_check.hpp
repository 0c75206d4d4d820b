#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include "leafnet/nn/checkpoint.hpp"
#include "leafnet/nn/network.hpp"
#include "leafnet/nn/train.hpp"
#include "leafnet/tensor.hpp"

namespace leafnet::nn {

/// |analytic - numeric| / max(|analytic|, |numeric|, 1e-8)
inline double relative_error(double analytic, double numeric) {
    const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
    return std::abs(analytic - numeric) / scale;
}

struct GradientCheckResult {
    double max_relative_error = 0.0;
    std::size_t worst_layer = 0;
    std::size_t worst_index = 0;
    std::size_t parameters_checked = 0;
};

/// Compares the backward pass against central differences
/// Distance of `input` from the non-differentiable points of the network:
/// the smallest |x| over ReLU inputs, and the smallest gap between a pooling
/// window's positive maximum and its runner-up. Central differences are only
/// meaningful when this exceeds the step size.
inline double nonsmooth_margin(const Network<double>& network, const Tensor<double>& input) {
    const auto trace = network.forward(input);
    const auto& layers = network.config().layers;
    double margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const auto& x = trace.activations[i];
        if (layers[i].kind == LayerKind::Relu) {
            for (double v : x.values()) {
                margin = std::min(margin, std::abs(v));
            }
        } else if (layers[i].kind == LayerKind::MaxPool2d) {
            const auto& out = trace.activations[i + 1];
            const std::size_t window = layers[i].window, stride = layers[i].stride;
            for (std::size_t r = 0; r < out.dim(0); ++r) {
                for (std::size_t c = 0; c < out.dim(1); ++c) {
                    for (std::size_t ch = 0; ch < out.dim(2); ++ch) {
                        const double best = out.at(r, c, ch);
                        if (!(best > 0.0)) {
                            continue;
                        }
                        bool seen_best = false;
                        for (std::size_t dr = 0; dr < window; ++dr) {
                            for (std::size_t dc = 0; dc < window; ++dc) {
                                const double v = x.at(r * stride + dr, c * stride + dc, ch);
                                if (v == best && !seen_best) {
                                    seen_best = true;
                                } else {
                                    margin = std::min(margin, best - v);
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    return margin;
}

/// (L(p + eps) - L(p - eps)) / (2 eps) for every parameter of `parameters`.
/// `hook` is forwarded to the analytic backward pass.
inline GradientCheckResult gradient_check(const ModelConfig& config, const LayerParameters<double>& parameters,
                                          const Sample& sample, double epsilon,
                                          const BackwardHook<double>& hook = {}) {
    Network<double> network(config, parameters);
    auto analytic = network.zero_gradients();
    network.accumulate_gradient(sample.input, sample.label, analytic, nullptr, hook);

    GradientCheckResult result;
    for (std::size_t layer = 0; layer < parameters.size(); ++layer) {
        auto& params = network.parameters()[layer];
        for (std::size_t k = 0; k < params.size(); ++k) {
            const double original = params[k];
            params[k] = original + epsilon;
            const double plus = network.loss(sample.input, sample.label);
            params[k] = original - epsilon;
            const double minus = network.loss(sample.input, sample.label);
            params[k] = original;
            const double numeric = (plus - minus) / (2.0 * epsilon);
            const double err = relative_error(analytic[layer][k], numeric);
            if (err > result.max_relative_error || std::isnan(err)) {
                result.max_relative_error = err;
                result.worst_layer = layer;
                result.worst_index = k;
            }
            ++result.parameters_checked;
        }
    }
    return result;
}

/// Same, with parameters drawn by init_parameters(config, seed).
inline GradientCheckResult gradient_check(const ModelConfig& config, const Sample& sample, double epsilon,
                                          std::uint64_t seed = 0) {
    return gradient_check(config, init_parameters(config, seed).parameters, sample, epsilon);
}

} // namespace leafnet::nn
