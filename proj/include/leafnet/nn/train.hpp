#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "leafnet/error.hpp"
#include "leafnet/nn/checkpoint.hpp"
#include "leafnet/nn/layers.hpp"
#include "leafnet/nn/model.hpp"
#include "leafnet/nn/network.hpp"
#include "leafnet/nn/sgd.hpp"
#include "leafnet/random.hpp"
#include "leafnet/tensor.hpp"

namespace leafnet::nn {

struct TrainConfig {
    std::size_t epochs = 10;
    std::size_t batch_size = 32;
    double learning_rate = 0.01;
    double momentum = 0.9;
    std::uint64_t seed = 0;

    friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

inline void validate(const TrainConfig& config) {
    if (config.epochs < 1) {
        throw Error(ErrorCode::InvalidConfig, "epochs must be at least 1");
    }
    if (config.batch_size < 1) {
        throw Error(ErrorCode::InvalidConfig, "batch size must be at least 1");
    }
    if (!(config.learning_rate > 0.0) || !std::isfinite(config.learning_rate)) {
        throw Error(ErrorCode::InvalidConfig, "learning rate must be positive");
    }
    if (!(config.momentum >= 0.0 && config.momentum < 1.0)) {
        throw Error(ErrorCode::InvalidConfig, "momentum must lie in [0, 1)");
    }
}

struct Sample {
    Tensor<double> input;
    std::size_t label = 0;
};

// Random streams derived from a single seed.
inline constexpr std::uint64_t init_stream = 1;
inline constexpr std::uint64_t shuffle_stream = 2;

/// He-style scaled uniform: weights ~ U(-a, a) with a = sqrt(6 / fan_in),
/// i.e. variance 2 / fan_in. Biases are zero. Layers are filled in order
/// from one generator.
inline Checkpoint init_parameters(const ModelConfig& config, std::uint64_t seed) {
    const auto shapes = infer_shapes(config);
    Xoshiro256 rng(seed);
    Checkpoint checkpoint{config, {}, 0, {}, {}};
    for (std::size_t i = 0; i < config.layers.size(); ++i) {
        const auto layout = parameter_layout(config.layers[i], shapes[i]);
        std::vector<double> params(layout.total(), 0.0);
        if (layout.weights > 0) {
            const double bound = std::sqrt(6.0 / static_cast<double>(layout.fan_in));
            for (std::size_t k = 0; k < layout.weights; ++k) {
                params[k] = rng.uniform(-bound, bound);
            }
        }
        checkpoint.parameters.push_back(std::move(params));
    }
    return checkpoint;
}

/// Mean cross-entropy and accuracy of `network` over `samples`.
inline EpochStats evaluate(const Network<double>& network, std::span<const Sample> samples) {
    if (samples.empty()) {
        throw Error(ErrorCode::EmptyDataset, "no samples to evaluate");
    }
    double loss = 0.0;
    std::size_t correct = 0;
    for (const auto& sample : samples) {
        const auto probs = network.probabilities(sample.input);
        loss += cross_entropy(std::span<const double>(probs), sample.label);
        correct += argmax(std::span<const double>(probs)) == sample.label ? 1 : 0;
    }
    const auto n = static_cast<double>(samples.size());
    return {loss / n, static_cast<double>(correct) / n};
}

using EpochCallback = std::function<void(std::size_t epoch, const EpochStats&)>;

/// Continues training `start` for `config.epochs` epochs of shuffled
/// mini-batch momentum SGD on mean cross-entropy.
///
/// Per epoch the sample order is a Fisher-Yates shuffle; within a batch the
/// per-sample gradients are summed in batch order and scaled by 1/|batch|,
/// so the run is bitwise reproducible. History records the mean loss and
/// accuracy observed during each epoch's forward passes.
inline Checkpoint train_from(Checkpoint start, std::span<const Sample> samples, const TrainConfig& config,
                             const EpochCallback& on_epoch = {}) {
    validate(config);
    if (samples.empty()) {
        throw Error(ErrorCode::EmptyDataset, "training set is empty");
    }
    Network<double> network(start.config, std::move(start.parameters));
    for (const auto& sample : samples) {
        if (sample.input.shape() != network.shapes().front()) {
            throw Error(ErrorCode::InvalidShape, "sample shape " + shape_string(sample.input.shape()) +
                                                     " does not match model input " +
                                                     shape_string(network.shapes().front()));
        }
        if (sample.label >= start.config.num_classes) {
            throw Error(ErrorCode::InvalidLabel, "sample label outside the model's classes");
        }
    }
    Xoshiro256 rng(derive_seed(config.seed, shuffle_stream));
    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto velocity = network.zero_gradients();
    auto grads = network.zero_gradients();

    for (std::size_t e = 0; e < config.epochs; ++e) {
        const std::size_t epoch = start.epoch + 1;
        shuffle(std::span<std::size_t>(order), rng);
        double loss_sum = 0.0;
        std::size_t correct = 0;
        for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
            const std::size_t end = std::min(order.size(), begin + config.batch_size);
            for (auto& g : grads) {
                std::fill(g.begin(), g.end(), 0.0);
            }
            for (std::size_t k = begin; k < end; ++k) {
                const auto& sample = samples[order[k]];
                std::size_t predicted = 0;
                const double loss = network.accumulate_gradient(sample.input, sample.label, grads, &predicted);
                if (!std::isfinite(loss)) {
                    throw DivergedError(static_cast<int>(epoch));
                }
                loss_sum += loss;
                correct += predicted == sample.label ? 1 : 0;
            }
            const double scale = 1.0 / static_cast<double>(end - begin);
            for (std::size_t layer = 0; layer < grads.size(); ++layer) {
                for (auto& g : grads[layer]) {
                    g *= scale;
                }
                sgd_step(std::span<double>(network.parameters()[layer]), std::span<const double>(grads[layer]),
                         std::span<double>(velocity[layer]), config.learning_rate, config.momentum);
            }
        }
        const auto n = static_cast<double>(samples.size());
        const EpochStats stats{loss_sum / n, static_cast<double>(correct) / n};
        if (!std::isfinite(stats.loss)) {
            throw DivergedError(static_cast<int>(epoch));
        }
        for (const auto& layer : network.parameters()) {
            for (double p : layer) {
                if (!std::isfinite(p)) {
                    throw DivergedError(static_cast<int>(epoch));
                }
            }
        }
        start.history.push_back(stats);
        start.epoch = epoch;
        if (on_epoch) {
            on_epoch(epoch, stats);
        }
    }
    start.parameters = std::move(network.parameters());
    start.set_metadata("loss", "cross_entropy");
    start.set_metadata("optimizer", "sgd_momentum");
    start.set_metadata("train.learning_rate", detail::format_real(config.learning_rate));
    start.set_metadata("train.momentum", detail::format_real(config.momentum));
    start.set_metadata("train.batch_size", std::to_string(config.batch_size));
    start.set_metadata("train.seed", std::to_string(config.seed));
    return start;
}

/// Initializes from `config.seed` and trains.
inline Checkpoint train(const ModelConfig& model, std::span<const Sample> samples, const TrainConfig& config,
                        const EpochCallback& on_epoch = {}) {
    validate(config);
    if (samples.empty()) {
        throw Error(ErrorCode::EmptyDataset, "training set is empty");
    }
    return train_from(init_parameters(model, derive_seed(config.seed, init_stream)), samples, config, on_epoch);
}

struct Prediction {
    std::size_t label = 0;
    std::vector<double> probabilities;
};

/// Argmax class (lowest index on ties) and the softmax vector.
inline Prediction predict(const Network<double>& network, const Tensor<double>& input) {
    auto probs = network.probabilities(input);
    const auto label = argmax(std::span<const double>(probs));
    return {label, std::move(probs)};
}

inline Prediction predict(const Checkpoint& checkpoint, const Tensor<double>& input) {
    return predict(Network<double>(checkpoint.config, checkpoint.parameters), input);
}

} // namespace leafnet::nn
