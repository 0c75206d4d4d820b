#pragma once

#include <concepts>
#include <span>

#include "leafnet/error.hpp"

namespace leafnet::nn {

/// Momentum SGD, applied in place:
///   v <- momentum * v - lr * g
///   p <- p + v
template <std::floating_point T>
void sgd_step(std::span<T> parameters, std::span<const T> gradients, std::span<T> velocity, T learning_rate,
              T momentum) {
    if (parameters.size() != gradients.size() || parameters.size() != velocity.size()) {
        throw Error(ErrorCode::InvalidShape, "sgd_step: parameter, gradient and velocity sizes differ");
    }
    for (std::size_t i = 0; i < parameters.size(); ++i) {
        velocity[i] = momentum * velocity[i] - learning_rate * gradients[i];
        parameters[i] += velocity[i];
    }
}

} // namespace leafnet::nn
