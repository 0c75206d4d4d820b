#pragma once

#include <concepts>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "leafnet/error.hpp"

namespace leafnet {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_size(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>{});
}

inline std::string shape_string(const Shape& shape) {
    std::string out = "(";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i != 0) {
            out += ", ";
        }
        out += std::to_string(shape[i]);
    }
    return out + ")";
}

/// Dense row-major tensor. Images are stored (height, width, channels).
template <std::floating_point T = double>
class Tensor {
public:
    using value_type = T;

    Tensor() = default;

    explicit Tensor(Shape shape, T fill = T{0}) : shape_(std::move(shape)), values_(shape_size(shape_), fill) {
        validate_shape();
    }

    Tensor(Shape shape, std::vector<T> values) : shape_(std::move(shape)), values_(std::move(values)) {
        validate_shape();
        if (values_.size() != shape_size(shape_)) {
            throw Error(ErrorCode::InvalidShape, "value count " + std::to_string(values_.size()) +
                                                     " does not match shape " + shape_string(shape_));
        }
    }

    const Shape& shape() const noexcept { return shape_; }
    std::size_t rank() const noexcept { return shape_.size(); }
    std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
    std::size_t size() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }

    std::span<T> values() noexcept { return values_; }
    std::span<const T> values() const noexcept { return values_; }
    std::vector<T>& storage() noexcept { return values_; }
    const std::vector<T>& storage() const noexcept { return values_; }

    T& operator[](std::size_t i) noexcept { return values_[i]; }
    const T& operator[](std::size_t i) const noexcept { return values_[i]; }

    /// (row, col, channel) access for rank-3 tensors.
    T& at(std::size_t row, std::size_t col, std::size_t channel) noexcept {
        return values_[(row * shape_[1] + col) * shape_[2] + channel];
    }
    const T& at(std::size_t row, std::size_t col, std::size_t channel) const noexcept {
        return values_[(row * shape_[1] + col) * shape_[2] + channel];
    }

    void fill(T value) { std::fill(values_.begin(), values_.end(), value); }

    /// Same values, new shape of equal size.
    Tensor reshaped(Shape shape) const& { return Tensor(std::move(shape), values_); }
    Tensor reshaped(Shape shape) && { return Tensor(std::move(shape), std::move(values_)); }

    friend bool operator==(const Tensor&, const Tensor&) = default;

private:
    void validate_shape() const {
        for (auto extent : shape_) {
            if (extent == 0) {
                throw Error(ErrorCode::InvalidShape, "tensor extents must be positive, got " + shape_string(shape_));
            }
        }
    }

    Shape shape_;
    std::vector<T> values_;
};

} // namespace leafnet
