#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "leafnet/error.hpp"
#include "leafnet/image.hpp"
#include "leafnet/tensor.hpp"

namespace leafnet {

struct PreprocessConfig {
    std::size_t target_height = 224;
    std::size_t target_width = 224;
    std::size_t filter_kernel = 3;
    double n_min = 0.0;
    double n_max = 1.0;

    friend bool operator==(const PreprocessConfig&, const PreprocessConfig&) = default;
};

inline void validate(const PreprocessConfig& config) {
    if (config.target_height < 1 || config.target_width < 1) {
        throw Error(ErrorCode::InvalidSize, "target size must be at least 1x1");
    }
    if (config.filter_kernel % 2 == 0) {
        throw Error(ErrorCode::InvalidKernel, "filter kernel must be odd");
    }
    if (!(config.n_max > config.n_min)) {
        throw Error(ErrorCode::InvalidRange, "n_max must exceed n_min");
    }
}

/// (height, width, 3) real tensor fed to the network.
using ProcessedTensor = Tensor<double>;

/// Gray is replicated to R=G=B; RGBA is composited over white with
/// round-half-up, then alpha is dropped.
inline RawImage to_rgb(const RawImage& image) {
    switch (image.channels) {
    case 3:
        return image;
    case 1: {
        RawImage out(image.height, image.width, 3);
        for (std::size_t i = 0; i < image.pixels.size(); ++i) {
            std::fill_n(out.pixels.begin() + static_cast<std::ptrdiff_t>(3 * i), 3, image.pixels[i]);
        }
        return out;
    }
    case 4: {
        RawImage out(image.height, image.width, 3);
        const std::size_t n = image.height * image.width;
        for (std::size_t i = 0; i < n; ++i) {
            const unsigned alpha = image.pixels[4 * i + 3];
            for (std::size_t ch = 0; ch < 3; ++ch) {
                // round((a*c + (255-a)*255) / 255), half up, in integers
                const unsigned num = alpha * image.pixels[4 * i + ch] + (255u - alpha) * 255u;
                out.pixels[3 * i + ch] = static_cast<std::uint8_t>((2u * num + 255u) / 510u);
            }
        }
        return out;
    }
    default:
        throw Error(ErrorCode::UnsupportedFormat, std::to_string(image.channels) + "-channel image");
    }
}

/// Per-channel median over a kernel x kernel window, replicate padding.
inline RawImage median_filter(const RawImage& image, std::size_t kernel) {
    if (kernel % 2 == 0) {
        throw Error(ErrorCode::InvalidKernel, "kernel " + std::to_string(kernel) + " is even");
    }
    if (image.channels != 3) {
        throw Error(ErrorCode::UnsupportedFormat, "median filter expects a 3-channel image");
    }
    if (kernel > std::min(image.height, image.width)) {
        throw Error(ErrorCode::InvalidKernel, "kernel larger than the image");
    }
    if (kernel == 1) {
        return image;
    }
    const auto radius = static_cast<std::ptrdiff_t>(kernel / 2);
    const auto h = static_cast<std::ptrdiff_t>(image.height);
    const auto w = static_cast<std::ptrdiff_t>(image.width);
    RawImage out(image.height, image.width, 3);
    std::vector<std::uint8_t> window(kernel * kernel);
    const auto mid = static_cast<std::ptrdiff_t>(window.size() / 2);
    for (std::ptrdiff_t r = 0; r < h; ++r) {
        for (std::ptrdiff_t c = 0; c < w; ++c) {
            for (std::size_t ch = 0; ch < 3; ++ch) {
                std::size_t n = 0;
                for (std::ptrdiff_t dr = -radius; dr <= radius; ++dr) {
                    const auto rr = static_cast<std::size_t>(std::clamp(r + dr, std::ptrdiff_t{0}, h - 1));
                    for (std::ptrdiff_t dc = -radius; dc <= radius; ++dc) {
                        const auto cc = static_cast<std::size_t>(std::clamp(c + dc, std::ptrdiff_t{0}, w - 1));
                        window[n++] = image.at(rr, cc, ch);
                    }
                }
                std::nth_element(window.begin(), window.begin() + mid, window.end());
                out.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c), ch) = window[static_cast<std::size_t>(mid)];
            }
        }
    }
    return out;
}

/// Bilinear resampling with half-pixel centers:
/// src = (dst + 0.5) * (src_size / dst_size) - 0.5, clamped to the image.
/// Results are rounded half-up to 8 bits. Positions and weights are exact
/// rationals over 2 * dst_size, so ties round the same on every platform.
inline RawImage resize_bilinear(const RawImage& image, std::size_t target_h, std::size_t target_w) {
    if (target_h == 0 || target_w == 0) {
        throw Error(ErrorCode::InvalidSize, "resize target must be at least 1x1");
    }
    if (image.height == 0 || image.width == 0) {
        throw Error(ErrorCode::InvalidSize, "cannot resize an empty image");
    }
    if (target_h == image.height && target_w == image.width) {
        return image;
    }
    struct Tap {
        std::size_t lo, hi;
        std::uint64_t frac; // weight of `hi`, out of 2 * dst
    };
    auto taps = [](std::size_t src, std::size_t dst) {
        std::vector<Tap> out(dst);
        const auto denom = static_cast<std::int64_t>(2 * dst);
        const auto last = static_cast<std::int64_t>(src - 1) * denom;
        for (std::size_t i = 0; i < dst; ++i) {
            // position * denom = (2i + 1) * src - dst
            const auto pos = std::clamp(static_cast<std::int64_t>((2 * i + 1) * src) - static_cast<std::int64_t>(dst),
                                        std::int64_t{0}, last);
            const auto lo = static_cast<std::size_t>(pos / denom);
            out[i] = {lo, std::min(lo + 1, src - 1), static_cast<std::uint64_t>(pos % denom)};
        }
        return out;
    };
    const auto rows = taps(image.height, target_h);
    const auto cols = taps(image.width, target_w);
    const std::uint64_t dy = 2 * target_h, dx = 2 * target_w, denom = dy * dx;
    const std::size_t channels = image.channels;
    RawImage out(target_h, target_w, channels);
    for (std::size_t r = 0; r < target_h; ++r) {
        const auto& ty = rows[r];
        for (std::size_t c = 0; c < target_w; ++c) {
            const auto& tx = cols[c];
            for (std::size_t ch = 0; ch < channels; ++ch) {
                const std::uint64_t top = image.at(ty.lo, tx.lo, ch) * (dx - tx.frac) + image.at(ty.lo, tx.hi, ch) * tx.frac;
                const std::uint64_t bottom =
                    image.at(ty.hi, tx.lo, ch) * (dx - tx.frac) + image.at(ty.hi, tx.hi, ch) * tx.frac;
                const std::uint64_t value = top * (dy - ty.frac) + bottom * ty.frac;
                out.at(r, c, ch) = static_cast<std::uint8_t>((2 * value + denom) / (2 * denom));
            }
        }
    }
    return out;
}

/// Min-Max Normalization over the whole input:
///   out = (x - min) / (max - min) * (n_max - n_min) + n_min
/// The maximum maps to exactly n_max and results are clamped into
/// [n_min, n_max]. Constant input maps to n_min everywhere.
template <typename T>
std::vector<double> min_max_normalize(std::span<const T> values, double n_min, double n_max) {
    if (values.empty()) {
        throw Error(ErrorCode::EmptyInput, "cannot normalize an empty tensor");
    }
    if (!(n_max > n_min)) {
        throw Error(ErrorCode::InvalidRange, "n_max must exceed n_min");
    }
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const double lo = static_cast<double>(*lo_it);
    const double hi = static_cast<double>(*hi_it);
    std::vector<double> out(values.size(), n_min);
    if (hi == lo) {
        return out;
    }
    const double span = hi - lo;
    const double range = n_max - n_min;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double x = static_cast<double>(values[i]);
        if (x == hi) {
            out[i] = n_max;
        } else {
            out[i] = std::clamp((x - lo) / span * range + n_min, n_min, n_max);
        }
    }
    return out;
}

inline std::vector<double> min_max_normalize(const std::vector<double>& values, double n_min, double n_max) {
    return min_max_normalize(std::span<const double>(values), n_min, n_max);
}

/// to_rgb -> median_filter -> resize_bilinear -> min_max_normalize.
inline ProcessedTensor preprocess_pipeline(const RawImage& image, const PreprocessConfig& config) {
    validate(config);
    const RawImage rgb = to_rgb(image);
    const RawImage filtered = median_filter(rgb, config.filter_kernel);
    const RawImage resized = resize_bilinear(filtered, config.target_height, config.target_width);
    auto values = min_max_normalize(std::span<const std::uint8_t>(resized.pixels), config.n_min, config.n_max);
    return ProcessedTensor({config.target_height, config.target_width, 3}, std::move(values));
}

inline ProcessedTensor preprocess_file(const std::filesystem::path& path, const PreprocessConfig& config) {
    return preprocess_pipeline(read_image(path), config);
}

/// Debug dump: one flattened value per line, shortest round-trip form.
inline void write_tensor_csv(const ProcessedTensor& tensor, const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot write " + file.string());
    }
    out << "value\n";
    char buffer[32];
    for (double v : tensor.values()) {
        auto [end, ec] = std::to_chars(buffer, buffer + sizeof buffer, v);
        out.write(buffer, end - buffer);
        out.put('\n');
    }
}

} // namespace leafnet
