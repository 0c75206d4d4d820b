#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <string>

#include "leafnet/dataset.hpp"
#include "leafnet/error.hpp"
#include "leafnet/image.hpp"
#include "leafnet/random.hpp"

namespace leafnet {

struct SyntheticSpec {
    std::size_t num_classes = 5;
    std::size_t images_per_class = 200;
    std::size_t height = 32;
    std::size_t width = 32;
    std::uint64_t seed = 7;
};

inline void validate(const SyntheticSpec& spec) {
    if (spec.num_classes < 2) {
        throw Error(ErrorCode::InvalidConfig, "synthetic corpus needs at least 2 classes");
    }
    if (spec.images_per_class < 1) {
        throw Error(ErrorCode::InvalidConfig, "synthetic corpus needs at least 1 image per class");
    }
    if (spec.height < 8 || spec.width < 8) {
        throw Error(ErrorCode::InvalidSize, "synthetic images must be at least 8x8");
    }
}

/// Directory name for class `index`, zero padded so lexicographic order
/// matches numeric order.
inline std::string synthetic_class_name(std::size_t index, std::size_t num_classes) {
    std::size_t digits = std::max<std::size_t>(2, std::to_string(num_classes - 1).size());
    std::string number = std::to_string(index);
    return "class_" + std::string(digits - number.size(), '0') + number;
}

namespace detail {

inline void hsv_to_rgb(double hue, double sat, double val, double rgb[3]) {
    const double h = (hue - std::floor(hue)) * 6.0;
    const int sector = static_cast<int>(h) % 6;
    const double f = h - std::floor(h);
    const double p = val * (1.0 - sat);
    const double q = val * (1.0 - sat * f);
    const double t = val * (1.0 - sat * (1.0 - f));
    switch (sector) {
    case 0: rgb[0] = val, rgb[1] = t, rgb[2] = p; break;
    case 1: rgb[0] = q, rgb[1] = val, rgb[2] = p; break;
    case 2: rgb[0] = p, rgb[1] = val, rgb[2] = t; break;
    case 3: rgb[0] = p, rgb[1] = q, rgb[2] = val; break;
    case 4: rgb[0] = t, rgb[1] = p, rgb[2] = val; break;
    default: rgb[0] = val, rgb[1] = p, rgb[2] = q; break;
    }
}

inline std::uint8_t to_byte(double v) {
    return static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
}

} // namespace detail

/// Renders image `index` of class `label`.
///
/// A class is a base hue (evenly spaced on the color wheel) modulated by a
/// sinusoidal grating whose spatial frequency and orientation are tied to the
/// class. Each image draws its own phase, small hue jitter and per-pixel noise
/// from a stream keyed on (seed, label, index), so images are independent of
/// generation order.
inline RawImage render_synthetic_image(const SyntheticSpec& spec, std::size_t label, std::size_t index) {
    Xoshiro256 rng(derive_seed(spec.seed, (static_cast<std::uint64_t>(label) << 32) ^ index));
    const double k = static_cast<double>(spec.num_classes);
    const double hue = static_cast<double>(label) / k + rng.uniform(-0.15, 0.15) / k;
    const double frequency = 1.0 + static_cast<double>(label % 4);
    const double angle = std::numbers::pi * static_cast<double>(label) / k + rng.uniform(-0.1, 0.1);
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double brightness = rng.uniform(0.55, 0.75);
    const double dx = std::cos(angle) / static_cast<double>(spec.width);
    const double dy = std::sin(angle) / static_cast<double>(spec.height);

    RawImage image(spec.height, spec.width, 3);
    double rgb[3];
    for (std::size_t r = 0; r < spec.height; ++r) {
        for (std::size_t c = 0; c < spec.width; ++c) {
            const double wave = std::sin(2.0 * std::numbers::pi * frequency *
                                             (static_cast<double>(c) * dx + static_cast<double>(r) * dy) +
                                         phase);
            detail::hsv_to_rgb(hue, 0.7, brightness + 0.25 * wave, rgb);
            for (std::size_t ch = 0; ch < 3; ++ch) {
                image.at(r, c, ch) = detail::to_byte(255.0 * rgb[ch] + rng.uniform(-12.0, 12.0));
            }
        }
    }
    return image;
}

/// Writes a directory-per-class PPM corpus under `out` and returns its scan.
inline DatasetManifest generate_synthetic_corpus(const SyntheticSpec& spec, const std::filesystem::path& out) {
    validate(spec);
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec || !fs::is_directory(out)) {
        throw Error(ErrorCode::IoError, "cannot create " + out.string());
    }
    const std::size_t digits = std::to_string(spec.images_per_class - 1).size();
    for (std::size_t label = 0; label < spec.num_classes; ++label) {
        const fs::path dir = out / synthetic_class_name(label, spec.num_classes);
        fs::create_directories(dir, ec);
        if (ec) {
            throw Error(ErrorCode::IoError, "cannot create " + dir.string());
        }
        for (std::size_t i = 0; i < spec.images_per_class; ++i) {
            std::string number = std::to_string(i);
            number = std::string(std::max(digits, std::size_t{4}) - number.size(), '0') + number;
            write_pnm(render_synthetic_image(spec, label, i), dir / ("img_" + number + ".ppm"));
        }
    }
    return scan_dataset(out);
}

} // namespace leafnet
