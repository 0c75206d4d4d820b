#pragma once

#include <array>
#include <charconv>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "leafnet/error.hpp"
#include "leafnet/nn/layers.hpp"
#include "leafnet/tensor.hpp"

namespace leafnet::nn {

enum class LayerKind { Conv2d, MaxPool2d, Relu, Flatten, Dense, Softmax };

constexpr std::string_view to_string(LayerKind kind) noexcept {
    switch (kind) {
    case LayerKind::Conv2d: return "conv2d";
    case LayerKind::MaxPool2d: return "maxpool2d";
    case LayerKind::Relu: return "relu";
    case LayerKind::Flatten: return "flatten";
    case LayerKind::Dense: return "dense";
    case LayerKind::Softmax: return "softmax";
    }
    return "unknown";
}

/// One layer of a sequential stack. Only the fields relevant to `kind` are
/// meaningful; the rest stay zero.
struct LayerSpec {
    LayerKind kind = LayerKind::Relu;
    std::size_t out_channels = 0; // conv2d
    std::size_t kernel = 0;       // conv2d
    std::size_t stride = 0;       // conv2d, maxpool2d
    std::size_t padding = 0;      // conv2d
    std::size_t window = 0;       // maxpool2d
    std::size_t out_features = 0; // dense

    static LayerSpec conv2d(std::size_t out_channels, std::size_t kernel, std::size_t stride = 1, std::size_t padding = 0) {
        return {LayerKind::Conv2d, out_channels, kernel, stride, padding, 0, 0};
    }
    static LayerSpec maxpool2d(std::size_t window, std::size_t stride) {
        return {LayerKind::MaxPool2d, 0, 0, stride, 0, window, 0};
    }
    static LayerSpec relu() { return {LayerKind::Relu}; }
    static LayerSpec flatten() { return {LayerKind::Flatten}; }
    static LayerSpec dense(std::size_t out_features) { return {LayerKind::Dense, 0, 0, 0, 0, 0, out_features}; }
    static LayerSpec softmax() { return {LayerKind::Softmax}; }

    friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

struct ModelConfig {
    std::string name;
    std::array<std::size_t, 3> input_shape{}; // (H, W, C)
    std::vector<LayerSpec> layers;
    std::size_t num_classes = 0;

    Shape input() const { return {input_shape[0], input_shape[1], input_shape[2]}; }

    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Output shape of one layer, or InvalidArchitecture.
inline Shape layer_output_shape(const LayerSpec& layer, const Shape& in) {
    auto fail = [&](const std::string& why) -> Shape {
        throw Error(ErrorCode::InvalidArchitecture,
                    std::string(to_string(layer.kind)) + " on input " + shape_string(in) + ": " + why);
    };
    try {
        switch (layer.kind) {
        case LayerKind::Conv2d:
            if (in.size() != 3) return fail("needs (H, W, C) input");
            if (layer.out_channels == 0 || layer.kernel == 0 || layer.stride == 0) return fail("parameters must be positive");
            return {conv_output_extent(in[0], layer.kernel, layer.stride, layer.padding),
                    conv_output_extent(in[1], layer.kernel, layer.stride, layer.padding), layer.out_channels};
        case LayerKind::MaxPool2d:
            if (in.size() != 3) return fail("needs (H, W, C) input");
            return {pool_output_extent(in[0], layer.window, layer.stride),
                    pool_output_extent(in[1], layer.window, layer.stride), in[2]};
        case LayerKind::Relu:
            return in;
        case LayerKind::Flatten:
            return {shape_size(in)};
        case LayerKind::Dense:
            if (in.size() != 1) return fail("needs a flattened input");
            if (layer.out_features == 0) return fail("out_features must be positive");
            return {layer.out_features};
        case LayerKind::Softmax:
            if (in.size() != 1) return fail("needs a vector input");
            return in;
        }
    } catch (const Error& e) {
        if (e.code() == ErrorCode::InvalidArchitecture) {
            throw;
        }
        return fail(e.what());
    }
    return fail("unknown layer kind");
}

/// Shapes before and after every layer: result[0] is the input shape and
/// result[i + 1] the output of layer i. Throws InvalidArchitecture.
inline std::vector<Shape> infer_shapes(const ModelConfig& config) {
    for (auto extent : config.input_shape) {
        if (extent == 0) {
            throw Error(ErrorCode::InvalidArchitecture, "input extents must be positive");
        }
    }
    if (config.layers.empty() || config.layers.back().kind != LayerKind::Softmax) {
        throw Error(ErrorCode::InvalidArchitecture, "the final layer must be softmax");
    }
    std::vector<Shape> shapes{config.input()};
    for (const auto& layer : config.layers) {
        if (layer.kind == LayerKind::Softmax && shapes.size() != config.layers.size()) {
            throw Error(ErrorCode::InvalidArchitecture, "softmax is only allowed as the final layer");
        }
        shapes.push_back(layer_output_shape(layer, shapes.back()));
    }
    if (shapes.back() != Shape{config.num_classes}) {
        throw Error(ErrorCode::InvalidArchitecture, "network output " + shape_string(shapes.back()) +
                                                        " does not match " + std::to_string(config.num_classes) +
                                                        " classes");
    }
    return shapes;
}

struct ParameterLayout {
    std::size_t weights = 0;
    std::size_t biases = 0;
    std::size_t fan_in = 0;

    std::size_t total() const noexcept { return weights + biases; }
};

inline ParameterLayout parameter_layout(const LayerSpec& layer, const Shape& in) {
    switch (layer.kind) {
    case LayerKind::Conv2d: {
        const std::size_t fan_in = layer.kernel * layer.kernel * in.at(2);
        return {fan_in * layer.out_channels, layer.out_channels, fan_in};
    }
    case LayerKind::Dense:
        return {in.at(0) * layer.out_features, layer.out_features, in.at(0)};
    default:
        return {};
    }
}

inline std::size_t parameter_count(const ModelConfig& config) {
    const auto shapes = infer_shapes(config);
    std::size_t total = 0;
    for (std::size_t i = 0; i < config.layers.size(); ++i) {
        total += parameter_layout(config.layers[i], shapes[i]).total();
    }
    return total;
}

// -------------------------------------------------------------- presets

/// 2 x [conv-relu-conv-relu-pool] + dense-128 + dense-K, 3x3 "same" convs.
inline ModelConfig mini_vgg(std::size_t num_classes, std::size_t height = 32, std::size_t width = 32,
                            std::size_t channels = 3) {
    ModelConfig config{"mini_vgg", {height, width, channels}, {}, num_classes};
    for (std::size_t filters : {8, 16}) {
        config.layers.push_back(LayerSpec::conv2d(filters, 3, 1, 1));
        config.layers.push_back(LayerSpec::relu());
        config.layers.push_back(LayerSpec::conv2d(filters, 3, 1, 1));
        config.layers.push_back(LayerSpec::relu());
        config.layers.push_back(LayerSpec::maxpool2d(2, 2));
    }
    config.layers.push_back(LayerSpec::flatten());
    config.layers.push_back(LayerSpec::dense(128));
    config.layers.push_back(LayerSpec::relu());
    config.layers.push_back(LayerSpec::dense(num_classes));
    config.layers.push_back(LayerSpec::softmax());
    return config;
}

/// The 13-conv / 3-dense VGG16 layout at 224x224x3. Meant for shape checks
/// and parameter counting; training it at desk scale is impractical.
inline ModelConfig vgg16_shape(std::size_t num_classes) {
    ModelConfig config{"vgg16_shape", {224, 224, 3}, {}, num_classes};
    const std::array<std::pair<std::size_t, std::size_t>, 5> blocks{{{64, 2}, {128, 2}, {256, 3}, {512, 3}, {512, 3}}};
    for (auto [filters, repeats] : blocks) {
        for (std::size_t r = 0; r < repeats; ++r) {
            config.layers.push_back(LayerSpec::conv2d(filters, 3, 1, 1));
            config.layers.push_back(LayerSpec::relu());
        }
        config.layers.push_back(LayerSpec::maxpool2d(2, 2));
    }
    config.layers.push_back(LayerSpec::flatten());
    for (int i = 0; i < 2; ++i) {
        config.layers.push_back(LayerSpec::dense(4096));
        config.layers.push_back(LayerSpec::relu());
    }
    config.layers.push_back(LayerSpec::dense(num_classes));
    config.layers.push_back(LayerSpec::softmax());
    return config;
}

/// Looks up a preset by name; the input size applies to mini_vgg only.
inline ModelConfig preset(std::string_view name, std::size_t num_classes, std::size_t height = 32,
                          std::size_t width = 32) {
    if (name == "mini_vgg") {
        return mini_vgg(num_classes, height, width);
    }
    if (name == "vgg16_shape") {
        return vgg16_shape(num_classes);
    }
    throw Error(ErrorCode::InvalidConfig, "unknown model preset '" + std::string(name) + "'");
}

// -------------------------------------------------------- text encoding

/// "conv2d out_channels=8 kernel=3 stride=1 padding=1", "dense out_features=10", ...
inline std::string layer_to_string(const LayerSpec& layer) {
    std::string out(to_string(layer.kind));
    auto field = [&](std::string_view key, std::size_t value) {
        out += ' ';
        out += key;
        out += '=';
        out += std::to_string(value);
    };
    switch (layer.kind) {
    case LayerKind::Conv2d:
        field("out_channels", layer.out_channels);
        field("kernel", layer.kernel);
        field("stride", layer.stride);
        field("padding", layer.padding);
        break;
    case LayerKind::MaxPool2d:
        field("window", layer.window);
        field("stride", layer.stride);
        break;
    case LayerKind::Dense:
        field("out_features", layer.out_features);
        break;
    default:
        break;
    }
    return out;
}

inline LayerSpec layer_from_string(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string kind;
    in >> kind;
    LayerSpec layer;
    if (kind == "conv2d") {
        layer.kind = LayerKind::Conv2d;
        layer.stride = 1;
    } else if (kind == "maxpool2d") {
        layer.kind = LayerKind::MaxPool2d;
    } else if (kind == "relu") {
        layer.kind = LayerKind::Relu;
    } else if (kind == "flatten") {
        layer.kind = LayerKind::Flatten;
    } else if (kind == "dense") {
        layer.kind = LayerKind::Dense;
    } else if (kind == "softmax") {
        layer.kind = LayerKind::Softmax;
    } else {
        throw Error(ErrorCode::InvalidArchitecture, "unknown layer kind '" + kind + "'");
    }
    std::string token;
    while (in >> token) {
        const auto eq = token.find('=');
        std::size_t value = 0;
        const char* first = token.data() + (eq == std::string::npos ? 0 : eq + 1);
        const char* last = token.data() + token.size();
        auto [ptr, ec] = std::from_chars(first, last, value);
        if (eq == std::string::npos || ec != std::errc{} || ptr != last) {
            throw Error(ErrorCode::InvalidArchitecture, "bad layer field '" + token + "'");
        }
        const auto key = token.substr(0, eq);
        if (key == "out_channels") layer.out_channels = value;
        else if (key == "kernel") layer.kernel = value;
        else if (key == "stride") layer.stride = value;
        else if (key == "padding") layer.padding = value;
        else if (key == "window") layer.window = value;
        else if (key == "out_features") layer.out_features = value;
        else throw Error(ErrorCode::InvalidArchitecture, "unknown layer field '" + key + "'");
    }
    return layer;
}

} // namespace leafnet::nn
