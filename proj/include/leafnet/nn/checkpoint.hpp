#pragma once

// Checkpoint file layout
// ----------------------
//   bytes 0..7   magic "LPCKPT1\n"
//   header       UTF-8 lines "key = value", LF terminated, in this order:
//                  name = <model name>
//                  input_shape = <H> <W> <C>
//                  num_classes = <K>
//                  layer = <layer text>            one per layer, in order
//                  epoch = <completed epochs>
//                  history = <loss> <accuracy>     one per epoch, in order
//                  meta.<key> = <value>            zero or more
//                  parameters = <layer> <count>    one per layer, in order
//   separator    an empty line
//   payload      every layer's parameters (weights, then biases) as IEEE-754
//                binary64, little endian, layers in order, no padding
//
// Reals in the header use the shortest round-trip decimal form, so a
// save/load cycle is bit exact.

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "leafnet/error.hpp"
#include "leafnet/nn/model.hpp"
#include "leafnet/nn/network.hpp"

namespace leafnet::nn {

inline constexpr std::string_view checkpoint_magic = "LPCKPT1\n";

struct EpochStats {
    double loss = 0.0;
    double accuracy = 0.0;

    friend bool operator==(const EpochStats&, const EpochStats&) = default;
};

struct Checkpoint {
    ModelConfig config;
    LayerParameters<double> parameters;
    std::size_t epoch = 0;
    std::vector<EpochStats> history;
    /// Free-form provenance (optimizer, loss, preprocessing). Ordered.
    std::vector<std::pair<std::string, std::string>> metadata;

    const std::string* find_metadata(std::string_view key) const {
        for (const auto& [k, v] : metadata) {
            if (k == key) {
                return &v;
            }
        }
        return nullptr;
    }

    void set_metadata(std::string key, std::string value) {
        for (auto& [k, v] : metadata) {
            if (k == key) {
                v = std::move(value);
                return;
            }
        }
        metadata.emplace_back(std::move(key), std::move(value));
    }

    friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

namespace detail {

inline std::string format_real(double value) {
    char buffer[32];
    auto [end, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
    return std::string(buffer, end);
}

inline double parse_real(std::string_view text) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw Error(ErrorCode::MalformedCheckpoint, "bad real '" + std::string(text) + "'");
    }
    return value;
}

inline std::size_t parse_count(std::string_view text) {
    std::size_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw Error(ErrorCode::MalformedCheckpoint, "bad integer '" + std::string(text) + "'");
    }
    return value;
}

inline std::vector<std::string_view> split_spaces(std::string_view text) {
    std::vector<std::string_view> parts;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto end = text.find(' ', pos);
        const auto stop = end == std::string_view::npos ? text.size() : end;
        if (stop > pos) {
            parts.push_back(text.substr(pos, stop - pos));
        }
        pos = stop + 1;
    }
    return parts;
}

inline void require_single_line(std::string_view text, std::string_view what) {
    if (text.find('\n') != std::string_view::npos || text.find('\r') != std::string_view::npos) {
        throw Error(ErrorCode::InvalidConfig, std::string(what) + " must not contain line breaks");
    }
}

} // namespace detail

inline std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& checkpoint) {
    const auto& config = checkpoint.config;
    Network<double> validated(config, checkpoint.parameters); // throws on count mismatch
    detail::require_single_line(config.name, "model name");

    std::string header(checkpoint_magic);
    header += "name = " + config.name + "\n";
    header += "input_shape = " + std::to_string(config.input_shape[0]) + " " + std::to_string(config.input_shape[1]) +
              " " + std::to_string(config.input_shape[2]) + "\n";
    header += "num_classes = " + std::to_string(config.num_classes) + "\n";
    for (const auto& layer : config.layers) {
        header += "layer = " + layer_to_string(layer) + "\n";
    }
    header += "epoch = " + std::to_string(checkpoint.epoch) + "\n";
    for (const auto& stats : checkpoint.history) {
        header += "history = " + detail::format_real(stats.loss) + " " + detail::format_real(stats.accuracy) + "\n";
    }
    for (const auto& [key, value] : checkpoint.metadata) {
        detail::require_single_line(key, "metadata key");
        detail::require_single_line(value, "metadata value");
        if (key.empty() || key.find(' ') != std::string::npos) {
            throw Error(ErrorCode::InvalidConfig, "metadata keys must be non-empty without spaces");
        }
        header += "meta." + key + " = " + value + "\n";
    }
    std::size_t total = 0;
    for (std::size_t i = 0; i < checkpoint.parameters.size(); ++i) {
        header += "parameters = " + std::to_string(i) + " " + std::to_string(checkpoint.parameters[i].size()) + "\n";
        total += checkpoint.parameters[i].size();
    }
    header += "\n";

    std::vector<std::uint8_t> bytes(header.begin(), header.end());
    bytes.reserve(bytes.size() + 8 * total);
    for (const auto& layer : checkpoint.parameters) {
        for (double value : layer) {
            const auto bits = std::bit_cast<std::uint64_t>(value);
            for (int b = 0; b < 8; ++b) {
                bytes.push_back(static_cast<std::uint8_t>(bits >> (8 * b)));
            }
        }
    }
    return bytes;
}

inline Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
    const std::string_view text(reinterpret_cast<const char*>(bytes.data()), bytes.size());
    if (!text.starts_with(checkpoint_magic)) {
        throw Error(ErrorCode::MalformedCheckpoint, "missing LPCKPT1 magic");
    }
    const auto header_end = text.find("\n\n", checkpoint_magic.size() - 1);
    if (header_end == std::string_view::npos) {
        throw Error(ErrorCode::MalformedCheckpoint, "header is not terminated by a blank line");
    }
    Checkpoint checkpoint;
    std::vector<std::size_t> counts;
    bool have_name = false, have_input = false, have_classes = false, have_epoch = false;
    std::size_t pos = checkpoint_magic.size();
    while (pos <= header_end) {
        const auto eol = text.find('\n', pos);
        const auto line = text.substr(pos, eol - pos);
        pos = eol + 1;
        const auto sep = line.find(" = ");
        if (sep == std::string_view::npos) {
            throw Error(ErrorCode::MalformedCheckpoint, "bad header line '" + std::string(line) + "'");
        }
        const auto key = line.substr(0, sep);
        const auto value = line.substr(sep + 3);
        if (key == "name") {
            checkpoint.config.name = std::string(value);
            have_name = true;
        } else if (key == "input_shape") {
            const auto parts = detail::split_spaces(value);
            if (parts.size() != 3) {
                throw Error(ErrorCode::MalformedCheckpoint, "input_shape needs three extents");
            }
            for (std::size_t i = 0; i < 3; ++i) {
                checkpoint.config.input_shape[i] = detail::parse_count(parts[i]);
            }
            have_input = true;
        } else if (key == "num_classes") {
            checkpoint.config.num_classes = detail::parse_count(value);
            have_classes = true;
        } else if (key == "layer") {
            try {
                checkpoint.config.layers.push_back(layer_from_string(value));
            } catch (const Error& e) {
                throw Error(ErrorCode::MalformedCheckpoint, e.what());
            }
        } else if (key == "epoch") {
            checkpoint.epoch = detail::parse_count(value);
            have_epoch = true;
        } else if (key == "history") {
            const auto parts = detail::split_spaces(value);
            if (parts.size() != 2) {
                throw Error(ErrorCode::MalformedCheckpoint, "history needs loss and accuracy");
            }
            checkpoint.history.push_back({detail::parse_real(parts[0]), detail::parse_real(parts[1])});
        } else if (key.starts_with("meta.")) {
            checkpoint.metadata.emplace_back(std::string(key.substr(5)), std::string(value));
        } else if (key == "parameters") {
            const auto parts = detail::split_spaces(value);
            if (parts.size() != 2 || detail::parse_count(parts[0]) != counts.size()) {
                throw Error(ErrorCode::MalformedCheckpoint, "parameters lines out of order");
            }
            counts.push_back(detail::parse_count(parts[1]));
        } else {
            throw Error(ErrorCode::MalformedCheckpoint, "unknown header key '" + std::string(key) + "'");
        }
    }
    if (!have_name || !have_input || !have_classes || !have_epoch) {
        throw Error(ErrorCode::MalformedCheckpoint, "header is missing required keys");
    }
    std::size_t offset = header_end + 2;
    std::size_t total = 0;
    for (auto c : counts) {
        total += c;
    }
    if (bytes.size() - offset != 8 * total) {
        throw Error(ErrorCode::MalformedCheckpoint, "payload holds " + std::to_string(bytes.size() - offset) +
                                                        " bytes, header declares " + std::to_string(8 * total));
    }
    for (auto count : counts) {
        std::vector<double> layer(count);
        for (auto& value : layer) {
            std::uint64_t bits = 0;
            for (int b = 0; b < 8; ++b) {
                bits |= static_cast<std::uint64_t>(bytes[offset++]) << (8 * b);
            }
            value = std::bit_cast<double>(bits);
        }
        checkpoint.parameters.push_back(std::move(layer));
    }
    try {
        Network<double> validated(checkpoint.config, checkpoint.parameters);
    } catch (const Error& e) {
        throw Error(ErrorCode::MalformedCheckpoint, e.what());
    }
    return checkpoint;
}

inline void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& file) {
    const auto bytes = encode_checkpoint(checkpoint);
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot write " + file.string());
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw Error(ErrorCode::IoError, "short write to " + file.string());
    }
}

inline Checkpoint load_checkpoint(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open checkpoint " + file.string());
    }
    const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    return decode_checkpoint(bytes);
}

} // namespace leafnet::nn
