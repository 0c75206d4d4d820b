#pragma once

// Run configuration files: one `key = value` per line, `#` starts a comment,
// keys are dotted (`train.learning_rate = 0.01`). Relative paths resolve
// against the directory holding the file.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>

#include "leafnet/dataset.hpp"
#include "leafnet/error.hpp"
#include "leafnet/nn/train.hpp"
#include "leafnet/preprocess.hpp"
#include "leafnet/synthetic.hpp"

namespace leafnet {

/// Parsed key/value pairs with the line each came from.
class KeyValueFile {
public:
    static KeyValueFile parse(std::istream& in) {
        KeyValueFile file;
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (const auto hash = line.find('#'); hash != std::string::npos) {
                line.erase(hash);
            }
            const auto text = trim(line);
            if (text.empty()) {
                continue;
            }
            const auto eq = text.find('=');
            if (eq == std::string_view::npos) {
                throw Error(ErrorCode::InvalidConfig, "line " + std::to_string(line_no) + ": expected 'key = value'");
            }
            const auto key = std::string(trim(text.substr(0, eq)));
            const auto value = std::string(trim(text.substr(eq + 1)));
            if (key.empty()) {
                throw Error(ErrorCode::InvalidConfig, "line " + std::to_string(line_no) + ": empty key");
            }
            if (!file.entries_.emplace(key, Entry{value, line_no}).second) {
                throw Error(ErrorCode::InvalidConfig, "line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
            }
        }
        return file;
    }

    bool contains(const std::string& key) const { return entries_.count(key) != 0; }

    std::optional<std::string> text(const std::string& key) const {
        auto it = entries_.find(key);
        if (it == entries_.end()) {
            return std::nullopt;
        }
        it->second.used = true;
        return it->second.value;
    }

    template <typename T>
    std::optional<T> number(const std::string& key) const {
        auto value = text(key);
        if (!value) {
            return std::nullopt;
        }
        T parsed{};
        auto [ptr, ec] = std::from_chars(value->data(), value->data() + value->size(), parsed);
        if (ec != std::errc{} || ptr != value->data() + value->size()) {
            throw Error(ErrorCode::InvalidConfig, "line " + std::to_string(entries_.at(key).line) + ": '" + key +
                                                      "' is not a valid number");
        }
        return parsed;
    }

    /// Throws for the first key that no accessor has read.
    void reject_unused() const {
        for (const auto& [key, entry] : entries_) {
            if (!entry.used) {
                throw Error(ErrorCode::InvalidConfig, "line " + std::to_string(entry.line) + ": unknown key '" + key + "'");
            }
        }
    }

private:
    struct Entry {
        std::string value;
        std::size_t line = 0;
        mutable bool used = false;
    };

    static std::string_view trim(std::string_view text) {
        const auto first = text.find_first_not_of(" \t\r");
        if (first == std::string_view::npos) {
            return {};
        }
        const auto last = text.find_last_not_of(" \t\r");
        return text.substr(first, last - first + 1);
    }

    std::map<std::string, Entry> entries_;
};

struct RunConfig {
    std::optional<std::filesystem::path> dataset_root;
    SyntheticSpec synthetic;
    std::optional<std::filesystem::path> train_manifest;
    std::optional<std::filesystem::path> test_manifest;
    SplitSpec split;
    PreprocessConfig preprocess;
    std::string preset = "mini_vgg";
    /// Display label for reports, e.g. "VGG16"; defaults to the preset.
    std::string model_label;
    nn::TrainConfig train;
    std::filesystem::path output_dir = "out";
};

inline void validate(const RunConfig& config) {
    validate(config.preprocess);
    nn::validate(config.train);
    if (!(config.split.train_fraction > 0.0 && config.split.train_fraction < 1.0)) {
        throw Error(ErrorCode::InvalidConfig, "split.train_fraction must lie in (0, 1)");
    }
    if (config.preset != "mini_vgg" && config.preset != "vgg16_shape") {
        throw Error(ErrorCode::InvalidConfig, "unknown model.preset '" + config.preset + "'");
    }
}

inline RunConfig parse_run_config(std::istream& in, const std::filesystem::path& base_dir) {
    const auto file = KeyValueFile::parse(in);
    RunConfig config;
    auto path = [&](const std::string& key) -> std::optional<std::filesystem::path> {
        auto value = file.text(key);
        if (!value) {
            return std::nullopt;
        }
        std::filesystem::path p(*value);
        return p.is_relative() ? base_dir / p : p;
    };
    config.dataset_root = path("dataset.root");
    config.train_manifest = path("manifest.train");
    config.test_manifest = path("manifest.test");
    if (auto out = path("output.dir")) {
        config.output_dir = *out;
    } else {
        config.output_dir = base_dir / config.output_dir;
    }

    auto& synth = config.synthetic;
    synth.num_classes = file.number<std::size_t>("synthetic.num_classes").value_or(synth.num_classes);
    synth.images_per_class = file.number<std::size_t>("synthetic.images_per_class").value_or(synth.images_per_class);
    synth.height = file.number<std::size_t>("synthetic.height").value_or(synth.height);
    synth.width = file.number<std::size_t>("synthetic.width").value_or(synth.width);
    synth.seed = file.number<std::uint64_t>("synthetic.seed").value_or(synth.seed);

    config.split.train_fraction = file.number<double>("split.train_fraction").value_or(config.split.train_fraction);
    config.split.seed = file.number<std::uint64_t>("split.seed").value_or(config.split.seed);

    auto& pre = config.preprocess;
    pre.target_height = file.number<std::size_t>("preprocess.target_height").value_or(pre.target_height);
    pre.target_width = file.number<std::size_t>("preprocess.target_width").value_or(pre.target_width);
    pre.filter_kernel = file.number<std::size_t>("preprocess.filter_kernel").value_or(pre.filter_kernel);
    pre.n_min = file.number<double>("preprocess.n_min").value_or(pre.n_min);
    pre.n_max = file.number<double>("preprocess.n_max").value_or(pre.n_max);

    config.preset = file.text("model.preset").value_or(config.preset);
    config.model_label = file.text("model.name").value_or(config.preset);

    auto& train = config.train;
    train.epochs = file.number<std::size_t>("train.epochs").value_or(train.epochs);
    train.batch_size = file.number<std::size_t>("train.batch_size").value_or(train.batch_size);
    train.learning_rate = file.number<double>("train.learning_rate").value_or(train.learning_rate);
    train.momentum = file.number<double>("train.momentum").value_or(train.momentum);
    train.seed = file.number<std::uint64_t>("train.seed").value_or(train.seed);

    file.reject_unused();
    validate(config);
    return config;
}

inline RunConfig load_run_config(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) {
        throw Error(ErrorCode::InvalidConfig, "cannot open config " + file.string());
    }
    return parse_run_config(in, file.has_parent_path() ? file.parent_path() : std::filesystem::path("."));
}

} // namespace leafnet
