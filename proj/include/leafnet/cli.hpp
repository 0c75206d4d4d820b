#pragma once

// Subcommands `synth`, `split`, `train`, `eval` and `compare`.
//
// Exit codes: 0 success, 2 I/O failure, 3 configuration or validation error,
// 4 numeric or runtime failure (divergence, shape mismatch).

#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "leafnet/config.hpp"
#include "leafnet/dataset.hpp"
#include "leafnet/error.hpp"
#include "leafnet/metrics.hpp"
#include "leafnet/nn/checkpoint.hpp"
#include "leafnet/nn/model.hpp"
#include "leafnet/nn/train.hpp"
#include "leafnet/preprocess.hpp"
#include "leafnet/report.hpp"
#include "leafnet/synthetic.hpp"

namespace leafnet::cli {

enum ExitCode : int { Success = 0, IoFailure = 2, ConfigFailure = 3, RuntimeFailure = 4 };

inline int exit_code_for(ErrorCode code) {
    switch (code) {
    case ErrorCode::IoError:
        return IoFailure;
    case ErrorCode::Diverged:
    case ErrorCode::InvalidShape:
        return RuntimeFailure;
    default:
        return ConfigFailure;
    }
}

namespace detail {

inline void write_text(const std::filesystem::path& file, const std::string& text) {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot write " + file.string());
    }
    out << text;
    if (!out) {
        throw Error(ErrorCode::IoError, "short write to " + file.string());
    }
}

inline void ensure_directory(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) {
        throw Error(ErrorCode::IoError, "cannot create directory " + dir.string());
    }
}

inline std::string join_names(const std::vector<std::string>& names) {
    std::string out;
    for (std::size_t i = 0; i < names.size(); ++i) {
        out += (i ? "," : "") + names[i];
    }
    return out;
}

inline std::vector<std::string> split_names(const std::string& text) {
    std::vector<std::string> names;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        names.push_back(item);
    }
    return names;
}

inline std::string counts_string(const std::vector<std::size_t>& counts) {
    std::string out = "[";
    for (std::size_t i = 0; i < counts.size(); ++i) {
        out += (i ? "," : "") + std::to_string(counts[i]);
    }
    return out + "]";
}

inline DatasetManifest require_manifest(const std::optional<std::filesystem::path>& file, const char* what) {
    if (!file) {
        throw Error(ErrorCode::InvalidConfig, std::string("no ") + what + " manifest given");
    }
    if (!std::filesystem::is_regular_file(*file)) {
        throw Error(ErrorCode::InvalidConfig, std::string(what) + " manifest not found: " + file->string());
    }
    return read_manifest(*file);
}

inline void store_preprocess(nn::Checkpoint& checkpoint, const PreprocessConfig& pre) {
    checkpoint.set_metadata("preprocess.target_height", std::to_string(pre.target_height));
    checkpoint.set_metadata("preprocess.target_width", std::to_string(pre.target_width));
    checkpoint.set_metadata("preprocess.filter_kernel", std::to_string(pre.filter_kernel));
    checkpoint.set_metadata("preprocess.n_min", nn::detail::format_real(pre.n_min));
    checkpoint.set_metadata("preprocess.n_max", nn::detail::format_real(pre.n_max));
}

inline PreprocessConfig load_preprocess(const nn::Checkpoint& checkpoint) {
    PreprocessConfig pre;
    pre.target_height = checkpoint.config.input_shape[0];
    pre.target_width = checkpoint.config.input_shape[1];
    if (auto v = checkpoint.find_metadata("preprocess.target_height")) pre.target_height = std::stoul(*v);
    if (auto v = checkpoint.find_metadata("preprocess.target_width")) pre.target_width = std::stoul(*v);
    if (auto v = checkpoint.find_metadata("preprocess.filter_kernel")) pre.filter_kernel = std::stoul(*v);
    if (auto v = checkpoint.find_metadata("preprocess.n_min")) pre.n_min = nn::detail::parse_real(*v);
    if (auto v = checkpoint.find_metadata("preprocess.n_max")) pre.n_max = nn::detail::parse_real(*v);
    return pre;
}

/// Writes confusion grid/CSV/SVG, per-class metrics and the summary row.
inline void emit_evaluation(const metrics::ConfusionMatrix& matrix, const std::vector<std::string>& names,
                            const std::string& model, const std::filesystem::path& out_dir, std::ostream& out) {
    ensure_directory(out_dir);
    const auto rows = report::class_rows(matrix, names);
    const std::vector<report::NamedSummary> summary{{model, metrics::micro_aggregate(matrix)}};
    const auto grid = report::render_confusion(matrix, names);
    write_text(out_dir / "confusion.txt", grid);
    write_text(out_dir / "confusion.csv", report::confusion_csv(matrix, names));
    write_text(out_dir / "confusion.svg", report::confusion_svg(matrix, names));
    write_text(out_dir / "metrics.csv", report::class_table_csv(rows));
    write_text(out_dir / "summary.csv", report::comparison_csv(summary));
    out << "Confusion matrix (rows: truth, columns: predicted)\n" << grid << "\n";
    out << "Per-class metrics (" << model << ")\n" << report::render_class_table(rows) << "\n";
    out << "Model summary (micro one-vs-rest)\n" << report::render_comparison(summary);
}

/// Parses `truth,prediction` label-index pairs.
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>> read_prediction_pairs(
    const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open " + file.string());
    }
    std::vector<std::size_t> truths, predictions;
    for (const auto& row : report::parse_csv_table(in, {"truth", "prediction"})) {
        std::size_t values[2];
        for (int i = 0; i < 2; ++i) {
            auto [ptr, ec] = std::from_chars(row[i].data(), row[i].data() + row[i].size(), values[i]);
            if (ec != std::errc{} || ptr != row[i].data() + row[i].size()) {
                throw Error(ErrorCode::InvalidLabel, "bad label '" + row[i] + "' in " + file.string());
            }
        }
        truths.push_back(values[0]);
        predictions.push_back(values[1]);
    }
    return {std::move(truths), std::move(predictions)};
}

} // namespace detail

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;

    // synth
    std::optional<std::size_t> classes, per_class, height, width;
    // split
    std::string manifest;
    std::optional<double> fraction;
    // eval
    std::string checkpoint;
    std::string inject;
    std::string class_names;
    std::string model_name;
    // compare
    std::vector<std::string> summaries;
};

inline std::optional<RunConfig> maybe_config(const Options& opts) {
    if (opts.config.empty()) {
        return std::nullopt;
    }
    return load_run_config(opts.config);
}

inline int cmd_synth(const Options& opts, std::ostream& out, std::ostream& err) {
    auto config = maybe_config(opts);
    SyntheticSpec spec = config ? config->synthetic : SyntheticSpec{};
    if (opts.classes) spec.num_classes = *opts.classes;
    if (opts.per_class) spec.images_per_class = *opts.per_class;
    if (opts.height) spec.height = *opts.height;
    if (opts.width) spec.width = *opts.width;
    if (opts.seed) spec.seed = *opts.seed;
    std::filesystem::path dir = !opts.out.empty() ? std::filesystem::path(opts.out)
                                : config          ? config->output_dir
                                                  : throw Error(ErrorCode::InvalidConfig, "synth needs --out");
    validate(spec);
    const auto manifest = generate_synthetic_corpus(spec, dir);
    write_manifest(manifest, dir / "manifest.csv");
    for (const auto& warning : manifest.warnings) {
        err << "warning: " << warning << "\n";
    }
    out << "wrote " << manifest.size() << " images in " << manifest.num_classes() << " classes to " << dir.string()
        << "\nper-class counts " << detail::counts_string(manifest.per_class_counts) << "\n";
    return Success;
}

inline int cmd_split(const Options& opts, std::ostream& out, std::ostream&) {
    auto config = maybe_config(opts);
    SplitSpec spec = config ? config->split : SplitSpec{};
    if (opts.fraction) spec.train_fraction = *opts.fraction;
    if (opts.seed) spec.seed = *opts.seed;
    if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
        throw Error(ErrorCode::InvalidConfig, "--fraction must lie in (0, 1)");
    }
    std::filesystem::path manifest_path = opts.manifest;
    if (manifest_path.empty()) {
        if (!config || !config->dataset_root) {
            throw Error(ErrorCode::InvalidConfig, "split needs --manifest");
        }
        manifest_path = *config->dataset_root / "manifest.csv";
    }
    const auto manifest = detail::require_manifest(manifest_path, "input");
    const std::filesystem::path dir = !opts.out.empty() ? std::filesystem::path(opts.out)
                                      : config          ? config->output_dir
                                                        : manifest_path.parent_path();
    detail::ensure_directory(dir);
    const auto [train, test] = stratified_split(manifest, spec);
    write_manifest(train, dir / "train.csv");
    write_manifest(test, dir / "test.csv");
    out << "train " << detail::counts_string(train.per_class_counts) << " total " << train.size() << "\n"
        << "test  " << detail::counts_string(test.per_class_counts) << " total " << test.size() << "\n";
    return Success;
}

inline std::vector<nn::Sample> load_samples(const DatasetManifest& manifest, const PreprocessConfig& pre) {
    std::vector<nn::Sample> samples;
    samples.reserve(manifest.size());
    for (const auto& record : manifest.records) {
        samples.push_back({preprocess_file(record.path, pre), record.label});
    }
    return samples;
}

inline int cmd_train(const Options& opts, std::ostream& out, std::ostream& err) {
    if (opts.config.empty()) {
        throw Error(ErrorCode::InvalidConfig, "train needs --config");
    }
    RunConfig config = load_run_config(opts.config);
    if (opts.seed) config.train.seed = *opts.seed;
    if (!opts.out.empty()) config.output_dir = opts.out;

    const auto manifest = detail::require_manifest(config.train_manifest, "training");
    auto model = nn::preset(config.preset, manifest.num_classes(), config.preprocess.target_height,
                            config.preprocess.target_width);
    nn::infer_shapes(model);
    if (model.input_shape[0] != config.preprocess.target_height || model.input_shape[1] != config.preprocess.target_width) {
        throw Error(ErrorCode::InvalidConfig, "preset " + config.preset + " needs " +
                                                  std::to_string(model.input_shape[0]) + "x" +
                                                  std::to_string(model.input_shape[1]) + " inputs");
    }
    const auto samples = load_samples(manifest, config.preprocess);
    err << "training " << config.model_label << " (" << config.preset << ") on " << samples.size() << " samples, "
        << nn::parameter_count(model) << " parameters\n";
    auto checkpoint = nn::train(model, samples, config.train, [&](std::size_t epoch, const nn::EpochStats& stats) {
        err << "epoch " << epoch << " loss " << stats.loss << " accuracy " << stats.accuracy << "\n";
    });
    checkpoint.set_metadata("label", config.model_label);
    checkpoint.set_metadata("classes", detail::join_names(manifest.class_names()));
    detail::store_preprocess(checkpoint, config.preprocess);

    detail::ensure_directory(config.output_dir);
    nn::save_checkpoint(checkpoint, config.output_dir / "checkpoint.lpckpt");
    std::string history = "epoch,loss,accuracy\n";
    for (std::size_t i = 0; i < checkpoint.history.size(); ++i) {
        history += std::to_string(i + 1) + "," + nn::detail::format_real(checkpoint.history[i].loss) + "," +
                   nn::detail::format_real(checkpoint.history[i].accuracy) + "\n";
    }
    detail::write_text(config.output_dir / "history.csv", history);
    out << "final train accuracy " << metrics::round_percent(checkpoint.history.back().accuracy) << "%\n"
        << "checkpoint " << (config.output_dir / "checkpoint.lpckpt").string() << "\n";
    return Success;
}

inline int cmd_eval(const Options& opts, std::ostream& out, std::ostream&) {
    auto config = maybe_config(opts);
    std::filesystem::path out_dir = !opts.out.empty() ? std::filesystem::path(opts.out)
                                    : config          ? config->output_dir
                                                      : throw Error(ErrorCode::InvalidConfig, "eval needs --out");
    std::optional<std::filesystem::path> manifest_path;
    if (!opts.manifest.empty()) {
        manifest_path = opts.manifest;
    } else if (config) {
        manifest_path = config->test_manifest;
    }

    if (!opts.inject.empty()) {
        const auto [truths, predictions] = detail::read_prediction_pairs(opts.inject);
        std::vector<std::string> names;
        if (!opts.class_names.empty()) {
            names = detail::split_names(opts.class_names);
        } else if (manifest_path) {
            names = detail::require_manifest(manifest_path, "test").class_names();
        } else {
            std::size_t k = 0;
            for (std::size_t i = 0; i < truths.size(); ++i) {
                k = std::max({k, truths[i] + 1, predictions[i] + 1});
            }
            for (std::size_t c = 0; c < k; ++c) {
                names.push_back(std::to_string(c));
            }
        }
        const auto matrix = metrics::confusion_matrix(truths, predictions, names.size());
        detail::emit_evaluation(matrix, names, opts.model_name.empty() ? "injected" : opts.model_name, out_dir, out);
        return Success;
    }

    std::filesystem::path checkpoint_path = opts.checkpoint;
    if (checkpoint_path.empty()) {
        if (!config) {
            throw Error(ErrorCode::InvalidConfig, "eval needs --checkpoint");
        }
        checkpoint_path = config->output_dir / "checkpoint.lpckpt";
    }
    const auto checkpoint = nn::load_checkpoint(checkpoint_path);
    const auto manifest = detail::require_manifest(manifest_path, "test");
    if (manifest.num_classes() != checkpoint.config.num_classes) {
        throw Error(ErrorCode::InvalidShape, "manifest has " + std::to_string(manifest.num_classes()) +
                                                 " classes, model predicts " +
                                                 std::to_string(checkpoint.config.num_classes));
    }
    const PreprocessConfig pre = config ? config->preprocess : detail::load_preprocess(checkpoint);
    const nn::Network<double> network(checkpoint.config, checkpoint.parameters);
    std::vector<std::size_t> truths, predictions;
    for (const auto& record : manifest.records) {
        truths.push_back(record.label);
        predictions.push_back(nn::predict(network, preprocess_file(record.path, pre)).label);
    }
    std::string model = opts.model_name;
    if (model.empty()) {
        const auto* label = checkpoint.find_metadata("label");
        model = label ? *label : checkpoint.config.name;
    }
    const auto matrix = metrics::confusion_matrix(truths, predictions, manifest.num_classes());
    detail::emit_evaluation(matrix, manifest.class_names(), model, out_dir, out);
    return Success;
}

inline int cmd_compare(const Options& opts, std::ostream& out, std::ostream&) {
    if (opts.summaries.empty()) {
        throw Error(ErrorCode::InvalidConfig, "compare needs at least one summary CSV");
    }
    std::vector<report::NamedSummary> entries;
    for (const auto& file : opts.summaries) {
        std::ifstream in(file, std::ios::binary);
        if (!in) {
            throw Error(ErrorCode::IoError, "cannot open " + file);
        }
        try {
            for (auto& entry : report::parse_summaries(in)) {
                entries.push_back(std::move(entry));
            }
        } catch (const Error& e) {
            throw Error(ErrorCode::InvalidConfig, file + ": " + e.what());
        }
    }
    const auto ranked = report::rank_models(std::move(entries));
    out << report::render_comparison(ranked);
    if (!opts.out.empty()) {
        detail::ensure_directory(opts.out);
        detail::write_text(std::filesystem::path(opts.out) / "comparison.csv", report::comparison_csv(ranked));
    }
    return Success;
}

/// Entry point shared by the executable and the tests.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Small-image classification: synthesize, split, train, evaluate, compare"};
    app.require_subcommand(1);
    Options opts;

    auto shared = [&](CLI::App* sub) {
        sub->add_option("--config", opts.config, "Run configuration file (key = value)");
        sub->add_option("--seed", opts.seed, "Seed override");
        sub->add_option("--out", opts.out, "Output directory");
    };

    auto* synth = app.add_subcommand("synth", "Generate a synthetic directory-per-class corpus");
    shared(synth);
    synth->add_option("--classes", opts.classes, "Number of classes (default 5)");
    synth->add_option("--per-class", opts.per_class, "Images per class (default 200)");
    synth->add_option("--height", opts.height, "Image height (default 32)");
    synth->add_option("--width", opts.width, "Image width (default 32)");

    auto* split = app.add_subcommand("split", "Stratified train/test split of a manifest");
    shared(split);
    split->add_option("--manifest", opts.manifest, "Input manifest CSV");
    split->add_option("--fraction", opts.fraction, "Training fraction in (0, 1), default 0.8");

    auto* train = app.add_subcommand("train", "Preprocess the training manifest and train a model");
    shared(train);

    auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a labeled manifest");
    shared(eval);
    eval->add_option("--checkpoint", opts.checkpoint, "Checkpoint file");
    eval->add_option("--manifest", opts.manifest, "Labeled test manifest CSV");
    eval->add_option("--inject-predictions", opts.inject, "CSV of truth,prediction label pairs (skips the model)");
    eval->add_option("--classes", opts.class_names, "Comma-separated class names for injected predictions");
    eval->add_option("--name", opts.model_name, "Model label used in the summary");

    auto* compare = app.add_subcommand("compare", "Rank models from summary CSVs");
    compare->add_option("summaries", opts.summaries, "Summary CSV files");
    compare->add_option("--out", opts.out, "Directory for comparison.csv");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? Success : ConfigFailure;
    }

    try {
        if (synth->parsed()) return cmd_synth(opts, out, err);
        if (split->parsed()) return cmd_split(opts, out, err);
        if (train->parsed()) return cmd_train(opts, out, err);
        if (eval->parsed()) return cmd_eval(opts, out, err);
        if (compare->parsed()) return cmd_compare(opts, out, err);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return IoFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return RuntimeFailure;
    }
    return ConfigFailure;
}

} // namespace leafnet::cli
