#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "leafnet/csv.hpp"
#include "leafnet/error.hpp"
#include "leafnet/image.hpp"
#include "leafnet/random.hpp"

namespace leafnet {

struct ClassLabel {
    std::size_t index = 0;
    std::string name;

    friend bool operator==(const ClassLabel&, const ClassLabel&) = default;
};

struct LabeledImage {
    std::filesystem::path path;
    std::size_t label = 0;

    friend bool operator==(const LabeledImage&, const LabeledImage&) = default;
};

/// Ordered image records plus their class table.
///
/// Invariants: class indices are dense 0..K-1 with unique names, every record
/// label is a valid index and `per_class_counts` tallies the records.
/// `warnings` lists files skipped during ingestion and is not serialized.
struct DatasetManifest {
    std::vector<LabeledImage> records;
    std::vector<ClassLabel> classes;
    std::vector<std::size_t> per_class_counts;
    std::vector<std::string> warnings;

    std::size_t num_classes() const noexcept { return classes.size(); }
    std::size_t size() const noexcept { return records.size(); }

    std::vector<std::string> class_names() const {
        std::vector<std::string> names;
        names.reserve(classes.size());
        for (const auto& c : classes) {
            names.push_back(c.name);
        }
        return names;
    }
};

/// Builds a manifest from records and class names, recomputing the counts.
inline DatasetManifest make_manifest(std::vector<LabeledImage> records, const std::vector<std::string>& class_names) {
    DatasetManifest manifest;
    for (std::size_t i = 0; i < class_names.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            if (class_names[j] == class_names[i]) {
                throw Error(ErrorCode::MalformedManifest, "duplicate class name '" + class_names[i] + "'");
            }
        }
        manifest.classes.push_back({i, class_names[i]});
    }
    manifest.per_class_counts.assign(class_names.size(), 0);
    for (const auto& record : records) {
        if (record.label >= class_names.size()) {
            throw Error(ErrorCode::IndexOutOfRange, "record label " + std::to_string(record.label) +
                                                        " outside " + std::to_string(class_names.size()) +
                                                        " classes");
        }
        ++manifest.per_class_counts[record.label];
    }
    manifest.records = std::move(records);
    return manifest;
}

/// Scans a directory-per-class corpus. Classes are the subdirectories in
/// lexicographic order; records are ordered by (class, file name). Files that
/// do not decode are skipped and reported in `warnings`.
inline DatasetManifest scan_dataset(const std::filesystem::path& root) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (!fs::is_directory(root, ec)) {
        throw Error(ErrorCode::IoError, "not a directory: " + root.string());
    }
    std::vector<std::string> class_dirs;
    for (const auto& entry : fs::directory_iterator(root)) {
        if (entry.is_directory()) {
            class_dirs.push_back(entry.path().filename().string());
        }
    }
    if (class_dirs.empty()) {
        throw Error(ErrorCode::NoClasses, "no class subdirectories under " + root.string());
    }
    std::sort(class_dirs.begin(), class_dirs.end());

    std::vector<LabeledImage> records;
    std::vector<std::string> warnings;
    for (std::size_t label = 0; label < class_dirs.size(); ++label) {
        std::vector<std::string> files;
        for (const auto& entry : fs::directory_iterator(root / class_dirs[label])) {
            if (entry.is_regular_file()) {
                files.push_back(entry.path().filename().string());
            }
        }
        std::sort(files.begin(), files.end());
        std::size_t accepted = 0;
        for (const auto& file : files) {
            const fs::path path = root / class_dirs[label] / file;
            if (try_read_image(path)) {
                records.push_back({path, label});
                ++accepted;
            } else {
                warnings.push_back("skipped undecodable file " + (fs::path(class_dirs[label]) / file).generic_string());
            }
        }
        if (accepted == 0) {
            throw Error(ErrorCode::EmptyClass, class_dirs[label]);
        }
    }
    auto manifest = make_manifest(std::move(records), class_dirs);
    manifest.warnings = std::move(warnings);
    return manifest;
}

struct SplitSpec {
    double train_fraction = 0.8;
    std::uint64_t seed = 0;
};

/// round-half-up(fraction * total).
inline std::size_t train_count_for(std::size_t total, double fraction) {
    // The nudge keeps exact halves (e.g. 0.7 * 5) from rounding down through
    // representation error.
    return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(total) + 0.5 + 1e-9));
}

/// Seeded per-class shuffle; the first round-half-up(fraction * N_c) records
/// of each shuffled class go to train. Both outputs keep the input order.
inline std::pair<DatasetManifest, DatasetManifest> stratified_split(const DatasetManifest& manifest,
                                                                     const SplitSpec& spec) {
    if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
        throw Error(ErrorCode::InvalidRange, "train fraction must lie in (0, 1)");
    }
    std::vector<std::vector<std::size_t>> by_class(manifest.num_classes());
    for (std::size_t i = 0; i < manifest.records.size(); ++i) {
        by_class.at(manifest.records[i].label).push_back(i);
    }
    std::vector<bool> in_train(manifest.records.size(), false);
    Xoshiro256 rng(spec.seed);
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        auto& members = by_class[c];
        if (members.size() < 2) {
            throw Error(ErrorCode::ClassTooSmall, manifest.classes[c].name);
        }
        shuffle(std::span<std::size_t>(members), rng);
        const std::size_t n_train = train_count_for(members.size(), spec.train_fraction);
        for (std::size_t i = 0; i < n_train; ++i) {
            in_train[members[i]] = true;
        }
    }
    std::vector<LabeledImage> train, test;
    for (std::size_t i = 0; i < manifest.records.size(); ++i) {
        (in_train[i] ? train : test).push_back(manifest.records[i]);
    }
    const auto names = manifest.class_names();
    return {make_manifest(std::move(train), names), make_manifest(std::move(test), names)};
}

inline std::vector<double> encode_one_hot(std::size_t label, std::size_t k) {
    if (label >= k) {
        throw Error(ErrorCode::IndexOutOfRange,
                    "label " + std::to_string(label) + " outside " + std::to_string(k) + " classes");
    }
    std::vector<double> out(k, 0.0);
    out[label] = 1.0;
    return out;
}

// Manifest file: header `path,label_index,label_name`, LF endings, paths
// relative to the manifest's directory in generic (forward slash) form.

inline std::string manifest_to_csv(const DatasetManifest& manifest, const std::filesystem::path& base_dir) {
    const auto base = base_dir.empty() ? std::filesystem::path(".") : base_dir;
    std::string out = "path,label_index,label_name\n";
    for (const auto& record : manifest.records) {
        const auto rel = std::filesystem::absolute(record.path)
                             .lexically_normal()
                             .lexically_relative(std::filesystem::absolute(base).lexically_normal());
        out += csv::join({rel.generic_string(), std::to_string(record.label), manifest.classes.at(record.label).name});
        out += '\n';
    }
    return out;
}

inline void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& file) {
    const auto dir = file.has_parent_path() ? file.parent_path() : std::filesystem::path(".");
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot write " + file.string());
    }
    out << manifest_to_csv(manifest, dir);
    if (!out) {
        throw Error(ErrorCode::IoError, "short write to " + file.string());
    }
}

/// Parses manifest CSV text; relative paths are resolved against `base_dir`.
/// Does not touch the image files themselves.
inline DatasetManifest parse_manifest(std::istream& in, const std::filesystem::path& base_dir) {
    std::string line;
    std::size_t line_no = 1;
    if (!std::getline(in, line)) {
        throw Error(ErrorCode::MalformedManifest, "line 1: missing header");
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    if (line != "path,label_index,label_name") {
        throw Error(ErrorCode::MalformedManifest, "line 1: unexpected header '" + line + "'");
    }
    std::map<std::size_t, std::string> names;
    std::vector<LabeledImage> records;
    std::vector<std::string> fields;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        const auto where = "line " + std::to_string(line_no) + ": ";
        if (!csv::split(line, fields) || fields.size() != 3) {
            throw Error(ErrorCode::MalformedManifest, where + "expected 3 fields");
        }
        std::size_t label = 0;
        const auto& idx = fields[1];
        auto [ptr, ec] = std::from_chars(idx.data(), idx.data() + idx.size(), label);
        if (ec != std::errc{} || ptr != idx.data() + idx.size() || fields[0].empty()) {
            throw Error(ErrorCode::MalformedManifest, where + "bad record '" + line + "'");
        }
        auto [it, inserted] = names.emplace(label, fields[2]);
        if (!inserted && it->second != fields[2]) {
            throw Error(ErrorCode::MalformedManifest, where + "label " + idx + " has two names");
        }
        std::filesystem::path path(fields[0]);
        if (path.is_relative()) {
            path = base_dir / path;
        }
        records.push_back({path, label});
    }
    std::vector<std::string> ordered;
    for (const auto& [index, name] : names) {
        if (index != ordered.size()) {
            throw Error(ErrorCode::MalformedManifest, "class indices are not dense 0..K-1");
        }
        ordered.push_back(name);
    }
    try {
        return make_manifest(std::move(records), ordered);
    } catch (const Error& e) {
        throw Error(ErrorCode::MalformedManifest, e.what());
    }
}

inline DatasetManifest read_manifest(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open manifest " + file.string());
    }
    return parse_manifest(in, file.has_parent_path() ? file.parent_path() : std::filesystem::path("."));
}

} // namespace leafnet
