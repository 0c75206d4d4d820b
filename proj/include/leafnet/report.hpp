#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "leafnet/csv.hpp"
#include "leafnet/error.hpp"
#include "leafnet/metrics.hpp"

namespace leafnet::report {

using metrics::BinaryCounts;
using metrics::ClassMetrics;
using metrics::ConfusionMatrix;
using metrics::ModelSummary;

inline const std::vector<std::string>& class_csv_header() {
    static const std::vector<std::string> header{"category", "tp",          "tn",          "fp",  "fn",  "precision",
                                                 "f1",       "sensitivity", "specificity", "fpr", "fnr", "accuracy"};
    return header;
}

inline const std::vector<std::string>& comparison_csv_header() {
    static const std::vector<std::string> header{"model", "tp",          "tn",          "fp",  "fn",  "precision",
                                                 "f1",    "sensitivity", "specificity", "fpr", "fnr", "accuracy",
                                                 "multiclass_accuracy"};
    return header;
}

/// Label, counts and the seven percentage cells, in table column order.
inline std::vector<std::string> metric_cells(const std::string& label, const BinaryCounts& c, const ClassMetrics& m) {
    using metrics::round_percent;
    return {label,
            std::to_string(c.tp),
            std::to_string(c.tn),
            std::to_string(c.fp),
            std::to_string(c.fn),
            round_percent(m.precision),
            round_percent(m.f1),
            round_percent(m.sensitivity),
            round_percent(m.specificity),
            round_percent(m.fpr),
            round_percent(m.fnr),
            round_percent(m.accuracy)};
}

struct ClassRow {
    std::string name;
    BinaryCounts counts;
    ClassMetrics metrics;
};

/// One row per class of `matrix`, in index order.
inline std::vector<ClassRow> class_rows(const ConfusionMatrix& matrix, const std::vector<std::string>& names) {
    if (names.size() != matrix.k()) {
        throw Error(ErrorCode::LengthMismatch, "need one name per class");
    }
    std::vector<ClassRow> rows;
    for (std::size_t c = 0; c < matrix.k(); ++c) {
        const auto counts = metrics::one_vs_rest(matrix, c);
        rows.push_back({names[c], counts, metrics::class_metrics(counts)});
    }
    return rows;
}

namespace detail {

inline std::string render_grid(const std::vector<std::vector<std::string>>& cells) {
    std::vector<std::size_t> widths;
    for (const auto& row : cells) {
        widths.resize(std::max(widths.size(), row.size()), 0);
        for (std::size_t i = 0; i < row.size(); ++i) {
            widths[i] = std::max(widths[i], row[i].size());
        }
    }
    std::string out;
    for (const auto& row : cells) {
        std::string line;
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i == 0) {
                line += row[i] + std::string(widths[i] - row[i].size(), ' ');
            } else {
                line += "  " + std::string(widths[i] - row[i].size(), ' ') + row[i];
            }
        }
        while (!line.empty() && line.back() == ' ') {
            line.pop_back();
        }
        out += line + "\n";
    }
    return out;
}

inline std::string to_csv(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
    std::string out = csv::join(header) + "\n";
    for (const auto& row : rows) {
        out += csv::join(row) + "\n";
    }
    return out;
}

} // namespace detail

/// Per-class table: Category, TP, TN, FP, FN, Precision, F1, Sensitivity,
/// Specificity, FPR, FNR, Accuracy (percent columns with two decimals).
inline std::string render_class_table(const std::vector<ClassRow>& rows) {
    std::vector<std::vector<std::string>> cells{{"Category", "TP", "TN", "FP", "FN", "Precision(%)", "F1(%)",
                                                 "Sensitivity(%)", "Specificity(%)", "FPR(%)", "FNR(%)",
                                                 "Accuracy(%)"}};
    for (const auto& row : rows) {
        cells.push_back(metric_cells(row.name, row.counts, row.metrics));
    }
    return detail::render_grid(cells);
}

inline std::string class_table_csv(const std::vector<ClassRow>& rows) {
    std::vector<std::vector<std::string>> body;
    for (const auto& row : rows) {
        body.push_back(metric_cells(row.name, row.counts, row.metrics));
    }
    return detail::to_csv(class_csv_header(), body);
}

/// Reads CSV text with the given header into string cells.
inline std::vector<std::vector<std::string>> parse_csv_table(std::istream& in, const std::vector<std::string>& header) {
    std::string line;
    std::vector<std::string> fields;
    if (!std::getline(in, line) || !csv::split(line, fields) || fields != header) {
        throw Error(ErrorCode::MalformedManifest, "line 1: expected header '" + csv::join(header) + "'");
    }
    std::vector<std::vector<std::string>> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        if (!csv::split(line, fields) || fields.size() != header.size()) {
            throw Error(ErrorCode::MalformedManifest, "line " + std::to_string(line_no) + ": expected " +
                                                          std::to_string(header.size()) + " fields");
        }
        rows.push_back(fields);
    }
    return rows;
}

// ------------------------------------------------------------ confusion

/// Text grid with predicted labels across the top and truth labels down the
/// side; cell (row t, column p) counts truth t predicted as p.
inline std::string render_confusion(const ConfusionMatrix& matrix, const std::vector<std::string>& names) {
    if (names.size() != matrix.k()) {
        throw Error(ErrorCode::LengthMismatch, "need one name per class");
    }
    std::vector<std::vector<std::string>> cells;
    std::vector<std::string> header{"truth \\ predicted"};
    header.insert(header.end(), names.begin(), names.end());
    cells.push_back(header);
    for (std::size_t t = 0; t < matrix.k(); ++t) {
        std::vector<std::string> row{names[t]};
        for (std::size_t p = 0; p < matrix.k(); ++p) {
            row.push_back(std::to_string(matrix.at(t, p)));
        }
        cells.push_back(row);
    }
    return detail::render_grid(cells);
}

/// CSV form of the grid: header `truth,<predicted names...>`.
inline std::string confusion_csv(const ConfusionMatrix& matrix, const std::vector<std::string>& names) {
    std::vector<std::string> header{"truth"};
    header.insert(header.end(), names.begin(), names.end());
    std::vector<std::vector<std::string>> rows;
    for (std::size_t t = 0; t < matrix.k(); ++t) {
        std::vector<std::string> row{names.at(t)};
        for (std::size_t p = 0; p < matrix.k(); ++p) {
            row.push_back(std::to_string(matrix.at(t, p)));
        }
        rows.push_back(row);
    }
    return detail::to_csv(header, rows);
}

namespace detail {

inline std::string xml_escape(const std::string& text) {
    std::string out;
    for (char ch : text) {
        switch (ch) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += ch;
        }
    }
    return out;
}

} // namespace detail

/// SVG heatmap. Layout: 48px cells starting at (120, 40); predicted labels
/// above the columns, truth labels left of the rows. Each cell is a <rect>
/// whose fill runs linearly from #ffffff (0) to #1b5e20 (largest count),
/// followed by a <text> with the count.
inline std::string confusion_svg(const ConfusionMatrix& matrix, const std::vector<std::string>& names) {
    if (names.size() != matrix.k()) {
        throw Error(ErrorCode::LengthMismatch, "need one name per class");
    }
    constexpr std::size_t cell = 48, left = 120, top = 40;
    const std::size_t k = matrix.k();
    std::uint64_t peak = 0;
    for (auto v : matrix.counts()) {
        peak = std::max(peak, v);
    }
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << left + cell * k + 10 << "\" height=\""
        << top + cell * k + 30 << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    svg << "<text x=\"" << left << "\" y=\"14\">predicted</text>\n";
    svg << "<text x=\"4\" y=\"" << top - 4 << "\">truth</text>\n";
    for (std::size_t p = 0; p < k; ++p) {
        svg << "<text x=\"" << left + p * cell + cell / 2 << "\" y=\"" << top - 6 << "\" text-anchor=\"middle\">"
            << detail::xml_escape(names[p]) << "</text>\n";
    }
    for (std::size_t t = 0; t < k; ++t) {
        svg << "<text x=\"" << left - 6 << "\" y=\"" << top + t * cell + cell / 2 + 4 << "\" text-anchor=\"end\">"
            << detail::xml_escape(names[t]) << "</text>\n";
        for (std::size_t p = 0; p < k; ++p) {
            const auto v = matrix.at(t, p);
            // integer interpolation keeps the bytes platform independent
            auto channel = [&](unsigned lo) {
                return 255u - static_cast<unsigned>(peak == 0 ? 0 : (255u - lo) * v / peak);
            };
            char fill[8];
            std::snprintf(fill, sizeof fill, "#%02x%02x%02x", channel(0x1b), channel(0x5e), channel(0x20));
            const bool dark = peak != 0 && 2 * v > peak;
            svg << "<rect x=\"" << left + p * cell << "\" y=\"" << top + t * cell << "\" width=\"" << cell
                << "\" height=\"" << cell << "\" fill=\"" << fill << "\" stroke=\"#999999\"/>\n";
            svg << "<text x=\"" << left + p * cell + cell / 2 << "\" y=\"" << top + t * cell + cell / 2 + 4
                << "\" text-anchor=\"middle\" fill=\"" << (dark ? "#ffffff" : "#000000") << "\">" << v << "</text>\n";
        }
    }
    svg << "</svg>\n";
    return svg.str();
}

// ----------------------------------------------------------- comparison

struct NamedSummary {
    std::string model;
    ModelSummary summary;
};

inline std::vector<std::string> comparison_cells(const NamedSummary& entry) {
    auto cells = metric_cells(entry.model, entry.summary.totals, entry.summary.metrics);
    cells.push_back(metrics::round_percent(entry.summary.multiclass_accuracy));
    return cells;
}

/// Micro one-vs-rest accuracy descending, ties by model name. Compared on
/// exact counts, not on rounded percentages.
inline std::vector<NamedSummary> rank_models(std::vector<NamedSummary> entries) {
    auto better = [](const NamedSummary& a, const NamedSummary& b) {
        const auto& x = a.summary.totals;
        const auto& y = b.summary.totals;
        const unsigned __int128 lhs = static_cast<unsigned __int128>(x.tp + x.tn) * y.total();
        const unsigned __int128 rhs = static_cast<unsigned __int128>(y.tp + y.tn) * x.total();
        if (lhs != rhs) {
            return lhs > rhs;
        }
        return a.model < b.model;
    };
    std::stable_sort(entries.begin(), entries.end(), better);
    return entries;
}

inline std::string render_comparison(const std::vector<NamedSummary>& ranked) {
    std::vector<std::vector<std::string>> cells{{"Model", "TP", "TN", "FP", "FN", "Precision(%)", "F1(%)",
                                                 "Sensitivity(%)", "Specificity(%)", "FPR(%)", "FNR(%)",
                                                 "Accuracy(%)", "Multiclass accuracy(%)"}};
    for (const auto& entry : ranked) {
        cells.push_back(comparison_cells(entry));
    }
    return detail::render_grid(cells);
}

inline std::string comparison_csv(const std::vector<NamedSummary>& ranked) {
    std::vector<std::vector<std::string>> body;
    for (const auto& entry : ranked) {
        body.push_back(comparison_cells(entry));
    }
    return detail::to_csv(comparison_csv_header(), body);
}

/// Reads comparison/summary CSV rows. Metrics are recomputed from the counts;
/// the rendered percentage columns are ignored.
inline std::vector<NamedSummary> parse_summaries(std::istream& in) {
    std::vector<NamedSummary> out;
    for (const auto& row : parse_csv_table(in, comparison_csv_header())) {
        BinaryCounts totals;
        std::uint64_t* fields[] = {&totals.tp, &totals.tn, &totals.fp, &totals.fn};
        for (std::size_t i = 0; i < 4; ++i) {
            const auto& text = row[i + 1];
            auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), *fields[i]);
            if (ec != std::errc{} || ptr != text.data() + text.size()) {
                throw Error(ErrorCode::MalformedManifest, "bad count '" + text + "' for model " + row[0]);
            }
        }
        if (totals.total() == 0) {
            throw Error(ErrorCode::MalformedManifest, "model " + row[0] + " has no counts");
        }
        out.push_back({row[0], metrics::summary_from_totals(totals)});
    }
    return out;
}

} // namespace leafnet::report
