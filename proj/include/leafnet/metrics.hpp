#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "leafnet/error.hpp"

namespace leafnet::metrics {

/// K x K tally; rows are truth labels, columns are predicted labels.
class ConfusionMatrix {
public:
    ConfusionMatrix() = default;
    explicit ConfusionMatrix(std::size_t k) : k_(k), counts_(k * k, 0) {}

    /// Row-major counts, k * k entries.
    ConfusionMatrix(std::size_t k, std::vector<std::uint64_t> counts) : k_(k), counts_(std::move(counts)) {
        if (counts_.size() != k * k) {
            throw Error(ErrorCode::LengthMismatch, "confusion matrix needs k*k counts");
        }
    }

    std::size_t k() const noexcept { return k_; }

    std::uint64_t& at(std::size_t truth, std::size_t predicted) { return counts_.at(truth * k_ + predicted); }
    std::uint64_t at(std::size_t truth, std::size_t predicted) const { return counts_.at(truth * k_ + predicted); }

    std::uint64_t row_sum(std::size_t truth) const {
        std::uint64_t sum = 0;
        for (std::size_t p = 0; p < k_; ++p) {
            sum += at(truth, p);
        }
        return sum;
    }

    std::uint64_t column_sum(std::size_t predicted) const {
        std::uint64_t sum = 0;
        for (std::size_t t = 0; t < k_; ++t) {
            sum += at(t, predicted);
        }
        return sum;
    }

    std::uint64_t trace() const {
        std::uint64_t sum = 0;
        for (std::size_t c = 0; c < k_; ++c) {
            sum += at(c, c);
        }
        return sum;
    }

    std::uint64_t total() const {
        std::uint64_t sum = 0;
        for (auto v : counts_) {
            sum += v;
        }
        return sum;
    }

    const std::vector<std::uint64_t>& counts() const noexcept { return counts_; }

    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

private:
    std::size_t k_ = 0;
    std::vector<std::uint64_t> counts_;
};

inline ConfusionMatrix confusion_matrix(std::span<const std::size_t> truths, std::span<const std::size_t> predictions,
                                        std::size_t k) {
    if (truths.size() != predictions.size()) {
        throw Error(ErrorCode::LengthMismatch, std::to_string(truths.size()) + " truths vs " +
                                                   std::to_string(predictions.size()) + " predictions");
    }
    if (truths.empty()) {
        throw Error(ErrorCode::LengthMismatch, "no samples");
    }
    ConfusionMatrix matrix(k);
    for (std::size_t i = 0; i < truths.size(); ++i) {
        if (truths[i] >= k || predictions[i] >= k) {
            throw Error(ErrorCode::InvalidLabel, "sample " + std::to_string(i) + " has a label outside [0, " +
                                                     std::to_string(k) + ")");
        }
        ++matrix.at(truths[i], predictions[i]);
    }
    return matrix;
}

struct BinaryCounts {
    std::uint64_t tp = 0;
    std::uint64_t tn = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;

    std::uint64_t total() const noexcept { return tp + tn + fp + fn; }

    BinaryCounts& operator+=(const BinaryCounts& other) noexcept {
        tp += other.tp;
        tn += other.tn;
        fp += other.fp;
        fn += other.fn;
        return *this;
    }

    friend bool operator==(const BinaryCounts&, const BinaryCounts&) = default;
};

/// Class `c` as positive, every other class as negative.
inline BinaryCounts one_vs_rest(const ConfusionMatrix& matrix, std::size_t c) {
    if (c >= matrix.k()) {
        throw Error(ErrorCode::InvalidLabel, "class " + std::to_string(c) + " outside [0, " +
                                                 std::to_string(matrix.k()) + ")");
    }
    BinaryCounts counts;
    counts.tp = matrix.at(c, c);
    counts.fn = matrix.row_sum(c) - counts.tp;
    counts.fp = matrix.column_sum(c) - counts.tp;
    counts.tn = matrix.total() - counts.tp - counts.fn - counts.fp;
    return counts;
}

/// Ratios in [0, 1]; rendered as percentages by round_percent.
struct ClassMetrics {
    double precision = 0.0;
    double f1 = 0.0;
    double sensitivity = 0.0;
    double specificity = 0.0;
    double fpr = 0.0;
    double fnr = 0.0;
    double accuracy = 0.0;

    friend bool operator==(const ClassMetrics&, const ClassMetrics&) = default;
};

/// num / den, with 0 / 0 taken as 0.
inline double safe_ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

inline ClassMetrics class_metrics(const BinaryCounts& counts) {
    if (counts.total() == 0) {
        throw Error(ErrorCode::EmptyCounts, "all counts are zero");
    }
    const auto tp = static_cast<double>(counts.tp);
    const auto tn = static_cast<double>(counts.tn);
    const auto fp = static_cast<double>(counts.fp);
    const auto fn = static_cast<double>(counts.fn);
    ClassMetrics m;
    m.precision = safe_ratio(tp, tp + fp);
    m.sensitivity = safe_ratio(tp, tp + fn);
    m.specificity = safe_ratio(tn, tn + fp);
    m.f1 = safe_ratio(2.0 * m.precision * m.sensitivity, m.precision + m.sensitivity);
    m.fpr = safe_ratio(fp, fp + tn);
    m.fnr = safe_ratio(fn, fn + tp);
    m.accuracy = safe_ratio(tp + tn, tp + tn + fp + fn);
    return m;
}

/// Micro aggregation: one-vs-rest counts summed over classes, metrics from
/// the sums. `multiclass_accuracy` is the plain trace / N, which differs from
/// the one-vs-rest `metrics.accuracy`.
struct ModelSummary {
    BinaryCounts totals;
    ClassMetrics metrics;
    double multiclass_accuracy = 0.0;
};

/// Builds a summary from already-summed one-vs-rest counts. Because summed
/// FN equals N - trace, the plain accuracy is tp / (tp + fn).
inline ModelSummary summary_from_totals(const BinaryCounts& totals) {
    return {totals, class_metrics(totals),
            safe_ratio(static_cast<double>(totals.tp), static_cast<double>(totals.tp + totals.fn))};
}

inline ModelSummary micro_aggregate(const ConfusionMatrix& matrix) {
    if (matrix.k() == 0 || matrix.total() == 0) {
        throw Error(ErrorCode::EmptyCounts, "confusion matrix is empty");
    }
    BinaryCounts totals;
    for (std::size_t c = 0; c < matrix.k(); ++c) {
        totals += one_vs_rest(matrix, c);
    }
    ModelSummary summary{totals, class_metrics(totals), 0.0};
    summary.multiclass_accuracy =
        static_cast<double>(matrix.trace()) / static_cast<double>(matrix.total());
    return summary;
}

/// 100 * ratio, rounded half-up to two decimals, e.g. "94.74", "90.00".
inline std::string round_percent(double ratio) {
    if (!(ratio >= 0.0 && ratio <= 1.0)) {
        throw Error(ErrorCode::InvalidRatio, "ratio " + std::to_string(ratio) + " outside [0, 1]");
    }
    // Hundredths of a percent. The small offset keeps exact decimal halves
    // that land just below .5 in binary from rounding down.
    const auto hundredths = static_cast<std::uint64_t>(std::floor(ratio * 10000.0 + 0.5 + 1e-7));
    const std::string fraction = std::to_string(hundredths % 100);
    return std::to_string(hundredths / 100) + "." + (fraction.size() == 1 ? "0" : "") + fraction;
}

} // namespace leafnet::metrics
