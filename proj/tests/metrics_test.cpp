#include <gtest/gtest.h>

#include <functional>
#include <random>

#include "leafnet/metrics.hpp"
#include "reference_data.hpp"

using namespace leafnet;
using namespace leafnet::metrics;
using namespace leafnet::testing;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorCode::IoError;
}

std::array<std::string, 7> rendered(const ClassMetrics& m) {
    return {round_percent(m.precision), round_percent(m.f1),  round_percent(m.sensitivity), round_percent(m.specificity),
            round_percent(m.fpr),       round_percent(m.fnr), round_percent(m.accuracy)};
}

ConfusionMatrix random_matrix(std::mt19937_64& gen, std::size_t k, std::size_t n) {
    std::vector<std::size_t> truth(n), pred(n);
    for (std::size_t i = 0; i < n; ++i) {
        truth[i] = gen() % k;
        pred[i] = gen() % 3 == 0 ? gen() % k : truth[i];
    }
    return confusion_matrix(truth, pred, k);
}

} // namespace

TEST(Confusion, SmallExamples) {
    const std::vector<std::size_t> t{0, 0, 1, 1}, p{0, 1, 1, 1};
    const auto m = confusion_matrix(t, p, 2);
    EXPECT_EQ(m.counts(), (std::vector<std::uint64_t>{1, 1, 0, 2}));
    const std::vector<std::size_t> perfect{0, 1, 2};
    const auto diag = confusion_matrix(perfect, perfect, 3);
    EXPECT_EQ(diag.trace(), 3u);
    EXPECT_EQ(diag.total(), 3u);
}

TEST(Confusion, MatchesBruteForceTally) {
    std::mt19937_64 gen(1);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t k = 1 + gen() % 7, n = 1 + gen() % 200;
        std::vector<std::size_t> t(n), p(n);
        for (std::size_t i = 0; i < n; ++i) {
            t[i] = gen() % k;
            p[i] = gen() % k;
        }
        const auto m = confusion_matrix(t, p, k);
        for (std::size_t a = 0; a < k; ++a) {
            for (std::size_t b = 0; b < k; ++b) {
                std::uint64_t count = 0;
                for (std::size_t i = 0; i < n; ++i) count += (t[i] == a && p[i] == b) ? 1 : 0;
                ASSERT_EQ(m.at(a, b), count);
            }
        }
    }
}

TEST(Confusion, InputErrors) {
    const std::vector<std::size_t> two{0, 1}, three{0, 1, 2}, empty;
    EXPECT_EQ(code_of([&] { confusion_matrix(two, three, 3); }), ErrorCode::LengthMismatch);
    EXPECT_EQ(code_of([&] { confusion_matrix(three, three, 2); }), ErrorCode::InvalidLabel);
    EXPECT_EQ(code_of([&] { confusion_matrix(empty, empty, 2); }), ErrorCode::LengthMismatch);
}

TEST(OneVsRest, Vgg16Matrix) {
    const auto m = vgg16_confusion();
    EXPECT_EQ(one_vs_rest(m, 1), (BinaryCounts{148, 605, 0, 4}));
    EXPECT_EQ(one_vs_rest(m, 0), (BinaryCounts{150, 605, 2, 0}));
    for (std::size_t c = 0; c < 5; ++c) {
        EXPECT_EQ(m.row_sum(c), reference_test_sizes[c]);
    }
}

TEST(OneVsRest, CountsAreConserved) {
    std::mt19937_64 gen(2);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t k = 1 + gen() % 8;
        const auto m = random_matrix(gen, k, 1 + gen() % 500);
        std::uint64_t fp = 0, fn = 0;
        for (std::size_t c = 0; c < k; ++c) {
            const auto counts = one_vs_rest(m, c);
            ASSERT_EQ(counts.total(), m.total());
            fp += counts.fp;
            fn += counts.fn;
        }
        ASSERT_EQ(fp, fn);
        ASSERT_EQ(fn, m.total() - m.trace());
    }
}

TEST(ClassMetrics, ReproducesEveryReferenceRow) {
    for (const auto& row : reference_class_rows()) {
        const auto got = rendered(class_metrics(row.counts));
        for (std::size_t i = 0; i < 7; ++i) {
            if (row.model == "Xception" && row.label == "Water" && i == 6) {
                // printed 97.10; (127 + 608) / 757 is 97.0938...
                EXPECT_EQ(got[i], "97.09");
                continue;
            }
            EXPECT_EQ(got[i], two_decimals(row.cells[i])) << row.model << "/" << row.label << " column " << i;
        }
    }
}

TEST(ClassMetrics, RatiosOfZeroAreZero) {
    const auto m = class_metrics({0, 10, 0, 0});
    EXPECT_EQ(m.precision, 0.0);
    EXPECT_EQ(m.sensitivity, 0.0);
    EXPECT_EQ(m.f1, 0.0);
    EXPECT_EQ(m.fnr, 0.0);
    EXPECT_EQ(m.specificity, 1.0);
    EXPECT_EQ(m.accuracy, 1.0);
    EXPECT_EQ(code_of([] { class_metrics({}); }), ErrorCode::EmptyCounts);
}

TEST(ClassMetrics, IdentitiesHoldForRandomCounts) {
    std::mt19937_64 gen(3);
    for (int trial = 0; trial < 1000; ++trial) {
        const BinaryCounts c{1 + gen() % 500, 1 + gen() % 500, 1 + gen() % 500, 1 + gen() % 500};
        const auto m = class_metrics(c);
        ASSERT_NEAR(m.sensitivity + m.fnr, 1.0, 1e-12);
        ASSERT_NEAR(m.specificity + m.fpr, 1.0, 1e-12);
        ASSERT_LE(m.f1, std::max(m.precision, m.sensitivity) + 1e-12);
        ASSERT_GE(m.f1, std::min(m.precision, m.sensitivity) - 1e-12);
    }
}

TEST(MicroAggregate, ReferenceSummaries) {
    const auto summary = micro_aggregate(vgg16_confusion());
    EXPECT_EQ(summary.totals, (BinaryCounts{753, 3024, 4, 4}));
    EXPECT_EQ(round_percent(summary.metrics.accuracy), "99.79");
    EXPECT_EQ(round_percent(summary.metrics.specificity), "99.87");
    EXPECT_EQ(round_percent(summary.multiclass_accuracy), "99.47");
    for (const auto& row : reference_summary_rows()) {
        const auto s = summary_from_totals(row.counts);
        const auto got = rendered(s.metrics);
        for (std::size_t i = 0; i < 7; ++i) {
            EXPECT_EQ(got[i], two_decimals(row.cells[i])) << row.model << " column " << i;
        }
    }
    // summing the per-class rows gives the summary counts
    for (const auto& summary_row : reference_summary_rows()) {
        BinaryCounts sum;
        for (const auto& row : reference_class_rows()) {
            if (row.model == summary_row.model || (summary_row.model == "Inception3" && row.model == "InceptionV3")) {
                sum += row.counts;
            }
        }
        EXPECT_EQ(sum, summary_row.counts) << summary_row.model;
    }
}

TEST(MicroAggregate, MulticlassAccuracyIsTraceOverTotal) {
    std::mt19937_64 gen(4);
    for (int trial = 0; trial < 200; ++trial) {
        const auto m = random_matrix(gen, 2 + gen() % 6, 1 + gen() % 300);
        const auto s = micro_aggregate(m);
        ASSERT_DOUBLE_EQ(s.multiclass_accuracy, double(m.trace()) / double(m.total()));
        ASSERT_DOUBLE_EQ(summary_from_totals(s.totals).multiclass_accuracy, s.multiclass_accuracy);
        ASSERT_EQ(s.totals.total(), m.k() * m.total());
    }
    EXPECT_EQ(code_of([] { micro_aggregate(ConfusionMatrix(3)); }), ErrorCode::EmptyCounts);
}

TEST(RoundPercent, Examples) {
    EXPECT_EQ(round_percent(3777.0 / 3785.0), "99.79");
    EXPECT_EQ(round_percent(0.9), "90.00");
    EXPECT_EQ(round_percent(18.0 / 19.0), "94.74");
    EXPECT_EQ(round_percent(1.0), "100.00");
    EXPECT_EQ(round_percent(0.0), "0.00");
    EXPECT_EQ(round_percent(0.00005), "0.01");
    EXPECT_EQ(round_percent(0.12345), "12.35");
    EXPECT_EQ(code_of([] { round_percent(1.0001); }), ErrorCode::InvalidRatio);
    EXPECT_EQ(code_of([] { round_percent(-0.1); }), ErrorCode::InvalidRatio);
    EXPECT_EQ(code_of([] { round_percent(std::nan("")); }), ErrorCode::InvalidRatio);
}

TEST(RoundPercent, AgreesWithExactRationalRounding) {
    // half-up on the exact fraction a / b, computed in integers
    for (std::uint64_t b = 1; b <= 400; ++b) {
        for (std::uint64_t a = 0; a <= b; ++a) {
            const std::uint64_t hundredths = (20000 * a + b) / (2 * b);
            const std::string frac = std::to_string(hundredths % 100);
            const std::string expected = std::to_string(hundredths / 100) + "." + (frac.size() == 1 ? "0" : "") + frac;
            ASSERT_EQ(round_percent(double(a) / double(b)), expected) << a << "/" << b;
        }
    }
}
