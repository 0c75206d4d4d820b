#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "leafnet/csv.hpp"
#include "leafnet/report.hpp"
#include "reference_data.hpp"

using namespace leafnet;
using namespace leafnet::report;
using namespace leafnet::testing;
using metrics::BinaryCounts;

namespace {

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

std::vector<NamedSummary> reference_summaries() {
    std::vector<NamedSummary> out;
    for (const auto& row : reference_summary_rows()) {
        out.push_back({row.model, metrics::summary_from_totals(row.counts)});
    }
    return out;
}

} // namespace

TEST(ClassTable, ColumnOrderAndValues) {
    const auto rows = class_rows(vgg16_confusion(), reference_classes);
    const auto csv_text = class_table_csv(rows);
    const auto lines = lines_of(csv_text);
    ASSERT_EQ(lines.size(), 6u);
    EXPECT_EQ(lines[0], "category,tp,tn,fp,fn,precision,f1,sensitivity,specificity,fpr,fnr,accuracy");
    EXPECT_EQ(lines[2], "Malabar,148,605,0,4,100.00,98.67,97.37,100.00,0.00,2.63,99.47");
    const auto table = lines_of(render_class_table(rows));
    ASSERT_EQ(table.size(), 6u);
    EXPECT_EQ(table[0].rfind("Category", 0), 0u);
    EXPECT_NE(table[1].find("98.68"), std::string::npos);
}

TEST(ClassTable, EmptyRowsGiveHeaderOnly) {
    EXPECT_EQ(class_table_csv({}), csv::join(class_csv_header()) + "\n");
    EXPECT_EQ(lines_of(render_class_table({})).size(), 1u);
}

TEST(ClassTable, NameCountMustMatch) {
    EXPECT_THROW(class_rows(vgg16_confusion(), {"a", "b"}), Error);
}

TEST(ClassTable, CsvRoundTripWithAwkwardNames) {
    std::vector<std::string> names{"plain", "with,comma", "with \"quotes\"", "x"};
    const metrics::ConfusionMatrix m(4, {5, 1, 0, 0, 0, 7, 2, 0, 1, 0, 9, 0, 0, 0, 0, 3});
    const auto rows = class_rows(m, names);
    std::istringstream in(class_table_csv(rows));
    const auto parsed = parse_csv_table(in, class_csv_header());
    ASSERT_EQ(parsed.size(), 4u);
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_EQ(parsed[i], metric_cells(rows[i].name, rows[i].counts, rows[i].metrics));
    }
}

TEST(ParseCsvTable, RejectsBadHeaderAndRaggedRows) {
    std::istringstream wrong_header("a,b\n1,2\n");
    EXPECT_THROW(parse_csv_table(wrong_header, {"a", "c"}), Error);
    std::istringstream ragged("a,b\n1,2\n3\n");
    try {
        parse_csv_table(ragged, {"a", "b"});
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
    }
}

TEST(Confusion, GridOrientationAndSums) {
    const auto m = vgg16_confusion();
    const auto grid = lines_of(render_confusion(m, reference_classes));
    ASSERT_EQ(grid.size(), 6u);
    EXPECT_EQ(grid[0].rfind("truth \\ predicted", 0), 0u);
    EXPECT_EQ(grid[2].rfind("Malabar", 0), 0u);

    std::istringstream in(confusion_csv(m, reference_classes));
    std::vector<std::string> header{"truth"};
    header.insert(header.end(), reference_classes.begin(), reference_classes.end());
    const auto rows = parse_csv_table(in, header);
    ASSERT_EQ(rows.size(), 5u);
    EXPECT_EQ(rows[1], (std::vector<std::string>{"Malabar", "2", "148", "0", "2", "0"}));
    for (std::size_t p = 0; p < 5; ++p) {
        std::uint64_t column = 0;
        for (const auto& row : rows) column += std::stoull(row[p + 1]);
        EXPECT_EQ(column, m.column_sum(p));
    }
}

TEST(Confusion, SvgIsDeterministicAndComplete) {
    const auto m = vgg16_confusion();
    const auto a = confusion_svg(m, reference_classes);
    EXPECT_EQ(a, confusion_svg(m, reference_classes));
    EXPECT_EQ(a.rfind("<svg", 0), 0u);
    std::size_t rects = 0;
    for (auto pos = a.find("<rect"); pos != std::string::npos; pos = a.find("<rect", pos + 1)) ++rects;
    EXPECT_EQ(rects, 25u);
    EXPECT_NE(a.find("#1b5e20"), std::string::npos);
    EXPECT_NE(a.find("#ffffff"), std::string::npos);
    const auto escaped = confusion_svg(metrics::ConfusionMatrix(1, {1}), {"a<b"});
    EXPECT_NE(escaped.find("a&lt;b"), std::string::npos);
}

TEST(Comparison, RanksReferenceSummaries) {
    const auto ranked = rank_models(reference_summaries());
    std::vector<std::string> order;
    for (const auto& e : ranked) order.push_back(e.model);
    EXPECT_EQ(order, (std::vector<std::string>{"VGG16", "VGG19", "Xception", "Inception3"}));
}

TEST(Comparison, TiesBreakAlphabetically) {
    const auto s = metrics::summary_from_totals({10, 30, 2, 2});
    const auto t = metrics::summary_from_totals({20, 60, 4, 4}); // same accuracy, other counts
    const auto ranked = rank_models({{"zeta", s}, {"alpha", t}, {"mid", s}});
    EXPECT_EQ(ranked[0].model, "alpha");
    EXPECT_EQ(ranked[1].model, "mid");
    EXPECT_EQ(ranked[2].model, "zeta");
}

TEST(Comparison, OrderIndependentOfInput) {
    auto entries = reference_summaries();
    const auto expected = rank_models(entries);
    std::mt19937_64 gen(5);
    for (int trial = 0; trial < 20; ++trial) {
        std::shuffle(entries.begin(), entries.end(), gen);
        const auto ranked = rank_models(entries);
        for (std::size_t i = 0; i < ranked.size(); ++i) EXPECT_EQ(ranked[i].model, expected[i].model);
    }
}

TEST(Comparison, CsvRoundTripRecomputesMetrics) {
    const auto ranked = rank_models(reference_summaries());
    const auto text = comparison_csv(ranked);
    const auto lines = lines_of(text);
    ASSERT_EQ(lines.size(), 5u);
    EXPECT_EQ(lines[1], "VGG16,753,3024,4,4,99.47,99.47,99.47,99.87,0.13,0.53,99.79,99.47");
    std::istringstream in(text);
    const auto parsed = parse_summaries(in);
    ASSERT_EQ(parsed.size(), 4u);
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_EQ(parsed[i].model, ranked[i].model);
        EXPECT_EQ(parsed[i].summary.totals, ranked[i].summary.totals);
        EXPECT_EQ(comparison_cells(parsed[i]), comparison_cells(ranked[i]));
    }
    EXPECT_EQ(lines_of(render_comparison(ranked)).size(), 5u);
}

TEST(Comparison, RejectsBadSummaryRows) {
    std::istringstream bad_count(csv::join(comparison_csv_header()) + "\nm,x,1,1,1,0,0,0,0,0,0,0,0\n");
    EXPECT_THROW(parse_summaries(bad_count), Error);
    std::istringstream zero(csv::join(comparison_csv_header()) + "\nm,0,0,0,0,0,0,0,0,0,0,0,0\n");
    EXPECT_THROW(parse_summaries(zero), Error);
    std::istringstream class_file(csv::join(class_csv_header()) + "\n");
    EXPECT_THROW(parse_summaries(class_file), Error);
}
