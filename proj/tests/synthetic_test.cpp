#include <gtest/gtest.h>

#include "leafnet/dataset.hpp"
#include "leafnet/nn/model.hpp"
#include "leafnet/nn/train.hpp"
#include "leafnet/preprocess.hpp"
#include "leafnet/synthetic.hpp"
#include "test_util.hpp"

using namespace leafnet;
using leafnet::testing::TempDir;

TEST(SyntheticCorpus, CountsByConstruction) {
    TempDir tmp("synth_counts");
    const auto manifest = generate_synthetic_corpus({5, 200, 32, 32, 7}, tmp.path());
    EXPECT_EQ(manifest.size(), 1000u);
    EXPECT_EQ(manifest.per_class_counts, std::vector<std::size_t>(5, 200));
    EXPECT_TRUE(manifest.warnings.empty());
    const auto image = read_image(manifest.records.front().path);
    EXPECT_EQ(image.height, 32u);
    EXPECT_EQ(image.width, 32u);
    EXPECT_EQ(image.channels, 3u);
}

TEST(SyntheticCorpus, SameSeedGivesIdenticalFiles) {
    TempDir a("synth_a"), b("synth_b"), c("synth_c");
    const SyntheticSpec spec{3, 4, 16, 12, 99};
    const auto ma = generate_synthetic_corpus(spec, a.path());
    const auto mb = generate_synthetic_corpus(spec, b.path());
    auto other = spec;
    other.seed = 100;
    const auto mc = generate_synthetic_corpus(other, c.path());
    ASSERT_EQ(ma.size(), mb.size());
    bool any_difference = false;
    for (std::size_t i = 0; i < ma.size(); ++i) {
        const auto bytes = leafnet::testing::slurp(ma.records[i].path);
        EXPECT_EQ(bytes, leafnet::testing::slurp(mb.records[i].path));
        any_difference |= bytes != leafnet::testing::slurp(mc.records[i].path);
    }
    EXPECT_TRUE(any_difference);
}

TEST(SyntheticCorpus, ClassNamesSortNumerically) {
    EXPECT_EQ(synthetic_class_name(3, 5), "class_03");
    EXPECT_EQ(synthetic_class_name(7, 120), "class_007");
    EXPECT_LT(synthetic_class_name(9, 12), synthetic_class_name(10, 12));
}

TEST(SyntheticCorpus, RejectsInvalidSpecs) {
    TempDir tmp("synth_bad");
    EXPECT_THROW(generate_synthetic_corpus({1, 10, 32, 32, 0}, tmp.path()), Error);
    EXPECT_THROW(generate_synthetic_corpus({2, 0, 32, 32, 0}, tmp.path()), Error);
    EXPECT_THROW(generate_synthetic_corpus({2, 10, 4, 32, 0}, tmp.path()), Error);
}

TEST(SyntheticCorpus, UnwritableDestinationIsIoError) {
    TempDir tmp("synth_io");
    leafnet::testing::spit(tmp / "blocker", "file, not a directory");
    try {
        generate_synthetic_corpus({2, 1, 8, 8, 0}, tmp / "blocker" / "corpus");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::IoError);
    }
}

// Two classes of 50 images must be separable by the small VGG-style network.
TEST(SyntheticCorpus, TwoClassesAreLearnable) {
    TempDir tmp("synth_learn");
    const auto manifest = generate_synthetic_corpus({2, 50, 32, 32, 11}, tmp.path());
    const auto [train_set, test_set] = stratified_split(manifest, {0.8, 3});
    PreprocessConfig pre;
    pre.target_height = pre.target_width = 32;
    auto load = [&](const DatasetManifest& m) {
        std::vector<nn::Sample> samples;
        for (const auto& r : m.records) {
            samples.push_back({preprocess_file(r.path, pre), r.label});
        }
        return samples;
    };
    const auto train_samples = load(train_set);
    const auto test_samples = load(test_set);
    nn::TrainConfig cfg;
    cfg.epochs = 8;
    cfg.seed = 5;
    const auto checkpoint = nn::train(nn::mini_vgg(2), train_samples, cfg);
    const nn::Network<double> network(checkpoint.config, checkpoint.parameters);
    const auto stats = nn::evaluate(network, test_samples);
    EXPECT_GE(stats.accuracy, 0.95);
}
