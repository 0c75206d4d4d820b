#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <limits>
#include <random>

#include "leafnet/nn/checkpoint.hpp"
#include "leafnet/nn/train.hpp"
#include "test_util.hpp"

using namespace leafnet;
using namespace leafnet::nn;

namespace {

ModelConfig tiny() {
    return {"tiny", {3, 3, 2},
            {LayerSpec::conv2d(2, 2, 1, 0), LayerSpec::relu(), LayerSpec::flatten(), LayerSpec::dense(3),
             LayerSpec::softmax()},
            3};
}

ErrorCode decode_error(const std::vector<std::uint8_t>& bytes) {
    try {
        decode_checkpoint(bytes);
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "decode accepted malformed input";
    return ErrorCode::IoError;
}

std::vector<std::uint8_t> bytes_of(const std::string& s) { return {s.begin(), s.end()}; }

} // namespace

TEST(Checkpoint, StartsWithMagic) {
    const auto bytes = encode_checkpoint(init_parameters(tiny(), 1));
    EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 8), "LPCKPT1\n");
}

TEST(Checkpoint, RoundTripIsBitExactForRandomContents) {
    std::mt19937_64 gen(42);
    for (int trial = 0; trial < 50; ++trial) {
        auto ckpt = init_parameters(trial % 2 == 0 ? tiny() : mini_vgg(1 + gen() % 6), gen());
        // arbitrary bit patterns, including subnormals, infinities and signed zero
        for (auto& layer : ckpt.parameters) {
            for (auto& v : layer) {
                if (gen() % 7 == 0) v = std::bit_cast<double>(gen() & 0x7fefffffffffffffULL);
            }
        }
        if (!ckpt.parameters[0].empty()) {
            ckpt.parameters[0][0] = -0.0;
            ckpt.parameters[0][1] = std::numeric_limits<double>::denorm_min();
            ckpt.parameters[0][2] = -std::numeric_limits<double>::infinity();
        }
        ckpt.epoch = gen() % 100;
        std::uniform_real_distribution<double> dist(0, 5);
        for (std::size_t e = 0; e < ckpt.epoch % 9; ++e) {
            ckpt.history.push_back({dist(gen) / 3.0, 1.0 / (1.0 + e)});
        }
        ckpt.set_metadata("note", "value with = sign, commas and spaces");
        ckpt.set_metadata("empty", "");
        const auto bytes = encode_checkpoint(ckpt);
        const auto back = decode_checkpoint(bytes);
        ASSERT_EQ(back.config, ckpt.config);
        ASSERT_EQ(back.history, ckpt.history);
        ASSERT_EQ(back.metadata, ckpt.metadata);
        ASSERT_EQ(back.epoch, ckpt.epoch);
        ASSERT_EQ(back.parameters.size(), ckpt.parameters.size());
        for (std::size_t l = 0; l < ckpt.parameters.size(); ++l) {
            ASSERT_EQ(back.parameters[l].size(), ckpt.parameters[l].size());
            for (std::size_t k = 0; k < ckpt.parameters[l].size(); ++k) {
                ASSERT_EQ(std::bit_cast<std::uint64_t>(back.parameters[l][k]),
                          std::bit_cast<std::uint64_t>(ckpt.parameters[l][k]));
            }
        }
        ASSERT_EQ(encode_checkpoint(back), bytes);
    }
}

TEST(Checkpoint, FileRoundTrip) {
    leafnet::testing::TempDir dir("ckpt");
    auto ckpt = init_parameters(tiny(), 3);
    ckpt.set_metadata("label", "tiny model");
    save_checkpoint(ckpt, dir / "m.lpckpt");
    EXPECT_EQ(load_checkpoint(dir / "m.lpckpt"), ckpt);
}

TEST(Checkpoint, MissingFileIsIoError) {
    try {
        load_checkpoint("/nonexistent/dir/m.lpckpt");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::IoError);
    }
}

TEST(Checkpoint, RejectsMalformedInput) {
    const auto good = encode_checkpoint(init_parameters(tiny(), 1));
    const std::string text(good.begin(), good.end());

    EXPECT_EQ(decode_error(bytes_of("")), ErrorCode::MalformedCheckpoint);
    EXPECT_EQ(decode_error(bytes_of("LPCKPT2\n" + text.substr(8))), ErrorCode::MalformedCheckpoint);

    auto truncated = good;
    truncated.pop_back();
    EXPECT_EQ(decode_error(truncated), ErrorCode::MalformedCheckpoint);

    auto trailing = good;
    trailing.push_back(0);
    EXPECT_EQ(decode_error(trailing), ErrorCode::MalformedCheckpoint);

    auto replace = [&](const std::string& from, const std::string& to) {
        auto copy = text;
        const auto at = copy.find(from);
        EXPECT_NE(at, std::string::npos) << from;
        copy.replace(at, from.size(), to);
        return bytes_of(copy);
    };
    EXPECT_EQ(decode_error(replace("num_classes = 3\n", "")), ErrorCode::MalformedCheckpoint);
    EXPECT_EQ(decode_error(replace("num_classes = 3", "num_classes = three")), ErrorCode::MalformedCheckpoint);
    EXPECT_EQ(decode_error(replace("num_classes = 3", "num_classes = 4")), ErrorCode::MalformedCheckpoint);
    EXPECT_EQ(decode_error(replace("epoch = 0", "epoch: 0")), ErrorCode::MalformedCheckpoint);
    EXPECT_EQ(decode_error(replace("layer = dense", "layer = lstm")), ErrorCode::MalformedCheckpoint);
    EXPECT_EQ(decode_error(replace("name = tiny", "colour = tiny")), ErrorCode::MalformedCheckpoint);
    EXPECT_EQ(decode_error(replace("parameters = 1 0", "parameters = 2 0")), ErrorCode::MalformedCheckpoint);
}

TEST(Checkpoint, EncodeRejectsInconsistentContents) {
    auto ckpt = init_parameters(tiny(), 1);
    ckpt.parameters[0].push_back(1.0);
    EXPECT_THROW(encode_checkpoint(ckpt), Error);
    auto multiline = init_parameters(tiny(), 1);
    multiline.set_metadata("note", "two\nlines");
    EXPECT_THROW(encode_checkpoint(multiline), Error);
}
