#include <gtest/gtest.h>

#include <random>

#include "leafnet/nn/gradient_check.hpp"
#include "test_util.hpp"

using namespace leafnet;
using namespace leafnet::nn;
using leafnet::testing::random_tensor;

namespace {

constexpr double eps = 1e-5;

ModelConfig conv_net() {
    return {"conv", {6, 6, 2},
            {LayerSpec::conv2d(3, 3, 1, 1), LayerSpec::relu(), LayerSpec::maxpool2d(2, 2), LayerSpec::flatten(),
             LayerSpec::dense(4), LayerSpec::softmax()},
            4};
}

// Redraws input and parameters until every kink is at least `margin` away.
std::pair<Sample, LayerParameters<double>> smooth_instance(const ModelConfig& config, std::uint64_t seed,
                                                           double margin = 1e-3) {
    std::mt19937_64 gen(seed);
    for (;;) {
        Sample sample{random_tensor(config.input(), gen), gen() % config.num_classes};
        auto params = init_parameters(config, gen()).parameters;
        for (auto& layer : params) {
            for (auto& v : layer) v += 0.01 * std::uniform_real_distribution<double>(-1, 1)(gen);
        }
        if (nonsmooth_margin(Network<double>(config, params), sample.input) > margin) {
            return {std::move(sample), std::move(params)};
        }
    }
}

} // namespace

TEST(RelativeError, Definition) {
    EXPECT_NEAR(relative_error(1.0, 1.1), 0.1 / 1.1, 1e-15);
    EXPECT_EQ(relative_error(0.0, 0.0), 0.0);
    EXPECT_DOUBLE_EQ(relative_error(1e-10, 0.0), 1e-2);
}

TEST(GradientCheck, LinearSoftmaxModelIsTight) {
    const ModelConfig linear{"linear", {1, 1, 5}, {LayerSpec::flatten(), LayerSpec::dense(3), LayerSpec::softmax()}, 3};
    std::mt19937_64 gen(1);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Sample sample{random_tensor({1, 1, 5}, gen), seed % 3};
        const auto result = gradient_check(linear, sample, eps, seed);
        EXPECT_LT(result.max_relative_error, 1e-7);
        EXPECT_EQ(result.parameters_checked, 18u);
    }
}

TEST(GradientCheck, ConvReluPoolDenseSoftmax) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto [sample, params] = smooth_instance(conv_net(), seed);
        const auto result = gradient_check(conv_net(), params, sample, eps);
        EXPECT_LT(result.max_relative_error, 1e-4) << "seed " << seed << " layer " << result.worst_layer;
        EXPECT_EQ(result.parameters_checked, parameter_count(conv_net()));
    }
}

TEST(GradientCheck, MiniVggAtReducedSize) {
    const auto config = mini_vgg(3, 8, 8);
    const auto [sample, params] = smooth_instance(config, 7, 1e-3);
    // some of the 9k gradients are ~1e-8, where loss rounding at eps = 1e-5
    // already costs ~1e-3 relative; a wider step keeps the check meaningful
    EXPECT_LT(gradient_check(config, params, sample, 1e-4).max_relative_error, 1e-4);
}

TEST(GradientCheck, DetectsSignFlipInBackwardPass) {
    const auto [sample, params] = smooth_instance(conv_net(), 3);
    // negate the gradient flowing out of the ReLU layer
    const BackwardHook<double> flip = [](std::size_t layer, Tensor<double>& grad) {
        if (layer == 1) {
            for (auto& v : grad.values()) v = -v;
        }
    };
    const auto result = gradient_check(conv_net(), params, sample, eps, flip);
    EXPECT_GT(result.max_relative_error, 0.1);
    EXPECT_EQ(result.worst_layer, 0u);
}

TEST(NonsmoothMargin, ZeroAtReluKink) {
    const ModelConfig config{"kink", {1, 1, 2},
                             {LayerSpec::flatten(), LayerSpec::dense(2), LayerSpec::relu(), LayerSpec::dense(2),
                              LayerSpec::softmax()},
                             2};
    LayerParameters<double> params{{}, {1, 0, 0, 1, 0, 0}, {}, {1, 0, 0, 1, 0, 0}, {}};
    const Network<double> net(config, params);
    EXPECT_EQ(nonsmooth_margin(net, Tensor<double>({1, 1, 2}, std::vector<double>{0.0, 2.0})), 0.0);
    EXPECT_EQ(nonsmooth_margin(net, Tensor<double>({1, 1, 2}, std::vector<double>{-0.5, 2.0})), 0.5);
}
