#include <gtest/gtest.h>

#include <functional>

#include "leafnet/nn/model.hpp"

using namespace leafnet;
using namespace leafnet::nn;

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

} // namespace

TEST(Shapes, MiniVggPropagation) {
    const auto shapes = infer_shapes(mini_vgg(5));
    EXPECT_EQ(shapes.front(), (Shape{32, 32, 3}));
    EXPECT_EQ(shapes[1], (Shape{32, 32, 8}));
    EXPECT_EQ(shapes[5], (Shape{16, 16, 8}));
    EXPECT_EQ(shapes[10], (Shape{8, 8, 16}));
    EXPECT_EQ(shapes[11], (Shape{1024}));
    EXPECT_EQ(shapes.back(), (Shape{5}));
}

TEST(Shapes, LayerRules) {
    EXPECT_EQ(layer_output_shape(LayerSpec::conv2d(4, 3, 2, 1), {9, 7, 3}), (Shape{5, 4, 4}));
    EXPECT_EQ(layer_output_shape(LayerSpec::maxpool2d(2, 2), {9, 7, 3}), (Shape{4, 3, 3}));
    EXPECT_EQ(layer_output_shape(LayerSpec::flatten(), {2, 3, 4}), (Shape{24}));
    EXPECT_EQ(layer_output_shape(LayerSpec::dense(10), {24}), (Shape{10}));
    EXPECT_EQ(layer_output_shape(LayerSpec::relu(), {2, 2, 2}), (Shape{2, 2, 2}));
}

TEST(Shapes, InvalidArchitectures) {
    auto no_softmax = mini_vgg(5);
    no_softmax.layers.pop_back();
    EXPECT_EQ(code_of([&] { infer_shapes(no_softmax); }), ErrorCode::InvalidArchitecture);

    auto wrong_classes = mini_vgg(5);
    wrong_classes.num_classes = 4;
    EXPECT_EQ(code_of([&] { infer_shapes(wrong_classes); }), ErrorCode::InvalidArchitecture);

    ModelConfig dense_on_image{"bad", {4, 4, 1}, {LayerSpec::dense(2), LayerSpec::softmax()}, 2};
    EXPECT_EQ(code_of([&] { infer_shapes(dense_on_image); }), ErrorCode::InvalidArchitecture);

    ModelConfig oversized_kernel{"bad", {2, 2, 1}, {LayerSpec::conv2d(1, 5), LayerSpec::flatten(),
                                                    LayerSpec::dense(2), LayerSpec::softmax()}, 2};
    EXPECT_EQ(code_of([&] { infer_shapes(oversized_kernel); }), ErrorCode::InvalidArchitecture);

    ModelConfig early_softmax{"bad", {1, 1, 4},
                              {LayerSpec::flatten(), LayerSpec::softmax(), LayerSpec::dense(2), LayerSpec::softmax()}, 2};
    EXPECT_EQ(code_of([&] { infer_shapes(early_softmax); }), ErrorCode::InvalidArchitecture);

    ModelConfig zero_input{"bad", {0, 4, 1}, {LayerSpec::flatten(), LayerSpec::dense(2), LayerSpec::softmax()}, 2};
    EXPECT_EQ(code_of([&] { infer_shapes(zero_input); }), ErrorCode::InvalidArchitecture);
}

TEST(ParameterCount, MiniVgg) {
    EXPECT_EQ(parameter_count(mini_vgg(5)), 136141u);
}

TEST(ParameterCount, Vgg16ShapeThousandClasses) {
    EXPECT_EQ(parameter_count(vgg16_shape(1000)), 138357544u);
}

TEST(ParameterCount, Vgg16ShapeFiveClasses) {
    const auto shapes = infer_shapes(vgg16_shape(5));
    EXPECT_EQ(shapes.back(), (Shape{5}));
    EXPECT_EQ(shapes[shapes.size() - 5], (Shape{4096}));
    // 7x7x512 feature map reaches the first dense layer
    EXPECT_EQ(shapes[31], (Shape{7, 7, 512}));
}

TEST(ParameterLayout, DenseAndConv) {
    const auto dense = parameter_layout(LayerSpec::dense(2), {4});
    EXPECT_EQ(dense.weights, 8u);
    EXPECT_EQ(dense.biases, 2u);
    EXPECT_EQ(dense.fan_in, 4u);
    const auto conv = parameter_layout(LayerSpec::conv2d(8, 3, 1, 1), {32, 32, 3});
    EXPECT_EQ(conv.weights, 216u);
    EXPECT_EQ(conv.biases, 8u);
    EXPECT_EQ(conv.fan_in, 27u);
    EXPECT_EQ(parameter_layout(LayerSpec::relu(), {3}).total(), 0u);
}

TEST(Presets, LookupAndUnknownName) {
    EXPECT_EQ(preset("mini_vgg", 3), mini_vgg(3));
    EXPECT_EQ(preset("mini_vgg", 3, 16, 24).input_shape, (std::array<std::size_t, 3>{16, 24, 3}));
    EXPECT_EQ(code_of([] { preset("resnet", 3); }), ErrorCode::InvalidConfig);
}

TEST(LayerText, RoundTripsEveryLayer) {
    for (const auto& layer : vgg16_shape(7).layers) {
        EXPECT_EQ(layer_from_string(layer_to_string(layer)), layer) << layer_to_string(layer);
    }
    EXPECT_EQ(layer_to_string(LayerSpec::conv2d(8, 3, 1, 1)), "conv2d out_channels=8 kernel=3 stride=1 padding=1");
    EXPECT_EQ(code_of([] { layer_from_string("lstm units=3"); }), ErrorCode::InvalidArchitecture);
    EXPECT_EQ(code_of([] { layer_from_string("dense width=3"); }), ErrorCode::InvalidArchitecture);
}
