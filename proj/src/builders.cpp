#include "stfall/nn/builders.hpp"

namespace stfall::nn {

namespace {

LayerSpec conv3(const std::string& name, std::int64_t ch, std::array<int, 3> stride,
                Activation act, bool bn, LayerKind kind = LayerKind::Conv3d) {
    LayerSpec l;
    l.name = name;
    l.kind = kind;
    l.kernel = {5, 3, 3};
    l.stride = stride;
    l.units = ch;
    l.activation = act;
    l.batch_norm = bn;
    return l;
}

LayerSpec conv2(const std::string& name, std::int64_t ch, int stride, Activation act, bool bn,
                LayerKind kind = LayerKind::Conv2d) {
    LayerSpec l;
    l.name = name;
    l.kind = kind;
    l.kernel = {1, 3, 3};
    l.stride = {1, stride, stride};
    l.units = ch;
    l.activation = act;
    l.batch_norm = bn;
    return l;
}

LayerSpec dense(const std::string& name, std::int64_t units, Activation act, bool bn) {
    LayerSpec l;
    l.name = name;
    l.kind = LayerKind::Dense;
    l.units = units;
    l.activation = act;
    l.batch_norm = bn;
    return l;
}

LayerSpec flatten(const std::string& name) {
    LayerSpec l;
    l.name = name;
    l.kind = LayerKind::Flatten;
    return l;
}

LayerSpec reshape(const std::string& name, std::vector<std::int64_t> to, Activation act = Activation::Linear) {
    LayerSpec l;
    l.name = name;
    l.kind = LayerKind::Reshape;
    l.reshape_to = std::move(to);
    l.activation = act;
    return l;
}

void fill_expected(NetworkSpec& s) {
    s.expected_output_shapes.clear();
    for (const auto& row : shape_report(s)) s.expected_output_shapes.push_back(row.second);
}

}  // namespace

NetworkSpec make_3dcae_spec(int t, int h, int w, int c1, int c2) {
    // Encoder strides derived from the target shapes: the first layer keeps
    // all dims, the second halves only space, the last two halve everything.
    NetworkSpec s;
    s.name = "3dcae";
    s.input_shape = {t, h, w, 1};
    const auto relu = Activation::Relu;
    s.layers = {
        conv3("enc1", c1, {1, 1, 1}, relu, true),
        conv3("enc2", c2, {1, 2, 2}, relu, true),
        conv3("enc3", c2, {2, 2, 2}, relu, true),
        conv3("enc4", c2, {2, 2, 2}, relu, true),
        conv3("dec1", c2, {2, 2, 2}, relu, true, LayerKind::Deconv3d),
        conv3("dec2", c2, {2, 2, 2}, relu, true, LayerKind::Deconv3d),
        conv3("dec3", c1, {1, 2, 2}, relu, true, LayerKind::Deconv3d),
        conv3("out", 1, {1, 1, 1}, Activation::Tanh, false),
    };
    fill_expected(s);
    return s;
}

NetworkSpec make_3d_discriminator_spec(int t, int h, int w, int c1, int c2) {
    NetworkSpec s;
    s.name = "3d_discriminator";
    s.input_shape = {t, h, w, 1};
    const auto lrelu = Activation::LeakyRelu;
    s.layers = {
        conv3("enc1", c1, {1, 1, 1}, lrelu, false),  // no BN on the input layer
        conv3("enc2", c2, {1, 2, 2}, lrelu, true),
        conv3("enc3", c2, {2, 2, 2}, lrelu, true),
        conv3("enc4", c2, {2, 2, 2}, lrelu, true),
        flatten("flatten"),
        dense("prob", 1, Activation::Sigmoid, false),
    };
    fill_expected(s);
    return s;
}

NetworkSpec make_dae_spec() {
    NetworkSpec s;
    s.name = "dae";
    s.input_shape = {64, 64, 1};
    const auto relu = Activation::Relu;
    s.layers = {
        flatten("enc1"),  // (64,64,1) -> 4096
        dense("enc2", 1500, relu, true),
        dense("enc3", 1000, relu, true),
        dense("enc4", 500, relu, true),
        dense("dec1", 1000, relu, true),
        dense("dec2", 1500, relu, true),
        dense("dec3", 4096, Activation::Tanh, false),
        reshape("out", {64, 64, 1}),
    };
    fill_expected(s);
    return s;
}

NetworkSpec make_dae_discriminator_spec() {
    NetworkSpec s;
    s.name = "dae_discriminator";
    s.input_shape = {64, 64, 1};
    const auto lrelu = Activation::LeakyRelu;
    s.layers = {
        flatten("enc1"),
        dense("enc2", 1500, lrelu, false),
        dense("enc3", 1000, lrelu, true),
        dense("enc4", 500, lrelu, true),
        dense("prob", 1, Activation::Sigmoid, false),
    };
    fill_expected(s);
    return s;
}

NetworkSpec make_cae_spec(int h, int w) {
    NetworkSpec s;
    s.name = "cae";
    s.input_shape = {h, w, 1};
    const auto relu = Activation::Relu;
    s.layers = {
        conv2("enc1", 16, 1, relu, true),
        conv2("enc2", 16, 2, relu, true),
        conv2("enc3", 8, 2, relu, true),
        conv2("enc4", 8, 2, relu, true),
        conv2("dec1", 8, 2, relu, true, LayerKind::Deconv2d),
        conv2("dec2", 8, 2, relu, true, LayerKind::Deconv2d),
        conv2("dec3", 16, 2, relu, true, LayerKind::Deconv2d),
        conv2("out", 1, 1, Activation::Tanh, false, LayerKind::Deconv2d),
    };
    fill_expected(s);
    return s;
}

NetworkSpec make_cae_discriminator_spec(int h, int w) {
    NetworkSpec s;
    s.name = "cae_discriminator";
    s.input_shape = {h, w, 1};
    const auto lrelu = Activation::LeakyRelu;
    s.layers = {
        conv2("enc1", 16, 1, lrelu, false),
        conv2("enc2", 16, 2, lrelu, true),
        conv2("enc3", 8, 2, lrelu, true),
        conv2("enc4", 8, 2, lrelu, true),
        flatten("flatten"),
        dense("prob", 1, Activation::Sigmoid, false),
    };
    fill_expected(s);
    return s;
}

ModelF build_3dcae(std::uint64_t seed) { return ModelF(make_3dcae_spec(), seed); }
ModelF build_3d_discriminator(std::uint64_t seed) { return ModelF(make_3d_discriminator_spec(), seed); }
ModelF build_dae(std::uint64_t seed) { return ModelF(make_dae_spec(), seed); }
ModelF build_dae_discriminator(std::uint64_t seed) { return ModelF(make_dae_discriminator_spec(), seed); }
ModelF build_cae(std::uint64_t seed) { return ModelF(make_cae_spec(), seed); }
ModelF build_cae_discriminator(std::uint64_t seed) { return ModelF(make_cae_discriminator_spec(), seed); }

}  // namespace stfall::nn
