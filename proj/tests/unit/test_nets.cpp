#include <doctest.h>

#include <cmath>
#include <nlohmann/json.hpp>
#include <random>

#include "stfall/nn/builders.hpp"
#include "stfall/trainer.hpp"

using namespace stfall;
using nn::NetworkSpec;

namespace {

template <typename S>
Tensor<S> random_input(const std::vector<std::int64_t>& per_sample, std::int64_t batch,
                       std::uint64_t seed) {
    std::vector<std::int64_t> shape{batch};
    shape.insert(shape.end(), per_sample.begin(), per_sample.end());
    Tensor<S> x(shape);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1, 1);
    for (std::int64_t i = 0; i < x.size(); ++i) x[i] = static_cast<S>(u(rng));
    return x;
}

void check_rows(const NetworkSpec& spec,
                const std::vector<std::vector<std::int64_t>>& expect) {
    auto rows = nn::shape_report(spec);
    REQUIRE(rows.size() == expect.size());
    for (std::size_t i = 0; i < rows.size(); ++i) CHECK(rows[i].second == expect[i]);

    // the symbolic report must match a real forward pass
    nn::NetworkF net(spec, 123);
    std::vector<std::pair<std::string, std::vector<std::int64_t>>> trace;
    net.forward_trace(random_input<float>(spec.input_shape, 2, 9), false, trace);
    REQUIRE(trace.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(trace[i].first == rows[i].first);
        CHECK(trace[i].second == rows[i].second);
    }
}

}  // namespace

TEST_CASE("3dcae per-layer shapes") {
    check_rows(nn::make_3dcae_spec(), {{8, 64, 64, 16},
                                       {8, 32, 32, 8},
                                       {4, 16, 16, 8},
                                       {2, 8, 8, 8},
                                       {4, 16, 16, 8},
                                       {8, 32, 32, 8},
                                       {8, 64, 64, 16},
                                       {8, 64, 64, 1}});
}

TEST_CASE("3d discriminator per-layer shapes") {
    check_rows(nn::make_3d_discriminator_spec(),
               {{8, 64, 64, 16}, {8, 32, 32, 8}, {4, 16, 16, 8}, {2, 8, 8, 8}, {1024}, {1}});
}

TEST_CASE("dae and dae discriminator shapes") {
    check_rows(nn::make_dae_spec(),
               {{4096}, {1500}, {1000}, {500}, {1000}, {1500}, {4096}, {64, 64, 1}});
    check_rows(nn::make_dae_discriminator_spec(), {{4096}, {1500}, {1000}, {500}, {1}});
}

TEST_CASE("cae and cae discriminator shapes") {
    check_rows(nn::make_cae_spec(), {{64, 64, 16},
                                     {32, 32, 16},
                                     {16, 16, 8},
                                     {8, 8, 8},
                                     {16, 16, 8},
                                     {32, 32, 8},
                                     {64, 64, 16},
                                     {64, 64, 1}});
    check_rows(nn::make_cae_discriminator_spec(),
               {{64, 64, 16}, {32, 32, 16}, {16, 16, 8}, {8, 8, 8}, {512}, {1}});
}

TEST_CASE("3d kernels are all (5, 3, 3)") {
    for (const auto& spec : {nn::make_3dcae_spec(), nn::make_3d_discriminator_spec()})
        for (const auto& l : spec.layers)
            if (l.kind == nn::LayerKind::Conv3d || l.kind == nn::LayerKind::Deconv3d) {
                CHECK(l.kernel[0] == 5);
                CHECK(l.kernel[1] == 3);
                CHECK(l.kernel[2] == 3);
            }
}

TEST_CASE("activation ranges hold on random inputs") {
    nn::NetworkF gen(nn::make_3dcae_spec(4, 16, 16, 4, 2), 3);
    TensorF y = gen.forward(random_input<float>({4, 16, 16, 1}, 3, 11), false);
    for (std::int64_t i = 0; i < y.size(); ++i) {
        CHECK(y[i] >= -1.0f);
        CHECK(y[i] <= 1.0f);
    }

    nn::NetworkF disc(nn::make_3d_discriminator_spec(4, 16, 16, 4, 2), 4);
    TensorF p = disc.forward(random_input<float>({4, 16, 16, 1}, 3, 12), false);
    REQUIRE(p.size() == 3);
    for (std::int64_t i = 0; i < p.size(); ++i) {
        CHECK(p[i] > 0.0f);
        CHECK(p[i] < 1.0f);
    }
}

TEST_CASE("same seed gives identical parameters and outputs") {
    nn::NetworkF a(nn::make_3dcae_spec(4, 8, 8, 4, 2), 21);
    nn::NetworkF b(nn::make_3dcae_spec(4, 8, 8, 4, 2), 21);
    nn::NetworkF c(nn::make_3dcae_spec(4, 8, 8, 4, 2), 22);
    TensorF x = random_input<float>({4, 8, 8, 1}, 2, 13);
    TensorF ya = a.forward(x, false);
    TensorF yb = b.forward(x, false);
    TensorF yc = c.forward(x, false);
    bool same = true, diff = false;
    for (std::int64_t i = 0; i < ya.size(); ++i) {
        same = same && ya[i] == yb[i];
        diff = diff || ya[i] != yc[i];
    }
    CHECK(same);
    CHECK(diff);
}

TEST_CASE("discriminator conv stack matches the encoder's parameter count") {
    nn::NetworkF gen(nn::make_3dcae_spec(), 1);
    nn::NetworkF disc(nn::make_3d_discriminator_spec(), 2);
    auto conv_params = [](nn::NetworkF& net) {
        std::int64_t n = 0;
        for (auto* p : net.params())
            if (p->name.rfind("enc", 0) == 0 && p->name.find(".bn") == std::string::npos)
                n += p->value.size();
        return n;
    };
    const std::int64_t enc = conv_params(gen);
    CHECK(enc > 0);
    CHECK(conv_params(disc) == enc);

    // analytic count: 4 conv layers with kernel 5x3x3
    const std::int64_t expect = (5 * 3 * 3 * 1 * 16 + 16) + (5 * 3 * 3 * 16 * 8 + 8) +
                                (5 * 3 * 3 * 8 * 8 + 8) + (5 * 3 * 3 * 8 * 8 + 8);
    CHECK(enc == expect);
}

TEST_CASE("non-dividing stride raises a spec error naming the layer") {
    NetworkSpec spec = nn::make_3dcae_spec();
    spec.input_shape = {8, 63, 63, 1};  // 63 not divisible by the stride-2 layers
    spec.expected_output_shapes.clear();
    try {
        nn::shape_report(spec);
        FAIL("expected SpecError");
    } catch (const SpecError& e) {
        CHECK(std::string(e.what()).find("enc2") != std::string::npos);
    }
}

TEST_CASE("spec json round-trips") {
    for (const auto& spec : {nn::make_3dcae_spec(), nn::make_3d_discriminator_spec(),
                             nn::make_dae_spec(), nn::make_cae_spec()}) {
        NetworkSpec back = nn::spec_from_json(nn::spec_to_json(spec));
        CHECK(back.name == spec.name);
        CHECK(back.input_shape == spec.input_shape);
        REQUIRE(back.layers.size() == spec.layers.size());
        for (std::size_t i = 0; i < spec.layers.size(); ++i) {
            CHECK(back.layers[i].name == spec.layers[i].name);
            CHECK(back.layers[i].kind == spec.layers[i].kind);
            CHECK(back.layers[i].kernel == spec.layers[i].kernel);
            CHECK(back.layers[i].stride == spec.layers[i].stride);
            CHECK(back.layers[i].units == spec.layers[i].units);
            CHECK(back.layers[i].activation == spec.layers[i].activation);
            CHECK(back.layers[i].batch_norm == spec.layers[i].batch_norm);
        }
        CHECK(nn::shape_report(back) == nn::shape_report(spec));
    }
}

TEST_CASE("state save/load round-trips through a checkpoint file") {
    nn::NetworkF a(nn::make_3dcae_spec(4, 8, 8, 4, 2), 31);
    TensorF x = random_input<float>({4, 8, 8, 1}, 2, 14);
    a.forward(x, true);  // move the batch-norm running stats off init
    a.save_state("/tmp/stfall_test_net.bin");

    nn::NetworkF b(nn::make_3dcae_spec(4, 8, 8, 4, 2), 99);
    b.load_state("/tmp/stfall_test_net.bin");
    TensorF ya = a.forward(x, false);
    TensorF yb = b.forward(x, false);
    for (std::int64_t i = 0; i < ya.size(); ++i) REQUIRE(ya[i] == yb[i]);

    nn::NetworkF wrong(nn::make_3dcae_spec(4, 8, 8, 2, 2), 1);
    CHECK_THROWS_AS(wrong.load_state("/tmp/stfall_test_net.bin"), IoError);
}

TEST_CASE("reconstruction-loss gradients match finite differences") {
    // double-precision miniature 3DCAE: input (4, 8, 8, 1), channels halved
    nn::NetworkSpec spec = nn::make_3dcae_spec(4, 8, 8, 8, 4);
    // seeds keep every probed parameter away from relu kinks, where the
    // central difference at h=1e-3 has not yet reached its convergent regime
    nn::Network<double> net(spec, 55);
    TensorD x = random_input<double>({4, 8, 8, 1}, 2, 2);
    const double b = static_cast<double>(x.dim(0));

    auto loss_at = [&]() {
        TensorD y = net.forward(x, true);
        return reconstruction_loss(x, y);
    };

    net.zero_grad();
    TensorD y = net.forward(x, true);
    TensorD dy(y.shape());
    for (std::int64_t i = 0; i < y.size(); ++i) dy[i] = 2.0 * (y[i] - x[i]) / b;
    net.backward(dy);

    auto params = net.params();
    std::mt19937_64 rng(22);
    const double h = 1e-3;
    for (int k = 0; k < 10; ++k) {
        auto* p = params[rng() % params.size()];
        const std::int64_t i = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(p->value.size()));
        const double keep = p->value[i];
        p->value[i] = keep + h;
        const double lp = loss_at();
        p->value[i] = keep - h;
        const double lm = loss_at();
        p->value[i] = keep;
        const double fd = (lp - lm) / (2 * h);
        const double an = p->grad[i];
        const double denom = std::max({std::abs(fd), std::abs(an), 1e-8});
        INFO(p->name, "[", i, "] analytic ", an, " fd ", fd);
        CHECK(std::abs(an - fd) / denom < 1e-3);
    }
}
