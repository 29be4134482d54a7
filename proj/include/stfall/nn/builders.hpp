#pragma once

#include <cstdint>

#include "stfall/nn/network.hpp"
#include "stfall/nn/spec.hpp"

namespace stfall::nn {

// A built network together with the spec and the seed that produced its
// initial parameters (same spec + seed => identical parameters).
template <typename S>
struct Model {
    NetworkSpec spec;
    std::uint64_t seed = 0;
    Network<S> net;

    Model() = default;
    Model(NetworkSpec s, std::uint64_t sd) : spec(std::move(s)), seed(sd), net(spec, sd) {}
};

using ModelF = Model<float>;

// Spec factories. The default arguments give the full-scale networks;
// the 3-D ones can be shrunk (input dims, channel widths) for fast tests.
NetworkSpec make_3dcae_spec(int t = 8, int h = 64, int w = 64, int c1 = 16, int c2 = 8);
NetworkSpec make_3d_discriminator_spec(int t = 8, int h = 64, int w = 64, int c1 = 16, int c2 = 8);
NetworkSpec make_dae_spec();
NetworkSpec make_dae_discriminator_spec();
NetworkSpec make_cae_spec(int h = 64, int w = 64);
NetworkSpec make_cae_discriminator_spec(int h = 64, int w = 64);

ModelF build_3dcae(std::uint64_t seed);
ModelF build_3d_discriminator(std::uint64_t seed);
ModelF build_dae(std::uint64_t seed);
ModelF build_dae_discriminator(std::uint64_t seed);
ModelF build_cae(std::uint64_t seed);
ModelF build_cae_discriminator(std::uint64_t seed);

}  // namespace stfall::nn
