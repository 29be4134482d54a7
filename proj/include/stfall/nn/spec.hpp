#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "stfall/common.hpp"

namespace stfall::nn {

enum class LayerKind { Conv3d, Deconv3d, Conv2d, Deconv2d, Dense, Flatten, Reshape };
enum class Activation { Relu, LeakyRelu, Sigmoid, Tanh, Linear };

std::string to_string(LayerKind k);
std::string to_string(Activation a);
LayerKind layer_kind_from_string(const std::string& s);
Activation activation_from_string(const std::string& s);

// One row of the declarative architecture description. Kernel/stride are
// (temporal, vertical, horizontal); 2-D layers use a temporal extent of 1.
struct LayerSpec {
    std::string name;
    LayerKind kind = LayerKind::Dense;
    std::array<int, 3> kernel{1, 1, 1};
    std::array<int, 3> stride{1, 1, 1};
    std::int64_t units = 0;  // out_channels for conv kinds, neurons for dense
    Activation activation = Activation::Linear;
    double leaky_slope = 0.2;
    bool batch_norm = false;
    std::vector<std::int64_t> reshape_to;  // Reshape only (per-sample shape)
};

struct NetworkSpec {
    std::string name;
    std::vector<std::int64_t> input_shape;  // per-sample, channels-last
    std::vector<LayerSpec> layers;
    std::vector<std::vector<std::int64_t>> expected_output_shapes;
};

// Symbolic shape propagation; no parameters are allocated. Throws SpecError
// (naming the layer) on inconsistent strides or expected-shape mismatches.
std::vector<std::pair<std::string, std::vector<std::int64_t>>> shape_report(const NetworkSpec& spec);

nlohmann::json spec_to_json(const NetworkSpec& spec);
NetworkSpec spec_from_json(const nlohmann::json& j);

}  // namespace stfall::nn
