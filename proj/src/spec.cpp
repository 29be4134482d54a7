#include "stfall/nn/spec.hpp"

#include <nlohmann/json.hpp>

#include "stfall/nn/conv.hpp"

namespace stfall::nn {

std::string to_string(LayerKind k) {
    switch (k) {
        case LayerKind::Conv3d: return "conv3d";
        case LayerKind::Deconv3d: return "deconv3d";
        case LayerKind::Conv2d: return "conv2d";
        case LayerKind::Deconv2d: return "deconv2d";
        case LayerKind::Dense: return "dense";
        case LayerKind::Flatten: return "flatten";
        case LayerKind::Reshape: return "reshape";
    }
    return "?";
}

std::string to_string(Activation a) {
    switch (a) {
        case Activation::Relu: return "relu";
        case Activation::LeakyRelu: return "leaky_relu";
        case Activation::Sigmoid: return "sigmoid";
        case Activation::Tanh: return "tanh";
        case Activation::Linear: return "linear";
    }
    return "?";
}

LayerKind layer_kind_from_string(const std::string& s) {
    if (s == "conv3d") return LayerKind::Conv3d;
    if (s == "deconv3d") return LayerKind::Deconv3d;
    if (s == "conv2d") return LayerKind::Conv2d;
    if (s == "deconv2d") return LayerKind::Deconv2d;
    if (s == "dense") return LayerKind::Dense;
    if (s == "flatten") return LayerKind::Flatten;
    if (s == "reshape") return LayerKind::Reshape;
    throw SpecError("unknown layer kind: " + s);
}

Activation activation_from_string(const std::string& s) {
    if (s == "relu") return Activation::Relu;
    if (s == "leaky_relu") return Activation::LeakyRelu;
    if (s == "sigmoid") return Activation::Sigmoid;
    if (s == "tanh") return Activation::Tanh;
    if (s == "linear") return Activation::Linear;
    throw SpecError("unknown activation: " + s);
}

namespace {

std::int64_t flat(const std::vector<std::int64_t>& s) {
    std::int64_t n = 1;
    for (auto d : s) n *= d;
    return n;
}

std::vector<std::int64_t> propagate(const LayerSpec& ls, const std::vector<std::int64_t>& in) {
    switch (ls.kind) {
        case LayerKind::Conv3d: {
            if (in.size() != 4) throw SpecError(ls.name + ": conv3d needs a (D,H,W,C) input");
            // same_pad_begin validates stride divisibility
            same_pad_begin(static_cast<int>(in[0]), ls.kernel[0], ls.stride[0], ls.name.c_str());
            same_pad_begin(static_cast<int>(in[1]), ls.kernel[1], ls.stride[1], ls.name.c_str());
            same_pad_begin(static_cast<int>(in[2]), ls.kernel[2], ls.stride[2], ls.name.c_str());
            return {in[0] / ls.stride[0], in[1] / ls.stride[1], in[2] / ls.stride[2], ls.units};
        }
        case LayerKind::Deconv3d: {
            if (in.size() != 4) throw SpecError(ls.name + ": deconv3d needs a (D,H,W,C) input");
            return {in[0] * ls.stride[0], in[1] * ls.stride[1], in[2] * ls.stride[2], ls.units};
        }
        case LayerKind::Conv2d: {
            if (in.size() != 3) throw SpecError(ls.name + ": conv2d needs a (H,W,C) input");
            same_pad_begin(static_cast<int>(in[0]), ls.kernel[1], ls.stride[1], ls.name.c_str());
            same_pad_begin(static_cast<int>(in[1]), ls.kernel[2], ls.stride[2], ls.name.c_str());
            return {in[0] / ls.stride[1], in[1] / ls.stride[2], ls.units};
        }
        case LayerKind::Deconv2d: {
            if (in.size() != 3) throw SpecError(ls.name + ": deconv2d needs a (H,W,C) input");
            return {in[0] * ls.stride[1], in[1] * ls.stride[2], ls.units};
        }
        case LayerKind::Dense:
            return {ls.units};
        case LayerKind::Flatten:
            return {flat(in)};
        case LayerKind::Reshape:
            if (flat(ls.reshape_to) != flat(in))
                throw SpecError(ls.name + ": reshape element count mismatch");
            return ls.reshape_to;
    }
    throw SpecError(ls.name + ": unknown layer kind");
}

}  // namespace

std::vector<std::pair<std::string, std::vector<std::int64_t>>> shape_report(const NetworkSpec& spec) {
    std::vector<std::pair<std::string, std::vector<std::int64_t>>> rows;
    auto shape = spec.input_shape;
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        const auto& ls = spec.layers[i];
        shape = propagate(ls, shape);
        if (i < spec.expected_output_shapes.size() && spec.expected_output_shapes[i] != shape)
            throw SpecError(ls.name + ": propagated shape " + TensorF::shape_str(shape) +
                            " does not match expected " +
                            TensorF::shape_str(spec.expected_output_shapes[i]));
        rows.emplace_back(ls.name, shape);
    }
    return rows;
}

nlohmann::json spec_to_json(const NetworkSpec& spec) {
    nlohmann::json j;
    j["name"] = spec.name;
    j["input_shape"] = spec.input_shape;
    j["layers"] = nlohmann::json::array();
    for (const auto& l : spec.layers) {
        nlohmann::json jl;
        jl["name"] = l.name;
        jl["kind"] = to_string(l.kind);
        jl["kernel"] = l.kernel;
        jl["stride"] = l.stride;
        jl["units"] = l.units;
        jl["activation"] = to_string(l.activation);
        jl["leaky_slope"] = l.leaky_slope;
        jl["batch_norm"] = l.batch_norm;
        if (!l.reshape_to.empty()) jl["reshape_to"] = l.reshape_to;
        j["layers"].push_back(jl);
    }
    j["expected_output_shapes"] = spec.expected_output_shapes;
    return j;
}

NetworkSpec spec_from_json(const nlohmann::json& j) {
    NetworkSpec spec;
    spec.name = j.at("name").get<std::string>();
    spec.input_shape = j.at("input_shape").get<std::vector<std::int64_t>>();
    for (const auto& jl : j.at("layers")) {
        LayerSpec l;
        l.name = jl.at("name").get<std::string>();
        l.kind = layer_kind_from_string(jl.at("kind").get<std::string>());
        l.kernel = jl.at("kernel").get<std::array<int, 3>>();
        l.stride = jl.at("stride").get<std::array<int, 3>>();
        l.units = jl.at("units").get<std::int64_t>();
        l.activation = activation_from_string(jl.at("activation").get<std::string>());
        l.leaky_slope = jl.at("leaky_slope").get<double>();
        l.batch_norm = jl.at("batch_norm").get<bool>();
        if (jl.contains("reshape_to")) l.reshape_to = jl.at("reshape_to").get<std::vector<std::int64_t>>();
        spec.layers.push_back(std::move(l));
    }
    spec.expected_output_shapes =
        j.at("expected_output_shapes").get<std::vector<std::vector<std::int64_t>>>();
    return spec;
}

}  // namespace stfall::nn
