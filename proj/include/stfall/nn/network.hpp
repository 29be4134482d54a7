#pragma once

#include <fstream>
#include <memory>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "stfall/nn/layers.hpp"
#include "stfall/nn/spec.hpp"

namespace stfall::nn {

// Executable network instantiated from a NetworkSpec. Each spec row expands
// into up to three primitive layers: linear op, batch norm, activation.
template <typename S>
class Network {
  public:
    Network() = default;

    Network(const NetworkSpec& spec, std::uint64_t seed) : spec_(spec), seed_(seed) {
        std::mt19937_64 rng(seed);
        auto shape = spec.input_shape;
        const auto rows = shape_report(spec);  // validates the spec up front
        for (std::size_t i = 0; i < spec.layers.size(); ++i) {
            const LayerSpec& ls = spec.layers[i];
            const auto& out_shape = rows[i].second;
            add_op(ls, shape, out_shape, rng, static_cast<int>(i));
            if (ls.batch_norm) {
                layers_.push_back(std::make_unique<BatchNormLayer<S>>(ls.name + ".bn", out_shape.back()));
                row_of_.push_back(static_cast<int>(i));
            }
            if (ls.activation != Activation::Linear) {
                layers_.push_back(std::make_unique<ActivationLayer<S>>(
                    ls.name + ".act", ls.activation, static_cast<S>(ls.leaky_slope)));
                row_of_.push_back(static_cast<int>(i));
            }
            shape = out_shape;
        }
    }

    const NetworkSpec& spec() const { return spec_; }
    std::uint64_t seed() const { return seed_; }

    Tensor<S> forward(const Tensor<S>& x, bool training) {
        Tensor<S> h = x;
        for (auto& l : layers_) h = l->forward(h, training);
        return h;
    }

    // Forward pass that records the output shape after every spec row,
    // for cross-checking against the symbolic shape report.
    Tensor<S> forward_trace(const Tensor<S>& x, bool training,
                            std::vector<std::pair<std::string, std::vector<std::int64_t>>>& trace) {
        trace.clear();
        Tensor<S> h = x;
        for (std::size_t i = 0; i < layers_.size(); ++i) {
            h = layers_[i]->forward(h, training);
            const bool row_end = (i + 1 == layers_.size()) || (row_of_[i + 1] != row_of_[i]);
            if (row_end) {
                std::vector<std::int64_t> per_sample(h.shape().begin() + 1, h.shape().end());
                trace.emplace_back(spec_.layers[static_cast<std::size_t>(row_of_[i])].name, per_sample);
            }
        }
        return h;
    }

    Tensor<S> backward(const Tensor<S>& dy) {
        Tensor<S> g = dy;
        for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
        return g;
    }

    std::vector<Param<S>*> params() {
        std::vector<Param<S>*> out;
        for (auto& l : layers_) l->collect_params(out);
        return out;
    }

    void zero_grad() {
        for (auto* p : params()) p->grad.fill(S(0));
    }

    std::int64_t param_count() {
        std::int64_t n = 0;
        for (auto* p : params()) n += p->value.size();
        return n;
    }

    std::vector<Tensor<S>*> state() {
        std::vector<Tensor<S>*> out;
        for (auto& l : layers_) l->collect_state(out);
        return out;
    }

    void save_state(const std::string& path) {
        std::ofstream f(path, std::ios::binary);
        if (!f) throw IoError("cannot write " + path);
        const char magic[8] = {'S', 'T', 'F', 'N', 'E', 'T', '1', '\0'};
        f.write(magic, 8);
        auto ts = state();
        std::uint32_t n = static_cast<std::uint32_t>(ts.size());
        f.write(reinterpret_cast<const char*>(&n), 4);
        std::uint32_t ssz = sizeof(S);
        f.write(reinterpret_cast<const char*>(&ssz), 4);
        for (auto* t : ts) {
            std::uint32_t rank = static_cast<std::uint32_t>(t->rank());
            f.write(reinterpret_cast<const char*>(&rank), 4);
            for (auto d : t->shape()) {
                std::int64_t v = d;
                f.write(reinterpret_cast<const char*>(&v), 8);
            }
            f.write(reinterpret_cast<const char*>(t->data()),
                    static_cast<std::streamsize>(sizeof(S) * t->size()));
        }
        if (!f) throw IoError("short write on " + path);
    }

    void load_state(const std::string& path) {
        std::ifstream f(path, std::ios::binary);
        if (!f) throw IoError("cannot read " + path);
        char magic[8];
        f.read(magic, 8);
        if (std::string(magic, 7) != "STFNET1") throw IoError("bad checkpoint magic in " + path);
        std::uint32_t n = 0, ssz = 0;
        f.read(reinterpret_cast<char*>(&n), 4);
        f.read(reinterpret_cast<char*>(&ssz), 4);
        auto ts = state();
        if (n != ts.size() || ssz != sizeof(S))
            throw IoError("checkpoint layout mismatch in " + path);
        for (auto* t : ts) {
            std::uint32_t rank = 0;
            f.read(reinterpret_cast<char*>(&rank), 4);
            if (rank != t->rank()) throw IoError("checkpoint tensor rank mismatch in " + path);
            for (std::size_t i = 0; i < rank; ++i) {
                std::int64_t d = 0;
                f.read(reinterpret_cast<char*>(&d), 8);
                if (d != t->shape()[i]) throw IoError("checkpoint tensor shape mismatch in " + path);
            }
            f.read(reinterpret_cast<char*>(t->data()),
                   static_cast<std::streamsize>(sizeof(S) * t->size()));
        }
        if (!f) throw IoError("truncated checkpoint " + path);
    }

  private:
    static std::int64_t flat(const std::vector<std::int64_t>& s) {
        std::int64_t n = 1;
        for (auto d : s) n *= d;
        return n;
    }

    void glorot_init(Param<S>& w, std::int64_t fan_in, std::int64_t fan_out, std::mt19937_64& rng) {
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        std::uniform_real_distribution<double> u(-limit, limit);
        for (std::int64_t i = 0; i < w.value.size(); ++i) w.value[i] = static_cast<S>(u(rng));
    }

    void add_op(const LayerSpec& ls, const std::vector<std::int64_t>& in_shape,
                const std::vector<std::int64_t>& out_shape, std::mt19937_64& rng, int row) {
        const auto k = ls.kernel;
        const auto st = ls.stride;
        switch (ls.kind) {
            case LayerKind::Conv3d:
            case LayerKind::Conv2d: {
                const bool is3d = ls.kind == LayerKind::Conv3d;
                const int d = is3d ? static_cast<int>(in_shape[0]) : 1;
                const int h = static_cast<int>(in_shape[is3d ? 1 : 0]);
                const int w = static_cast<int>(in_shape[is3d ? 2 : 1]);
                const int cin = static_cast<int>(in_shape.back());
                auto g = make_same_geom(d, h, w, cin, static_cast<int>(ls.units),
                                        is3d ? k[0] : 1, k[1], k[2],
                                        is3d ? st[0] : 1, st[1], st[2], ls.name.c_str());
                auto layer = std::make_unique<Conv3dLayer<S>>(ls.name, g, out_shape);
                glorot_init(layer->weight(), g.kernel_cols(),
                            static_cast<std::int64_t>(g.kd) * g.kh * g.kw * g.out_c, rng);
                layers_.push_back(std::move(layer));
                break;
            }
            case LayerKind::Deconv3d:
            case LayerKind::Deconv2d: {
                const bool is3d = ls.kind == LayerKind::Deconv3d;
                // virtual conv runs output -> input
                const int od = is3d ? static_cast<int>(out_shape[0]) : 1;
                const int oh = static_cast<int>(out_shape[is3d ? 1 : 0]);
                const int ow = static_cast<int>(out_shape[is3d ? 2 : 1]);
                const int cin = static_cast<int>(in_shape.back());
                auto g = make_same_geom(od, oh, ow, static_cast<int>(ls.units), cin,
                                        is3d ? k[0] : 1, k[1], k[2],
                                        is3d ? st[0] : 1, st[1], st[2], ls.name.c_str());
                auto layer = std::make_unique<Deconv3dLayer<S>>(ls.name, g, out_shape);
                glorot_init(layer->weight(),
                            static_cast<std::int64_t>(g.kd) * g.kh * g.kw * cin,
                            g.kernel_cols(), rng);
                layers_.push_back(std::move(layer));
                break;
            }
            case LayerKind::Dense: {
                auto layer = std::make_unique<DenseLayer<S>>(ls.name, flat(in_shape), ls.units);
                glorot_init(layer->weight(), flat(in_shape), ls.units, rng);
                layers_.push_back(std::move(layer));
                break;
            }
            case LayerKind::Flatten:
                layers_.push_back(std::make_unique<ReshapeLayer<S>>(
                    ls.name, std::vector<std::int64_t>{flat(in_shape)}));
                break;
            case LayerKind::Reshape:
                layers_.push_back(std::make_unique<ReshapeLayer<S>>(ls.name, ls.reshape_to));
                break;
        }
        row_of_.push_back(row);
    }

    NetworkSpec spec_;
    std::uint64_t seed_ = 0;
    std::vector<std::unique_ptr<Layer<S>>> layers_;
    std::vector<int> row_of_;
};

using NetworkF = Network<float>;

}  // namespace stfall::nn
