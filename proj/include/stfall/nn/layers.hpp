#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "stfall/nn/conv.hpp"
#include "stfall/nn/spec.hpp"
#include "stfall/tensor.hpp"

namespace stfall::nn {

template <typename S>
struct Param {
    std::string name;
    Tensor<S> value;
    Tensor<S> grad;

    explicit Param(std::string n, std::vector<std::int64_t> shape)
        : name(std::move(n)), value(shape), grad(std::move(shape)) {}
};

template <typename S>
class Layer {
  public:
    virtual ~Layer() = default;
    virtual Tensor<S> forward(const Tensor<S>& x, bool training) = 0;
    virtual Tensor<S> backward(const Tensor<S>& dy) = 0;
    virtual void collect_params(std::vector<Param<S>*>& out) {}
    // Everything a checkpoint must persist: params plus non-trainable buffers.
    virtual void collect_state(std::vector<Tensor<S>*>& out) {}
    virtual const std::string& name() const = 0;
};

namespace detail {
template <typename S>
std::vector<std::int64_t> batch_shape(std::int64_t b, const std::vector<std::int64_t>& per_sample) {
    std::vector<std::int64_t> s{b};
    s.insert(s.end(), per_sample.begin(), per_sample.end());
    return s;
}
}  // namespace detail

template <typename S>
class Conv3dLayer : public Layer<S> {
  public:
    Conv3dLayer(std::string name, Conv3dGeom geom, std::vector<std::int64_t> out_sample_shape)
        : name_(std::move(name)),
          geom_(geom),
          out_sample_(std::move(out_sample_shape)),
          weight_(name_ + ".weight", {geom.kernel_cols(), geom.out_c}),
          bias_(name_ + ".bias", {geom.out_c}) {}

    Tensor<S> forward(const Tensor<S>& x, bool) override {
        const std::int64_t b = x.dim(0);
        check_sample_size(x, geom_.in_voxels() * geom_.in_c);
        x_ = x;
        Tensor<S> y(detail::batch_shape<S>(b, out_sample_));
        std::vector<S> col(static_cast<std::size_t>(geom_.out_voxels() * geom_.kernel_cols()));
        CMapRM<S> w(weight_.value.data(), geom_.kernel_cols(), geom_.out_c);
        for (std::int64_t s = 0; s < b; ++s) {
            im2col(geom_, x.data() + s * geom_.in_voxels() * geom_.in_c, col.data());
            CMapRM<S> c(col.data(), geom_.out_voxels(), geom_.kernel_cols());
            MapRM<S> ym(y.data() + s * geom_.out_voxels() * geom_.out_c,
                        geom_.out_voxels(), geom_.out_c);
            ym.noalias() = c * w;
            ym.rowwise() += CMapRM<S>(bias_.value.data(), 1, geom_.out_c).row(0);
        }
        return y;
    }

    Tensor<S> backward(const Tensor<S>& dy) override {
        const std::int64_t b = dy.dim(0);
        Tensor<S> dx(x_.shape());
        std::vector<S> col(static_cast<std::size_t>(geom_.out_voxels() * geom_.kernel_cols()));
        std::vector<S> colgrad(col.size());
        CMapRM<S> w(weight_.value.data(), geom_.kernel_cols(), geom_.out_c);
        MapRM<S> dw(weight_.grad.data(), geom_.kernel_cols(), geom_.out_c);
        MapRM<S> db(bias_.grad.data(), 1, geom_.out_c);
        for (std::int64_t s = 0; s < b; ++s) {
            const S* xs = x_.data() + s * geom_.in_voxels() * geom_.in_c;
            CMapRM<S> dym(dy.data() + s * geom_.out_voxels() * geom_.out_c,
                          geom_.out_voxels(), geom_.out_c);
            im2col(geom_, xs, col.data());
            CMapRM<S> c(col.data(), geom_.out_voxels(), geom_.kernel_cols());
            dw.noalias() += c.transpose() * dym;
            db += dym.colwise().sum();
            MapRM<S> cg(colgrad.data(), geom_.out_voxels(), geom_.kernel_cols());
            cg.noalias() = dym * w.transpose();
            col2im(geom_, colgrad.data(), dx.data() + s * geom_.in_voxels() * geom_.in_c);
        }
        return dx;
    }

    void collect_params(std::vector<Param<S>*>& out) override {
        out.push_back(&weight_);
        out.push_back(&bias_);
    }
    void collect_state(std::vector<Tensor<S>*>& out) override {
        out.push_back(&weight_.value);
        out.push_back(&bias_.value);
    }
    const std::string& name() const override { return name_; }

    Param<S>& weight() { return weight_; }
    Param<S>& bias() { return bias_; }

  private:
    static void check_sample_size(const Tensor<S>& x, std::int64_t expect) {
        if (x.rank() < 2 || x.size() != x.dim(0) * expect)
            throw InputError("conv layer: input sample size mismatch");
    }

    std::string name_;
    Conv3dGeom geom_;
    std::vector<std::int64_t> out_sample_;
    Param<S> weight_, bias_;
    Tensor<S> x_;
};

// Transposed convolution, expressed through the adjoint of a "virtual"
// convolution that maps the deconv output back to the deconv input. The
// target output shape is forced explicitly, which settles the usual
// stride-2 output-size ambiguity.
template <typename S>
class Deconv3dLayer : public Layer<S> {
  public:
    // geom: virtual conv with in_* = deconv OUTPUT dims, in_c = deconv out
    // channels, out_* = deconv INPUT dims, out_c = deconv in channels.
    Deconv3dLayer(std::string name, Conv3dGeom geom, std::vector<std::int64_t> out_sample_shape)
        : name_(std::move(name)),
          geom_(geom),
          out_sample_(std::move(out_sample_shape)),
          weight_(name_ + ".weight", {geom.kernel_cols(), geom.out_c}),
          bias_(name_ + ".bias", {geom.in_c}) {}

    Tensor<S> forward(const Tensor<S>& x, bool) override {
        const std::int64_t b = x.dim(0);
        const std::int64_t in_sz = geom_.out_voxels() * geom_.out_c;   // deconv input
        const std::int64_t out_sz = geom_.in_voxels() * geom_.in_c;    // deconv output
        if (x.size() != b * in_sz) throw InputError("deconv layer: input sample size mismatch");
        x_ = x;
        Tensor<S> y(detail::batch_shape<S>(b, out_sample_));
        std::vector<S> colgrad(static_cast<std::size_t>(geom_.out_voxels() * geom_.kernel_cols()));
        CMapRM<S> w(weight_.value.data(), geom_.kernel_cols(), geom_.out_c);
        for (std::int64_t s = 0; s < b; ++s) {
            CMapRM<S> xm(x.data() + s * in_sz, geom_.out_voxels(), geom_.out_c);
            MapRM<S> cg(colgrad.data(), geom_.out_voxels(), geom_.kernel_cols());
            cg.noalias() = xm * w.transpose();
            S* ys = y.data() + s * out_sz;
            std::fill(ys, ys + out_sz, S(0));
            col2im(geom_, colgrad.data(), ys);
            MapRM<S> ym(ys, geom_.in_voxels(), geom_.in_c);
            ym.rowwise() += CMapRM<S>(bias_.value.data(), 1, geom_.in_c).row(0);
        }
        return y;
    }

    Tensor<S> backward(const Tensor<S>& dy) override {
        const std::int64_t b = dy.dim(0);
        const std::int64_t in_sz = geom_.out_voxels() * geom_.out_c;
        const std::int64_t out_sz = geom_.in_voxels() * geom_.in_c;
        Tensor<S> dx(x_.shape());
        std::vector<S> col(static_cast<std::size_t>(geom_.out_voxels() * geom_.kernel_cols()));
        CMapRM<S> w(weight_.value.data(), geom_.kernel_cols(), geom_.out_c);
        MapRM<S> dw(weight_.grad.data(), geom_.kernel_cols(), geom_.out_c);
        MapRM<S> db(bias_.grad.data(), 1, geom_.in_c);
        for (std::int64_t s = 0; s < b; ++s) {
            const S* dys = dy.data() + s * out_sz;
            im2col(geom_, dys, col.data());
            CMapRM<S> c(col.data(), geom_.out_voxels(), geom_.kernel_cols());
            CMapRM<S> xm(x_.data() + s * in_sz, geom_.out_voxels(), geom_.out_c);
            dw.noalias() += c.transpose() * xm;
            db += CMapRM<S>(dys, geom_.in_voxels(), geom_.in_c).colwise().sum();
            MapRM<S> dxm(dx.data() + s * in_sz, geom_.out_voxels(), geom_.out_c);
            dxm.noalias() = c * w;
        }
        return dx;
    }

    void collect_params(std::vector<Param<S>*>& out) override {
        out.push_back(&weight_);
        out.push_back(&bias_);
    }
    void collect_state(std::vector<Tensor<S>*>& out) override {
        out.push_back(&weight_.value);
        out.push_back(&bias_.value);
    }
    const std::string& name() const override { return name_; }

    Param<S>& weight() { return weight_; }

  private:
    std::string name_;
    Conv3dGeom geom_;
    std::vector<std::int64_t> out_sample_;
    Param<S> weight_, bias_;
    Tensor<S> x_;
};

template <typename S>
class DenseLayer : public Layer<S> {
  public:
    DenseLayer(std::string name, std::int64_t in, std::int64_t out)
        : name_(std::move(name)),
          in_(in),
          out_(out),
          weight_(name_ + ".weight", {in, out}),
          bias_(name_ + ".bias", {out}) {}

    Tensor<S> forward(const Tensor<S>& x, bool) override {
        const std::int64_t b = x.dim(0);
        if (x.size() != b * in_) throw InputError("dense layer: input width mismatch");
        x_ = x;
        Tensor<S> y({b, out_});
        MapRM<S> ym(y.data(), b, out_);
        ym.noalias() = CMapRM<S>(x.data(), b, in_) * CMapRM<S>(weight_.value.data(), in_, out_);
        ym.rowwise() += CMapRM<S>(bias_.value.data(), 1, out_).row(0);
        return y;
    }

    Tensor<S> backward(const Tensor<S>& dy) override {
        const std::int64_t b = dy.dim(0);
        CMapRM<S> dym(dy.data(), b, out_);
        CMapRM<S> xm(x_.data(), b, in_);
        MapRM<S>(weight_.grad.data(), in_, out_).noalias() += xm.transpose() * dym;
        MapRM<S>(bias_.grad.data(), 1, out_) += dym.colwise().sum();
        Tensor<S> dx(x_.shape());
        MapRM<S>(dx.data(), b, in_).noalias() =
            dym * CMapRM<S>(weight_.value.data(), in_, out_).transpose();
        return dx;
    }

    void collect_params(std::vector<Param<S>*>& out) override {
        out.push_back(&weight_);
        out.push_back(&bias_);
    }
    void collect_state(std::vector<Tensor<S>*>& out) override {
        out.push_back(&weight_.value);
        out.push_back(&bias_.value);
    }
    const std::string& name() const override { return name_; }

    Param<S>& weight() { return weight_; }

  private:
    std::string name_;
    std::int64_t in_, out_;
    Param<S> weight_, bias_;
    Tensor<S> x_;
};

// Per-channel batch normalization over the trailing (channel) axis.
template <typename S>
class BatchNormLayer : public Layer<S> {
  public:
    BatchNormLayer(std::string name, std::int64_t channels, S momentum = S(0.9), S eps = S(1e-5))
        : name_(std::move(name)),
          c_(channels),
          momentum_(momentum),
          eps_(eps),
          gamma_(name_ + ".gamma", {channels}),
          beta_(name_ + ".beta", {channels}),
          running_mean_({channels}),
          running_var_({channels}) {
        gamma_.value.fill(S(1));
        running_var_.fill(S(1));
    }

    Tensor<S> forward(const Tensor<S>& x, bool training) override {
        const std::int64_t rows = x.size() / c_;
        Tensor<S> y(x.shape());
        if (training) {
            mean_ = Tensor<S>({c_});
            inv_std_ = Tensor<S>({c_});
            for (std::int64_t r = 0; r < rows; ++r)
                for (std::int64_t c = 0; c < c_; ++c) mean_[c] += x[r * c_ + c];
            for (std::int64_t c = 0; c < c_; ++c) mean_[c] /= static_cast<S>(rows);
            Tensor<S> var({c_});
            for (std::int64_t r = 0; r < rows; ++r)
                for (std::int64_t c = 0; c < c_; ++c) {
                    const S d = x[r * c_ + c] - mean_[c];
                    var[c] += d * d;
                }
            for (std::int64_t c = 0; c < c_; ++c) {
                var[c] /= static_cast<S>(rows);
                inv_std_[c] = S(1) / std::sqrt(var[c] + eps_);
                running_mean_[c] = momentum_ * running_mean_[c] + (S(1) - momentum_) * mean_[c];
                running_var_[c] = momentum_ * running_var_[c] + (S(1) - momentum_) * var[c];
            }
            xhat_ = Tensor<S>(x.shape());
            for (std::int64_t r = 0; r < rows; ++r)
                for (std::int64_t c = 0; c < c_; ++c) {
                    const S h = (x[r * c_ + c] - mean_[c]) * inv_std_[c];
                    xhat_[r * c_ + c] = h;
                    y[r * c_ + c] = gamma_.value[c] * h + beta_.value[c];
                }
            rows_ = rows;
        } else {
            for (std::int64_t c = 0; c < c_; ++c) {
                const S inv = S(1) / std::sqrt(running_var_[c] + eps_);
                for (std::int64_t r = 0; r < rows; ++r)
                    y[r * c_ + c] = gamma_.value[c] * (x[r * c_ + c] - running_mean_[c]) * inv +
                                    beta_.value[c];
            }
        }
        return y;
    }

    Tensor<S> backward(const Tensor<S>& dy) override {
        const std::int64_t rows = rows_;
        Tensor<S> sum_dy({c_}), sum_dy_xhat({c_});
        for (std::int64_t r = 0; r < rows; ++r)
            for (std::int64_t c = 0; c < c_; ++c) {
                sum_dy[c] += dy[r * c_ + c];
                sum_dy_xhat[c] += dy[r * c_ + c] * xhat_[r * c_ + c];
            }
        for (std::int64_t c = 0; c < c_; ++c) {
            gamma_.grad[c] += sum_dy_xhat[c];
            beta_.grad[c] += sum_dy[c];
        }
        Tensor<S> dx(dy.shape());
        const S n = static_cast<S>(rows);
        for (std::int64_t r = 0; r < rows; ++r)
            for (std::int64_t c = 0; c < c_; ++c) {
                dx[r * c_ + c] = gamma_.value[c] * inv_std_[c] *
                                 (dy[r * c_ + c] - sum_dy[c] / n -
                                  xhat_[r * c_ + c] * sum_dy_xhat[c] / n);
            }
        return dx;
    }

    void collect_params(std::vector<Param<S>*>& out) override {
        out.push_back(&gamma_);
        out.push_back(&beta_);
    }
    void collect_state(std::vector<Tensor<S>*>& out) override {
        out.push_back(&gamma_.value);
        out.push_back(&beta_.value);
        out.push_back(&running_mean_);
        out.push_back(&running_var_);
    }
    const std::string& name() const override { return name_; }

  private:
    std::string name_;
    std::int64_t c_;
    S momentum_, eps_;
    Param<S> gamma_, beta_;
    Tensor<S> running_mean_, running_var_;
    Tensor<S> mean_, inv_std_, xhat_;
    std::int64_t rows_ = 0;
};

template <typename S>
class ActivationLayer : public Layer<S> {
  public:
    ActivationLayer(std::string name, Activation act, S leaky_slope = S(0.2))
        : name_(std::move(name)), act_(act), slope_(leaky_slope) {}

    Tensor<S> forward(const Tensor<S>& x, bool) override {
        Tensor<S> y(x.shape());
        switch (act_) {
            case Activation::Relu:
                for (std::int64_t i = 0; i < x.size(); ++i) y[i] = x[i] > S(0) ? x[i] : S(0);
                break;
            case Activation::LeakyRelu:
                for (std::int64_t i = 0; i < x.size(); ++i)
                    y[i] = x[i] > S(0) ? x[i] : slope_ * x[i];
                break;
            case Activation::Sigmoid:
                for (std::int64_t i = 0; i < x.size(); ++i) y[i] = S(1) / (S(1) + std::exp(-x[i]));
                break;
            case Activation::Tanh:
                for (std::int64_t i = 0; i < x.size(); ++i) y[i] = std::tanh(x[i]);
                break;
            case Activation::Linear:
                y = x;
                break;
        }
        if (act_ == Activation::Relu || act_ == Activation::LeakyRelu) x_ = x;
        if (act_ == Activation::Sigmoid || act_ == Activation::Tanh) y_ = y;
        return y;
    }

    Tensor<S> backward(const Tensor<S>& dy) override {
        Tensor<S> dx(dy.shape());
        switch (act_) {
            case Activation::Relu:
                for (std::int64_t i = 0; i < dy.size(); ++i)
                    dx[i] = x_[i] > S(0) ? dy[i] : S(0);
                break;
            case Activation::LeakyRelu:
                for (std::int64_t i = 0; i < dy.size(); ++i)
                    dx[i] = x_[i] > S(0) ? dy[i] : slope_ * dy[i];
                break;
            case Activation::Sigmoid:
                for (std::int64_t i = 0; i < dy.size(); ++i)
                    dx[i] = dy[i] * y_[i] * (S(1) - y_[i]);
                break;
            case Activation::Tanh:
                for (std::int64_t i = 0; i < dy.size(); ++i)
                    dx[i] = dy[i] * (S(1) - y_[i] * y_[i]);
                break;
            case Activation::Linear:
                dx = dy;
                break;
        }
        return dx;
    }

    const std::string& name() const override { return name_; }

  private:
    std::string name_;
    Activation act_;
    S slope_;
    Tensor<S> x_, y_;
};

template <typename S>
class ReshapeLayer : public Layer<S> {
  public:
    ReshapeLayer(std::string name, std::vector<std::int64_t> out_sample)
        : name_(std::move(name)), out_sample_(std::move(out_sample)) {}

    Tensor<S> forward(const Tensor<S>& x, bool) override {
        in_sample_.assign(x.shape().begin() + 1, x.shape().end());
        return x.reshaped(detail::batch_shape<S>(x.dim(0), out_sample_));
    }

    Tensor<S> backward(const Tensor<S>& dy) override {
        return dy.reshaped(detail::batch_shape<S>(dy.dim(0), in_sample_));
    }

    const std::string& name() const override { return name_; }

  private:
    std::string name_;
    std::vector<std::int64_t> out_sample_, in_sample_;
};

}  // namespace stfall::nn
