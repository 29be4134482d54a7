#pragma once

#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "stfall/common.hpp"

namespace stfall {

// Dense row-major tensor. Video batches use channels-last layout
// (batch, depth, height, width, channels); 2-D nets drop the depth axis.
template <typename S>
class Tensor {
  public:
    Tensor() = default;
    explicit Tensor(std::vector<std::int64_t> shape) : shape_(std::move(shape)) {
        data_.assign(static_cast<std::size_t>(count(shape_)), S(0));
    }

    static std::int64_t count(const std::vector<std::int64_t>& shape) {
        std::int64_t n = 1;
        for (auto d : shape) n *= d;
        return n;
    }

    const std::vector<std::int64_t>& shape() const { return shape_; }
    std::int64_t dim(std::size_t i) const { return shape_.at(i); }
    std::size_t rank() const { return shape_.size(); }
    std::int64_t size() const { return static_cast<std::int64_t>(data_.size()); }
    bool empty() const { return data_.empty(); }

    S* data() { return data_.data(); }
    const S* data() const { return data_.data(); }
    S& operator[](std::int64_t i) { return data_[static_cast<std::size_t>(i)]; }
    const S& operator[](std::int64_t i) const { return data_[static_cast<std::size_t>(i)]; }

    void fill(S v) { std::fill(data_.begin(), data_.end(), v); }

    Tensor reshaped(std::vector<std::int64_t> shape) const {
        if (count(shape) != size())
            throw InputError("tensor reshape: element count mismatch");
        Tensor out = *this;
        out.shape_ = std::move(shape);
        return out;
    }

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

    static std::string shape_str(const std::vector<std::int64_t>& shape) {
        std::string s = "(";
        for (std::size_t i = 0; i < shape.size(); ++i) {
            if (i) s += ", ";
            s += std::to_string(shape[i]);
        }
        return s + ")";
    }

  private:
    std::vector<std::int64_t> shape_;
    std::vector<S> data_;
};

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

}  // namespace stfall
