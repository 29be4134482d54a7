#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <cstring>

#include "stfall/common.hpp"
#include "stfall/tensor.hpp"

namespace stfall::nn {

// Geometry of a strided 3-D convolution with TF-style "same" zero padding.
// Spatial dims must be divisible by the stride so that out = in / stride.
struct Conv3dGeom {
    int in_d = 1, in_h = 1, in_w = 1;
    int out_d = 1, out_h = 1, out_w = 1;
    int in_c = 1, out_c = 1;
    int kd = 1, kh = 1, kw = 1;
    int sd = 1, sh = 1, sw = 1;
    int pd = 0, ph = 0, pw = 0;  // leading pads

    std::int64_t kernel_cols() const {
        return static_cast<std::int64_t>(kd) * kh * kw * in_c;
    }
    std::int64_t out_voxels() const {
        return static_cast<std::int64_t>(out_d) * out_h * out_w;
    }
    std::int64_t in_voxels() const {
        return static_cast<std::int64_t>(in_d) * in_h * in_w;
    }
};

inline int same_pad_begin(int in, int k, int s, const char* what) {
    if (in % s != 0)
        throw SpecError(std::string(what) + ": stride " + std::to_string(s) +
                        " does not divide dimension " + std::to_string(in));
    int out = in / s;
    int total = (out - 1) * s + k - in;
    if (total < 0) total = 0;
    return total / 2;
}

inline Conv3dGeom make_same_geom(int in_d, int in_h, int in_w, int in_c, int out_c,
                                 int kd, int kh, int kw, int sd, int sh, int sw,
                                 const char* layer_name) {
    Conv3dGeom g;
    g.in_d = in_d; g.in_h = in_h; g.in_w = in_w;
    g.in_c = in_c; g.out_c = out_c;
    g.kd = kd; g.kh = kh; g.kw = kw;
    g.sd = sd; g.sh = sh; g.sw = sw;
    g.pd = same_pad_begin(in_d, kd, sd, layer_name);
    g.ph = same_pad_begin(in_h, kh, sh, layer_name);
    g.pw = same_pad_begin(in_w, kw, sw, layer_name);
    g.out_d = in_d / sd; g.out_h = in_h / sh; g.out_w = in_w / sw;
    return g;
}

template <typename S>
using MatRM = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename S>
using MapRM = Eigen::Map<MatRM<S>>;
template <typename S>
using CMapRM = Eigen::Map<const MatRM<S>>;

// Unfold one channels-last sample (in_d, in_h, in_w, in_c) into a
// (out_voxels, kd*kh*kw*in_c) row-major patch matrix, zero-filling the padding.
template <typename S>
void im2col(const Conv3dGeom& g, const S* x, S* col) {
    const std::int64_t krow = g.kernel_cols();
    const std::int64_t row_hw = static_cast<std::int64_t>(g.in_w) * g.in_c;
    const std::int64_t row_dhw = static_cast<std::int64_t>(g.in_h) * row_hw;
    std::int64_t r = 0;
    for (int od = 0; od < g.out_d; ++od) {
        for (int oh = 0; oh < g.out_h; ++oh) {
            for (int ow = 0; ow < g.out_w; ++ow, ++r) {
                S* dst = col + r * krow;
                for (int z = 0; z < g.kd; ++z) {
                    const int id = od * g.sd - g.pd + z;
                    for (int y = 0; y < g.kh; ++y) {
                        const int ih = oh * g.sh - g.ph + y;
                        if (id < 0 || id >= g.in_d || ih < 0 || ih >= g.in_h) {
                            std::memset(dst, 0, sizeof(S) * g.kw * g.in_c);
                            dst += static_cast<std::int64_t>(g.kw) * g.in_c;
                            continue;
                        }
                        const S* src_row = x + id * row_dhw + ih * row_hw;
                        for (int xk = 0; xk < g.kw; ++xk) {
                            const int iw = ow * g.sw - g.pw + xk;
                            if (iw < 0 || iw >= g.in_w) {
                                std::memset(dst, 0, sizeof(S) * g.in_c);
                            } else {
                                std::memcpy(dst, src_row + iw * g.in_c, sizeof(S) * g.in_c);
                            }
                            dst += g.in_c;
                        }
                    }
                }
            }
        }
    }
}

// Scatter-add the patch matrix back onto a channels-last sample; the adjoint
// of im2col. x must be zeroed by the caller.
template <typename S>
void col2im(const Conv3dGeom& g, const S* col, S* x) {
    const std::int64_t krow = g.kernel_cols();
    const std::int64_t row_hw = static_cast<std::int64_t>(g.in_w) * g.in_c;
    const std::int64_t row_dhw = static_cast<std::int64_t>(g.in_h) * row_hw;
    std::int64_t r = 0;
    for (int od = 0; od < g.out_d; ++od) {
        for (int oh = 0; oh < g.out_h; ++oh) {
            for (int ow = 0; ow < g.out_w; ++ow, ++r) {
                const S* src = col + r * krow;
                for (int z = 0; z < g.kd; ++z) {
                    const int id = od * g.sd - g.pd + z;
                    for (int y = 0; y < g.kh; ++y) {
                        const int ih = oh * g.sh - g.ph + y;
                        if (id < 0 || id >= g.in_d || ih < 0 || ih >= g.in_h) {
                            src += static_cast<std::int64_t>(g.kw) * g.in_c;
                            continue;
                        }
                        S* dst_row = x + id * row_dhw + ih * row_hw;
                        for (int xk = 0; xk < g.kw; ++xk) {
                            const int iw = ow * g.sw - g.pw + xk;
                            if (iw >= 0 && iw < g.in_w) {
                                S* dst = dst_row + iw * g.in_c;
                                for (int c = 0; c < g.in_c; ++c) dst[c] += src[c];
                            }
                            src += g.in_c;
                        }
                    }
                }
            }
        }
    }
}

}  // namespace stfall::nn
