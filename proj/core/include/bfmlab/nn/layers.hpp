// SPDX-License-Identifier: Apache-2.0
//
// bfmlab - channel state recomposition from beamforming feedback
// Copyright (C) 2026 the bfmlab authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------
//
// Hand-written layers over (batch, frequency, antenna, channel) tensors.
// Convolutions run as im2col + GEMM per batch element; the transposed
// convolution is the exact adjoint of a stride-2 reference convolution,
// sharing the same index geometry, so the forward/backward pair stays
// consistent by construction.

#ifndef BFMLAB_NN_LAYERS_HPP
#define BFMLAB_NN_LAYERS_HPP

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bfmlab/errors.hpp"
#include "bfmlab/rng.hpp"
#include "bfmlab/tensor.hpp"

namespace bfmlab
{

enum class Mode
{
    train,
    infer
};

/// How a parameter is filled at initialization time.
enum class InitKind
{
    fan_in_uniform, // U(-sqrt(6/fan_in), +sqrt(6/fan_in))
    zeros,
    ones,
    lstm_bias // zeros with the forget-gate slice [aux, 2*aux) set to +1
};

template <typename T>
struct ParamRef
{
    std::string path;
    Tensor<T> *value = nullptr;
    Tensor<T> *grad = nullptr; // null for non-trainable state (running stats)
    InitKind kind = InitKind::zeros;
    int64_t fan_in = 0;
    int aux = 0;
};

template <typename T>
void check_finite(const Tensor<T> &t, const std::string &path)
{
    for (int64_t i = 0; i < t.size(); ++i)
        if (!std::isfinite(t[i]))
            throw numeric_error("non-finite value in " + path);
}

// ---------------------------------------------------------------------------
// Convolution index geometry, shared by the direct and transposed paths.
// The "image" is the larger grid, the "patch" grid is the reference
// convolution's output. Positions falling outside the image are zeros on
// gather and dropped on scatter, which implements both same-padding and
// output cropping with one rule.
// ---------------------------------------------------------------------------
struct ConvGeom
{
    int f_img = 0, a_img = 0;
    int f_out = 0, a_out = 0;
    int kf = 1, ka = 1;
    int sf = 1, sa = 1;
    int pf = 0, pa = 0; // leading pads

    int64_t rows() const { return static_cast<int64_t>(f_out) * a_out; }
    int64_t cols(int channels) const { return static_cast<int64_t>(kf) * ka * channels; }
};

/// Stride-1 same-padding geometry; even kernels pad one short at the front,
/// matching the convention where the extra pad goes to the trailing edge.
inline ConvGeom same_geom(int f, int a, int kf, int ka)
{
    ConvGeom g;
    g.f_img = f;
    g.a_img = a;
    g.f_out = f;
    g.a_out = a;
    g.kf = kf;
    g.ka = ka;
    g.pf = (kf - 1) / 2;
    g.pa = (ka - 1) / 2;
    return g;
}

template <typename T>
void im2col(const ConvGeom &g, const T *img, int ch, T *mat)
{
    T *out = mat;
    for (int fo = 0; fo < g.f_out; ++fo)
        for (int ao = 0; ao < g.a_out; ++ao)
            for (int fi = 0; fi < g.kf; ++fi)
            {
                const int fs = fo * g.sf - g.pf + fi;
                for (int ai = 0; ai < g.ka; ++ai)
                {
                    const int as = ao * g.sa - g.pa + ai;
                    if (fs >= 0 && fs < g.f_img && as >= 0 && as < g.a_img)
                    {
                        const T *src = img + (static_cast<int64_t>(fs) * g.a_img + as) * ch;
                        for (int c = 0; c < ch; ++c)
                            out[c] = src[c];
                    }
                    else
                    {
                        for (int c = 0; c < ch; ++c)
                            out[c] = T(0);
                    }
                    out += ch;
                }
            }
}

/// Adjoint of im2col: scatter-add the patch matrix back onto the image.
/// The caller zeroes the image first.
template <typename T>
void col2im(const ConvGeom &g, const T *mat, int ch, T *img)
{
    const T *in = mat;
    for (int fo = 0; fo < g.f_out; ++fo)
        for (int ao = 0; ao < g.a_out; ++ao)
            for (int fi = 0; fi < g.kf; ++fi)
            {
                const int fs = fo * g.sf - g.pf + fi;
                for (int ai = 0; ai < g.ka; ++ai)
                {
                    const int as = ao * g.sa - g.pa + ai;
                    if (fs >= 0 && fs < g.f_img && as >= 0 && as < g.a_img)
                    {
                        T *dst = img + (static_cast<int64_t>(fs) * g.a_img + as) * ch;
                        for (int c = 0; c < ch; ++c)
                            dst[c] += in[c];
                    }
                    in += ch;
                }
            }
}

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using RowVec = Eigen::Matrix<T, 1, Eigen::Dynamic>;

// ---------------------------------------------------------------------------
// Direct convolution, stride 1, same padding, optional fused ReLU.
// Weights are (kf, ka, c_in, c_out); flattened they form the (kf*ka*c_in,
// c_out) GEMM factor.
// ---------------------------------------------------------------------------
template <typename T>
class Conv2d
{
  public:
    Conv2d() = default;

    Conv2d(std::string path, int f, int a, int c_in, int c_out, int kf, int ka, bool relu,
           std::string w_suffix = "w", std::string b_suffix = "b")
        : path_(std::move(path)), w_suffix_(std::move(w_suffix)), b_suffix_(std::move(b_suffix)),
          c_in_(c_in), c_out_(c_out), relu_(relu), geom_(same_geom(f, a, kf, ka)),
          w_({kf, ka, c_in, c_out}), b_({c_out}), gw_({kf, ka, c_in, c_out}), gb_({c_out})
    {
    }

    const std::string &path() const { return path_; }
    int out_channels() const { return c_out_; }

    void params(std::vector<ParamRef<T>> &out)
    {
        out.push_back({path_ + "/" + w_suffix_, &w_, &gw_, InitKind::fan_in_uniform,
                       static_cast<int64_t>(geom_.kf) * geom_.ka * c_in_, 0});
        out.push_back({path_ + "/" + b_suffix_, &b_, &gb_, InitKind::zeros, 0, 0});
    }

    const Tensor<T> &forward(const Tensor<T> &x)
    {
        expect_input(x);
        x_ = &x;
        const int batch = x.dim(0);
        y_ = Tensor<T>({batch, geom_.f_out, geom_.a_out, c_out_});

        const int64_t rows = geom_.rows();
        const int64_t cols = geom_.cols(c_in_);
        col_.resize(static_cast<size_t>(rows * cols));

        Eigen::Map<const RowMat<T>> wm(w_.data(), cols, c_out_);
        Eigen::Map<const RowVec<T>> bias(b_.data(), c_out_);
        const int64_t in_stride = x.size() / batch;
        const int64_t out_stride = y_.size() / batch;
        for (int bidx = 0; bidx < batch; ++bidx)
        {
            im2col(geom_, x.data() + bidx * in_stride, c_in_, col_.data());
            Eigen::Map<const RowMat<T>> p(col_.data(), rows, cols);
            Eigen::Map<RowMat<T>> ym(y_.data() + bidx * out_stride, rows, c_out_);
            ym.noalias() = p * wm;
            ym.rowwise() += bias;
        }
        if (relu_)
            for (int64_t i = 0; i < y_.size(); ++i)
                y_[i] = y_[i] > T(0) ? y_[i] : T(0);
        return y_;
    }

    const Tensor<T> &backward(const Tensor<T> &dy)
    {
        if (!dy.same_shape(y_))
            throw config_error(path_ + ": gradient shape mismatch");
        const Tensor<T> &dye = relu_ ? relu_grad(dy) : dy;

        const int batch = y_.dim(0);
        const int64_t rows = geom_.rows();
        const int64_t cols = geom_.cols(c_in_);
        col_.resize(static_cast<size_t>(rows * cols));
        dcol_.resize(static_cast<size_t>(rows * cols));

        gw_.fill(T(0));
        gb_.fill(T(0));
        dx_ = Tensor<T>(x_->shape());

        Eigen::Map<const RowMat<T>> wm(w_.data(), cols, c_out_);
        Eigen::Map<RowMat<T>> gwm(gw_.data(), cols, c_out_);
        const int64_t in_stride = x_->size() / batch;
        const int64_t out_stride = y_.size() / batch;
        for (int bidx = 0; bidx < batch; ++bidx)
        {
            const T *dyp = dye.data() + bidx * out_stride;
            Eigen::Map<const RowMat<T>> dym(dyp, rows, c_out_);
            im2col(geom_, x_->data() + bidx * in_stride, c_in_, col_.data());
            Eigen::Map<const RowMat<T>> p(col_.data(), rows, cols);
            gwm.noalias() += p.transpose() * dym;
            // Bias gradients are summed in a fixed scalar order; a vectorized
            // reduction would round differently depending on buffer alignment
            // and break bitwise reproducibility of training.
            for (int64_t r = 0; r < rows; ++r)
                for (int ch = 0; ch < c_out_; ++ch)
                    gb_[ch] += dyp[r * c_out_ + ch];

            Eigen::Map<RowMat<T>> dp(dcol_.data(), rows, cols);
            dp.noalias() = dym * wm.transpose();
            col2im(geom_, dcol_.data(), c_in_, dx_.data() + bidx * in_stride);
        }
        return dx_;
    }

  private:
    void expect_input(const Tensor<T> &x) const
    {
        if (x.rank() != 4 || x.dim(1) != geom_.f_img || x.dim(2) != geom_.a_img ||
            x.dim(3) != c_in_)
            throw config_error(path_ + ": unexpected input shape");
    }

    const Tensor<T> &relu_grad(const Tensor<T> &dy)
    {
        dye_ = dy;
        for (int64_t i = 0; i < dye_.size(); ++i)
            if (!(y_[i] > T(0)))
                dye_[i] = T(0);
        return dye_;
    }

    std::string path_, w_suffix_, b_suffix_;
    int c_in_ = 0, c_out_ = 0;
    bool relu_ = false;
    ConvGeom geom_;
    Tensor<T> w_, b_, gw_, gb_;
    Tensor<T> y_, dx_, dye_;
    const Tensor<T> *x_ = nullptr;
    std::vector<T> col_, dcol_;
};

// ---------------------------------------------------------------------------
// Transposed convolution that doubles the frequency axis. Defined as the
// adjoint of a reference convolution with stride (2, 1), kernel (kf, ka)
// and pads (2, 0): forward scatters via col2im, backward gathers via
// im2col. Weights are (kf, ka, c_out, c_in); note c_out sits in the
// reference convolution's input slot.
// ---------------------------------------------------------------------------
template <typename T>
class ConvTranspose2d
{
  public:
    ConvTranspose2d() = default;

    ConvTranspose2d(std::string path, int f_in, int a, int c_in, int c_out, int kf, int ka,
                    bool relu)
        : path_(std::move(path)), c_in_(c_in), c_out_(c_out), relu_(relu),
          w_({kf, ka, c_out, c_in}), b_({c_out}), gw_({kf, ka, c_out, c_in}), gb_({c_out})
    {
        geom_.f_img = 2 * f_in;
        geom_.a_img = a;
        geom_.f_out = f_in;
        geom_.a_out = a;
        geom_.kf = kf;
        geom_.ka = ka;
        geom_.sf = 2;
        geom_.sa = 1;
        geom_.pf = (kf - 1) / 2;
        geom_.pa = (ka - 1) / 2;
    }

    const std::string &path() const { return path_; }

    void params(std::vector<ParamRef<T>> &out)
    {
        out.push_back({path_ + "/w", &w_, &gw_, InitKind::fan_in_uniform,
                       static_cast<int64_t>(geom_.kf) * geom_.ka * c_in_, 0});
        out.push_back({path_ + "/b", &b_, &gb_, InitKind::zeros, 0, 0});
    }

    const Tensor<T> &forward(const Tensor<T> &x)
    {
        if (x.rank() != 4 || x.dim(1) != geom_.f_out || x.dim(2) != geom_.a_out ||
            x.dim(3) != c_in_)
            throw config_error(path_ + ": unexpected input shape");
        x_ = &x;
        const int batch = x.dim(0);
        y_ = Tensor<T>({batch, geom_.f_img, geom_.a_img, c_out_});

        const int64_t rows = geom_.rows();
        const int64_t cols = geom_.cols(c_out_);
        col_.resize(static_cast<size_t>(rows * cols));

        Eigen::Map<const RowMat<T>> wm(w_.data(), cols, c_in_);
        Eigen::Map<const RowVec<T>> bias(b_.data(), c_out_);
        const int64_t in_stride = x.size() / batch;
        const int64_t out_stride = y_.size() / batch;
        for (int bidx = 0; bidx < batch; ++bidx)
        {
            Eigen::Map<const RowMat<T>> xm(x.data() + bidx * in_stride, rows, c_in_);
            Eigen::Map<RowMat<T>> cm(col_.data(), rows, cols);
            cm.noalias() = xm * wm.transpose();
            col2im(geom_, col_.data(), c_out_, y_.data() + bidx * out_stride);

            Eigen::Map<RowMat<T>> ym(y_.data() + bidx * out_stride,
                                     static_cast<int64_t>(geom_.f_img) * geom_.a_img, c_out_);
            ym.rowwise() += bias;
        }
        if (relu_)
            for (int64_t i = 0; i < y_.size(); ++i)
                y_[i] = y_[i] > T(0) ? y_[i] : T(0);
        return y_;
    }

    const Tensor<T> &backward(const Tensor<T> &dy)
    {
        if (!dy.same_shape(y_))
            throw config_error(path_ + ": gradient shape mismatch");
        const Tensor<T> &dye = relu_ ? relu_grad(dy) : dy;

        const int batch = y_.dim(0);
        const int64_t rows = geom_.rows();
        const int64_t cols = geom_.cols(c_out_);
        col_.resize(static_cast<size_t>(rows * cols));

        gw_.fill(T(0));
        gb_.fill(T(0));
        dx_ = Tensor<T>(x_->shape());

        Eigen::Map<const RowMat<T>> wm(w_.data(), cols, c_in_);
        Eigen::Map<RowMat<T>> gwm(gw_.data(), cols, c_in_);
        const int64_t in_stride = x_->size() / batch;
        const int64_t out_stride = y_.size() / batch;
        for (int bidx = 0; bidx < batch; ++bidx)
        {
            // Fixed scalar order for the same reason as in Conv2d::backward.
            const T *dyp = dye.data() + bidx * out_stride;
            const int64_t pixels = static_cast<int64_t>(geom_.f_img) * geom_.a_img;
            for (int64_t r = 0; r < pixels; ++r)
                for (int ch = 0; ch < c_out_; ++ch)
                    gb_[ch] += dyp[r * c_out_ + ch];

            im2col(geom_, dye.data() + bidx * out_stride, c_out_, col_.data());
            Eigen::Map<const RowMat<T>> pdy(col_.data(), rows, cols);
            Eigen::Map<const RowMat<T>> xm(x_->data() + bidx * in_stride, rows, c_in_);
            gwm.noalias() += pdy.transpose() * xm;

            Eigen::Map<RowMat<T>> dxm(dx_.data() + bidx * in_stride, rows, c_in_);
            dxm.noalias() = pdy * wm;
        }
        return dx_;
    }

  private:
    const Tensor<T> &relu_grad(const Tensor<T> &dy)
    {
        dye_ = dy;
        for (int64_t i = 0; i < dye_.size(); ++i)
            if (!(y_[i] > T(0)))
                dye_[i] = T(0);
        return dye_;
    }

    std::string path_;
    int c_in_ = 0, c_out_ = 0;
    bool relu_ = false;
    ConvGeom geom_;
    Tensor<T> w_, b_, gw_, gb_;
    Tensor<T> y_, dx_, dye_;
    const Tensor<T> *x_ = nullptr;
    std::vector<T> col_;
};

// ---------------------------------------------------------------------------
// Max-pool (2, 1) on the frequency axis; ties resolve to the first index.
// ---------------------------------------------------------------------------
template <typename T>
class MaxPool2x1
{
  public:
    MaxPool2x1() = default;
    explicit MaxPool2x1(std::string path) : path_(std::move(path)) {}

    const Tensor<T> &forward(const Tensor<T> &x)
    {
        if (x.rank() != 4 || x.dim(1) % 2 != 0)
            throw config_error(path_ + ": frequency axis must be even");
        in_shape_ = x.shape();
        const int batch = x.dim(0), f = x.dim(1), a = x.dim(2), c = x.dim(3);
        y_ = Tensor<T>({batch, f / 2, a, c});
        arg_.assign(static_cast<size_t>(y_.size()), 0);

        const int64_t plane = static_cast<int64_t>(a) * c;
        for (int b = 0; b < batch; ++b)
            for (int fo = 0; fo < f / 2; ++fo)
            {
                const T *r0 = x.data() + ((static_cast<int64_t>(b) * f + 2 * fo) * plane);
                const T *r1 = r0 + plane;
                T *dst = y_.data() + ((static_cast<int64_t>(b) * (f / 2) + fo) * plane);
                uint8_t *am = arg_.data() + ((static_cast<int64_t>(b) * (f / 2) + fo) * plane);
                for (int64_t i = 0; i < plane; ++i)
                {
                    if (r0[i] >= r1[i])
                    {
                        dst[i] = r0[i];
                        am[i] = 0;
                    }
                    else
                    {
                        dst[i] = r1[i];
                        am[i] = 1;
                    }
                }
            }
        return y_;
    }

    const Tensor<T> &backward(const Tensor<T> &dy)
    {
        if (!dy.same_shape(y_))
            throw config_error(path_ + ": gradient shape mismatch");
        dx_ = Tensor<T>(in_shape_);
        const int batch = in_shape_[0], f = in_shape_[1], a = in_shape_[2], c = in_shape_[3];
        const int64_t plane = static_cast<int64_t>(a) * c;
        for (int b = 0; b < batch; ++b)
            for (int fo = 0; fo < f / 2; ++fo)
            {
                const int64_t src = (static_cast<int64_t>(b) * (f / 2) + fo) * plane;
                T *d0 = dx_.data() + (static_cast<int64_t>(b) * f + 2 * fo) * plane;
                for (int64_t i = 0; i < plane; ++i)
                    (arg_[static_cast<size_t>(src + i)] == 0 ? d0[i] : d0[plane + i]) = dy[src + i];
            }
        return dx_;
    }

  private:
    std::string path_;
    std::vector<int> in_shape_;
    Tensor<T> y_, dx_;
    std::vector<uint8_t> arg_;
};

// ---------------------------------------------------------------------------
// Per-channel batch normalization over (batch, frequency, antenna), biased
// variance, running statistics with momentum 0.9 for inference.
// ---------------------------------------------------------------------------
template <typename T>
class BatchNorm
{
  public:
    BatchNorm() = default;

    BatchNorm(std::string path, int channels)
        : path_(std::move(path)), c_(channels), gamma_({channels}), beta_({channels}),
          ggamma_({channels}), gbeta_({channels}), running_mean_({channels}),
          running_var_({channels}), inv_std_({channels})
    {
        gamma_.fill(T(1));
        running_var_.fill(T(1));
    }

    void params(std::vector<ParamRef<T>> &out)
    {
        out.push_back({path_ + "/gamma", &gamma_, &ggamma_, InitKind::ones, 0, 0});
        out.push_back({path_ + "/beta", &beta_, &gbeta_, InitKind::zeros, 0, 0});
    }

    void states(std::vector<ParamRef<T>> &out)
    {
        out.push_back({path_ + "/running_mean", &running_mean_, nullptr, InitKind::zeros, 0, 0});
        out.push_back({path_ + "/running_var", &running_var_, nullptr, InitKind::ones, 0, 0});
    }

    const Tensor<T> &forward(const Tensor<T> &x, Mode mode)
    {
        if (x.rank() != 4 || x.dim(3) != c_)
            throw config_error(path_ + ": unexpected input shape");
        const int64_t n = x.size() / c_;
        y_ = Tensor<T>(x.shape());

        if (mode == Mode::train)
        {
            n_ = n;
            xhat_ = Tensor<T>(x.shape());
            std::vector<T> mean(static_cast<size_t>(c_), T(0));
            std::vector<T> var(static_cast<size_t>(c_), T(0));
            for (int64_t i = 0; i < x.size(); ++i)
                mean[static_cast<size_t>(i % c_)] += x[i];
            for (int ch = 0; ch < c_; ++ch)
                mean[static_cast<size_t>(ch)] /= static_cast<T>(n);
            for (int64_t i = 0; i < x.size(); ++i)
            {
                const T d = x[i] - mean[static_cast<size_t>(i % c_)];
                var[static_cast<size_t>(i % c_)] += d * d;
            }
            for (int ch = 0; ch < c_; ++ch)
            {
                var[static_cast<size_t>(ch)] /= static_cast<T>(n);
                inv_std_[ch] = T(1) / std::sqrt(var[static_cast<size_t>(ch)] + eps_);
                running_mean_[ch] = momentum_ * running_mean_[ch] +
                                    (T(1) - momentum_) * mean[static_cast<size_t>(ch)];
                running_var_[ch] = momentum_ * running_var_[ch] +
                                   (T(1) - momentum_) * var[static_cast<size_t>(ch)];
            }
            for (int64_t i = 0; i < x.size(); ++i)
            {
                const int ch = static_cast<int>(i % c_);
                xhat_[i] = (x[i] - mean[static_cast<size_t>(ch)]) * inv_std_[ch];
                y_[i] = gamma_[ch] * xhat_[i] + beta_[ch];
            }
        }
        else
        {
            for (int64_t i = 0; i < x.size(); ++i)
            {
                const int ch = static_cast<int>(i % c_);
                const T is = T(1) / std::sqrt(running_var_[ch] + eps_);
                y_[i] = gamma_[ch] * (x[i] - running_mean_[ch]) * is + beta_[ch];
            }
        }
        return y_;
    }

    /// Valid after a train-mode forward; differentiates through the batch
    /// statistics.
    const Tensor<T> &backward(const Tensor<T> &dy)
    {
        if (!dy.same_shape(y_))
            throw config_error(path_ + ": gradient shape mismatch");
        dx_ = Tensor<T>(dy.shape());
        std::vector<T> sum_dy(static_cast<size_t>(c_), T(0));
        std::vector<T> sum_dy_xhat(static_cast<size_t>(c_), T(0));
        for (int64_t i = 0; i < dy.size(); ++i)
        {
            const auto ch = static_cast<size_t>(i % c_);
            sum_dy[ch] += dy[i];
            sum_dy_xhat[ch] += dy[i] * xhat_[i];
        }
        for (int ch = 0; ch < c_; ++ch)
        {
            ggamma_[ch] = sum_dy_xhat[static_cast<size_t>(ch)];
            gbeta_[ch] = sum_dy[static_cast<size_t>(ch)];
        }
        const T inv_n = T(1) / static_cast<T>(n_);
        for (int64_t i = 0; i < dy.size(); ++i)
        {
            const int ch = static_cast<int>(i % c_);
            dx_[i] = gamma_[ch] * inv_std_[ch] *
                     (dy[i] - inv_n * sum_dy[static_cast<size_t>(ch)] -
                      xhat_[i] * inv_n * sum_dy_xhat[static_cast<size_t>(ch)]);
        }
        return dx_;
    }

  private:
    std::string path_;
    int c_ = 0;
    T eps_ = T(1e-5);
    T momentum_ = T(0.9);
    Tensor<T> gamma_, beta_, ggamma_, gbeta_;
    Tensor<T> running_mean_, running_var_;
    Tensor<T> inv_std_;
    Tensor<T> xhat_, y_, dx_;
    int64_t n_ = 0;
};

// ---------------------------------------------------------------------------
// Inverted dropout; identity in infer mode. The mask comes from an explicit
// stream so batches are reproducible.
// ---------------------------------------------------------------------------
template <typename T>
class Dropout
{
  public:
    Dropout() = default;
    Dropout(std::string path, double rate) : path_(std::move(path)), rate_(rate)
    {
        if (rate_ < 0.0 || rate_ >= 1.0)
            throw config_error(path_ + ": dropout rate must lie in [0, 1)");
    }

    const Tensor<T> &forward(const Tensor<T> &x, Mode mode, RandomStream *stream)
    {
        y_ = x;
        active_ = mode == Mode::train && rate_ > 0.0;
        if (!active_)
            return y_;
        if (stream == nullptr)
            throw config_error(path_ + ": train-mode dropout needs a random stream");
        mask_ = Tensor<T>(x.shape());
        const T keep_scale = T(1.0 / (1.0 - rate_));
        for (int64_t i = 0; i < x.size(); ++i)
        {
            mask_[i] = stream->next_unit() >= rate_ ? keep_scale : T(0);
            y_[i] = x[i] * mask_[i];
        }
        return y_;
    }

    const Tensor<T> &backward(const Tensor<T> &dy)
    {
        dx_ = dy;
        if (active_)
            for (int64_t i = 0; i < dx_.size(); ++i)
                dx_[i] *= mask_[i];
        return dx_;
    }

  private:
    std::string path_;
    double rate_ = 0.0;
    bool active_ = false;
    Tensor<T> mask_, y_, dx_;
};

} // namespace bfmlab

#endif
