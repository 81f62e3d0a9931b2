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
// ConvLSTM layer scanning the frequency axis as the recurrent sequence.
// Gate transforms are 1-d convolutions along the antenna axis. The
// input-to-gate convolution has no cross-frequency extent, so it runs as
// one fused convolution over the whole sequence; the hidden-to-gate
// convolution runs per step. Gate packing along the channel axis is
// [input, forget, cell, output].

#ifndef BFMLAB_NN_CONVLSTM_HPP
#define BFMLAB_NN_CONVLSTM_HPP

#include <string>
#include <vector>

#include "bfmlab/nn/layers.hpp"

namespace bfmlab
{

template <typename T>
class ConvLstmLayer
{
  public:
    ConvLstmLayer() = default;

    ConvLstmLayer(std::string path, int f_seq, int a, int c_in, int hidden, int ka)
        : path_(std::move(path)), f_seq_(f_seq), a_(a), c_in_(c_in), h_(hidden), ka_(ka),
          xconv_(path_, f_seq, a, c_in, 4 * hidden, 1, ka, false, "wx", "b"),
          geom_h_(same_geom(a, 1, ka, 1)), wh_({ka, hidden, 4 * hidden}),
          gwh_({ka, hidden, 4 * hidden})
    {
    }

    const std::string &path() const { return path_; }
    int hidden() const { return h_; }

    void params(std::vector<ParamRef<T>> &out)
    {
        xconv_.params(out);
        // the shared gate bias initializes with the forget slice at +1
        out.back().kind = InitKind::lstm_bias;
        out.back().aux = h_;
        out.push_back({path_ + "/wh", &wh_, &gwh_, InitKind::fan_in_uniform,
                       static_cast<int64_t>(ka_) * h_, 0});
    }

    const Tensor<T> &forward(const Tensor<T> &x)
    {
        if (x.rank() != 4 || x.dim(1) != f_seq_ || x.dim(2) != a_ || x.dim(3) != c_in_)
            throw config_error(path_ + ": unexpected input shape");
        const int batch = x.dim(0);
        const Tensor<T> &zx = xconv_.forward(x);

        y_ = Tensor<T>({batch, f_seq_, a_, h_});
        steps_.assign(static_cast<size_t>(f_seq_), StepCache{});
        Tensor<T> h({batch, a_, h_});
        Tensor<T> c({batch, a_, h_});

        const int64_t state_plane = static_cast<int64_t>(batch) * a_ * h_;
        z_ = Tensor<T>({batch, a_, 4 * h_});
        col_.resize(static_cast<size_t>(geom_h_.rows() * geom_h_.cols(h_)));

        for (int t = 0; t < f_seq_; ++t)
        {
            StepCache &sc = steps_[static_cast<size_t>(t)];
            sc.h_prev = h;

            // z = zx[:, t] + conv_antenna(h_prev; wh); bias already in zx
            for (int b = 0; b < batch; ++b)
                for (int ai = 0; ai < a_; ++ai)
                    for (int u = 0; u < 4 * h_; ++u)
                        z_[(static_cast<int64_t>(b) * a_ + ai) * 4 * h_ + u] =
                            zx.at4(b, t, ai, u);
            hconv_forward(h, z_);

            sc.gates = Tensor<T>({batch, a_, 4 * h_});
            sc.c = Tensor<T>({batch, a_, h_});
            sc.tanh_c = Tensor<T>({batch, a_, h_});
            for (int64_t p = 0; p < state_plane; ++p)
            {
                const int64_t row = p / h_;
                const int64_t u = p % h_;
                const int64_t zb = row * 4 * h_;
                const T gi = sigmoid(z_[zb + u]);
                const T gf = sigmoid(z_[zb + h_ + u]);
                const T gg = std::tanh(z_[zb + 2 * h_ + u]);
                const T go = sigmoid(z_[zb + 3 * h_ + u]);
                sc.gates[zb + u] = gi;
                sc.gates[zb + h_ + u] = gf;
                sc.gates[zb + 2 * h_ + u] = gg;
                sc.gates[zb + 3 * h_ + u] = go;
                const T cn = gf * c[p] + gi * gg;
                sc.c[p] = cn;
                sc.tanh_c[p] = std::tanh(cn);
                h[p] = go * sc.tanh_c[p];
            }
            c = sc.c;
            for (int b = 0; b < batch; ++b)
                for (int ai = 0; ai < a_; ++ai)
                    for (int u = 0; u < h_; ++u)
                        y_.at4(b, t, ai, u) = h[(static_cast<int64_t>(b) * a_ + ai) * h_ + u];
        }
        return y_;
    }

    const Tensor<T> &backward(const Tensor<T> &dy)
    {
        if (!dy.same_shape(y_))
            throw config_error(path_ + ": gradient shape mismatch");
        const int batch = dy.dim(0);
        const int64_t state_plane = static_cast<int64_t>(batch) * a_ * h_;

        Tensor<T> dzx({batch, f_seq_, a_, 4 * h_});
        Tensor<T> dh({batch, a_, h_});
        Tensor<T> dc({batch, a_, h_});
        Tensor<T> dz({batch, a_, 4 * h_});
        Tensor<T> dh_conv({batch, a_, h_});
        gwh_.fill(T(0));

        for (int t = f_seq_ - 1; t >= 0; --t)
        {
            const StepCache &sc = steps_[static_cast<size_t>(t)];
            const Tensor<T> &c_prev =
                t > 0 ? steps_[static_cast<size_t>(t - 1)].c : zero_state(batch);

            for (int b = 0; b < batch; ++b)
                for (int ai = 0; ai < a_; ++ai)
                    for (int u = 0; u < h_; ++u)
                        dh[(static_cast<int64_t>(b) * a_ + ai) * h_ + u] += dy.at4(b, t, ai, u);

            for (int64_t p = 0; p < state_plane; ++p)
            {
                const int64_t row = p / h_;
                const int64_t u = p % h_;
                const int64_t zb = row * 4 * h_;
                const T gi = sc.gates[zb + u];
                const T gf = sc.gates[zb + h_ + u];
                const T gg = sc.gates[zb + 2 * h_ + u];
                const T go = sc.gates[zb + 3 * h_ + u];
                const T tc = sc.tanh_c[p];

                const T d_out = dh[p] * tc;
                const T dct = dc[p] + dh[p] * go * (T(1) - tc * tc);
                const T d_in = dct * gg;
                const T d_forget = dct * c_prev[p];
                const T d_cell = dct * gi;
                dc[p] = dct * gf;

                dz[zb + u] = d_in * gi * (T(1) - gi);
                dz[zb + h_ + u] = d_forget * gf * (T(1) - gf);
                dz[zb + 2 * h_ + u] = d_cell * (T(1) - gg * gg);
                dz[zb + 3 * h_ + u] = d_out * go * (T(1) - go);
            }

            for (int b = 0; b < batch; ++b)
                for (int ai = 0; ai < a_; ++ai)
                    for (int u = 0; u < 4 * h_; ++u)
                        dzx.at4(b, t, ai, u) = dz[(static_cast<int64_t>(b) * a_ + ai) * 4 * h_ + u];

            hconv_backward(sc.h_prev, dz, dh_conv);
            dh = dh_conv;
        }
        dx_ = xconv_.backward(dzx);
        return dx_;
    }

  private:
    struct StepCache
    {
        Tensor<T> gates;  // (B, A, 4H) post-activation, packed [i, f, g, o]
        Tensor<T> c;      // (B, A, H)
        Tensor<T> tanh_c; // (B, A, H)
        Tensor<T> h_prev; // (B, A, H)
    };

    static T sigmoid(T v) { return T(1) / (T(1) + std::exp(-v)); }

    const Tensor<T> &zero_state(int batch)
    {
        if (zero_.rank() != 3 || zero_.dim(0) != batch)
            zero_ = Tensor<T>({batch, a_, h_});
        return zero_;
    }

    // z += conv over the antenna axis of h (kernel ka, same padding)
    void hconv_forward(const Tensor<T> &h, Tensor<T> &z)
    {
        const int batch = h.dim(0);
        const int64_t rows = geom_h_.rows();
        const int64_t cols = geom_h_.cols(h_);
        Eigen::Map<const RowMat<T>> whm(wh_.data(), cols, 4 * h_);
        for (int b = 0; b < batch; ++b)
        {
            im2col(geom_h_, h.data() + static_cast<int64_t>(b) * a_ * h_, h_, col_.data());
            Eigen::Map<const RowMat<T>> p(col_.data(), rows, cols);
            Eigen::Map<RowMat<T>> zm(z.data() + static_cast<int64_t>(b) * a_ * 4 * h_, rows,
                                     4 * h_);
            zm.noalias() += p * whm;
        }
    }

    // accumulate gwh and write the gradient reaching h_prev into dh_out
    void hconv_backward(const Tensor<T> &h_prev, const Tensor<T> &dz, Tensor<T> &dh_out)
    {
        const int batch = h_prev.dim(0);
        const int64_t rows = geom_h_.rows();
        const int64_t cols = geom_h_.cols(h_);
        dcol_.resize(static_cast<size_t>(rows * cols));
        dh_out.fill(T(0));
        Eigen::Map<const RowMat<T>> whm(wh_.data(), cols, 4 * h_);
        Eigen::Map<RowMat<T>> gwhm(gwh_.data(), cols, 4 * h_);
        for (int b = 0; b < batch; ++b)
        {
            im2col(geom_h_, h_prev.data() + static_cast<int64_t>(b) * a_ * h_, h_, col_.data());
            Eigen::Map<const RowMat<T>> p(col_.data(), rows, cols);
            Eigen::Map<const RowMat<T>> dzm(dz.data() + static_cast<int64_t>(b) * a_ * 4 * h_,
                                            rows, 4 * h_);
            gwhm.noalias() += p.transpose() * dzm;

            Eigen::Map<RowMat<T>> dp(dcol_.data(), rows, cols);
            dp.noalias() = dzm * whm.transpose();
            col2im(geom_h_, dcol_.data(), h_, dh_out.data() + static_cast<int64_t>(b) * a_ * h_);
        }
    }

    std::string path_;
    int f_seq_ = 0, a_ = 0, c_in_ = 0, h_ = 0, ka_ = 2;
    Conv2d<T> xconv_;
    ConvGeom geom_h_;
    Tensor<T> wh_, gwh_;
    Tensor<T> y_, dx_, z_, zero_;
    std::vector<StepCache> steps_;
    std::vector<T> col_, dcol_;
};

} // namespace bfmlab

#endif
