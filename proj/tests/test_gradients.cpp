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
// Finite-difference verification of every backward pass. The f64 runs pin
// the math to 1e-6; the f32 runs re-check the same formulas at the scalar
// type's noise level with a 1e-3 bound. ReLU stages are piecewise linear,
// so central differences are exact unless a probe steps across a kink;
// fd_check differences at two step sizes and skips probes that straddle
// one, and each check asserts that probes survived the screening.

#include <cmath>
#include <type_traits>
#include <vector>

#include <doctest.h>

#include "bfmlab/nn/convlstm.hpp"
#include "bfmlab/nn/layers.hpp"
#include "bfmlab/nn/loss.hpp"
#include "bfmlab/nn/network.hpp"

#include "testutil.hpp"

using namespace bfmlab;

namespace
{

template <typename T>
struct FdBudget;

template <>
struct FdBudget<double>
{
    static constexpr double eps = 1e-5;
    static constexpr double floor = 1e-8;
    static constexpr double threshold = 1e-6;
    static constexpr double kink_tol = 1e-6;
};

template <>
struct FdBudget<float>
{
    static constexpr double eps = 5e-3;
    static constexpr double floor = 1.0;
    static constexpr double threshold = 1e-3;
    static constexpr double kink_tol = 1e-3;
};

template <typename T>
std::vector<std::vector<T>> grad_copies(const std::vector<ParamRef<T>> &params)
{
    std::vector<std::vector<T>> out;
    for (const auto &p : params)
        out.push_back(p.grad->vec());
    return out;
}

/// FD-checks the input gradient and every parameter gradient of a layer
/// whose forward pass is re-runnable through `loss_of`.
template <typename T, typename Fn>
void check_layer(Tensor<T> &x, const Tensor<T> &dx, std::vector<ParamRef<T>> params,
                 Fn &&loss_of, int max_probes = 200, double eps = FdBudget<T>::eps)
{
    using B = FdBudget<T>;
    int checked = 0;
    const double worst_x = testutil::fd_check(x, dx.vec(), loss_of, eps, B::floor, B::kink_tol,
                                              max_probes, &checked);
    INFO("input gradient");
    CHECK_LT(worst_x, B::threshold);
    CHECK_GT(checked, 0);

    const auto grads = grad_copies(params);
    for (size_t i = 0; i < params.size(); ++i)
    {
        const double worst = testutil::fd_check(*params[i].value, grads[i], loss_of, eps,
                                                B::floor, B::kink_tol, max_probes, &checked);
        INFO("parameter ", params[i].path);
        CHECK_LT(worst, B::threshold);
        CHECK_GT(checked, 0);
    }
}

/// The masked mse recomputed in long double from the network output, so the
/// probe readout is not quantized to T. The summand matches masked_mse.
template <typename T>
double wide_masked_mse(const Tensor<T> &y, const Tensor<T> &label,
                       const std::vector<uint8_t> &mask)
{
    const int batch = y.dim(0);
    const int f = y.dim(1);
    const int plane = y.dim(2) * y.dim(3);
    int64_t valid_bins = 0;
    for (uint8_t m : mask)
        valid_bins += m ? 1 : 0;
    const int64_t count = static_cast<int64_t>(batch) * valid_bins * plane;
    long double acc = 0.0L;
    for (int b = 0; b < batch; ++b)
        for (int k = 0; k < f; ++k)
        {
            if (!mask[static_cast<size_t>(k)])
                continue;
            const int64_t base = (static_cast<int64_t>(b) * f + k) * plane;
            for (int i = 0; i < plane; ++i)
            {
                const T d = y[base + i] - label[base + i];
                acc += static_cast<long double>(d) * static_cast<long double>(d);
            }
        }
    return static_cast<double>(acc / static_cast<long double>(count));
}

template <typename T>
void conv2d_case(uint64_t salt)
{
    Conv2d<T> conv("conv", 8, 4, 3, 5, 6, 2, true);
    std::vector<ParamRef<T>> params;
    conv.params(params);
    RandomStream s(salt, stream_id(StreamPurpose::weight_init, salt));
    for (auto &p : params)
        testutil::fill_uniform(*p.value, s, -0.5, 0.5);

    Tensor<T> x({2, 8, 4, 3});
    testutil::fill_gaussian(x, s);
    const Tensor<T> proj = testutil::projection_like(conv.forward(x), salt);
    const Tensor<T> &dx = conv.backward(proj);

    check_layer(x, dx, params,
                [&]() { return testutil::dot(proj, conv.forward(x)); });
}

template <typename T>
void tconv_case(uint64_t salt)
{
    ConvTranspose2d<T> tconv("tconv", 4, 4, 6, 3, 6, 2, true);
    std::vector<ParamRef<T>> params;
    tconv.params(params);
    RandomStream s(salt, stream_id(StreamPurpose::weight_init, salt));
    for (auto &p : params)
        testutil::fill_uniform(*p.value, s, -0.5, 0.5);

    Tensor<T> x({2, 4, 4, 6});
    testutil::fill_gaussian(x, s);
    const Tensor<T> proj = testutil::projection_like(tconv.forward(x), salt);
    const Tensor<T> &dx = tconv.backward(proj);

    check_layer(x, dx, params,
                [&]() { return testutil::dot(proj, tconv.forward(x)); });
}

template <typename T>
void batchnorm_case(uint64_t salt)
{
    BatchNorm<T> bn("bn", 5);
    std::vector<ParamRef<T>> params;
    bn.params(params);
    RandomStream s(salt, stream_id(StreamPurpose::weight_init, salt));
    testutil::fill_uniform(*params[0].value, s, 0.5, 1.5); // gamma away from zero
    testutil::fill_uniform(*params[1].value, s, -0.5, 0.5);

    Tensor<T> x({3, 4, 2, 5});
    testutil::fill_gaussian(x, s);
    const Tensor<T> proj = testutil::projection_like(bn.forward(x, Mode::train), salt);
    const Tensor<T> &dx = bn.backward(proj);

    // Running statistics move on every forward but never feed the
    // train-mode output, so the repeated evaluations stay consistent.
    check_layer(x, dx, params,
                [&]() { return testutil::dot(proj, bn.forward(x, Mode::train)); });
}

template <typename T>
void convlstm_case(uint64_t salt)
{
    ConvLstmLayer<T> lstm("lstm", 6, 4, 3, 4, 2);
    std::vector<ParamRef<T>> params;
    lstm.params(params);
    RandomStream s(salt, stream_id(StreamPurpose::weight_init, salt));
    for (auto &p : params)
        testutil::fill_uniform(*p.value, s, -0.5, 0.5);

    Tensor<T> x({2, 6, 4, 3});
    testutil::fill_gaussian(x, s);
    const Tensor<T> proj = testutil::projection_like(lstm.forward(x), salt);
    const Tensor<T> &dx = lstm.backward(proj);

    check_layer(x, dx, params,
                [&]() { return testutil::dot(proj, lstm.forward(x)); }, 120);
}

/// Full-network check in train mode through the masked MSE, covering the
/// concat/skip routing, dropout masks, and batch norm statistics jointly.
template <typename T>
void network_case(const std::string &variant, int n_blocks, int f_pad, uint64_t seed,
                  int max_probes)
{
    ModelSpec spec;
    spec.variant = variant;
    spec.n_blocks = n_blocks;
    spec.base_channels = 2;
    spec.convlstm_hidden = 3;
    spec.f_pad = f_pad;
    Network<T> net(spec);
    net.init_params(seed);

    // Zero-initialized biases put the relu pre-activation of an all-zero
    // input patch exactly on the kink, where a central difference measures
    // the mean of the two one-sided slopes no matter how small the step.
    // Moving just the biases clearly off zero removes that degenerate point
    // without inflating the activation scale.
    RandomStream ps(seed, stream_id(StreamPurpose::weight_init, 999));
    for (auto &p : net.params())
        if (p.kind == InitKind::zeros)
            for (int64_t i = 0; i < p.value->size(); ++i)
            {
                const double u = ps.next_unit();
                (*p.value)[i] += static_cast<T>(u < 0.5 ? -0.05 + 0.03 * u : 0.02 + 0.03 * u);
            }

    Tensor<T> x({2, f_pad, 4, 2});
    Tensor<T> label({2, f_pad, 4, 1});
    RandomStream s(seed, stream_id(StreamPurpose::noise, 77));
    testutil::fill_gaussian(x, s);
    testutil::fill_gaussian(label, s);
    std::vector<uint8_t> mask(static_cast<size_t>(f_pad), 0);
    for (int k = 0; k < 3 * f_pad / 4; ++k)
        mask[static_cast<size_t>(k)] = 1;

    // Rebuilding the stream per evaluation reproduces the dropout masks
    // exactly, so the loss is a deterministic function of x and params.
    auto loss_of = [&]() {
        RandomStream drop(seed, stream_id(StreamPurpose::dropout, 0));
        const Tensor<T> &y = net.forward(x, Mode::train, &drop);
        return wide_masked_mse(y, label, mask);
    };

    RandomStream drop(seed, stream_id(StreamPurpose::dropout, 0));
    const Tensor<T> &y = net.forward(x, Mode::train, &drop);
    const LossResult<T> loss = masked_mse(y, label, mask);
    const Tensor<T> dx = net.backward(loss.grad);

    // A parameter probe shifts every pre-activation it feeds, so the
    // nearest relu crossing sits much closer than in the single-layer
    // cases; the probe step stays below that spacing in both precisions.
    const double eps = std::is_same_v<T, float> ? 1e-4 : FdBudget<T>::eps;
    check_layer(x, dx, net.params(), loss_of, max_probes, eps);
}

} // namespace

TEST_CASE("conv2d gradients agree with finite differences")
{
    conv2d_case<double>(1);
    conv2d_case<float>(2);
}

TEST_CASE("transposed convolution gradients agree with finite differences")
{
    tconv_case<double>(3);
    tconv_case<float>(4);
}

TEST_CASE("transposed convolution is the exact adjoint of the reference convolution")
{
    // <tconv(x), z> must equal <x, ref(z)> where ref is the stride-(2, 1)
    // gather convolution over the same geometry and weights. The reference
    // side is recomputed here with plain loops.
    const int f_in = 4, a = 4, c_in = 6, c_out = 3, kf = 6, ka = 2;
    ConvTranspose2d<double> tconv("adjoint", f_in, a, c_in, c_out, kf, ka, false);
    std::vector<ParamRef<double>> params;
    tconv.params(params);
    RandomStream s(55, stream_id(StreamPurpose::weight_init, 55));
    testutil::fill_uniform(*params[0].value, s, -0.5, 0.5);
    params[1].value->fill(0.0); // bias would break the bilinear identity

    Tensor<double> x({1, f_in, a, c_in});
    Tensor<double> z({1, 2 * f_in, a, c_out});
    testutil::fill_gaussian(x, s);
    testutil::fill_gaussian(z, s);

    const Tensor<double> &y = tconv.forward(x);
    const double lhs = testutil::dot(y, z);

    ConvGeom g;
    g.f_img = 2 * f_in;
    g.a_img = a;
    g.f_out = f_in;
    g.a_out = a;
    g.kf = kf;
    g.ka = ka;
    g.sf = 2;
    g.pf = (kf - 1) / 2;
    g.pa = (ka - 1) / 2;
    std::vector<double> patches(static_cast<size_t>(g.rows() * g.cols(c_out)));
    im2col(g, z.data(), c_out, patches.data());

    const Tensor<double> &w = *params[0].value; // (kf, ka, c_out, c_in)
    double rhs = 0.0;
    const int64_t cols = g.cols(c_out);
    for (int64_t row = 0; row < g.rows(); ++row)
        for (int ci = 0; ci < c_in; ++ci)
        {
            double acc = 0.0;
            for (int64_t col = 0; col < cols; ++col)
                acc += patches[static_cast<size_t>(row * cols + col)] * w[col * c_in + ci];
            rhs += acc * x[row * c_in + ci];
        }

    CHECK_EQ(lhs, doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("max pool gradients agree with finite differences")
{
    auto pool_case = [](auto tag, uint64_t salt) {
        using T = decltype(tag);
        MaxPool2x1<T> pool("pool");
        Tensor<T> x({2, 8, 3, 4});
        RandomStream s(salt, stream_id(StreamPurpose::noise, salt));
        testutil::fill_gaussian(x, s);
        const Tensor<T> proj = testutil::projection_like(pool.forward(x), salt);
        const Tensor<T> &dx = pool.backward(proj);
        int checked = 0;
        const double worst = testutil::fd_check(
            x, dx.vec(), [&]() { return testutil::dot(proj, pool.forward(x)); },
            FdBudget<T>::eps, FdBudget<T>::floor, FdBudget<T>::kink_tol, 200, &checked);
        CHECK_LT(worst, FdBudget<T>::threshold);
        CHECK_GT(checked, 0);
    };
    pool_case(double{}, 5);
    pool_case(float{}, 6);
}

TEST_CASE("max pool routes tied gradients to the first index")
{
    MaxPool2x1<double> pool("pool");
    Tensor<double> x({1, 2, 1, 2});
    x[0] = 5.0; // f0, channel 0
    x[1] = 1.0; // f0, channel 1
    x[2] = 5.0; // f1, channel 0: exact tie
    x[3] = 2.0; // f1, channel 1: second wins

    const Tensor<double> &y = pool.forward(x);
    CHECK_EQ(y[0], 5.0);
    CHECK_EQ(y[1], 2.0);

    Tensor<double> dy({1, 1, 1, 2});
    dy[0] = 10.0;
    dy[1] = 20.0;
    const Tensor<double> &dx = pool.backward(dy);
    CHECK_EQ(dx[0], 10.0);
    CHECK_EQ(dx[1], 0.0);
    CHECK_EQ(dx[2], 0.0);
    CHECK_EQ(dx[3], 20.0);
}

TEST_CASE("batch norm train-mode gradients agree with finite differences")
{
    batchnorm_case<double>(7);
    batchnorm_case<float>(8);
}

TEST_CASE("dropout gradients agree with finite differences under a fixed mask")
{
    Dropout<double> drop("drop", 0.5);
    Tensor<double> x({2, 4, 3, 4});
    RandomStream s(9, stream_id(StreamPurpose::noise, 9));
    testutil::fill_gaussian(x, s);

    auto mask_stream = []() { return RandomStream(3, stream_id(StreamPurpose::dropout, 12)); };
    RandomStream first = mask_stream();
    const Tensor<double> proj = testutil::projection_like(drop.forward(x, Mode::train, &first), 9);
    const Tensor<double> &dx = drop.backward(proj);

    int64_t zeros = 0;
    for (int64_t i = 0; i < dx.size(); ++i)
        zeros += dx[i] == 0.0 ? 1 : 0;
    CHECK_GT(zeros, 0); // the mask actually dropped something

    const double worst = testutil::fd_check(
        x, dx.vec(),
        [&]() {
            RandomStream stream = mask_stream();
            return testutil::dot(proj, drop.forward(x, Mode::train, &stream));
        },
        1e-5, 1e-8, 1e-6, 200);
    CHECK_LT(worst, 1e-6);

    // Infer mode is the identity.
    const Tensor<double> &y = drop.forward(x, Mode::infer, nullptr);
    CHECK_EQ(y.vec(), x.vec());
}

TEST_CASE("convlstm gradients agree with finite differences")
{
    convlstm_case<double>(10);
    convlstm_case<float>(11);
}

TEST_CASE("full network gradients agree with finite differences")
{
    // One block exercises the skip concat and transposed convolution;
    // three blocks add dropout and batch norm to the path.
    network_case<double>("cnn", 1, 16, 101, 60);
    network_case<double>("cnn", 3, 32, 102, 40);
    network_case<double>("cnn_convlstm", 1, 16, 103, 60);
    network_case<float>("cnn", 3, 32, 104, 40);
    network_case<float>("cnn_convlstm", 1, 16, 105, 60);
}

TEST_CASE("backward is linear in the output gradient")
{
    Conv2d<double> conv("lin", 8, 4, 2, 3, 6, 2, true);
    std::vector<ParamRef<double>> params;
    conv.params(params);
    RandomStream s(20, stream_id(StreamPurpose::weight_init, 20));
    for (auto &p : params)
        testutil::fill_uniform(*p.value, s, -0.5, 0.5);
    Tensor<double> x({2, 8, 4, 2});
    testutil::fill_gaussian(x, s);

    const Tensor<double> proj = testutil::projection_like(conv.forward(x), 20);

    Tensor<double> zero(proj.shape());
    conv.backward(zero);
    for (const auto &p : params)
        for (int64_t i = 0; i < p.grad->size(); ++i)
            CHECK_EQ((*p.grad)[i], 0.0);

    conv.forward(x);
    conv.backward(proj);
    const auto g1 = grad_copies(params);
    conv.backward(proj); // rerun overwrites, never accumulates
    CHECK_EQ(grad_copies(params), g1);

    Tensor<double> doubled = proj;
    for (int64_t i = 0; i < doubled.size(); ++i)
        doubled[i] *= 2.0;
    conv.backward(doubled);
    const auto g2 = grad_copies(params);
    for (size_t t = 0; t < g1.size(); ++t)
        for (size_t i = 0; i < g1[t].size(); ++i)
            CHECK_EQ(g2[t][i], doctest::Approx(2.0 * g1[t][i]).epsilon(1e-12));
}
