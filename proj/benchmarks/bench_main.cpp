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

#include <benchmark/benchmark.h>

#include "bfmlab/bfm.hpp"
#include "bfmlab/channel.hpp"
#include "bfmlab/nn/layers.hpp"

namespace
{

using namespace bfmlab;

SimConfig bench_config()
{
    SimConfig c;
    c.n_samples = 1;
    c.validate_and_finalize();
    return c;
}

void bm_channel_realization(benchmark::State &state)
{
    const SimConfig config = bench_config();
    const ChannelProfile profile = load_profile("model-b");
    uint64_t index = 0;
    for (auto _ : state)
    {
        const ChannelRealization r = draw_realization(profile, config, index++);
        const CsiTensor csi = to_frequency_response(r, config);
        benchmark::DoNotOptimize(csi.h.data());
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(bm_channel_realization);

void bm_svd_2x2(benchmark::State &state)
{
    const SimConfig config = bench_config();
    const ChannelProfile profile = load_profile("model-b");
    const ChannelRealization r = draw_realization(profile, config, 7);
    const CsiTensor csi = to_frequency_response(r, config);
    int k = 0;
    for (auto _ : state)
    {
        const SvdResult s = svd(csi.matrix(k));
        benchmark::DoNotOptimize(s.v.data());
        k = (k + 1) % csi.n_subcarriers();
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(bm_svd_2x2);

void bm_bfm_tensor(benchmark::State &state)
{
    const SimConfig config = bench_config();
    const ChannelProfile profile = load_profile("model-b");
    const ChannelRealization r = draw_realization(profile, config, 7);
    const CsiTensor csi = to_frequency_response(r, config);
    for (auto _ : state)
    {
        const BfmTensor bfm = compute_bfm(csi);
        benchmark::DoNotOptimize(bfm.v.data());
    }
    state.SetItemsProcessed(state.iterations() * csi.n_subcarriers());
}
BENCHMARK(bm_bfm_tensor);

template <typename T>
void bm_conv_forward(benchmark::State &state)
{
    const int batch = static_cast<int>(state.range(0));
    Conv2d<T> conv("bench/conv", 256, 4, 32, 32, 6, 2, true);
    RandomStream stream(1, stream_id(StreamPurpose::weight_init, 0));
    std::vector<ParamRef<T>> params;
    conv.params(params);
    for (ParamRef<T> &p : params)
        for (int64_t i = 0; i < p.value->size(); ++i)
            (*p.value)[i] = static_cast<T>(stream.next_gaussian() * 0.05);
    Tensor<T> x({batch, 256, 4, 32});
    for (int64_t i = 0; i < x.size(); ++i)
        x[i] = static_cast<T>(stream.next_gaussian());
    for (auto _ : state)
    {
        const Tensor<T> &y = conv.forward(x);
        benchmark::DoNotOptimize(y.data());
    }
    state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK_TEMPLATE(bm_conv_forward, float)->Arg(1)->Arg(16);
BENCHMARK_TEMPLATE(bm_conv_forward, double)->Arg(16);

template <typename T>
void bm_conv_backward(benchmark::State &state)
{
    const int batch = static_cast<int>(state.range(0));
    Conv2d<T> conv("bench/conv", 256, 4, 32, 32, 6, 2, true);
    RandomStream stream(1, stream_id(StreamPurpose::weight_init, 0));
    std::vector<ParamRef<T>> params;
    conv.params(params);
    for (ParamRef<T> &p : params)
        for (int64_t i = 0; i < p.value->size(); ++i)
            (*p.value)[i] = static_cast<T>(stream.next_gaussian() * 0.05);
    Tensor<T> x({batch, 256, 4, 32});
    for (int64_t i = 0; i < x.size(); ++i)
        x[i] = static_cast<T>(stream.next_gaussian());
    const Tensor<T> &y = conv.forward(x);
    Tensor<T> dy(y.shape());
    for (int64_t i = 0; i < dy.size(); ++i)
        dy[i] = static_cast<T>(stream.next_gaussian());
    for (auto _ : state)
    {
        const Tensor<T> &dx = conv.backward(dy);
        benchmark::DoNotOptimize(dx.data());
    }
    state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK_TEMPLATE(bm_conv_backward, float)->Arg(16);

} // namespace
