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

#include "bfmlab/model_spec.hpp"

#include "bfmlab/errors.hpp"

namespace bfmlab
{

int ModelSpec::block_channels(int b) const
{
    return base_channels << (b - 1);
}

int ModelSpec::bottleneck_channels() const
{
    return n_blocks == 0 ? base_channels : block_channels(n_blocks);
}

void ModelSpec::validate() const
{
    if (variant != "cnn" && variant != "cnn_convlstm")
        throw config_error("model spec: unknown variant '" + variant + "'");
    if (n_blocks < 0 || n_blocks > 16)
        throw config_error("model spec: n_blocks out of range");
    if (base_channels < 1 || (n_blocks >= 1 && base_channels % 2 != 0))
        throw config_error("model spec: base_channels must be even when blocks are present");
    if (f_pad < 1 || f_pad % (1 << n_blocks) != 0)
        throw config_error("model spec: f_pad " + std::to_string(f_pad) +
                           " is not divisible by 2^" + std::to_string(n_blocks));
    if (kernel_freq < 1 || kernel_ant < 1)
        throw config_error("model spec: kernel extents must be positive");
    if (pool_freq != 2 || pool_ant != 1)
        throw config_error("model spec: only (2, 1) pooling is supported");
    if (dropout_rate < 0.0 || dropout_rate >= 1.0)
        throw config_error("model spec: dropout rate must lie in [0, 1)");
    if (convlstm_hidden < 1 || convlstm_layers < 1)
        throw config_error("model spec: ConvLSTM sizes must be positive");
    if (n_antenna < 1 || in_channels < 1)
        throw config_error("model spec: input plane must be nonempty");
}

nlohmann::json ModelSpec::to_json() const
{
    return nlohmann::json{
        {"variant", variant},
        {"n_blocks", n_blocks},
        {"base_channels", base_channels},
        {"kernel_freq", kernel_freq},
        {"kernel_ant", kernel_ant},
        {"pool_freq", pool_freq},
        {"pool_ant", pool_ant},
        {"dropout_rate", dropout_rate},
        {"convlstm_hidden", convlstm_hidden},
        {"convlstm_layers", convlstm_layers},
        {"f_pad", f_pad},
        {"n_antenna", n_antenna},
        {"in_channels", in_channels},
    };
}

ModelSpec ModelSpec::from_json(const nlohmann::json &j)
{
    ModelSpec s;
    try
    {
        s.variant = j.at("variant").get<std::string>();
        s.n_blocks = j.at("n_blocks").get<int>();
        s.base_channels = j.at("base_channels").get<int>();
        s.kernel_freq = j.at("kernel_freq").get<int>();
        s.kernel_ant = j.at("kernel_ant").get<int>();
        s.pool_freq = j.at("pool_freq").get<int>();
        s.pool_ant = j.at("pool_ant").get<int>();
        s.dropout_rate = j.at("dropout_rate").get<double>();
        s.convlstm_hidden = j.at("convlstm_hidden").get<int>();
        s.convlstm_layers = j.at("convlstm_layers").get<int>();
        s.f_pad = j.at("f_pad").get<int>();
        s.n_antenna = j.at("n_antenna").get<int>();
        s.in_channels = j.at("in_channels").get<int>();
    }
    catch (const nlohmann::json::exception &e)
    {
        throw config_error(std::string("model spec: missing or malformed field: ") + e.what());
    }
    s.validate();
    return s;
}

ModelSpec make_model_spec(const std::string &variant, int f_pad, int group_size, int n_antenna,
                          int base_channels)
{
    ModelSpec s;
    s.variant = variant;
    s.base_channels = base_channels;
    s.f_pad = f_pad;
    s.n_antenna = n_antenna;
    if (group_size == 1)
    {
        s.n_blocks = 0;
        s.kernel_freq = 1;
    }
    s.validate();
    return s;
}

} // namespace bfmlab
