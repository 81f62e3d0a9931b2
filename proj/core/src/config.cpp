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

#include "bfmlab/config.hpp"

#include <fstream>

namespace bfmlab
{

namespace
{

template <typename T>
void read_field(const nlohmann::json &j, const char *key, T &out)
{
    if (!j.contains(key))
        return;
    try
    {
        out = j.at(key).get<T>();
    }
    catch (const nlohmann::json::exception &e)
    {
        throw config_error(std::string("config: bad value for '") + key + "': " + e.what());
    }
}

} // namespace

std::string normalize_variant(std::string variant)
{
    if (variant == "cnn-convlstm")
        return "cnn_convlstm";
    return variant;
}

void RunConfig::set_seed(uint64_t seed)
{
    sim.seed = seed;
    train.seed = seed;
}

void RunConfig::validate_and_finalize()
{
    sim.validate_and_finalize();
    train.validate();
    variant = normalize_variant(variant);
    if (variant != "cnn" && variant != "cnn_convlstm")
        throw config_error("config: unknown model variant '" + variant + "'");
    const int k = static_cast<int>(sim.occupied_subcarriers.size());
    if (group_size < 1 || k % group_size != 0)
        throw config_error("config: group_size " + std::to_string(group_size) +
                           " does not divide the grid of " + std::to_string(k));
    for (int g : sweep_group_sizes)
        if (g < 1 || k % g != 0)
            throw config_error("config: sweep group size " + std::to_string(g) +
                               " does not divide the grid of " + std::to_string(k));
    if (precision != "f32" && precision != "f64")
        throw config_error("config: precision must be 'f32' or 'f64'");
    if (base_channels < 1)
        throw config_error("config: base_channels must be at least 1");
    if (out_dir.empty())
        throw config_error("config: out_dir must not be empty");
    if (profile.empty())
        throw config_error("config: profile must not be empty");
}

nlohmann::json RunConfig::to_json() const
{
    nlohmann::json j;
    j["sim"] = {{"n_tx", sim.n_tx},
                {"n_rx", sim.n_rx},
                {"carrier_freq_hz", sim.carrier_freq_hz},
                {"bandwidth_hz", sim.bandwidth_hz},
                {"fft_size", sim.fft_size},
                {"occupied_subcarriers", sim.occupied_subcarriers},
                {"n_samples", sim.n_samples}};
    j["train"] = {{"batch_size", train.batch_size},
                  {"learning_rate", train.learning_rate},
                  {"max_epochs", train.max_epochs},
                  {"patience", train.patience},
                  {"optimizer", train.optimizer}};
    j["seed"] = sim.seed;
    j["model"] = {{"variant", variant}, {"base_channels", base_channels}};
    j["group_size"] = group_size;
    j["sweep_group_sizes"] = sweep_group_sizes;
    j["out_dir"] = out_dir;
    j["profile"] = profile;
    j["precision"] = precision;
    return j;
}

RunConfig RunConfig::from_json(const nlohmann::json &j)
{
    RunConfig c;
    c.apply_json(j);
    return c;
}

void RunConfig::apply_json(const nlohmann::json &j)
{
    if (!j.is_object())
        throw config_error("config: document root must be a JSON object");
    RunConfig &c = *this;
    if (j.contains("sim"))
    {
        const auto &s = j.at("sim");
        if (!s.is_object())
            throw config_error("config: 'sim' must be an object");
        read_field(s, "n_tx", c.sim.n_tx);
        read_field(s, "n_rx", c.sim.n_rx);
        read_field(s, "carrier_freq_hz", c.sim.carrier_freq_hz);
        read_field(s, "bandwidth_hz", c.sim.bandwidth_hz);
        read_field(s, "fft_size", c.sim.fft_size);
        read_field(s, "occupied_subcarriers", c.sim.occupied_subcarriers);
        read_field(s, "n_samples", c.sim.n_samples);
    }
    if (j.contains("train"))
    {
        const auto &t = j.at("train");
        if (!t.is_object())
            throw config_error("config: 'train' must be an object");
        read_field(t, "batch_size", c.train.batch_size);
        read_field(t, "learning_rate", c.train.learning_rate);
        read_field(t, "max_epochs", c.train.max_epochs);
        read_field(t, "patience", c.train.patience);
        read_field(t, "optimizer", c.train.optimizer);
    }
    if (j.contains("model"))
    {
        const auto &m = j.at("model");
        if (!m.is_object())
            throw config_error("config: 'model' must be an object");
        read_field(m, "variant", c.variant);
        read_field(m, "base_channels", c.base_channels);
    }
    uint64_t seed = c.sim.seed;
    read_field(j, "seed", seed);
    c.set_seed(seed);
    read_field(j, "group_size", c.group_size);
    read_field(j, "sweep_group_sizes", c.sweep_group_sizes);
    read_field(j, "out_dir", c.out_dir);
    read_field(j, "profile", c.profile);
    read_field(j, "precision", c.precision);
}

RunConfig preset_config(const std::string &name)
{
    RunConfig c;
    if (name == "paper")
    {
        c.sim.n_samples = 10000;
        c.base_channels = 32;
        c.train.max_epochs = 200;
        return c;
    }
    if (name == "desk")
    {
        c.sim.n_samples = 1000;
        c.base_channels = 8;
        c.train.max_epochs = 40;
        return c;
    }
    throw config_error("config: unknown preset '" + name + "'");
}

RunConfig load_run_config(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw io_error("config: cannot open '" + path.string() + "'");
    nlohmann::json j;
    try
    {
        in >> j;
    }
    catch (const nlohmann::json::exception &e)
    {
        throw config_error("config: '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return RunConfig::from_json(j);
}

void save_run_config(const std::filesystem::path &path, const RunConfig &config)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw io_error("config: cannot open '" + path.string() + "' for writing");
    out << config.to_json().dump(2) << '\n';
    if (!out)
        throw io_error("config: write to '" + path.string() + "' failed");
}

} // namespace bfmlab
