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

#ifndef BFMLAB_CONFIG_HPP
#define BFMLAB_CONFIG_HPP

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bfmlab/channel.hpp"
#include "bfmlab/trainer.hpp"

namespace bfmlab
{

/// Full experiment description: simulation, training, model and output
/// settings. One seed feeds both the simulation and the training streams;
/// the purpose tag inside each stream id keeps the draws independent.
struct RunConfig
{
    SimConfig sim;
    TrainConfig train;
    std::string variant = "cnn"; // "cnn" or "cnn_convlstm"
    int group_size = 242;
    std::vector<int> sweep_group_sizes; // empty selects the divisor default
    std::string out_dir = "out";
    std::string profile = "model-b"; // built-in name or profile file path
    std::string precision = "f32";   // "f32" or "f64"
    int base_channels = 32;

    /// Sets the simulation and training seeds together.
    void set_seed(uint64_t seed);

    /// Validates every embedded section; finalizes the subcarrier grid.
    void validate_and_finalize();

    /// Overlays fields present in `j` onto the current values, so a config
    /// file can refine a preset.
    void apply_json(const nlohmann::json &j);

    nlohmann::json to_json() const;
    static RunConfig from_json(const nlohmann::json &j);
};

/// Accepts "cnn-convlstm" as an alias for "cnn_convlstm".
std::string normalize_variant(std::string variant);

/// Named parameter sets: "desk" is the CI-sized run (1,000 samples, base
/// width 8, at most 40 epochs), "paper" the full-scale run.
RunConfig preset_config(const std::string &name);

RunConfig load_run_config(const std::filesystem::path &path);
void save_run_config(const std::filesystem::path &path, const RunConfig &config);

} // namespace bfmlab

#endif
