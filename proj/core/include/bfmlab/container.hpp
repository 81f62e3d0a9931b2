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
// Binary container shared by dataset and checkpoint files.
//
// Layout, all integers little-endian:
//
//   bytes 0..3    magic ("BFMC" for datasets, "BFMW" for checkpoints)
//   bytes 4..7    u32 schema version
//   bytes 8..15   u64 manifest length in bytes
//   ...           UTF-8 JSON manifest (keys serialized in sorted order)
//   ...           zero or more tensor blocks:
//                   u8  dtype (1 = float32, 2 = float64)
//                   u8  rank
//                   u32 dims[rank]
//                   payload (dtype size * product of dims bytes)
//   last 4 bytes  u32 CRC-32 (zlib polynomial) of every preceding byte
//
// Tensor blocks carry no names; the manifest defines what each block
// means and in which order the blocks appear.

#ifndef BFMLAB_CONTAINER_HPP
#define BFMLAB_CONTAINER_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace bfmlab
{

inline constexpr uint32_t container_schema_version = 1;
inline constexpr std::string_view dataset_magic = "BFMC";
inline constexpr std::string_view checkpoint_magic = "BFMW";

struct TensorBlock
{
    uint8_t dtype = 1; // 1 = float32, 2 = float64
    std::vector<uint32_t> dims;
    std::vector<float> f32;
    std::vector<double> f64;

    static TensorBlock from_f32(std::vector<uint32_t> dims, std::vector<float> data);
    static TensorBlock from_f64(std::vector<uint32_t> dims, std::vector<double> data);

    /// Number of scalar elements implied by the dims.
    uint64_t count() const;
};

struct Container
{
    std::string magic;
    uint32_t schema_version = container_schema_version;
    nlohmann::json manifest;
    std::vector<TensorBlock> tensors;
};

/// Serialize and write a container, including the trailing checksum.
/// Throws io_error when the file cannot be written and config_error when
/// the container is malformed (bad magic length, dims/payload mismatch).
void save_container(const std::filesystem::path &path, const Container &c);

/// Read and validate a container file. Checks, in order: readability,
/// minimum size, checksum, magic, schema version, manifest bounds and
/// JSON validity, tensor block bounds. Every violation throws io_error.
Container load_container(const std::filesystem::path &path, std::string_view expected_magic);

} // namespace bfmlab

#endif
