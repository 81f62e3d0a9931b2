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

#ifndef BFMLAB_RNG_HPP
#define BFMLAB_RNG_HPP

#include <array>
#include <cstdint>

namespace bfmlab
{

/// Counter-based Philox 4x32-10 block generator. A (key, counter) pair maps
/// to four 32-bit words, so any stream position can be computed directly
/// without sequential state. The key is derived from a 64-bit seed, the
/// counter from a 64-bit stream id plus a 64-bit block index, which makes
/// draws independent of evaluation order and thread count.
struct Philox4x32
{
    static std::array<uint32_t, 4> block(const std::array<uint32_t, 4> &counter,
                                         const std::array<uint32_t, 2> &key);
};

/// Stream-id namespaces. Each logical purpose gets a disjoint id range so
/// that, e.g., channel draws and weight initialization never share blocks.
enum class StreamPurpose : uint64_t
{
    channel = 1,
    noise = 2,
    weight_init = 3,
    shuffle = 4,
    dropout = 5,
};

constexpr uint64_t stream_id(StreamPurpose purpose, uint64_t index)
{
    return (static_cast<uint64_t>(purpose) << 56) | (index & 0x00FFFFFFFFFFFFFFull);
}

/// Sequential view over one Philox stream: u32/u64 words, doubles in [0,1),
/// and standard Gaussians via Box-Muller.
class RandomStream
{
public:
    RandomStream(uint64_t seed, uint64_t stream);

    uint32_t next_u32();
    uint64_t next_u64();

    /// Uniform double in [0, 1) with 53 random bits.
    double next_unit();

    /// Standard normal N(0, 1).
    double next_gaussian();

private:
    void refill();

    std::array<uint32_t, 2> key_;
    uint64_t stream_;
    uint64_t block_index_ = 0;
    std::array<uint32_t, 4> buf_{};
    int buf_pos_ = 4;
    double cached_gaussian_ = 0.0;
    bool have_cached_gaussian_ = false;
};

} // namespace bfmlab

#endif
