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

#include "bfmlab/rng.hpp"

#include <cmath>

namespace bfmlab
{

namespace
{

constexpr uint32_t kMult0 = 0xD2511F53u;
constexpr uint32_t kMult1 = 0xCD9E8D57u;
constexpr uint32_t kWeyl0 = 0x9E3779B9u;
constexpr uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(uint32_t a, uint32_t b, uint32_t &hi, uint32_t &lo)
{
    uint64_t p = static_cast<uint64_t>(a) * b;
    hi = static_cast<uint32_t>(p >> 32);
    lo = static_cast<uint32_t>(p);
}

inline void round_once(std::array<uint32_t, 4> &c, const std::array<uint32_t, 2> &k)
{
    uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMult0, c[0], hi0, lo0);
    mulhilo(kMult1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

} // namespace

std::array<uint32_t, 4> Philox4x32::block(const std::array<uint32_t, 4> &counter,
                                          const std::array<uint32_t, 2> &key)
{
    std::array<uint32_t, 4> c = counter;
    std::array<uint32_t, 2> k = key;
    round_once(c, k);
    for (int r = 1; r < 10; ++r)
    {
        k[0] += kWeyl0;
        k[1] += kWeyl1;
        round_once(c, k);
    }
    return c;
}

RandomStream::RandomStream(uint64_t seed, uint64_t stream)
    : key_{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32)},
      stream_(stream)
{
}

void RandomStream::refill()
{
    std::array<uint32_t, 4> counter = {
        static_cast<uint32_t>(block_index_),
        static_cast<uint32_t>(block_index_ >> 32),
        static_cast<uint32_t>(stream_),
        static_cast<uint32_t>(stream_ >> 32),
    };
    buf_ = Philox4x32::block(counter, key_);
    ++block_index_;
    buf_pos_ = 0;
}

uint32_t RandomStream::next_u32()
{
    if (buf_pos_ >= 4)
        refill();
    return buf_[buf_pos_++];
}

uint64_t RandomStream::next_u64()
{
    uint64_t lo = next_u32();
    uint64_t hi = next_u32();
    return (hi << 32) | lo;
}

double RandomStream::next_unit()
{
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RandomStream::next_gaussian()
{
    if (have_cached_gaussian_)
    {
        have_cached_gaussian_ = false;
        return cached_gaussian_;
    }
    // Box-Muller; u1 shifted into (0, 1] so the log is finite.
    double u1 = 1.0 - next_unit();
    double u2 = next_unit();
    double radius = std::sqrt(-2.0 * std::log(u1));
    double angle = 6.283185307179586476925286766559 * u2;
    cached_gaussian_ = radius * std::sin(angle);
    have_cached_gaussian_ = true;
    return radius * std::cos(angle);
}

} // namespace bfmlab
