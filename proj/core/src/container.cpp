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

#include "bfmlab/container.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <zlib.h>

#include "bfmlab/errors.hpp"

namespace bfmlab
{

namespace
{

void append_bytes(std::vector<uint8_t> &buf, const void *p, size_t n)
{
    const auto *b = static_cast<const uint8_t *>(p);
    buf.insert(buf.end(), b, b + n);
}

void append_u32(std::vector<uint8_t> &buf, uint32_t v)
{
    buf.push_back(static_cast<uint8_t>(v & 0xFF));
    buf.push_back(static_cast<uint8_t>((v >> 8) & 0xFF));
    buf.push_back(static_cast<uint8_t>((v >> 16) & 0xFF));
    buf.push_back(static_cast<uint8_t>((v >> 24) & 0xFF));
}

void append_u64(std::vector<uint8_t> &buf, uint64_t v)
{
    for (int shift = 0; shift < 64; shift += 8)
        buf.push_back(static_cast<uint8_t>((v >> shift) & 0xFF));
}

template <typename T>
void append_scalars(std::vector<uint8_t> &buf, const std::vector<T> &data)
{
    static_assert(std::endian::native == std::endian::little,
                  "container serialization assumes a little-endian host");
    append_bytes(buf, data.data(), data.size() * sizeof(T));
}

class Reader
{
  public:
    Reader(const uint8_t *data, size_t size) : data_(data), size_(size) {}

    size_t remaining() const { return size_ - pos_; }

    const uint8_t *take(size_t n)
    {
        if (remaining() < n)
            throw io_error("container: file is truncated");
        const uint8_t *p = data_ + pos_;
        pos_ += n;
        return p;
    }

    uint8_t u8() { return *take(1); }

    uint32_t u32()
    {
        const uint8_t *p = take(4);
        return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
               (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
    }

    uint64_t u64()
    {
        const uint8_t *p = take(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<uint64_t>(p[i]) << (8 * i);
        return v;
    }

  private:
    const uint8_t *data_;
    size_t size_;
    size_t pos_ = 0;
};

uint32_t crc_of(const uint8_t *data, size_t size)
{
    return static_cast<uint32_t>(crc32_z(crc32(0L, Z_NULL, 0), data, size));
}

} // namespace

TensorBlock TensorBlock::from_f32(std::vector<uint32_t> dims, std::vector<float> data)
{
    TensorBlock b;
    b.dtype = 1;
    b.dims = std::move(dims);
    b.f32 = std::move(data);
    return b;
}

TensorBlock TensorBlock::from_f64(std::vector<uint32_t> dims, std::vector<double> data)
{
    TensorBlock b;
    b.dtype = 2;
    b.dims = std::move(dims);
    b.f64 = std::move(data);
    return b;
}

uint64_t TensorBlock::count() const
{
    uint64_t n = 1;
    for (uint32_t d : dims)
        n *= d;
    return n;
}

void save_container(const std::filesystem::path &path, const Container &c)
{
    if (c.magic.size() != 4)
        throw config_error("container: magic must be exactly 4 bytes");

    std::vector<uint8_t> buf;
    append_bytes(buf, c.magic.data(), 4);
    append_u32(buf, c.schema_version);

    const std::string manifest = c.manifest.dump();
    append_u64(buf, manifest.size());
    append_bytes(buf, manifest.data(), manifest.size());

    for (const TensorBlock &t : c.tensors)
    {
        if (t.dtype != 1 && t.dtype != 2)
            throw config_error("container: unsupported tensor dtype " + std::to_string(t.dtype));
        const uint64_t n = t.count();
        const uint64_t stored = t.dtype == 1 ? t.f32.size() : t.f64.size();
        if (n != stored)
            throw config_error("container: tensor dims imply " + std::to_string(n) +
                               " elements but payload has " + std::to_string(stored));
        if (t.dims.size() > 255)
            throw config_error("container: tensor rank exceeds 255");

        buf.push_back(t.dtype);
        buf.push_back(static_cast<uint8_t>(t.dims.size()));
        for (uint32_t d : t.dims)
            append_u32(buf, d);
        if (t.dtype == 1)
            append_scalars(buf, t.f32);
        else
            append_scalars(buf, t.f64);
    }

    append_u32(buf, crc_of(buf.data(), buf.size()));

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw io_error("container: cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char *>(buf.data()),
              static_cast<std::streamsize>(buf.size()));
    if (!out)
        throw io_error("container: short write to " + path.string());
}

Container load_container(const std::filesystem::path &path, std::string_view expected_magic)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw io_error("container: cannot open " + path.string());
    std::vector<uint8_t> buf((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
    if (!in.good() && !in.eof())
        throw io_error("container: read failure on " + path.string());

    // magic + version + manifest length + checksum is the smallest valid file
    if (buf.size() < 4 + 4 + 8 + 4)
        throw io_error("container: " + path.string() + " is too small to be valid");

    Reader tail(buf.data() + buf.size() - 4, 4);
    const uint32_t stored_crc = tail.u32();
    const uint32_t actual_crc = crc_of(buf.data(), buf.size() - 4);
    if (stored_crc != actual_crc)
        throw io_error("container: checksum mismatch in " + path.string());

    Reader r(buf.data(), buf.size() - 4);

    Container c;
    const uint8_t *magic = r.take(4);
    c.magic.assign(reinterpret_cast<const char *>(magic), 4);
    if (c.magic != expected_magic)
        throw io_error("container: " + path.string() + " has magic '" + c.magic +
                       "', expected '" + std::string(expected_magic) + "'");

    c.schema_version = r.u32();
    if (c.schema_version != container_schema_version)
        throw io_error("container: " + path.string() + " has schema version " +
                       std::to_string(c.schema_version) + ", expected " +
                       std::to_string(container_schema_version));

    const uint64_t manifest_len = r.u64();
    if (manifest_len > r.remaining())
        throw io_error("container: file is truncated");
    const uint8_t *mp = r.take(manifest_len);
    try
    {
        c.manifest = nlohmann::json::parse(mp, mp + manifest_len);
    }
    catch (const nlohmann::json::parse_error &e)
    {
        throw io_error("container: invalid manifest JSON in " + path.string() + ": " + e.what());
    }

    while (r.remaining() > 0)
    {
        TensorBlock t;
        t.dtype = r.u8();
        if (t.dtype != 1 && t.dtype != 2)
            throw io_error("container: unsupported tensor dtype " + std::to_string(t.dtype));
        const uint8_t rank = r.u8();
        t.dims.resize(rank);
        for (uint8_t i = 0; i < rank; ++i)
            t.dims[i] = r.u32();

        const uint64_t n = t.count();
        const uint64_t elem_size = t.dtype == 1 ? 4 : 8;
        if (n > r.remaining() / elem_size)
            throw io_error("container: file is truncated");
        const uint8_t *payload = r.take(n * elem_size);
        static_assert(std::endian::native == std::endian::little,
                      "container deserialization assumes a little-endian host");
        if (t.dtype == 1)
        {
            t.f32.resize(n);
            std::memcpy(t.f32.data(), payload, n * 4);
        }
        else
        {
            t.f64.resize(n);
            std::memcpy(t.f64.data(), payload, n * 8);
        }
        c.tensors.push_back(std::move(t));
    }
    return c;
}

} // namespace bfmlab
