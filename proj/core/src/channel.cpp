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

#include "bfmlab/channel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "bfmlab/errors.hpp"

namespace bfmlab
{

namespace
{

constexpr double kTwoPi = 6.283185307179586476925286766559;

ChannelProfile normalize(ChannelProfile p)
{
    if (p.taps.empty())
        throw config_error("channel profile has no taps");
    if (p.taps.front().delay_ns != 0.0)
        throw config_error("first tap delay must be 0 ns in profile '" + p.name + "'");
    for (size_t i = 1; i < p.taps.size(); ++i)
        if (p.taps[i].delay_ns <= p.taps[i - 1].delay_ns)
            throw config_error("tap delays must be strictly increasing in profile '" + p.name + "'");

    p.powers.resize(p.taps.size());
    double total = 0.0;
    for (size_t i = 0; i < p.taps.size(); ++i)
    {
        p.powers[i] = std::pow(10.0, p.taps[i].power_db / 10.0);
        total += p.powers[i];
    }
    for (double &w : p.powers)
        w /= total;
    return p;
}

ChannelProfile parse_profile_text(const std::string &name, std::istream &in)
{
    ChannelProfile p;
    p.name = name;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line))
    {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        std::istringstream row(line);
        double delay_ns, power_db;
        if (!(row >> delay_ns))
            continue; // blank or comment-only line
        if (!(row >> power_db))
            throw io_error("profile '" + name + "' line " + std::to_string(line_no) +
                           ": expected 'delay_ns<TAB>power_db'");
        p.taps.push_back({delay_ns, power_db});
    }
    return normalize(std::move(p));
}

std::string profile_search_dir()
{
    if (const char *env = std::getenv("BFMLAB_PROFILE_DIR"))
        return env;
#ifdef BFMLAB_DATA_DIR
    return BFMLAB_DATA_DIR;
#else
    return "data";
#endif
}

} // namespace

std::vector<int> default_occupied_80mhz()
{
    std::vector<int> k;
    k.reserve(242);
    for (int i = -122; i <= -2; ++i)
        k.push_back(i);
    for (int i = 2; i <= 122; ++i)
        k.push_back(i);
    return k;
}

void SimConfig::validate_and_finalize()
{
    if (n_tx < 1 || n_rx < 1)
        throw config_error("antenna counts must be >= 1");
    if (bandwidth_hz <= 0 || fft_size <= 0)
        throw config_error("bandwidth and fft_size must be positive");
    if (n_samples < 1)
        throw config_error("n_samples must be >= 1");
    if (occupied_subcarriers.empty())
        occupied_subcarriers = default_occupied_80mhz();

    std::set<int> seen;
    for (int k : occupied_subcarriers)
    {
        if (k < -fft_size / 2 || k >= fft_size / 2)
            throw config_error("subcarrier index " + std::to_string(k) + " outside FFT grid");
        if (!seen.insert(k).second)
            throw config_error("duplicate subcarrier index " + std::to_string(k));
    }
}

ChannelProfile load_profile(const std::string &source)
{
    if (source == "flat1")
    {
        ChannelProfile p;
        p.name = "flat1";
        p.taps = {{0.0, 0.0}};
        return normalize(std::move(p));
    }
    if (source == "model-b")
    {
        std::filesystem::path path = std::filesystem::path(profile_search_dir()) / "model_b.profile";
        std::ifstream in(path);
        if (!in)
            throw io_error("cannot open built-in profile file " + path.string() +
                           " (set BFMLAB_PROFILE_DIR to the profile directory)");
        return parse_profile_text("model-b", in);
    }
    if (std::filesystem::exists(source))
    {
        std::ifstream in(source);
        if (!in)
            throw io_error("cannot open profile file " + source);
        return parse_profile_text(std::filesystem::path(source).stem().string(), in);
    }
    // A separator marks the source as a file path, so a missing file is an
    // I/O failure rather than an unknown profile name.
    if (source.find('/') != std::string::npos)
        throw io_error("cannot open profile file " + source);
    throw config_error("unknown channel profile '" + source + "'");
}

AmplitudePhase amp_phase(cd h)
{
    if (h.real() == 0.0 && h.imag() == 0.0)
        return {0.0, 0.0};
    constexpr double pi = 3.14159265358979323846;
    double amp = std::abs(h);
    double ph = std::arg(h);
    // arg() lands on -pi only for a negative-zero imaginary part; fold it
    // onto +pi so the range is (-pi, pi].
    if (ph <= -pi)
        ph = pi;
    return {amp, ph};
}

ChannelRealization draw_realization(const ChannelProfile &profile, const SimConfig &config,
                                    uint64_t sample_index)
{
    ChannelRealization r;
    r.n_taps = profile.n_taps();
    r.n_rx = config.n_rx;
    r.n_tx = config.n_tx;
    r.delays_ns.resize(profile.taps.size());
    for (size_t t = 0; t < profile.taps.size(); ++t)
        r.delays_ns[t] = profile.taps[t].delay_ns;

    RandomStream stream(config.seed, stream_id(StreamPurpose::channel, sample_index));
    r.gains.resize(static_cast<size_t>(r.n_taps) * r.n_rx * r.n_tx);
    size_t idx = 0;
    for (int t = 0; t < r.n_taps; ++t)
    {
        double sigma = std::sqrt(profile.powers[static_cast<size_t>(t)] / 2.0);
        for (int i = 0; i < r.n_rx; ++i)
            for (int j = 0; j < r.n_tx; ++j)
            {
                double re = stream.next_gaussian();
                double im = stream.next_gaussian();
                r.gains[idx++] = cd(sigma * re, sigma * im);
            }
    }
    return r;
}

CsiTensor to_frequency_response(const ChannelRealization &r, const SimConfig &config)
{
    CsiTensor csi;
    csi.n_rx = r.n_rx;
    csi.n_tx = r.n_tx;
    csi.subcarrier_indices = config.occupied_subcarriers;
    const int n_sub = csi.n_subcarriers();
    const int pairs = r.n_rx * r.n_tx;
    csi.h.assign(static_cast<size_t>(n_sub) * pairs, cd(0.0, 0.0));

    const double df = config.subcarrier_spacing_hz();
    for (int t = 0; t < r.n_taps; ++t)
    {
        const double tau = r.delays_ns[static_cast<size_t>(t)] * 1e-9;
        const cd *g = &r.gains[static_cast<size_t>(t) * pairs];
        for (int ks = 0; ks < n_sub; ++ks)
        {
            const double angle = -kTwoPi * csi.subcarrier_indices[static_cast<size_t>(ks)] * df * tau;
            const cd rot(std::cos(angle), std::sin(angle));
            cd *out = &csi.h[static_cast<size_t>(ks) * pairs];
            for (int p = 0; p < pairs; ++p)
                out[p] += g[p] * rot;
        }
    }
    return csi;
}

Eigen::MatrixXcd CsiTensor::matrix(int k) const
{
    Eigen::MatrixXcd m(n_rx, n_tx);
    for (int i = 0; i < n_rx; ++i)
        for (int j = 0; j < n_tx; ++j)
            m(i, j) = at(k, i, j);
    return m;
}

Eigen::VectorXcd apply_channel(const Eigen::MatrixXcd &h, const Eigen::VectorXcd &x,
                               double noise_var, RandomStream &stream)
{
    if (h.cols() != x.size())
        throw config_error("apply_channel: H has " + std::to_string(h.cols()) +
                           " columns but x has " + std::to_string(x.size()) + " entries");
    if (noise_var < 0.0)
        throw config_error("apply_channel: noise variance must be nonnegative");

    Eigen::VectorXcd y = h * x;
    if (noise_var > 0.0)
    {
        double sigma = std::sqrt(noise_var / 2.0);
        for (Eigen::Index i = 0; i < y.size(); ++i)
            y(i) += cd(sigma * stream.next_gaussian(), sigma * stream.next_gaussian());
    }
    return y;
}

} // namespace bfmlab
