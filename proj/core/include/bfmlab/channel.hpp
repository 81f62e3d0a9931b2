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

#ifndef BFMLAB_CHANNEL_HPP
#define BFMLAB_CHANNEL_HPP

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bfmlab/rng.hpp"

namespace bfmlab
{

using cd = std::complex<double>;

/// OFDM-MIMO simulation parameters. The default grid is the populated
/// 80 MHz set: 242 subcarrier indices in [-122, -2] and [2, 122] on a
/// 256-point FFT with 312.5 kHz spacing.
struct SimConfig
{
    int n_tx = 2;
    int n_rx = 2;
    double carrier_freq_hz = 5.25e9;
    double bandwidth_hz = 80e6;
    int fft_size = 256;
    std::vector<int> occupied_subcarriers;
    int n_samples = 10000;
    uint64_t seed = 1;

    double subcarrier_spacing_hz() const { return bandwidth_hz / fft_size; }

    /// Throws config_error if any invariant is violated. Populates the
    /// default subcarrier set when the list is empty.
    void validate_and_finalize();
};

std::vector<int> default_occupied_80mhz();

struct ChannelTap
{
    double delay_ns = 0.0;
    double power_db = 0.0;
};

/// Tapped-delay-line power-delay profile. `powers` holds the per-tap linear
/// powers normalized to unit sum.
struct ChannelProfile
{
    std::string name;
    std::vector<ChannelTap> taps;
    std::vector<double> powers;

    int n_taps() const { return static_cast<int>(taps.size()); }
};

/// Resolves a built-in profile name ("flat1", "model-b") or parses a profile
/// file: one `delay_ns<TAB>power_db` pair per line, `#` starts a comment.
ChannelProfile load_profile(const std::string &source);

/// One time-domain channel draw: an i.i.d. circularly-symmetric complex
/// Gaussian gain per (tap, rx, tx) with variance equal to the tap power.
struct ChannelRealization
{
    int n_taps = 0;
    int n_rx = 0;
    int n_tx = 0;
    std::vector<double> delays_ns;
    std::vector<cd> gains; // (tap, rx, tx) row-major

    cd gain(int tap, int rx, int tx) const
    {
        return gains[static_cast<size_t>((tap * n_rx + rx) * n_tx + tx)];
    }
};

/// Per-subcarrier channel matrices of one realization.
struct CsiTensor
{
    int n_rx = 0;
    int n_tx = 0;
    std::vector<int> subcarrier_indices;
    std::vector<cd> h; // (subcarrier, rx, tx) row-major

    int n_subcarriers() const { return static_cast<int>(subcarrier_indices.size()); }
    cd &at(int k, int rx, int tx) { return h[static_cast<size_t>((k * n_rx + rx) * n_tx + tx)]; }
    cd at(int k, int rx, int tx) const { return h[static_cast<size_t>((k * n_rx + rx) * n_tx + tx)]; }

    Eigen::MatrixXcd matrix(int k) const;
};

struct AmplitudePhase
{
    double amplitude = 0.0;
    double phase = 0.0; // radians in (-pi, pi]
};

/// Polar form of one channel coefficient; amp_phase(0) = (0, 0).
AmplitudePhase amp_phase(cd h);

/// Deterministic draw for (config.seed, sample_index); the gain stream is
/// keyed by the sample index, so draws are order- and thread-independent.
ChannelRealization draw_realization(const ChannelProfile &profile, const SimConfig &config,
                                    uint64_t sample_index);

/// Frequency response at every occupied subcarrier,
///   H[k]_{ij} = sum_t g_{t,ij} * exp(-j 2 pi f_k tau_t),  f_k = k * W / fft_size.
/// Delays need not lie on the 1/W sample grid.
CsiTensor to_frequency_response(const ChannelRealization &r, const SimConfig &config);

/// y = H x + z with z circularly-symmetric Gaussian of per-entry variance
/// noise_var (exactly zero when noise_var == 0).
Eigen::VectorXcd apply_channel(const Eigen::MatrixXcd &h, const Eigen::VectorXcd &x,
                               double noise_var, RandomStream &stream);

} // namespace bfmlab

#endif
