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

#ifndef BFMLAB_REPORT_HPP
#define BFMLAB_REPORT_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "bfmlab/eval.hpp"

namespace bfmlab
{

/// Quote a CSV field when it contains a comma, quote, or newline (RFC 4180).
std::string csv_escape(const std::string &field);

/// Write a CSV file: header row, '.' decimal, LF line endings.
void write_csv(const std::filesystem::path &path, const std::vector<std::string> &header,
               const std::vector<std::vector<std::string>> &rows);

/// One curve of a chart. `step` draws a right-continuous staircase,
/// `markers` adds a dot at every data point.
struct SvgSeries
{
    std::string label;
    std::string color;
    std::vector<double> x;
    std::vector<double> y;
    bool step = false;
    bool markers = false;
};

/// Static standalone SVG line chart; byte-deterministic for fixed inputs.
std::string render_svg_chart(const std::string &title, const std::string &x_label,
                             const std::string &y_label, const std::vector<SvgSeries> &series,
                             const std::string &footnote = "");

/// File stem following `report_<figure>_<variant>_<g>`.
std::string report_stem(const std::string &figure, const std::string &variant,
                        const std::string &g_tag);

struct WrittenReport
{
    std::filesystem::path csv;
    std::filesystem::path svg;
};

/// Statement of the error definition, embedded in report footers.
std::string error_definition_note();

/// Ground-truth vs predicted amplitude across the occupied grid.
WrittenReport write_amplitude_report(const std::filesystem::path &dir,
                                     const AmplitudeTrace &trace, const std::string &variant,
                                     int group_size, int rx, int tx);

/// Per-sample error distribution of one evaluation.
WrittenReport write_ecdf_report(const std::filesystem::path &dir, const EvalReport &report);

/// Overlay of several error distributions in one chart; files are named
/// with the combined variant tag "all".
WrittenReport write_ecdf_overlay(const std::filesystem::path &dir,
                                 const std::vector<EvalReport> &reports);

/// Mean error as a function of group size.
WrittenReport write_sweep_report(const std::filesystem::path &dir,
                                 const std::vector<SweepRow> &rows, const std::string &variant);

/// Three-way estimation comparison with published reference values as
/// footer metadata.
WrittenReport write_comparison_report(const std::filesystem::path &dir,
                                      const ComparisonTable &table);

} // namespace bfmlab

#endif
