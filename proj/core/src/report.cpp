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

#include "bfmlab/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "bfmlab/format.hpp"

namespace bfmlab
{

namespace
{

constexpr double canvas_w = 640.0;
constexpr double canvas_h = 420.0;
constexpr double margin_l = 70.0;
constexpr double margin_r = 24.0;
constexpr double margin_t = 46.0;
constexpr double margin_b = 58.0;

const char *palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b", "#e377c2"};
constexpr size_t palette_size = sizeof(palette) / sizeof(palette[0]);

std::string xml_escape(const std::string &s)
{
    std::string out;
    out.reserve(s.size());
    for (char c : s)
    {
        switch (c)
        {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

/// Coordinate with fixed two-decimal precision so output bytes are stable.
std::string coord(double v)
{
    return format_double(v, 2);
}

struct Ticks
{
    std::vector<double> values;
    int decimals = 0;
};

/// Round tick steps chosen from {1, 2, 2.5, 5} x 10^k.
Ticks nice_ticks(double lo, double hi, int target)
{
    Ticks t;
    if (!(hi > lo))
    {
        lo -= 0.5;
        hi += 0.5;
    }
    const double raw = (hi - lo) / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double norm = raw / mag;
    double step;
    if (norm <= 1.0)
        step = 1.0 * mag;
    else if (norm <= 2.0)
        step = 2.0 * mag;
    else if (norm <= 2.5)
        step = 2.5 * mag;
    else if (norm <= 5.0)
        step = 5.0 * mag;
    else
        step = 10.0 * mag;

    int decimals = 0;
    for (double s = step; decimals < 12 && std::abs(s - std::round(s)) > 1e-9; s *= 10.0)
        ++decimals;
    t.decimals = decimals;

    const double first = std::ceil(lo / step - 1e-9);
    const double last = std::floor(hi / step + 1e-9);
    for (double i = first; i <= last; i += 1.0)
        t.values.push_back(i * step);
    if (t.values.empty())
        t.values.push_back(lo);
    return t;
}

struct Range
{
    double lo = 0.0;
    double hi = 1.0;
};

Range axis_range(const std::vector<SvgSeries> &series, bool x_axis)
{
    bool any = false;
    Range r{0.0, 1.0};
    for (const auto &s : series)
    {
        const std::vector<double> &v = x_axis ? s.x : s.y;
        for (double d : v)
        {
            if (!any)
            {
                r.lo = r.hi = d;
                any = true;
            }
            r.lo = std::min(r.lo, d);
            r.hi = std::max(r.hi, d);
        }
    }
    if (!any)
        return {0.0, 1.0};
    if (r.lo == r.hi)
    {
        r.lo -= 0.5;
        r.hi += 0.5;
    }
    const double pad = 0.04 * (r.hi - r.lo);
    r.lo -= pad;
    r.hi += pad;
    return r;
}

} // namespace

std::string csv_escape(const std::string &field)
{
    if (field.find_first_of(",\"\n\r") == std::string::npos)
        return field;
    std::string out = "\"";
    for (char c : field)
    {
        if (c == '"')
            out += '"';
        out += c;
    }
    out += '"';
    return out;
}

void write_csv(const std::filesystem::path &path, const std::vector<std::string> &header,
               const std::vector<std::vector<std::string>> &rows)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw io_error("report: cannot open '" + path.string() + "' for writing");
    for (size_t i = 0; i < header.size(); ++i)
        out << (i ? "," : "") << csv_escape(header[i]);
    out << '\n';
    for (const auto &row : rows)
    {
        for (size_t i = 0; i < row.size(); ++i)
            out << (i ? "," : "") << csv_escape(row[i]);
        out << '\n';
    }
    if (!out)
        throw io_error("report: write to '" + path.string() + "' failed");
}

std::string render_svg_chart(const std::string &title, const std::string &x_label,
                             const std::string &y_label, const std::vector<SvgSeries> &series,
                             const std::string &footnote)
{
    const Range xr = axis_range(series, true);
    const Range yr = axis_range(series, false);
    const Ticks xt = nice_ticks(xr.lo, xr.hi, 6);
    const Ticks yt = nice_ticks(yr.lo, yr.hi, 6);
    const double pw = canvas_w - margin_l - margin_r;
    const double ph = canvas_h - margin_t - margin_b;
    auto sx = [&](double v) { return margin_l + (v - xr.lo) / (xr.hi - xr.lo) * pw; };
    auto sy = [&](double v) { return margin_t + ph - (v - yr.lo) / (yr.hi - yr.lo) * ph; };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << coord(canvas_w)
        << "\" height=\"" << coord(canvas_h) << "\" viewBox=\"0 0 " << coord(canvas_w) << ' '
        << coord(canvas_h) << "\">\n";
    svg << "<rect width=\"" << coord(canvas_w) << "\" height=\"" << coord(canvas_h)
        << "\" fill=\"#ffffff\"/>\n";
    svg << "<text x=\"" << coord(canvas_w / 2) << "\" y=\"24\" text-anchor=\"middle\" "
           "font-family=\"sans-serif\" font-size=\"15\" fill=\"#222222\">"
        << xml_escape(title) << "</text>\n";

    for (double v : yt.values)
    {
        const double y = sy(v);
        svg << "<line x1=\"" << coord(margin_l) << "\" y1=\"" << coord(y) << "\" x2=\""
            << coord(margin_l + pw) << "\" y2=\"" << coord(y)
            << "\" stroke=\"#e0e0e0\" stroke-width=\"1\"/>\n";
        svg << "<text x=\"" << coord(margin_l - 8) << "\" y=\"" << coord(y + 4)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" "
               "fill=\"#444444\">"
            << format_double(v, yt.decimals) << "</text>\n";
    }
    for (double v : xt.values)
    {
        const double x = sx(v);
        svg << "<line x1=\"" << coord(x) << "\" y1=\"" << coord(margin_t) << "\" x2=\""
            << coord(x) << "\" y2=\"" << coord(margin_t + ph)
            << "\" stroke=\"#eeeeee\" stroke-width=\"1\"/>\n";
        svg << "<text x=\"" << coord(x) << "\" y=\"" << coord(margin_t + ph + 18)
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\" "
               "fill=\"#444444\">"
            << format_double(v, xt.decimals) << "</text>\n";
    }

    svg << "<rect x=\"" << coord(margin_l) << "\" y=\"" << coord(margin_t) << "\" width=\""
        << coord(pw) << "\" height=\"" << coord(ph)
        << "\" fill=\"none\" stroke=\"#888888\" stroke-width=\"1\"/>\n";
    svg << "<text x=\"" << coord(margin_l + pw / 2) << "\" y=\"" << coord(canvas_h - 20)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
           "fill=\"#222222\">"
        << xml_escape(x_label) << "</text>\n";
    svg << "<text x=\"18\" y=\"" << coord(margin_t + ph / 2)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
           "fill=\"#222222\" transform=\"rotate(-90 18 "
        << coord(margin_t + ph / 2) << ")\">" << xml_escape(y_label) << "</text>\n";

    for (size_t si = 0; si < series.size(); ++si)
    {
        const SvgSeries &s = series[si];
        const std::string color = s.color.empty()
                                      ? std::string(palette[si % palette_size])
                                      : s.color;
        if (s.x.size() != s.y.size())
            throw config_error("svg chart: series '" + s.label + "' has mismatched lengths");
        if (s.x.empty())
            continue;
        svg << "<polyline fill=\"none\" stroke=\"" << color
            << "\" stroke-width=\"1.8\" points=\"";
        for (size_t i = 0; i < s.x.size(); ++i)
        {
            if (s.step && i > 0)
                svg << coord(sx(s.x[i])) << ',' << coord(sy(s.y[i - 1])) << ' ';
            svg << coord(sx(s.x[i])) << ',' << coord(sy(s.y[i]));
            if (i + 1 < s.x.size())
                svg << ' ';
        }
        svg << "\"/>\n";
        if (s.markers)
            for (size_t i = 0; i < s.x.size(); ++i)
                svg << "<circle cx=\"" << coord(sx(s.x[i])) << "\" cy=\"" << coord(sy(s.y[i]))
                    << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    }

    double legend_y = margin_t + 14;
    for (size_t si = 0; si < series.size(); ++si)
    {
        const SvgSeries &s = series[si];
        if (s.label.empty())
            continue;
        const std::string color = s.color.empty()
                                      ? std::string(palette[si % palette_size])
                                      : s.color;
        const double lx = margin_l + pw - 200;
        svg << "<line x1=\"" << coord(lx) << "\" y1=\"" << coord(legend_y - 4) << "\" x2=\""
            << coord(lx + 22) << "\" y2=\"" << coord(legend_y - 4) << "\" stroke=\"" << color
            << "\" stroke-width=\"2\"/>\n";
        svg << "<text x=\"" << coord(lx + 28) << "\" y=\"" << coord(legend_y)
            << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#222222\">"
            << xml_escape(s.label) << "</text>\n";
        legend_y += 16;
    }

    if (!footnote.empty())
        svg << "<text x=\"" << coord(margin_l) << "\" y=\"" << coord(canvas_h - 6)
            << "\" font-family=\"sans-serif\" font-size=\"9\" fill=\"#666666\">"
            << xml_escape(footnote) << "</text>\n";
    svg << "</svg>\n";
    return svg.str();
}

std::string report_stem(const std::string &figure, const std::string &variant,
                        const std::string &g_tag)
{
    return "report_" + figure + "_" + variant + "_" + g_tag;
}

std::string error_definition_note()
{
    return "error = mean over a sample's subcarriers of the Frobenius norm of the "
           "de-normalized amplitude difference; published values are ordering references only";
}

namespace
{

void write_text(const std::filesystem::path &path, const std::string &body)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw io_error("report: cannot open '" + path.string() + "' for writing");
    out << body;
    if (!out)
        throw io_error("report: write to '" + path.string() + "' failed");
}

} // namespace

WrittenReport write_amplitude_report(const std::filesystem::path &dir,
                                     const AmplitudeTrace &trace, const std::string &variant,
                                     int group_size, int rx, int tx)
{
    if (trace.subcarriers.empty())
        throw config_error("amplitude report: empty trace");
    const std::string stem = report_stem("amplitude", variant, std::to_string(group_size));
    WrittenReport files{dir / (stem + ".csv"), dir / (stem + ".svg")};

    std::vector<std::vector<std::string>> rows;
    for (size_t i = 0; i < trace.subcarriers.size(); ++i)
        rows.push_back({std::to_string(trace.subcarriers[i]), format_double(trace.truth[i]),
                        format_double(trace.predicted[i])});
    write_csv(files.csv, {"subcarrier", "truth", "predicted"}, rows);

    SvgSeries truth{"truth", "", {}, {}, false, false};
    SvgSeries pred{"predicted", "", {}, {}, false, false};
    for (size_t i = 0; i < trace.subcarriers.size(); ++i)
    {
        truth.x.push_back(static_cast<double>(trace.subcarriers[i]));
        truth.y.push_back(trace.truth[i]);
        pred.x.push_back(static_cast<double>(trace.subcarriers[i]));
        pred.y.push_back(trace.predicted[i]);
    }
    const std::string title = "Recovered amplitude |h(" + std::to_string(rx + 1) + "," +
                              std::to_string(tx + 1) + ")| (" + variant +
                              ", g=" + std::to_string(group_size) + ")";
    write_text(files.svg,
               render_svg_chart(title, "subcarrier index", "amplitude", {truth, pred}));
    return files;
}

namespace
{

SvgSeries ecdf_series(const EvalReport &report, const std::string &label)
{
    SvgSeries s{label, "", {}, {}, true, false};
    for (const EcdfPoint &p : report.ecdf_points)
    {
        s.x.push_back(p.value);
        s.y.push_back(p.fraction);
    }
    return s;
}

} // namespace

WrittenReport write_ecdf_report(const std::filesystem::path &dir, const EvalReport &report)
{
    if (report.ecdf_points.empty())
        throw config_error("ecdf report: report has no ecdf points");
    const std::string stem =
        report_stem("ecdf", report.variant, std::to_string(report.group_size));
    WrittenReport files{dir / (stem + ".csv"), dir / (stem + ".svg")};

    std::vector<std::vector<std::string>> rows;
    for (const EcdfPoint &p : report.ecdf_points)
        rows.push_back({format_double(p.value), format_double(p.fraction)});
    write_csv(files.csv, {"error", "cumulative_fraction"}, rows);

    const std::string title = "Error distribution (" + report.variant +
                              ", g=" + std::to_string(report.group_size) + ")";
    write_text(files.svg, render_svg_chart(title, "Frobenius error", "cumulative fraction",
                                           {ecdf_series(report, report.variant)},
                                           error_definition_note()));
    return files;
}

WrittenReport write_ecdf_overlay(const std::filesystem::path &dir,
                                 const std::vector<EvalReport> &reports)
{
    if (reports.empty())
        throw config_error("ecdf overlay: no reports");
    const std::string stem = report_stem("ecdf", "all", "all");
    WrittenReport files{dir / (stem + ".csv"), dir / (stem + ".svg")};

    std::vector<std::vector<std::string>> rows;
    std::vector<SvgSeries> series;
    for (const EvalReport &r : reports)
    {
        const std::string tag = r.variant + " g=" + std::to_string(r.group_size);
        for (const EcdfPoint &p : r.ecdf_points)
            rows.push_back({tag, format_double(p.value), format_double(p.fraction)});
        series.push_back(ecdf_series(r, tag));
    }
    write_csv(files.csv, {"configuration", "error", "cumulative_fraction"}, rows);
    write_text(files.svg, render_svg_chart("Error distribution by configuration",
                                           "Frobenius error", "cumulative fraction", series,
                                           error_definition_note()));
    return files;
}

WrittenReport write_sweep_report(const std::filesystem::path &dir,
                                 const std::vector<SweepRow> &rows,
                                 const std::string &variant)
{
    if (rows.empty())
        throw config_error("sweep report: no rows");
    const std::string stem = report_stem("sweep", variant, "all");
    WrittenReport files{dir / (stem + ".csv"), dir / (stem + ".svg")};

    std::vector<std::vector<std::string>> csv_rows;
    for (const SweepRow &r : rows)
        csv_rows.push_back({std::to_string(r.group_size), format_double(r.mean_error)});
    write_csv(files.csv, {"group_size", "mean_error"}, csv_rows);

    SvgSeries s{variant, "", {}, {}, false, true};
    for (const SweepRow &r : rows)
    {
        s.x.push_back(static_cast<double>(r.group_size));
        s.y.push_back(r.mean_error);
    }
    write_text(files.svg,
               render_svg_chart("Mean error by subcarrier group size", "group size g",
                                "mean Frobenius error", {s}, error_definition_note()));
    return files;
}

WrittenReport write_comparison_report(const std::filesystem::path &dir,
                                      const ComparisonTable &table)
{
    if (table.rows.empty())
        throw config_error("comparison report: no rows");
    const std::string stem = report_stem("comparison", "all", "all");
    WrittenReport files{dir / (stem + ".csv"), dir / (stem + ".svg")};

    std::vector<std::vector<std::string>> rows;
    for (const ComparisonRow &r : table.rows)
        rows.push_back({r.label, r.variant, std::to_string(r.group_size),
                        format_double(r.mean_error), format_double(r.reference)});
    write_csv(files.csv, {"label", "variant", "group_size", "mean_error", "reference"}, rows);

    const double pw = canvas_w - margin_l - margin_r;
    const double ph = canvas_h - margin_t - margin_b;
    double hi = 0.0;
    for (const ComparisonRow &r : table.rows)
        hi = std::max({hi, r.mean_error, r.reference});
    const Ticks yt = nice_ticks(0.0, hi * 1.1, 6);
    const double ylo = 0.0;
    const double yhi = std::max(hi * 1.1, yt.values.back());
    auto sy = [&](double v) { return margin_t + ph - (v - ylo) / (yhi - ylo) * ph; };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << coord(canvas_w)
        << "\" height=\"" << coord(canvas_h) << "\" viewBox=\"0 0 " << coord(canvas_w) << ' '
        << coord(canvas_h) << "\">\n";
    svg << "<rect width=\"" << coord(canvas_w) << "\" height=\"" << coord(canvas_h)
        << "\" fill=\"#ffffff\"/>\n";
    svg << "<text x=\"" << coord(canvas_w / 2) << "\" y=\"24\" text-anchor=\"middle\" "
           "font-family=\"sans-serif\" font-size=\"15\" fill=\"#222222\">"
        << "Mean Frobenius error by configuration</text>\n";
    for (double v : yt.values)
    {
        const double y = sy(v);
        svg << "<line x1=\"" << coord(margin_l) << "\" y1=\"" << coord(y) << "\" x2=\""
            << coord(margin_l + pw) << "\" y2=\"" << coord(y)
            << "\" stroke=\"#e0e0e0\" stroke-width=\"1\"/>\n";
        svg << "<text x=\"" << coord(margin_l - 8) << "\" y=\"" << coord(y + 4)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" "
               "fill=\"#444444\">"
            << format_double(v, yt.decimals) << "</text>\n";
    }
    const double slot = pw / static_cast<double>(table.rows.size());
    for (size_t i = 0; i < table.rows.size(); ++i)
    {
        const ComparisonRow &r = table.rows[i];
        const std::string color = palette[i % palette_size];
        const double cx = margin_l + slot * (static_cast<double>(i) + 0.5);
        const double bw = slot * 0.5;
        const double y = sy(r.mean_error);
        svg << "<rect x=\"" << coord(cx - bw / 2) << "\" y=\"" << coord(y) << "\" width=\""
            << coord(bw) << "\" height=\"" << coord(margin_t + ph - y) << "\" fill=\"" << color
            << "\" fill-opacity=\"0.8\"/>\n";
        const double ry = sy(r.reference);
        svg << "<line x1=\"" << coord(cx - bw / 2 - 6) << "\" y1=\"" << coord(ry) << "\" x2=\""
            << coord(cx + bw / 2 + 6) << "\" y2=\"" << coord(ry)
            << "\" stroke=\"#333333\" stroke-width=\"1.5\" stroke-dasharray=\"5,3\"/>\n";
        svg << "<text x=\"" << coord(cx) << "\" y=\"" << coord(y - 5)
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\" "
               "fill=\"#222222\">"
            << format_double(r.mean_error, 3) << "</text>\n";
        svg << "<text x=\"" << coord(cx) << "\" y=\"" << coord(margin_t + ph + 16)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"9\" "
               "fill=\"#444444\" transform=\"rotate(-14 "
            << coord(cx) << ' ' << coord(margin_t + ph + 16) << ")\">" << xml_escape(r.label)
            << "</text>\n";
    }
    svg << "<rect x=\"" << coord(margin_l) << "\" y=\"" << coord(margin_t) << "\" width=\""
        << coord(pw) << "\" height=\"" << coord(ph)
        << "\" fill=\"none\" stroke=\"#888888\" stroke-width=\"1\"/>\n";
    svg << "<text x=\"" << coord(margin_l) << "\" y=\"" << coord(canvas_h - 6)
        << "\" font-family=\"sans-serif\" font-size=\"9\" fill=\"#666666\">"
        << xml_escape("dashed = reference; " + error_definition_note()) << "</text>\n";
    svg << "</svg>\n";
    write_text(files.svg, svg.str());
    return files;
}

} // namespace bfmlab
