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

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>

#include "bfmlab/format.hpp"
#include "bfmlab/report.hpp"
#include "bfmlab/rng.hpp"

using namespace bfmlab;
namespace fs = std::filesystem;

namespace
{

fs::path fresh_dir(const std::string &leaf)
{
    const fs::path dir = fs::temp_directory_path() / "bfmlab_report_tests" / leaf;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path &path)
{
    std::ifstream in(path, std::ios::binary);
    REQUIRE_MESSAGE(in.good(), "cannot open ", path.string());
    std::ostringstream body;
    body << in.rdbuf();
    return body.str();
}

size_t count_of(const std::string &text, const std::string &needle)
{
    size_t n = 0;
    for (size_t at = text.find(needle); at != std::string::npos;
         at = text.find(needle, at + needle.size()))
        ++n;
    return n;
}

size_t lines_of(const std::string &text)
{
    return count_of(text, "\n");
}

/// Coordinate pairs of the first polyline, counted by their commas.
size_t first_polyline_pairs(const std::string &svg)
{
    const size_t poly = svg.find("<polyline");
    REQUIRE_NE(poly, std::string::npos);
    const std::string attr = "points=\"";
    const size_t open = svg.find(attr, poly) + attr.size();
    const size_t close = svg.find('"', open);
    return count_of(svg.substr(open, close - open), ",");
}

EvalReport fixture_report(const std::string &variant, int group_size,
                          std::vector<double> errors)
{
    EvalReport rep;
    rep.variant = variant;
    rep.group_size = group_size;
    rep.dataset_hash = "0011223344556677";
    rep.errors = errors;
    long double sum = 0.0L;
    for (double e : errors)
        sum += e;
    rep.mean_error = static_cast<double>(sum / errors.size());
    rep.ecdf_points = ecdf(std::move(errors));
    return rep;
}

} // namespace

TEST_CASE("csv escaping follows RFC 4180")
{
    CHECK_EQ(csv_escape("plain"), "plain");
    CHECK_EQ(csv_escape(""), "");
    CHECK_EQ(csv_escape("a,b"), "\"a,b\"");
    CHECK_EQ(csv_escape("say \"hi\""), "\"say \"\"hi\"\"\"");
    CHECK_EQ(csv_escape("two\nlines"), "\"two\nlines\"");
}

TEST_CASE("format_double writes shortest round-trip decimals")
{
    CHECK_EQ(format_double(0.5), "0.5");
    CHECK_EQ(format_double(1.0), "1");
    CHECK_EQ(format_double(-0.3125), "-0.3125");
    CHECK_EQ(format_double(0.434), "0.434");

    RandomStream s(17, stream_id(StreamPurpose::noise, 3));
    for (int i = 0; i < 200; ++i)
    {
        const double v = (s.next_unit() - 0.5) * 1e3;
        CHECK_EQ(std::stod(format_double(v)), v);
    }

    CHECK_EQ(format_double(0.25, 2), "0.25");
    CHECK_EQ(format_double(1.0, 1), "1.0");
}

TEST_CASE("write_csv emits LF rows with escaped cells")
{
    const fs::path dir = fresh_dir("csv");
    const fs::path path = dir / "table.csv";
    write_csv(path, {"name", "note"}, {{"a", "x,y"}, {"b", "plain"}});

    const std::string text = slurp(path);
    CHECK_EQ(text, "name,note\na,\"x,y\"\nb,plain\n");
    CHECK_EQ(count_of(text, "\r"), 0);
}

TEST_CASE("report stems follow the figure/variant/group naming")
{
    CHECK_EQ(report_stem("ecdf", "cnn", "242"), "report_ecdf_cnn_242");
    CHECK_EQ(report_stem("sweep", "cnn", "all"), "report_sweep_cnn_all");
    CHECK_EQ(report_stem("comparison", "all", "all"), "report_comparison_all_all");
}

TEST_CASE("svg chart structure: staircase, markers, labels")
{
    SvgSeries step{"dist", "", {1.0, 2.0, 3.0}, {1.0 / 3, 2.0 / 3, 1.0}, true, false};
    const std::string svg =
        render_svg_chart("Toy chart", "value", "fraction", {step}, "footnote text");

    CHECK_EQ(svg.rfind("<svg xmlns", 0), 0);
    CHECK_EQ(count_of(svg, "</svg>"), 1);
    CHECK_EQ(count_of(svg, "<polyline"), 1);
    // A right-continuous staircase over n points uses 2n-1 vertices.
    CHECK_EQ(first_polyline_pairs(svg), 5);
    CHECK_EQ(count_of(svg, "Toy chart"), 1);
    CHECK_EQ(count_of(svg, "footnote text"), 1);

    SvgSeries dots{"sweep", "", {1.0, 2.0, 4.0, 8.0}, {4.0, 3.0, 2.0, 1.0}, false, true};
    const std::string svg2 = render_svg_chart("Dots", "x", "y", {dots});
    CHECK_EQ(first_polyline_pairs(svg2), 4);
    CHECK_EQ(count_of(svg2, "<circle"), 4);

    CHECK_EQ(render_svg_chart("Toy chart", "value", "fraction", {step}, "footnote text"), svg);

    SvgSeries broken{"bad", "", {1.0, 2.0}, {1.0}, false, false};
    CHECK_THROWS_AS(render_svg_chart("t", "x", "y", {broken}), config_error);
}

TEST_CASE("svg text content is xml-escaped")
{
    SvgSeries s{"a<b & c", "", {0.0, 1.0}, {0.0, 1.0}, false, false};
    const std::string svg = render_svg_chart("less < more", "x", "y", {s});
    CHECK_EQ(count_of(svg, "less &lt; more"), 1);
    CHECK_EQ(count_of(svg, "a&lt;b &amp; c"), 1);
}

TEST_CASE("ecdf report writes the expected files")
{
    const fs::path dir = fresh_dir("ecdf");
    const EvalReport rep = fixture_report("cnn", 242, {1.0, 2.0, 3.0});
    const WrittenReport files = write_ecdf_report(dir, rep);

    CHECK_EQ(files.csv.filename().string(), "report_ecdf_cnn_242.csv");
    CHECK_EQ(files.svg.filename().string(), "report_ecdf_cnn_242.svg");

    const std::string csv = slurp(files.csv);
    CHECK_EQ(lines_of(csv), 4); // header + one row per unique value
    CHECK_EQ(csv.rfind("error,cumulative_fraction\n", 0), 0);

    const std::string svg = slurp(files.svg);
    CHECK_EQ(count_of(svg, "<polyline"), 1);
    CHECK_EQ(first_polyline_pairs(svg), 5);
    CHECK_EQ(count_of(svg, "Frobenius"), 2); // axis label and footnote

    EvalReport empty;
    CHECK_THROWS_AS(write_ecdf_report(dir, empty), config_error);
}

TEST_CASE("ecdf overlay combines configurations under the all tag")
{
    const fs::path dir = fresh_dir("overlay");
    const std::vector<EvalReport> reps{fixture_report("cnn", 242, {1.0, 2.0}),
                                       fixture_report("cnn_convlstm", 242, {0.5, 1.5, 2.5})};
    const WrittenReport files = write_ecdf_overlay(dir, reps);

    CHECK_EQ(files.csv.filename().string(), "report_ecdf_all_all.csv");
    const std::string csv = slurp(files.csv);
    CHECK_EQ(lines_of(csv), 6); // header + 2 + 3 rows
    CHECK_EQ(count_of(csv, "cnn_convlstm g=242"), 3);

    const std::string svg = slurp(files.svg);
    CHECK_EQ(count_of(svg, "<polyline"), 2);

    CHECK_THROWS_AS(write_ecdf_overlay(dir, {}), config_error);
}

TEST_CASE("amplitude report plots truth and prediction")
{
    const fs::path dir = fresh_dir("amplitude");
    AmplitudeTrace trace;
    trace.subcarriers = {-122, -121, -120, -119};
    trace.truth = {1.0, 1.5, 1.25, 0.75};
    trace.predicted = {0.9, 1.6, 1.2, 0.8};
    const WrittenReport files = write_amplitude_report(dir, trace, "cnn", 242, 0, 1);

    CHECK_EQ(files.csv.filename().string(), "report_amplitude_cnn_242.csv");
    const std::string csv = slurp(files.csv);
    CHECK_EQ(lines_of(csv), 5);
    CHECK_EQ(csv.rfind("subcarrier,truth,predicted\n", 0), 0);

    const std::string svg = slurp(files.svg);
    CHECK_EQ(count_of(svg, "<polyline"), 2);
    CHECK_EQ(count_of(svg, "|h(1,2)|"), 1);

    CHECK_THROWS_AS(write_amplitude_report(dir, AmplitudeTrace{}, "cnn", 242, 0, 0),
                    config_error);
}

TEST_CASE("sweep report lists one row per group size")
{
    const fs::path dir = fresh_dir("sweep");
    const std::vector<SweepRow> rows{{1, 0.54}, {22, 0.47}, {242, 0.43}};
    const WrittenReport files = write_sweep_report(dir, rows, "cnn");

    CHECK_EQ(files.csv.filename().string(), "report_sweep_cnn_all.csv");
    const std::string csv = slurp(files.csv);
    CHECK_EQ(lines_of(csv), 4);
    CHECK_EQ(count_of(csv, "group_size,mean_error\n"), 1);

    const std::string svg = slurp(files.svg);
    CHECK_EQ(count_of(svg, "<circle"), 3);

    CHECK_THROWS_AS(write_sweep_report(dir, {}, "cnn"), config_error);
}

TEST_CASE("comparison report carries the reference column as metadata")
{
    const fs::path dir = fresh_dir("comparison");
    ComparisonTable table;
    table.rows = {{"subcarrier-integrated (cnn+convlstm)", "cnn_convlstm", 242, 0.41, 0.434},
                  {"subcarrier-integrated (cnn)", "cnn", 242, 0.44, 0.448},
                  {"subcarrier-individual (cnn)", "cnn", 1, 0.52, 0.539}};
    const WrittenReport files = write_comparison_report(dir, table);

    CHECK_EQ(files.csv.filename().string(), "report_comparison_all_all.csv");
    const std::string csv = slurp(files.csv);
    CHECK_EQ(lines_of(csv), 4);
    CHECK_EQ(csv.rfind("label,variant,group_size,mean_error,reference\n", 0), 0);
    CHECK_EQ(count_of(csv, "0.434"), 1);
    CHECK_EQ(count_of(csv, "\"subcarrier-integrated (cnn+convlstm)\""), 0);

    const std::string svg = slurp(files.svg);
    CHECK_EQ(count_of(svg, "</svg>"), 1);

    CHECK_THROWS_AS(write_comparison_report(dir, ComparisonTable{}), config_error);
}

TEST_CASE("report writers are byte-deterministic across reruns")
{
    const fs::path a = fresh_dir("deterministic_a");
    const fs::path b = fresh_dir("deterministic_b");

    const EvalReport rep = fixture_report("cnn", 22, {0.25, 0.5, 0.5, 1.0});
    AmplitudeTrace trace;
    trace.subcarriers = {-2, 2, 3};
    trace.truth = {0.5, 0.75, 0.625};
    trace.predicted = {0.5625, 0.6875, 0.59375};
    const std::vector<SweepRow> rows{{1, 0.5}, {242, 0.25}};
    ComparisonTable table;
    table.rows = {{"a", "cnn", 242, 0.5, 0.448}};

    for (const fs::path &dir : {a, b})
    {
        write_ecdf_report(dir, rep);
        write_ecdf_overlay(dir, {rep});
        write_amplitude_report(dir, trace, "cnn", 22, 1, 1);
        write_sweep_report(dir, rows, "cnn");
        write_comparison_report(dir, table);
    }

    size_t compared = 0;
    for (const auto &entry : fs::directory_iterator(a))
    {
        const fs::path twin = b / entry.path().filename();
        REQUIRE(fs::exists(twin));
        CHECK_EQ(slurp(entry.path()), slurp(twin));
        ++compared;
    }
    CHECK_EQ(compared, 10);
}

TEST_CASE("the error definition note states the metric")
{
    const std::string note = error_definition_note();
    CHECK_NE(note.find("Frobenius"), std::string::npos);
    CHECK_NE(note.find("reference"), std::string::npos);
}
