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
// Command-line orchestrator: simulate -> train -> eval -> report, plus the
// group-size sweep and profile inspection. Exit codes: 0 success, 2 config
// error, 3 I/O or missing artifact, 4 numeric failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bfmlab/bfm.hpp"
#include "bfmlab/config.hpp"
#include "bfmlab/dataset.hpp"
#include "bfmlab/eval.hpp"
#include "bfmlab/format.hpp"
#include "bfmlab/report.hpp"

namespace fs = std::filesystem;
using namespace bfmlab;

namespace
{

struct GlobalFlags
{
    std::string config_path;
    std::string preset;
    std::string out_dir;
    uint64_t seed = 0;
    bool seed_set = false;
    bool out_dir_set = false;
    int threads = 0;
};

nlohmann::json parse_json_file(const fs::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw io_error("config: cannot open '" + path.string() + "'");
    try
    {
        nlohmann::json j;
        in >> j;
        return j;
    }
    catch (const nlohmann::json::exception &e)
    {
        throw config_error("config: '" + path.string() + "' is not valid JSON: " + e.what());
    }
}

/// Precedence: flags > config file > preset > built-in defaults. The
/// BFMLAB_SEED environment variable is deliberately not consulted.
RunConfig resolve_config(const GlobalFlags &g)
{
    RunConfig cfg = g.preset.empty() ? RunConfig{} : preset_config(g.preset);
    if (!g.config_path.empty())
        cfg.apply_json(parse_json_file(g.config_path));
    if (g.seed_set)
        cfg.set_seed(g.seed);
    if (g.out_dir_set)
        cfg.out_dir = g.out_dir;
    return cfg;
}

fs::path dataset_path(const RunConfig &cfg, int g)
{
    return fs::path(cfg.out_dir) / ("dataset_g" + std::to_string(g) + ".bfmc");
}

fs::path checkpoint_path(const RunConfig &cfg, const std::string &variant, int g)
{
    return fs::path(cfg.out_dir) / ("model_" + variant + "_g" + std::to_string(g) + ".bfmw");
}

void require_file(const fs::path &p, const std::string &hint)
{
    if (!fs::exists(p))
        throw io_error("missing artifact '" + p.string() + "'; " + hint);
}

template <typename Fn>
void with_precision(const std::string &dtype, Fn &&fn)
{
    if (dtype == "f64")
        fn(double{});
    else if (dtype == "f32")
        fn(float{});
    else
        throw config_error("precision must be 'f32' or 'f64', got '" + dtype + "'");
}

void write_metrics_csv(const fs::path &path, const EvalReport &rep)
{
    std::vector<std::vector<std::string>> rows;
    for (size_t i = 0; i < rep.errors.size(); ++i)
        rows.push_back({std::to_string(i), format_double(rep.errors[i])});
    write_csv(path, {"sample", "error"}, rows);
}

Split parse_split(const std::string &name)
{
    if (name == "train")
        return Split::train;
    if (name == "val")
        return Split::val;
    if (name == "test")
        return Split::test;
    throw config_error("split must be one of train/val/test, got '" + name + "'");
}

int cmd_simulate(RunConfig cfg)
{
    cfg.validate_and_finalize();
    const ChannelProfile profile = load_profile(cfg.profile);
    const Dataset ds = generate_dataset(cfg.sim, profile, cfg.group_size);
    fs::create_directories(cfg.out_dir);
    const fs::path file = dataset_path(cfg, cfg.group_size);
    save_dataset(file, ds);
    const fs::path sidecar = fs::path(cfg.out_dir) /
                             ("dataset_g" + std::to_string(cfg.group_size) + ".manifest.json");
    std::ofstream side(sidecar, std::ios::binary);
    side << ds.manifest.to_json().dump(2) << '\n';
    if (!side)
        throw io_error("simulate: write to '" + sidecar.string() + "' failed");

    std::cout << "dataset: " << file.string() << "\n"
              << "samples: " << ds.n_samples() << " (train "
              << ds.sample_range(Split::train).count() << ", val "
              << ds.sample_range(Split::val).count() << ", test "
              << ds.sample_range(Split::test).count() << ")\n"
              << "group size: " << ds.manifest.group_size << ", padded length: "
              << ds.manifest.f_pad << "\n"
              << "scale: " << format_double(ds.manifest.scale) << "\n";
    return 0;
}

int cmd_train(RunConfig cfg, std::string dataset_file)
{
    cfg.validate_and_finalize();
    fs::path ds_path = dataset_file.empty() ? dataset_path(cfg, cfg.group_size)
                                            : fs::path(dataset_file);
    require_file(ds_path, "run 'bfmlab simulate' first");
    const Dataset ds = load_dataset(ds_path);
    const ModelSpec spec =
        make_model_spec(cfg.variant, ds.manifest.f_pad, ds.manifest.group_size,
                        ds.manifest.n_rx * ds.manifest.n_tx, cfg.base_channels);
    fs::create_directories(cfg.out_dir);
    const fs::path record_path =
        fs::path(cfg.out_dir) /
        ("train_" + cfg.variant + "_g" + std::to_string(ds.manifest.group_size) + ".csv");

    with_precision(cfg.precision, [&](auto tag) {
        using T = decltype(tag);
        Network<T> net(spec);
        TrainRecord rec;
        try
        {
            rec = train(net, ds, cfg.train);
        }
        catch (const train_diverged &e)
        {
            write_train_record_csv(record_path, e.record);
            throw;
        }
        const nlohmann::json extra = {{"dataset_hash", ds.manifest.sim_config_hash_hex},
                                      {"stop_reason", rec.stop_reason},
                                      {"best_epoch", rec.best_epoch},
                                      {"best_val_loss", rec.best_val_loss}};
        save_checkpoint(checkpoint_path(cfg, cfg.variant, ds.manifest.group_size), net, extra);
        write_train_record_csv(record_path, rec);
        std::cout << "epochs: " << rec.epochs() << " (" << rec.stop_reason << ")\n"
                  << "best epoch: " << rec.best_epoch << ", best val loss: "
                  << format_double(rec.best_val_loss) << "\n"
                  << "checkpoint: "
                  << checkpoint_path(cfg, cfg.variant, ds.manifest.group_size).string() << "\n"
                  << "record: " << record_path.string() << "\n";
    });
    return 0;
}

int cmd_eval(RunConfig cfg, std::string dataset_file, std::string checkpoint_file,
             const std::string &split_name)
{
    cfg.validate_and_finalize();
    const Split split = parse_split(split_name);
    fs::path ds_path = dataset_file.empty() ? dataset_path(cfg, cfg.group_size)
                                            : fs::path(dataset_file);
    require_file(ds_path, "run 'bfmlab simulate' first");
    const Dataset ds = load_dataset(ds_path);
    fs::path ck_path = checkpoint_file.empty()
                           ? checkpoint_path(cfg, cfg.variant, ds.manifest.group_size)
                           : fs::path(checkpoint_file);
    require_file(ck_path, "run 'bfmlab train' first");
    const CheckpointInfo info = read_checkpoint_info(ck_path);
    fs::create_directories(cfg.out_dir);

    with_precision(info.dtype, [&](auto tag) {
        using T = decltype(tag);
        Network<T> net(info.spec);
        load_checkpoint(ck_path, net);
        const EvalReport rep = evaluate(net, ds, split, cfg.train.batch_size);
        const std::string g_tag = std::to_string(rep.group_size);
        write_metrics_csv(fs::path(cfg.out_dir) / ("metrics_" + rep.variant + "_g" + g_tag +
                                                   "_" + split_name + ".csv"),
                          rep);
        write_ecdf_report(cfg.out_dir, rep);
        const AmplitudeTrace trace = amplitude_trace(net, ds, split, 0, 0, 0);
        write_amplitude_report(cfg.out_dir, trace, rep.variant, rep.group_size, 0, 0);
        std::cout << "variant: " << rep.variant << ", group size: " << rep.group_size
                  << ", split: " << split_name << "\n"
                  << "samples: " << rep.errors.size() << "\n"
                  << "mean Frobenius error: " << format_double(rep.mean_error) << "\n";
    });
    return 0;
}

int cmd_sweep(RunConfig cfg, std::vector<int> group_sizes)
{
    cfg.validate_and_finalize();
    const ChannelProfile profile = load_profile(cfg.profile);
    if (group_sizes.empty())
        group_sizes = cfg.sweep_group_sizes;
    fs::create_directories(cfg.out_dir);

    with_precision(cfg.precision, [&](auto tag) {
        using T = decltype(tag);
        const std::vector<SweepRow> rows =
            subcarrier_sweep<T>(cfg.sim, profile, cfg.train, cfg.base_channels, group_sizes);
        const WrittenReport files = write_sweep_report(cfg.out_dir, rows, "cnn");
        std::cout << "group_size,mean_error\n";
        for (const SweepRow &r : rows)
            std::cout << r.group_size << ',' << format_double(r.mean_error) << "\n";
        std::cout << "report: " << files.csv.string() << ", " << files.svg.string() << "\n";
    });
    return 0;
}

int cmd_report(RunConfig cfg)
{
    cfg.validate_and_finalize();
    const int k = static_cast<int>(cfg.sim.occupied_subcarriers.size());

    struct Entry
    {
        const char *label;
        std::string variant;
        int group_size;
        double reference;
    };
    const Entry entries[] = {
        {"subcarrier-integrated (cnn+convlstm)", "cnn_convlstm", k, 0.434},
        {"subcarrier-integrated (cnn)", "cnn", k, 0.448},
        {"subcarrier-individual (cnn)", "cnn", 1, 0.539},
    };

    for (const Entry &e : entries)
    {
        require_file(dataset_path(cfg, e.group_size), "run 'bfmlab simulate' first");
        require_file(checkpoint_path(cfg, e.variant, e.group_size),
                     "run 'bfmlab train --variant " + e.variant + "' first");
    }

    const Dataset integrated = load_dataset(dataset_path(cfg, k));
    const Dataset individual = load_dataset(dataset_path(cfg, 1));
    fs::create_directories(cfg.out_dir);

    ComparisonTable table;
    std::vector<EvalReport> reports;
    for (const Entry &e : entries)
    {
        const Dataset &ds = e.group_size == 1 ? individual : integrated;
        const fs::path ck = checkpoint_path(cfg, e.variant, e.group_size);
        const CheckpointInfo info = read_checkpoint_info(ck);
        with_precision(info.dtype, [&](auto tag) {
            using T = decltype(tag);
            Network<T> net(info.spec);
            load_checkpoint(ck, net);
            const EvalReport rep = evaluate(net, ds, Split::test, cfg.train.batch_size);
            reports.push_back(rep);
            table.rows.push_back(
                {e.label, e.variant, e.group_size, rep.mean_error, e.reference});
            write_ecdf_report(cfg.out_dir, rep);
            const AmplitudeTrace trace = amplitude_trace(net, ds, Split::test, 0, 0, 0);
            write_amplitude_report(cfg.out_dir, trace, rep.variant, rep.group_size, 0, 0);
        });
    }
    const WrittenReport cmp = write_comparison_report(cfg.out_dir, table);
    write_ecdf_overlay(cfg.out_dir, reports);

    std::cout << "label,variant,group_size,mean_error,reference\n";
    for (const ComparisonRow &r : table.rows)
        std::cout << csv_escape(r.label) << ',' << r.variant << ',' << r.group_size << ','
                  << format_double(r.mean_error) << ',' << format_double(r.reference) << "\n";
    std::cout << "report: " << cmp.csv.string() << ", " << cmp.svg.string() << "\n";
    return 0;
}

int cmd_validate_profile(const std::string &source)
{
    const ChannelProfile p = load_profile(source);
    std::cout << "profile: " << p.name << " (" << p.n_taps() << " taps)\n";
    std::cout << "delay_ns,power_db,normalized_power\n";
    double sum = 0.0;
    for (int t = 0; t < p.n_taps(); ++t)
    {
        std::cout << format_double(p.taps[t].delay_ns) << ','
                  << format_double(p.taps[t].power_db) << ',' << format_double(p.powers[t])
                  << "\n";
        sum += p.powers[t];
    }
    std::cout << "power sum: " << format_double(sum) << "\n";
    return 0;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"bfmlab: CSI amplitude recomposition from beamforming feedback"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalFlags g;
    app.add_option("--config", g.config_path, "JSON run config file");
    auto *seed_opt = app.add_option("--seed", g.seed,
                                    "Seed override (precedence: flag > config file)");
    auto *out_opt = app.add_option("--out-dir", g.out_dir, "Output directory override");
    app.add_option("--preset", g.preset, "Named parameter set")
        ->check(CLI::IsMember({"desk", "paper"}));
    app.add_option("--threads", g.threads, "Eigen thread count (default 1)");

    int n_samples_override = 0;
    int group_size_override = 0;
    std::string profile_override;
    std::string variant_override;
    int max_epochs_override = 0;
    int batch_override = 0;
    double lr_override = 0.0;
    std::string optimizer_override;
    int base_override = 0;
    std::string precision_override;
    std::string dataset_file, checkpoint_file;
    std::string split_name = "test";
    std::vector<int> sweep_groups;
    std::string profile_arg;

    CLI::App *sim = app.add_subcommand("simulate", "Generate a dataset from channel draws");
    sim->add_option("--n-samples", n_samples_override, "Realization count")
        ->check(CLI::PositiveNumber);
    sim->add_option("--group-size", group_size_override, "Subcarriers per sample")
        ->check(CLI::PositiveNumber);
    sim->add_option("--profile", profile_override, "Channel profile name or file");

    CLI::App *trn = app.add_subcommand("train", "Train an estimator on a dataset");
    trn->add_option("--dataset", dataset_file, "Dataset file (default from out-dir)");
    trn->add_option("--variant", variant_override, "cnn or cnn-convlstm");
    trn->add_option("--max-epochs", max_epochs_override, "Epoch cap")
        ->check(CLI::PositiveNumber);
    trn->add_option("--batch-size", batch_override, "Minibatch size")
        ->check(CLI::PositiveNumber);
    trn->add_option("--learning-rate", lr_override, "Step size")->check(CLI::PositiveNumber);
    trn->add_option("--optimizer", optimizer_override, "adaptive-moment or plain-sgd");
    trn->add_option("--base-channels", base_override, "First-block width")
        ->check(CLI::PositiveNumber);
    trn->add_option("--precision", precision_override, "f32 or f64");
    trn->add_option("--group-size", group_size_override, "Selects the default dataset file")
        ->check(CLI::PositiveNumber);

    CLI::App *evl = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset split");
    evl->add_option("--dataset", dataset_file, "Dataset file (default from out-dir)");
    evl->add_option("--checkpoint", checkpoint_file, "Checkpoint file (default from out-dir)");
    evl->add_option("--split", split_name, "train, val or test")->capture_default_str();
    evl->add_option("--variant", variant_override, "Selects the default checkpoint");
    evl->add_option("--group-size", group_size_override, "Selects the default dataset file")
        ->check(CLI::PositiveNumber);

    CLI::App *swp = app.add_subcommand("sweep", "Train the cnn variant across group sizes");
    swp->add_option("--group-sizes", sweep_groups, "Group sizes (default: divisors of the grid)");
    swp->add_option("--max-epochs", max_epochs_override, "Epoch cap")
        ->check(CLI::PositiveNumber);
    swp->add_option("--base-channels", base_override, "First-block width")
        ->check(CLI::PositiveNumber);
    swp->add_option("--precision", precision_override, "f32 or f64");

    CLI::App *rpt = app.add_subcommand("report", "Render comparison reports from artifacts");

    CLI::App *vpf = app.add_subcommand("validate-profile", "Parse and print a channel profile");
    vpf->add_option("profile", profile_arg, "Profile name or file")->required();

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp &e)
    {
        return app.exit(e);
    }
    catch (const CLI::ParseError &e)
    {
        app.exit(e);
        return 2;
    }

    try
    {
        if (g.threads > 0)
            Eigen::setNbThreads(g.threads);
        g.seed_set = seed_opt->count() > 0;
        g.out_dir_set = out_opt->count() > 0;

        RunConfig cfg = resolve_config(g);
        if (group_size_override > 0)
            cfg.group_size = group_size_override;
        if (!profile_override.empty())
            cfg.profile = profile_override;
        if (!variant_override.empty())
            cfg.variant = normalize_variant(variant_override);
        if (max_epochs_override > 0)
            cfg.train.max_epochs = max_epochs_override;
        if (batch_override > 0)
            cfg.train.batch_size = batch_override;
        if (lr_override > 0.0)
            cfg.train.learning_rate = lr_override;
        if (!optimizer_override.empty())
            cfg.train.optimizer = optimizer_override;
        if (base_override > 0)
            cfg.base_channels = base_override;
        if (!precision_override.empty())
            cfg.precision = precision_override;
        if (n_samples_override > 0)
            cfg.sim.n_samples = n_samples_override;

        if (sim->parsed())
            return cmd_simulate(std::move(cfg));
        if (trn->parsed())
            return cmd_train(std::move(cfg), dataset_file);
        if (evl->parsed())
            return cmd_eval(std::move(cfg), dataset_file, checkpoint_file, split_name);
        if (swp->parsed())
            return cmd_sweep(std::move(cfg), sweep_groups);
        if (rpt->parsed())
            return cmd_report(std::move(cfg));
        if (vpf->parsed())
            return cmd_validate_profile(profile_arg);
        std::cerr << "no subcommand selected\n";
        return 2;
    }
    catch (const config_error &e)
    {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    catch (const io_error &e)
    {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 3;
    }
    catch (const numeric_error &e)
    {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 4;
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
