#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "tmfs/runner.hpp"

namespace {

struct Overrides {
    std::string config_path = "tmfs.json";
    std::string output_dir;
    std::vector<std::string> methods;
    std::vector<std::string> protocols;
    std::vector<std::string> datasets;  // filter by name
    std::uint64_t seed = 0;
    bool seed_set = false;
    int trials = 0;
    int parallelism = -1;
};

tmfs::RunConfig resolve(const Overrides& o) {
    tmfs::RunConfig cfg = tmfs::load_run_config(o.config_path);
    if (!o.output_dir.empty()) cfg.output_dir = o.output_dir;
    if (!o.methods.empty()) cfg.methods = o.methods;
    if (!o.protocols.empty()) cfg.protocols = o.protocols;
    if (o.seed_set) cfg.seed = o.seed;
    if (o.trials > 0) cfg.trials = o.trials;
    if (o.parallelism >= 0) cfg.parallelism = o.parallelism;
    if (!o.datasets.empty()) {
        std::vector<tmfs::DatasetConfig> kept;
        for (const auto& ds : cfg.datasets)
            for (const auto& name : o.datasets)
                if (ds.name == name) kept.push_back(ds);
        if (kept.empty())
            throw std::invalid_argument("no configured dataset matches the --datasets filter");
        cfg.datasets = std::move(kept);
    }
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Weighted Tsetlin Machine feature-selection benchmark"};
    app.require_subcommand(1);

    Overrides o;
    app.add_option("-c,--config", o.config_path, "Path to the JSON run configuration")
        ->capture_default_str();
    app.add_option("-o,--output-dir", o.output_dir, "Override the configured output directory");
    app.add_option("--methods", o.methods, "Override the method list (e.g. chi2 cw_sum:posneg)");
    app.add_option("--protocols", o.protocols, "Override the protocol list");
    app.add_option("--datasets", o.datasets, "Restrict the run to these configured datasets");
    auto* seed_opt = app.add_option("--seed", o.seed, "Override the run seed");
    app.add_option("--trials", o.trials, "Override the retraining trial count");
    app.add_option("--parallelism", o.parallelism, "Worker threads (0 = all cores)");

    bool export_bits_flag = false;
    bool dump_views_flag = false;
    auto* train = app.add_subcommand("train", "Train one model per dataset and report metrics");
    train->add_flag("--export-bits", export_bits_flag,
                    "Also dump the binarized datasets as 0/1 text");
    auto* rank = app.add_subcommand("rank", "Compute feature scores for the selected methods");
    rank->add_flag("--dump-views", dump_views_flag,
                   "Also dump the clause-weight accumulations");
    app.add_subcommand("eval", "Run the retraining benchmark over methods x protocols");
    app.add_subcommand("analyze", "Aggregate results into tables, distances, and heatmaps");
    app.add_subcommand("report", "Write a summary report of the run");

    CLI11_PARSE(app, argc, argv);

    try {
        o.seed_set = seed_opt->count() > 0;
        tmfs::RunConfig cfg = resolve(o);
        if (app.got_subcommand("train")) tmfs::cmd_train(cfg, export_bits_flag);
        if (app.got_subcommand("rank")) tmfs::cmd_rank(cfg, dump_views_flag);
        if (app.got_subcommand("eval")) tmfs::cmd_eval(cfg);
        if (app.got_subcommand("analyze")) tmfs::cmd_analyze(cfg);
        if (app.got_subcommand("report")) tmfs::cmd_report(cfg);
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 2;
    }
    return 0;
}
