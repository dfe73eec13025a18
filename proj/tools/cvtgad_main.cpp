#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cvtgad/errors.hpp"
#include "cvtgad/experiment.hpp"
#include "cvtgad/model.hpp"
#include "cvtgad/views.hpp"

namespace fs = std::filesystem;
using namespace cvtgad;

namespace {

struct CommonOpts {
    std::string dataset;
    std::string data_dir;
    std::string config_file;
    std::string out_dir;
    long seed = -1;
    std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--dataset", o.dataset, "TU dataset name (e.g. AIDS)");
    cmd->add_option("--data-dir", o.data_dir, "directory holding the dataset files");
    cmd->add_option("--config", o.config_file, "key=value config file");
    cmd->add_option("--seed", o.seed, "random seed");
    cmd->add_option("--out", o.out_dir, "output directory");
    cmd->add_option("--set", o.overrides, "extra key=value overrides")->expected(-1);
}

ExperimentConfig build_config(const CommonOpts& o) {
    ExperimentConfig cfg;
    if (!o.config_file.empty()) cfg = load_config_file(o.config_file, cfg);
    if (!o.dataset.empty()) cfg.dataset = o.dataset;
    if (!o.data_dir.empty()) cfg.data_dir = o.data_dir;
    if (!o.out_dir.empty()) cfg.out_dir = o.out_dir;
    if (o.seed >= 0) cfg.seed = std::uint64_t(o.seed);
    for (const auto& kv : o.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw ConfigError("--set expects key=value, got '" + kv + "'");
        apply_config_key(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    return cfg;
}

std::string run_tag(const RunResult& r) {
    return r.dataset + "_" + r.variant + "_seed" + std::to_string(r.seed);
}

int cmd_train(const CommonOpts& opts) {
    const ExperimentConfig cfg = build_config(opts);
    std::cout << "training " << cfg.dataset << " (seed " << cfg.seed << ", "
              << cfg.resolved_epochs() << " epochs)\n";
    TrainedRun run = train_and_evaluate(cfg);

    fs::create_directories(cfg.out_dir);
    const fs::path json_path = fs::path(cfg.out_dir) / (run_tag(run.result) + ".json");
    const fs::path csv_path = fs::path(cfg.out_dir) / (run_tag(run.result) + "_summary.csv");
    const fs::path ckpt_path = fs::path(cfg.out_dir) / (run_tag(run.result) + ".ckpt");
    write_result_json(run.result, json_path);
    write_summary_csv({run.result}, csv_path);
    save_checkpoint(ckpt_path, run.model, cfg, run.result.stats);

    std::cout << "AUC " << run.result.auc << "  (" << run.result.wall_seconds << " s)\n"
              << "results: " << json_path.string() << "\n"
              << "checkpoint: " << ckpt_path.string() << "\n";
    return 0;
}

int cmd_ablate(const CommonOpts& opts, const std::string& grid,
               const std::vector<std::uint64_t>& seeds) {
    if (grid != "default") throw ConfigError("unknown ablation grid '" + grid + "'");
    const ExperimentConfig cfg = build_config(opts);
    const auto results = run_ablation_suite(cfg, seeds);
    if (results.empty()) {
        std::cerr << "all ablation variants failed\n";
        return 1;
    }
    fs::create_directories(cfg.out_dir);
    for (const auto& r : results)
        write_result_json(r, fs::path(cfg.out_dir) / (run_tag(r) + ".json"));
    const fs::path csv_path = fs::path(cfg.out_dir) / (cfg.dataset + "_ablation_summary.csv");
    write_summary_csv(results, csv_path);
    const std::string table = format_rank_table(results);
    std::cout << table;
    std::ofstream(fs::path(cfg.out_dir) / (cfg.dataset + "_ablation_ranks.txt")) << table;
    std::cout << "summary: " << csv_path.string() << "\n";
    return 0;
}

int cmd_score(const std::string& model_path, const CommonOpts& opts) {
    Checkpoint ck = load_checkpoint(model_path);
    ExperimentConfig cfg = ck.config;
    if (!opts.dataset.empty()) cfg.dataset = opts.dataset;
    if (!opts.data_dir.empty()) cfg.data_dir = opts.data_dir;

    Dataset ds = parse_tu_dataset(cfg.resolved_data_dir(), cfg.dataset);
    ds = assign_anomaly_labels(std::move(ds), cfg.label_rule());
    ds = make_split(std::move(ds), cfg.split_fraction, cfg.seed);
    const auto views = build_all_views(ds, cfg.views_config());

    const EvalLosses losses = evaluate_losses(ck.model, ds, views, ds.test_indices,
                                              cfg.eval_node_limit, cfg.loss_tau);
    std::vector<double> scores;
    std::vector<int> labels;
    std::cout << "graph_id,anomaly_label,score\n";
    for (std::size_t k = 0; k < losses.graph_ids.size(); ++k) {
        const double s = anomaly_score(losses.node[k], losses.graph[k], ck.stats);
        scores.push_back(s);
        labels.push_back(ds.graphs[std::size_t(losses.graph_ids[k])].anomaly_label);
        std::cout << losses.graph_ids[k] << "," << labels.back() << "," << s << "\n";
    }
    std::cerr << "AUC " << auc_score(scores, labels) << " over " << scores.size()
              << " test graphs\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"CVTGAD: unsupervised graph-level anomaly detection"};
    app.require_subcommand(1);

    CommonOpts train_opts, ablate_opts, score_opts;
    std::string grid = "default";
    std::vector<std::uint64_t> seeds;
    std::string model_path;

    CLI::App* train = app.add_subcommand("train", "train one model and score the test split");
    add_common(train, train_opts);

    CLI::App* ablate = app.add_subcommand("ablate", "run the ablation variant grid");
    add_common(ablate, ablate_opts);
    ablate->add_option("--grid", grid, "variant grid (default)");
    ablate->add_option("--seeds", seeds, "seed list shared by every variant")->delimiter(',');

    CLI::App* score = app.add_subcommand("score", "score a dataset with a saved checkpoint");
    score->add_option("--model", model_path, "checkpoint file")->required();
    add_common(score, score_opts);

    try {
        app.parse(argc, argv);
        if (train->parsed()) return cmd_train(train_opts);
        if (ablate->parsed()) return cmd_ablate(ablate_opts, grid, seeds);
        if (score->parsed()) return cmd_score(model_path, score_opts);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
