#include "cvtgad/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "cvtgad/errors.hpp"
#include "cvtgad/optim.hpp"
#include "cvtgad/rng.hpp"
#include "cvtgad/views.hpp"

namespace cvtgad {

using nlohmann::json;

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    return seed ^ (0x9e3779b97f4a7c15ULL * (salt + 1));
}

// Shortest exact decimal form; keeps emitted files byte-stable.
std::string fmt_double(double v) { return json(v).dump(); }

}  // namespace

bool operator==(const RunResult& a, const RunResult& b) {
    return a.dataset == b.dataset && a.variant == b.variant && a.seed == b.seed &&
           a.epoch_losses == b.epoch_losses && a.auc == b.auc &&
           a.test_graph_ids == b.test_graph_ids && a.test_scores == b.test_scores &&
           a.test_labels == b.test_labels && a.stats.mu_node == b.stats.mu_node &&
           a.stats.sigma_node == b.stats.sigma_node && a.stats.mu_graph == b.stats.mu_graph &&
           a.stats.sigma_graph == b.stats.sigma_graph && a.stats.alpha == b.stats.alpha &&
           a.stats.lambda_node == b.stats.lambda_node &&
           a.stats.lambda_graph == b.stats.lambda_graph &&
           a.wall_seconds == b.wall_seconds && a.config == b.config;
}

EvalLosses evaluate_losses(const CvtgadModel& model, const Dataset& dataset,
                           const std::vector<ViewPair>& views, const std::vector<int>& indices,
                           std::size_t eval_node_limit, double tau) {
    NoGradGuard no_grad;
    EvalLosses out;
    for (const auto& batch : batch_graphs_by_nodes(dataset, indices, eval_node_limit)) {
        const auto [xf, xs] = batch_views(views, batch);
        const EmbeddingBatch emb = model.forward(batch, xf, xs);
        const LossOutput nl =
            node_loss(emb.node_f, emb.node_s, batch.membership, batch.graph_count(), tau);
        const LossOutput gl = graph_loss(emb.graph_f, emb.graph_s, tau);
        for (std::size_t k = 0; k < batch.graph_count(); ++k) {
            out.graph_ids.push_back(batch.graph_ids[k]);
            out.node.push_back(nl.per_graph.at(k));
            out.graph.push_back(gl.per_graph.at(k));
        }
    }
    return out;
}

TrainedRun train_and_evaluate_on(const Dataset& dataset, const ExperimentConfig& config) {
    const auto t0 = std::chrono::steady_clock::now();
    if (dataset.train_indices.empty())
        throw ProtocolError("training set is empty; check split fraction and labels");

    const ViewsConfig views_cfg = config.views_config();
    const auto views = build_all_views(dataset, views_cfg);
    const std::size_t fd = std::size_t(feature_view_dim(dataset, views_cfg));
    const std::size_t sd = std::size_t(structure_view_dim(views_cfg));

    CvtgadModel model(fd, sd, config.encoder_config(), config.cvt_config(),
                      mix_seed(config.seed, 1));
    Adam opt(model.parameters(), {config.lr});

    const double tau = config.loss_tau;
    const double alpha = config.loss_alpha;
    const int epochs = config.resolved_epochs();

    RunResult result;
    result.dataset = dataset.name;
    result.variant = config.variant;
    result.seed = config.seed;
    result.config = config;

    std::vector<double> prev_node, prev_graph;
    for (int epoch = 0; epoch < epochs; ++epoch) {
        const auto [lambda_node, lambda_graph] = adaptive_weights(prev_node, prev_graph, alpha);
        std::vector<double> cur_node, cur_graph;
        double epoch_loss = 0.0;
        std::size_t n_batches = 0;

        for (const auto& batch : batch_graphs(dataset, dataset.train_indices, config.batch_size,
                                              /*shuffle=*/true,
                                              mix_seed(config.seed, 1000 + std::uint64_t(epoch)))) {
            const auto [xf, xs] = batch_views(views, batch);
            const EmbeddingBatch emb = model.forward(batch, xf, xs);
            const LossOutput nl =
                node_loss(emb.node_f, emb.node_s, batch.membership, batch.graph_count(), tau);
            const LossOutput gl = graph_loss(emb.graph_f, emb.graph_s, tau);
            Tensor loss = total_loss(nl.batch_mean, gl.batch_mean, lambda_node, lambda_graph);

            opt.zero_grad();
            loss.backward();
            opt.step();

            for (std::size_t k = 0; k < batch.graph_count(); ++k) {
                cur_node.push_back(nl.per_graph.at(k));
                cur_graph.push_back(gl.per_graph.at(k));
            }
            epoch_loss += loss.value();
            ++n_batches;
        }
        result.epoch_losses.push_back(epoch_loss / double(n_batches));
        prev_node = std::move(cur_node);
        prev_graph = std::move(cur_graph);
    }

    // Score statistics from a full evaluation pass over the training set.
    const EvalLosses train_losses =
        evaluate_losses(model, dataset, views, dataset.train_indices, config.eval_node_limit, tau);
    result.stats = compute_score_stats(train_losses.node, train_losses.graph, alpha);

    const EvalLosses test_losses =
        evaluate_losses(model, dataset, views, dataset.test_indices, config.eval_node_limit, tau);
    result.test_graph_ids = test_losses.graph_ids;
    for (std::size_t k = 0; k < test_losses.graph_ids.size(); ++k) {
        result.test_scores.push_back(
            anomaly_score(test_losses.node[k], test_losses.graph[k], result.stats));
        result.test_labels.push_back(
            dataset.graphs[std::size_t(test_losses.graph_ids[k])].anomaly_label);
    }
    result.auc = auc_score(result.test_scores, result.test_labels);

    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {std::move(result), std::move(model)};
}

TrainedRun train_and_evaluate(const ExperimentConfig& config) {
    if (config.dataset.empty()) throw ConfigError("no dataset configured");
    Dataset ds;
    try {
        ds = parse_tu_dataset(config.resolved_data_dir(), config.dataset);
    } catch (const Error& e) {
        throw IngestError(std::string("while ingesting dataset: ") + e.what());
    }
    ds = assign_anomaly_labels(std::move(ds), config.label_rule());
    ds = make_split(std::move(ds), config.split_fraction, config.seed);
    return train_and_evaluate_on(ds, config);
}

RunResult run_experiment(const ExperimentConfig& config) {
    return train_and_evaluate(config).result;
}

std::vector<ExperimentConfig> ablation_grid(const ExperimentConfig& base) {
    std::vector<ExperimentConfig> grid;
    auto push = [&](const std::string& variant, auto&& edit) {
        ExperimentConfig c = base;
        c.variant = variant;
        edit(c);
        grid.push_back(std::move(c));
    };
    push("full", [](ExperimentConfig&) {});
    push("wo_l1", [](ExperimentConfig& c) { c.cvt_normalization = "softmax_only"; });
    push("wo_cm", [](ExperimentConfig& c) { c.cvt_crossed_matrix = "none"; });
    push("wo_l1_cm", [](ExperimentConfig& c) {
        c.cvt_normalization = "softmax_only";
        c.cvt_crossed_matrix = "none";
    });
    push("wo_transformer_ca", [](ExperimentConfig& c) { c.cvt_enabled = false; });
    push("cross_q", [](ExperimentConfig& c) { c.cvt_crossed_matrix = "q"; });
    push("cross_v", [](ExperimentConfig& c) { c.cvt_crossed_matrix = "v"; });
    push("pn_1", [](ExperimentConfig& c) { c.cvt_proj_layers = 1; });
    push("pn_3", [](ExperimentConfig& c) { c.cvt_proj_layers = 3; });
    push("rn_1", [](ExperimentConfig& c) { c.cvt_residual_layers = 1; });
    push("rn_3", [](ExperimentConfig& c) { c.cvt_residual_layers = 3; });
    return grid;
}

std::vector<RunResult> run_ablation_suite(const ExperimentConfig& base,
                                          const std::vector<std::uint64_t>& seeds) {
    const std::vector<std::uint64_t> seed_set = seeds.empty()
                                                    ? std::vector<std::uint64_t>{base.seed}
                                                    : seeds;
    std::vector<RunResult> results;
    for (const auto& cfg : ablation_grid(base)) {
        for (std::uint64_t seed : seed_set) {
            ExperimentConfig c = cfg;
            c.seed = seed;
            try {
                results.push_back(run_experiment(c));
            } catch (const std::exception& e) {
                std::cerr << "ablation variant '" << c.variant << "' seed " << seed
                          << " failed: " << e.what() << "\n";
            }
        }
    }
    return results;
}

void write_result_json(const RunResult& r, const std::filesystem::path& path) {
    json j;
    j["dataset"] = r.dataset;
    j["variant"] = r.variant;
    j["seed"] = r.seed;
    j["epoch_losses"] = r.epoch_losses;
    j["auc"] = r.auc;
    j["test_graph_ids"] = r.test_graph_ids;
    j["test_scores"] = r.test_scores;
    j["test_labels"] = r.test_labels;
    j["stats"] = {{"mu_node", r.stats.mu_node},       {"sigma_node", r.stats.sigma_node},
                  {"mu_graph", r.stats.mu_graph},     {"sigma_graph", r.stats.sigma_graph},
                  {"alpha", r.stats.alpha},           {"lambda_node", r.stats.lambda_node},
                  {"lambda_graph", r.stats.lambda_graph}};
    j["wall_seconds"] = r.wall_seconds;
    j["config"] = json::parse(config_to_json(r.config));
    std::ofstream out(path);
    if (!out) throw IngestError("cannot write result file: " + path.string());
    out << j.dump(2) << "\n";
    if (!out) throw IngestError("failed writing result file: " + path.string());
}

RunResult read_result_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IngestError("cannot open result file: " + path.string());
    json j;
    in >> j;
    RunResult r;
    r.dataset = j.at("dataset").get<std::string>();
    r.variant = j.at("variant").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.epoch_losses = j.at("epoch_losses").get<std::vector<double>>();
    r.auc = j.at("auc").get<double>();
    r.test_graph_ids = j.at("test_graph_ids").get<std::vector<int>>();
    r.test_scores = j.at("test_scores").get<std::vector<double>>();
    r.test_labels = j.at("test_labels").get<std::vector<int>>();
    const auto& s = j.at("stats");
    r.stats.mu_node = s.at("mu_node").get<double>();
    r.stats.sigma_node = s.at("sigma_node").get<double>();
    r.stats.mu_graph = s.at("mu_graph").get<double>();
    r.stats.sigma_graph = s.at("sigma_graph").get<double>();
    r.stats.alpha = s.at("alpha").get<double>();
    r.stats.lambda_node = s.at("lambda_node").get<double>();
    r.stats.lambda_graph = s.at("lambda_graph").get<double>();
    r.wall_seconds = j.at("wall_seconds").get<double>();
    r.config = config_from_json(j.at("config").dump());
    return r;
}

std::string summary_csv_header() { return "dataset,variant,seed,auc"; }

void write_summary_csv(const std::vector<RunResult>& results,
                       const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IngestError("cannot write summary file: " + path.string());
    out << summary_csv_header() << "\n";
    for (const auto& r : results)
        out << r.dataset << "," << r.variant << "," << r.seed << "," << fmt_double(r.auc) << "\n";
    if (!out) throw IngestError("failed writing summary file: " + path.string());
}

std::string format_rank_table(const std::vector<RunResult>& results) {
    std::map<std::string, std::vector<double>> by_variant;
    for (const auto& r : results) by_variant[r.variant].push_back(r.auc);
    std::vector<std::pair<std::string, double>> rows;
    for (const auto& [variant, aucs] : by_variant) {
        double mean = 0.0;
        for (double a : aucs) mean += a;
        rows.emplace_back(variant, mean / double(aucs.size()));
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    std::ostringstream os;
    os << "rank  variant             mean_auc\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        os << i + 1;
        os << std::string(i + 1 < 10 ? 5 : 4, ' ');
        std::string name = rows[i].first;
        name.resize(20, ' ');
        os << name << fmt_double(rows[i].second) << "\n";
    }
    return os.str();
}

}  // namespace cvtgad
