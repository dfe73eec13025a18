#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "cvtgad/config.hpp"
#include "cvtgad/model.hpp"
#include "cvtgad/objective.hpp"

namespace cvtgad {

struct RunResult {
    std::string dataset;
    std::string variant;
    std::uint64_t seed = 0;
    std::vector<double> epoch_losses;
    double auc = 0.0;
    std::vector<int> test_graph_ids;
    std::vector<double> test_scores;
    std::vector<int> test_labels;
    ScoreStats stats;
    double wall_seconds = 0.0;
    ExperimentConfig config;
};

bool operator==(const RunResult& a, const RunResult& b);

// Trained model together with everything needed to score graphs later.
struct TrainedRun {
    RunResult result;
    CvtgadModel model;
};

// parse -> label -> split -> views -> train on normal graphs -> fit score
// stats -> score test set -> AUC. Deterministic for a fixed (config, seed).
TrainedRun train_and_evaluate(const ExperimentConfig& config);
RunResult run_experiment(const ExperimentConfig& config);

// Same pipeline on an already labeled+split dataset (fixtures, tests).
TrainedRun train_and_evaluate_on(const Dataset& dataset, const ExperimentConfig& config);

// Per-graph losses of `indices` under the trained model, evaluation mode,
// deterministic node-capped batching.
struct EvalLosses {
    std::vector<int> graph_ids;
    std::vector<double> node;
    std::vector<double> graph;
};
EvalLosses evaluate_losses(const CvtgadModel& model, const Dataset& dataset,
                           const std::vector<ViewPair>& views, const std::vector<int>& indices,
                           std::size_t eval_node_limit, double tau);

// The default ablation grid of Tables 3-5: full, w/o L1, w/o CM, w/o both,
// w/o transformer, cross Q, cross V, projection depth 1/3, residual depth 1/3.
std::vector<ExperimentConfig> ablation_grid(const ExperimentConfig& base);
std::vector<RunResult> run_ablation_suite(const ExperimentConfig& base,
                                          const std::vector<std::uint64_t>& seeds = {});

// JSON record per run; CSV summary per suite. The CSV holds only
// deterministic fields (wall-clock stays in the JSON).
void write_result_json(const RunResult& result, const std::filesystem::path& path);
RunResult read_result_json(const std::filesystem::path& path);
void write_summary_csv(const std::vector<RunResult>& results, const std::filesystem::path& path);
std::string summary_csv_header();

// Mean-AUC-per-variant table, best first (mirrors the paper's rank tables).
std::string format_rank_table(const std::vector<RunResult>& results);

}  // namespace cvtgad
