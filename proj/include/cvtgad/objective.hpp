#pragma once

#include <utility>
#include <vector>

#include "cvtgad/tensor.hpp"

namespace cvtgad {

// Per-graph loss values plus their batch aggregate (the mean over graphs).
struct LossOutput {
    Tensor per_graph;   // {m}
    Tensor batch_mean;  // scalar
};

// InfoNCE-style agreement loss between the two views' node embeddings.
// Negatives for a node are the other nodes of its own graph; single-node
// graphs contribute zero.
LossOutput node_loss(const Tensor& node_f, const Tensor& node_s,
                     const std::vector<int>& membership, std::size_t n_graphs, double tau);

// Graph-level counterpart; negatives are the other graphs of the batch.
// A single-graph batch contributes zero.
LossOutput graph_loss(const Tensor& graph_f, const Tensor& graph_s, double tau);

Tensor total_loss(const Tensor& node_mean, const Tensor& graph_mean, double lambda_node,
                  double lambda_graph);

// lambda = sigma^alpha over the previous epoch's per-graph losses; (1, 1)
// before any epoch has completed. Zero deviations are floored at 1e-8.
std::pair<double, double> adaptive_weights(const std::vector<double>& node_losses,
                                           const std::vector<double>& graph_losses, double alpha);

struct ScoreStats {
    double mu_node = 0.0;
    double sigma_node = 1.0;
    double mu_graph = 0.0;
    double sigma_graph = 1.0;
    double alpha = 1.0;
    double lambda_node = 1.0;
    double lambda_graph = 1.0;
};

// Training-set mean/std of per-graph losses; sigma floored at 1e-8.
ScoreStats compute_score_stats(const std::vector<double>& node_losses,
                               const std::vector<double>& graph_losses, double alpha);

// z-normalized node loss plus z-normalized graph loss; higher = more anomalous.
double anomaly_score(double l_node, double l_graph, const ScoreStats& stats);

// Probability a random anomaly outscores a random normal, ties at 0.5.
double auc_score(const std::vector<double>& scores, const std::vector<int>& labels);

double population_std(const std::vector<double>& values);

}  // namespace cvtgad
