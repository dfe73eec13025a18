#include "cvtgad/objective.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>

#include "cvtgad/errors.hpp"

namespace cvtgad {

namespace {

constexpr double kSigmaFloor = 1e-8;

// Shared InfoNCE assembly. `mask` marks negative pairs, `valid` zeroes
// entries whose negative set is empty (their masked row/col sums are 0, so
// a guard of 1 keeps log() defined; the term is then multiplied away).
struct ContrastTerms {
    Tensor combined;  // per-row l(f->s) + l(s->f), zeroed where invalid
};

ContrastTerms contrastive_terms(const Tensor& emb_f, const Tensor& emb_s, const Tensor& mask,
                                const std::vector<double>& valid, double tau) {
    const std::size_t n = emb_f.rows();
    const Tensor sim = cosine_similarity_matrix(emb_f, emb_s);
    const Tensor logits = scale(sim, 1.0 / tau);
    const Tensor expm = mul(exp(logits), mask);

    std::vector<double> guard(n);
    for (std::size_t i = 0; i < n; ++i) guard[i] = 1.0 - valid[i];
    const Tensor guard_t = Tensor::from_data({n}, guard);
    const Tensor valid_t = Tensor::from_data({n}, valid);

    const Tensor pos = diagonal(logits);
    const Tensor l_fs = sub(log(add(row_sum(expm), guard_t)), pos);
    const Tensor l_sf = sub(log(add(col_sum(expm), guard_t)), pos);
    return {mul(add(l_fs, l_sf), valid_t)};
}

}  // namespace

LossOutput node_loss(const Tensor& node_f, const Tensor& node_s,
                     const std::vector<int>& membership, std::size_t n_graphs, double tau) {
    if (node_f.shape() != node_s.shape())
        throw ContractError("node_loss: view shapes differ, " + node_f.shape_str() + " vs " +
                            node_s.shape_str());
    const std::size_t n = node_f.rows();
    if (membership.size() != n)
        throw ContractError("node_loss: membership does not cover all nodes");
    if (tau <= 0.0) throw ContractError("node_loss: tau must be positive");

    std::vector<std::size_t> counts(n_graphs, 0);
    for (int g : membership) counts[std::size_t(g)]++;

    // Negatives: same graph, other node.
    std::vector<double> mask(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j && membership[i] == membership[j]) mask[i * n + j] = 1.0;
    std::vector<double> valid(n);
    for (std::size_t i = 0; i < n; ++i)
        valid[i] = counts[std::size_t(membership[i])] > 1 ? 1.0 : 0.0;

    const auto terms = contrastive_terms(node_f, node_s, Tensor::from_data({n, n}, mask),
                                         valid, tau);
    LossOutput out;
    out.per_graph = scale(segment_mean(terms.combined, membership, n_graphs), 0.5);
    out.batch_mean = mean_all(out.per_graph);
    return out;
}

LossOutput graph_loss(const Tensor& graph_f, const Tensor& graph_s, double tau) {
    if (graph_f.shape() != graph_s.shape())
        throw ContractError("graph_loss: view shapes differ, " + graph_f.shape_str() + " vs " +
                            graph_s.shape_str());
    const std::size_t m = graph_f.rows();
    if (tau <= 0.0) throw ContractError("graph_loss: tau must be positive");
    if (m == 1)
        std::cerr << "warning: graph-level loss has no negatives in a batch of one graph; "
                     "contributing 0\n";

    std::vector<double> mask(m * m, 1.0);
    for (std::size_t i = 0; i < m; ++i) mask[i * m + i] = 0.0;
    std::vector<double> valid(m, m > 1 ? 1.0 : 0.0);

    const auto terms = contrastive_terms(graph_f, graph_s, Tensor::from_data({m, m}, mask),
                                         valid, tau);
    LossOutput out;
    out.per_graph = scale(terms.combined, 0.5);
    out.batch_mean = mean_all(out.per_graph);
    return out;
}

Tensor total_loss(const Tensor& node_mean, const Tensor& graph_mean, double lambda_node,
                  double lambda_graph) {
    return add(scale(node_mean, lambda_node), scale(graph_mean, lambda_graph));
}

double population_std(const std::vector<double>& values) {
    if (values.empty()) return 0.0;
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / double(values.size());
    double acc = 0.0;
    for (double v : values) acc += (v - mean) * (v - mean);
    return std::sqrt(acc / double(values.size()));
}

std::pair<double, double> adaptive_weights(const std::vector<double>& node_losses,
                                           const std::vector<double>& graph_losses,
                                           double alpha) {
    if (alpha < 0.0) throw ConfigError("adaptive_weights: alpha must be >= 0");
    if (node_losses.empty() || graph_losses.empty()) return {1.0, 1.0};
    const double sn = std::max(population_std(node_losses), kSigmaFloor);
    const double sg = std::max(population_std(graph_losses), kSigmaFloor);
    return {std::pow(sn, alpha), std::pow(sg, alpha)};
}

ScoreStats compute_score_stats(const std::vector<double>& node_losses,
                               const std::vector<double>& graph_losses, double alpha) {
    if (node_losses.empty() || graph_losses.empty())
        throw ProtocolError("compute_score_stats: no training losses recorded");
    ScoreStats st;
    st.alpha = alpha;
    st.mu_node =
        std::accumulate(node_losses.begin(), node_losses.end(), 0.0) / double(node_losses.size());
    st.mu_graph = std::accumulate(graph_losses.begin(), graph_losses.end(), 0.0) /
                  double(graph_losses.size());
    st.sigma_node = std::max(population_std(node_losses), kSigmaFloor);
    st.sigma_graph = std::max(population_std(graph_losses), kSigmaFloor);
    st.lambda_node = std::pow(st.sigma_node, alpha);
    st.lambda_graph = std::pow(st.sigma_graph, alpha);
    return st;
}

double anomaly_score(double l_node, double l_graph, const ScoreStats& stats) {
    return (l_node - stats.mu_node) / stats.sigma_node +
           (l_graph - stats.mu_graph) / stats.sigma_graph;
}

double auc_score(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size())
        throw ContractError("auc_score: scores and labels differ in length");
    std::size_t n_pos = 0, n_neg = 0;
    for (int l : labels) (l == 1 ? n_pos : n_neg)++;
    if (n_pos == 0 || n_neg == 0)
        throw MetricError("auc_score: both classes must be present");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Average ranks over ties (Mann-Whitney).
    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        const double avg_rank = 0.5 * double(i + 1 + j);  // ranks are 1-based
        for (std::size_t k = i; k < j; ++k)
            if (labels[order[k]] == 1) rank_sum_pos += avg_rank;
        i = j;
    }
    return (rank_sum_pos - 0.5 * double(n_pos) * double(n_pos + 1)) /
           (double(n_pos) * double(n_neg));
}

}  // namespace cvtgad
