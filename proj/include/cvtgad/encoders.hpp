#pragma once

#include <vector>

#include "cvtgad/graph.hpp"
#include "cvtgad/nn.hpp"
#include "cvtgad/tensor.hpp"

namespace cvtgad {

enum class EncoderKind { gin, gcn };

struct EncoderConfig {
    EncoderKind kind = EncoderKind::gin;
    int layers = 2;
    int hidden_dim = 16;
};

// Node- and graph-level embeddings of one batch, per view.
struct EmbeddingBatch {
    Tensor node_f;   // total_nodes x d
    Tensor node_s;
    Tensor graph_f;  // m x d
    Tensor graph_s;
    std::vector<int> membership;
    std::size_t graph_count = 0;
};

// Sum aggregation with self term: coefficients of I + A.
std::vector<PropEntry> gin_prop_entries(std::size_t n,
                                        const std::vector<std::pair<int, int>>& edges);
// Symmetric-normalized coefficients of D^-1/2 (A + I) D^-1/2.
std::vector<PropEntry> gcn_prop_entries(std::size_t n,
                                        const std::vector<std::pair<int, int>>& edges);

// out_i = MLP(h_i + sum of neighbor rows), epsilon fixed at 0.
Tensor gin_layer(const Tensor& h, const std::vector<std::pair<int, int>>& edges, const Mlp& mlp);
// out = relu(D^-1/2 (A + I) D^-1/2 . h . w)
Tensor gcn_layer(const Tensor& h, const std::vector<std::pair<int, int>>& edges, const Tensor& w);

// Row g = mean of the node rows belonging to graph g.
Tensor readout_mean(const Tensor& node_embeddings, const std::vector<int>& membership,
                    std::size_t n_graphs);

// One view's L-layer stack.
struct ViewEncoder {
    EncoderKind kind = EncoderKind::gin;
    std::vector<Mlp> gin_mlps;
    std::vector<Tensor> gcn_weights;

    ViewEncoder() = default;
    ViewEncoder(EncoderKind kind, std::size_t in_dim, std::size_t hidden, std::size_t layers,
                Rng& rng);

    Tensor encode(const Tensor& x, const std::vector<PropEntry>& entries) const;
    void collect_params(std::vector<Tensor>& out) const;
    std::size_t layer_count() const {
        return kind == EncoderKind::gin ? gin_mlps.size() : gcn_weights.size();
    }
    std::size_t input_dim() const {
        return kind == EncoderKind::gin ? gin_mlps.front().layers.front().in_dim()
                                        : gcn_weights.front().shape()[0];
    }
};

// Both views, separate parameter sets (the views have different input dims).
struct Encoder {
    EncoderConfig cfg;
    ViewEncoder f;
    ViewEncoder s;

    Encoder() = default;
    Encoder(const EncoderConfig& cfg, std::size_t feature_dim, std::size_t structure_dim,
            Rng& rng);

    EmbeddingBatch encode(const GraphBatch& batch, const Tensor& xf, const Tensor& xs) const;
    void collect_params(std::vector<Tensor>& out) const;
};

}  // namespace cvtgad
