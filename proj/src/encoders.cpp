#include "cvtgad/encoders.hpp"

#include <cmath>

#include "cvtgad/errors.hpp"

namespace cvtgad {

std::vector<PropEntry> gin_prop_entries(std::size_t n,
                                        const std::vector<std::pair<int, int>>& edges) {
    std::vector<PropEntry> entries;
    entries.reserve(n + 2 * edges.size());
    for (std::size_t i = 0; i < n; ++i)
        entries.push_back({std::uint32_t(i), std::uint32_t(i), 1.0});
    for (const auto& [a, b] : edges) {
        entries.push_back({std::uint32_t(a), std::uint32_t(b), 1.0});
        if (a != b) entries.push_back({std::uint32_t(b), std::uint32_t(a), 1.0});
    }
    return entries;
}

std::vector<PropEntry> gcn_prop_entries(std::size_t n,
                                        const std::vector<std::pair<int, int>>& edges) {
    std::vector<double> deg(n, 1.0);  // self-connection
    for (const auto& [a, b] : edges) {
        deg[std::size_t(a)] += 1.0;
        if (a != b) deg[std::size_t(b)] += 1.0;
    }
    std::vector<double> inv_sqrt(n);
    for (std::size_t i = 0; i < n; ++i) inv_sqrt[i] = 1.0 / std::sqrt(deg[i]);

    std::vector<PropEntry> entries;
    entries.reserve(n + 2 * edges.size());
    for (std::size_t i = 0; i < n; ++i)
        entries.push_back({std::uint32_t(i), std::uint32_t(i), inv_sqrt[i] * inv_sqrt[i]});
    for (const auto& [a, b] : edges) {
        const double w = inv_sqrt[std::size_t(a)] * inv_sqrt[std::size_t(b)];
        entries.push_back({std::uint32_t(a), std::uint32_t(b), w});
        if (a != b) entries.push_back({std::uint32_t(b), std::uint32_t(a), w});
    }
    return entries;
}

Tensor gin_layer(const Tensor& h, const std::vector<std::pair<int, int>>& edges, const Mlp& mlp) {
    return mlp.forward(propagate(h, gin_prop_entries(h.rows(), edges)));
}

Tensor gcn_layer(const Tensor& h, const std::vector<std::pair<int, int>>& edges, const Tensor& w) {
    return relu(matmul(propagate(h, gcn_prop_entries(h.rows(), edges)), w));
}

Tensor readout_mean(const Tensor& node_embeddings, const std::vector<int>& membership,
                    std::size_t n_graphs) {
    return segment_mean(node_embeddings, membership, n_graphs);
}

ViewEncoder::ViewEncoder(EncoderKind kind_, std::size_t in_dim, std::size_t hidden,
                         std::size_t layers, Rng& rng)
    : kind(kind_) {
    if (layers == 0) throw ConfigError("encoder: layer count must be >= 1");
    std::size_t d = in_dim;
    for (std::size_t l = 0; l < layers; ++l) {
        if (kind == EncoderKind::gin)
            gin_mlps.emplace_back(d, hidden, hidden, /*depth=*/2, rng);
        else
            gcn_weights.push_back(xavier_uniform(d, hidden, rng));
        d = hidden;
    }
}

Tensor ViewEncoder::encode(const Tensor& x, const std::vector<PropEntry>& entries) const {
    Tensor h = x;
    if (kind == EncoderKind::gin) {
        for (const auto& mlp : gin_mlps) h = mlp.forward(propagate(h, entries));
    } else {
        for (const auto& w : gcn_weights) h = relu(matmul(propagate(h, entries), w));
    }
    return h;
}

void ViewEncoder::collect_params(std::vector<Tensor>& out) const {
    for (const auto& mlp : gin_mlps) mlp.collect_params(out);
    for (const auto& w : gcn_weights) out.push_back(w);
}

Encoder::Encoder(const EncoderConfig& cfg_, std::size_t feature_dim, std::size_t structure_dim,
                 Rng& rng)
    : cfg(cfg_),
      f(cfg_.kind, feature_dim, std::size_t(cfg_.hidden_dim), std::size_t(cfg_.layers), rng),
      s(cfg_.kind, structure_dim, std::size_t(cfg_.hidden_dim), std::size_t(cfg_.layers), rng) {}

EmbeddingBatch Encoder::encode(const GraphBatch& batch, const Tensor& xf, const Tensor& xs) const {
    if (xf.rows() != batch.total_nodes || xs.rows() != batch.total_nodes)
        throw ContractError("encode: view rows do not match batch node count");
    if (xf.cols() != f.input_dim() || xs.cols() != s.input_dim())
        throw ConfigError("encode: view dims (" + std::to_string(xf.cols()) + ", " +
                          std::to_string(xs.cols()) + ") do not match encoder input dims (" +
                          std::to_string(f.input_dim()) + ", " + std::to_string(s.input_dim()) +
                          ")");

    const auto entries = cfg.kind == EncoderKind::gin
                             ? gin_prop_entries(batch.total_nodes, batch.edges)
                             : gcn_prop_entries(batch.total_nodes, batch.edges);

    EmbeddingBatch out;
    out.node_f = f.encode(xf, entries);
    out.node_s = s.encode(xs, entries);
    out.graph_f = readout_mean(out.node_f, batch.membership, batch.graph_count());
    out.graph_s = readout_mean(out.node_s, batch.membership, batch.graph_count());
    out.membership = batch.membership;
    out.graph_count = batch.graph_count();
    return out;
}

void Encoder::collect_params(std::vector<Tensor>& out) const {
    f.collect_params(out);
    s.collect_params(out);
}

}  // namespace cvtgad
