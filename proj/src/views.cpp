#include "cvtgad/views.hpp"

#include <algorithm>

#include "cvtgad/errors.hpp"

namespace cvtgad {

Tensor build_feature_view(const Graph& g, const std::vector<int>& label_vocab,
                          bool use_node_labels) {
    const std::size_t n = std::size_t(g.node_count);
    const bool attrs = !g.node_attrs.empty();
    const bool labels = use_node_labels && !g.node_labels.empty() && !label_vocab.empty();

    std::size_t d = 0;
    if (attrs) d += g.node_attrs[0].size();
    if (labels) d += label_vocab.size();
    if (d == 0) return Tensor::full({n, 1}, 1.0);  // plain graph: constant feature

    std::vector<double> data(n * d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t c = 0;
        if (attrs)
            for (double v : g.node_attrs[i]) data[i * d + c++] = v;
        if (labels) {
            const auto it =
                std::lower_bound(label_vocab.begin(), label_vocab.end(), g.node_labels[i]);
            if (it == label_vocab.end() || *it != g.node_labels[i])
                throw ContractError("build_feature_view: node label " +
                                    std::to_string(g.node_labels[i]) + " not in vocabulary");
            data[i * d + c + std::size_t(it - label_vocab.begin())] = 1.0;
        }
    }
    return Tensor::from_data({n, d}, std::move(data));
}

Tensor build_structure_view(const Graph& g, int walk_steps) {
    if (walk_steps < 1) throw ContractError("build_structure_view: walk_steps must be >= 1");
    const std::size_t n = std::size_t(g.node_count);
    const std::size_t d = std::size_t(walk_steps) + 1;

    const auto deg = g.degrees();
    std::vector<std::vector<int>> adj(n);
    for (const auto& [a, b] : g.edges) {
        adj[a].push_back(b);
        if (a != b) adj[b].push_back(a);
    }

    std::vector<double> data(n * d, 0.0);
    std::vector<double> v(n), next(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::fill(v.begin(), v.end(), 0.0);
        v[i] = 1.0;
        for (int t = 0; t < walk_steps; ++t) {
            std::fill(next.begin(), next.end(), 0.0);
            for (std::size_t r = 0; r < n; ++r) {
                if (deg[r] == 0) continue;
                double acc = 0.0;
                for (int c : adj[r]) acc += v[std::size_t(c)];
                next[r] = acc / double(deg[r]);
            }
            std::swap(v, next);
            data[i * d + std::size_t(t)] = v[i];
        }
    }

    const int max_deg = deg.empty() ? 0 : *std::max_element(deg.begin(), deg.end());
    for (std::size_t i = 0; i < n; ++i)
        data[i * d + d - 1] = max_deg > 0 ? double(deg[i]) / double(max_deg) : 0.0;

    return Tensor::from_data({n, d}, std::move(data));
}

ViewPair make_view_pair(const Graph& g, const std::vector<int>& label_vocab,
                        const ViewsConfig& cfg) {
    return {build_feature_view(g, label_vocab, cfg.use_node_labels),
            build_structure_view(g, cfg.walk_steps)};
}

std::vector<ViewPair> build_all_views(const Dataset& dataset, const ViewsConfig& cfg) {
    std::vector<ViewPair> out;
    out.reserve(dataset.graphs.size());
    for (const auto& g : dataset.graphs)
        out.push_back(make_view_pair(g, dataset.node_label_values, cfg));
    return out;
}

int feature_view_dim(const Dataset& dataset, const ViewsConfig& cfg) {
    int d = dataset.attr_dim;
    if (cfg.use_node_labels && dataset.has_node_labels())
        d += int(dataset.node_label_values.size());
    return d > 0 ? d : 1;
}

std::pair<Tensor, Tensor> batch_views(const std::vector<ViewPair>& views,
                                      const GraphBatch& batch) {
    if (batch.graph_ids.empty()) throw ContractError("batch_views: empty batch");
    const std::size_t df = views.at(batch.graph_ids[0]).feature_view.cols();
    const std::size_t ds = views.at(batch.graph_ids[0]).structure_view.cols();

    std::vector<double> xf, xs;
    xf.reserve(batch.total_nodes * df);
    xs.reserve(batch.total_nodes * ds);
    for (int id : batch.graph_ids) {
        const ViewPair& vp = views.at(std::size_t(id));
        if (vp.feature_view.cols() != df || vp.structure_view.cols() != ds)
            throw ContractError("batch_views: inconsistent view dimensions across graphs");
        xf.insert(xf.end(), vp.feature_view.data().begin(), vp.feature_view.data().end());
        xs.insert(xs.end(), vp.structure_view.data().begin(), vp.structure_view.data().end());
    }
    return {Tensor::from_data({batch.total_nodes, df}, std::move(xf)),
            Tensor::from_data({batch.total_nodes, ds}, std::move(xs))};
}

}  // namespace cvtgad
