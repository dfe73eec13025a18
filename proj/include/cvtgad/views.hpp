#pragma once

#include <utility>
#include <vector>

#include "cvtgad/graph.hpp"
#include "cvtgad/tensor.hpp"

namespace cvtgad {

struct ViewsConfig {
    int walk_steps = 8;
    bool use_node_labels = true;
};

// The two node-feature matrices derived for one graph. Topology is shared;
// view construction never adds or removes edges.
struct ViewPair {
    Tensor feature_view;    // n x d_f
    Tensor structure_view;  // n x (walk_steps + 1)
};

// Raw attributes, one-hot node labels appended when present and enabled;
// graphs with neither get a constant all-ones column.
Tensor build_feature_view(const Graph& g, const std::vector<int>& label_vocab,
                          bool use_node_labels);

// Row i = k-step random-walk return probabilities of node i (diagonal of
// (D^-1 A)^t for t = 1..k) followed by degree(i)/max-degree.
Tensor build_structure_view(const Graph& g, int walk_steps);

ViewPair make_view_pair(const Graph& g, const std::vector<int>& label_vocab,
                        const ViewsConfig& cfg);

std::vector<ViewPair> build_all_views(const Dataset& dataset, const ViewsConfig& cfg);

int feature_view_dim(const Dataset& dataset, const ViewsConfig& cfg);
inline int structure_view_dim(const ViewsConfig& cfg) { return cfg.walk_steps + 1; }

// Concatenates the per-graph view matrices of a batch into two leaf tensors
// (feature view, structure view) whose rows follow batch node order.
std::pair<Tensor, Tensor> batch_views(const std::vector<ViewPair>& views,
                                      const GraphBatch& batch);

}  // namespace cvtgad
