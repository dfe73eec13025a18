#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace cvtgad {

// One attributed graph. Edges are undirected, canonicalized to (a <= b),
// sorted, deduplicated; node ids are graph-local and 0-based.
struct Graph {
    int node_count = 0;
    std::vector<std::pair<int, int>> edges;
    std::vector<std::vector<double>> node_attrs;  // empty for plain graphs
    std::vector<int> node_labels;                 // empty when absent
    int raw_class_label = 0;
    int anomaly_label = 0;  // 0 normal, 1 anomalous

    std::size_t edge_count() const { return edges.size(); }
    std::vector<int> degrees() const;
};

struct Dataset {
    std::string name;
    std::vector<Graph> graphs;
    int attr_dim = 0;                    // raw attribute width, 0 for plain graphs
    std::vector<int> node_label_values;  // sorted distinct labels, one-hot vocabulary
    std::vector<int> train_indices;      // all normal
    std::vector<int> test_indices;       // normal + anomalous
    double test_fraction_normal = 0.0;
    std::uint64_t split_seed = 0;

    bool has_attributes() const { return attr_dim > 0; }
    bool has_node_labels() const { return !node_label_values.empty(); }
    std::size_t anomaly_count() const;
};

// Reads `{name}_A.txt`, `{name}_graph_indicator.txt`, `{name}_graph_labels.txt`
// and, when present, `{name}_node_attributes.txt` / `{name}_node_labels.txt`
// from `dir/name/`, falling back to the files directly under `dir`.
Dataset parse_tu_dataset(const std::filesystem::path& dir, const std::string& name);

// Writes a dataset back out in TU format (fixtures and round-trip checks).
void write_tu_dataset(const std::filesystem::path& dir, const Dataset& dataset);

struct LabelRule {
    enum class Kind { minority, explicit_class };
    Kind kind = Kind::minority;
    int cls = 0;

    static LabelRule minority() { return {Kind::minority, 0}; }
    static LabelRule explicit_class(int c) { return {Kind::explicit_class, c}; }
};

// Marks the anomalous class. Minority rule picks the least frequent raw
// class and refuses ties.
Dataset assign_anomaly_labels(Dataset dataset, const LabelRule& rule);

// All anomalous graphs go to test; a seeded `test_fraction_normal` share of
// the normal graphs joins them; the rest train.
Dataset make_split(Dataset dataset, double test_fraction_normal, std::uint64_t seed);

struct GraphBatch {
    std::vector<int> graph_ids;                 // dataset indices of members
    std::vector<std::size_t> offsets;           // first node row per member
    std::vector<int> membership;                // batch-local graph per node
    std::vector<std::pair<int, int>> edges;     // batch-local node ids
    std::size_t total_nodes = 0;

    std::size_t graph_count() const { return graph_ids.size(); }
};

GraphBatch make_batch(const Dataset& dataset, const std::vector<int>& member_ids);

std::vector<GraphBatch> batch_graphs(const Dataset& dataset, const std::vector<int>& indices,
                                     std::size_t batch_size, bool shuffle, std::uint64_t seed);

// Greedy chunking that keeps each batch at or under `node_limit` total nodes
// (always at least one graph per batch); used for evaluation passes.
std::vector<GraphBatch> batch_graphs_by_nodes(const Dataset& dataset,
                                              const std::vector<int>& indices,
                                              std::size_t node_limit);

}  // namespace cvtgad
