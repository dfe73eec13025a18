#include "cvtgad/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "cvtgad/errors.hpp"
#include "cvtgad/rng.hpp"

namespace cvtgad {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(trim(field));
    return out;
}

// Non-empty trimmed lines with their 1-based file line numbers.
std::vector<std::pair<std::size_t, std::string>> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IngestError("cannot open required file: " + path.string());
    std::vector<std::pair<std::size_t, std::string>> lines;
    std::string raw;
    std::size_t lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string t = trim(raw);
        if (!t.empty()) lines.emplace_back(lineno, t);
    }
    return lines;
}

long parse_int(const std::string& s, const std::filesystem::path& file, std::size_t lineno) {
    try {
        std::size_t pos = 0;
        long v = std::stol(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw FormatError(file.filename().string() + ":" + std::to_string(lineno) +
                          ": expected an integer, got '" + s + "'");
    }
}

double parse_double(const std::string& s, const std::filesystem::path& file, std::size_t lineno) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw FormatError(file.filename().string() + ":" + std::to_string(lineno) +
                          ": expected a number, got '" + s + "'");
    }
}

std::filesystem::path locate_dataset_dir(const std::filesystem::path& dir,
                                         const std::string& name) {
    const std::string indicator = name + "_graph_indicator.txt";
    if (std::filesystem::exists(dir / name / indicator)) return dir / name;
    if (std::filesystem::exists(dir / name / "raw" / indicator)) return dir / name / "raw";
    return dir;
}

}  // namespace

std::vector<int> Graph::degrees() const {
    std::vector<int> deg(node_count, 0);
    for (const auto& [a, b] : edges) {
        deg[a]++;
        if (b != a) deg[b]++;
    }
    return deg;
}

std::size_t Dataset::anomaly_count() const {
    std::size_t c = 0;
    for (const auto& g : graphs) c += g.anomaly_label == 1 ? 1 : 0;
    return c;
}

Dataset parse_tu_dataset(const std::filesystem::path& dir, const std::string& name) {
    const auto base = locate_dataset_dir(dir, name);
    const auto file_a = base / (name + "_A.txt");
    const auto file_ind = base / (name + "_graph_indicator.txt");
    const auto file_glab = base / (name + "_graph_labels.txt");
    const auto file_attr = base / (name + "_node_attributes.txt");
    const auto file_nlab = base / (name + "_node_labels.txt");

    for (const auto& f : {file_a, file_ind, file_glab})
        if (!std::filesystem::exists(f))
            throw IngestError("missing required file: " + f.string());

    Dataset ds;
    ds.name = name;

    // Node -> graph assignment; 1-based graph ids, contiguous.
    const auto ind_lines = read_lines(file_ind);
    const std::size_t total_nodes = ind_lines.size();
    std::vector<int> node_graph(total_nodes);   // 0-based graph id per global node
    std::vector<int> node_local(total_nodes);   // local id within its graph
    int max_graph = 0;
    for (std::size_t i = 0; i < total_nodes; ++i) {
        const auto& [lineno, text] = ind_lines[i];
        long gid = parse_int(text, file_ind, lineno);
        if (gid < 1)
            throw FormatError(file_ind.filename().string() + ":" + std::to_string(lineno) +
                              ": graph id must be >= 1, got " + std::to_string(gid));
        node_graph[i] = int(gid - 1);
        max_graph = std::max(max_graph, int(gid));
    }
    ds.graphs.resize(max_graph);
    for (std::size_t i = 0; i < total_nodes; ++i) {
        Graph& g = ds.graphs[node_graph[i]];
        node_local[i] = g.node_count++;
    }
    for (std::size_t gi = 0; gi < ds.graphs.size(); ++gi)
        if (ds.graphs[gi].node_count == 0)
            throw FormatError(file_ind.filename().string() + ": graph " +
                              std::to_string(gi + 1) + " has no nodes");

    // Edges; symmetrize and deduplicate via per-graph sets.
    std::vector<std::set<std::pair<int, int>>> edge_sets(ds.graphs.size());
    for (const auto& [lineno, text] : read_lines(file_a)) {
        const auto fields = split_csv(text);
        if (fields.size() != 2)
            throw FormatError(file_a.filename().string() + ":" + std::to_string(lineno) +
                              ": expected 'i, j', got '" + text + "'");
        long u = parse_int(fields[0], file_a, lineno);
        long v = parse_int(fields[1], file_a, lineno);
        if (u < 1 || v < 1 || std::size_t(u) > total_nodes || std::size_t(v) > total_nodes)
            throw FormatError(file_a.filename().string() + ":" + std::to_string(lineno) +
                              ": node id out of range in '" + text + "'");
        const std::size_t ui = std::size_t(u - 1), vi = std::size_t(v - 1);
        if (node_graph[ui] != node_graph[vi])
            throw FormatError(file_a.filename().string() + ":" + std::to_string(lineno) +
                              ": edge joins nodes of different graphs in '" + text + "'");
        int a = node_local[ui], b = node_local[vi];
        if (a > b) std::swap(a, b);
        edge_sets[node_graph[ui]].insert({a, b});
    }
    for (std::size_t gi = 0; gi < ds.graphs.size(); ++gi)
        ds.graphs[gi].edges.assign(edge_sets[gi].begin(), edge_sets[gi].end());

    // Graph labels.
    const auto glab_lines = read_lines(file_glab);
    if (glab_lines.size() != ds.graphs.size())
        throw FormatError(file_glab.filename().string() + ": has " +
                          std::to_string(glab_lines.size()) + " labels for " +
                          std::to_string(ds.graphs.size()) + " graphs");
    for (std::size_t gi = 0; gi < ds.graphs.size(); ++gi) {
        const auto& [lineno, text] = glab_lines[gi];
        ds.graphs[gi].raw_class_label = int(parse_int(text, file_glab, lineno));
    }

    // Optional node attributes.
    if (std::filesystem::exists(file_attr)) {
        const auto attr_lines = read_lines(file_attr);
        if (attr_lines.size() != total_nodes)
            throw FormatError(file_attr.filename().string() + ": has " +
                              std::to_string(attr_lines.size()) + " rows for " +
                              std::to_string(total_nodes) + " nodes");
        for (auto& g : ds.graphs) g.node_attrs.resize(g.node_count);
        int dim = -1;
        for (std::size_t i = 0; i < total_nodes; ++i) {
            const auto& [lineno, text] = attr_lines[i];
            const auto fields = split_csv(text);
            if (dim < 0) dim = int(fields.size());
            if (int(fields.size()) != dim)
                throw FormatError(file_attr.filename().string() + ":" + std::to_string(lineno) +
                                  ": expected " + std::to_string(dim) + " attributes, got " +
                                  std::to_string(fields.size()));
            std::vector<double> row;
            row.reserve(fields.size());
            for (const auto& f : fields) row.push_back(parse_double(f, file_attr, lineno));
            ds.graphs[node_graph[i]].node_attrs[node_local[i]] = std::move(row);
        }
        ds.attr_dim = std::max(dim, 0);
    }

    // Optional node labels.
    if (std::filesystem::exists(file_nlab)) {
        const auto nlab_lines = read_lines(file_nlab);
        if (nlab_lines.size() != total_nodes)
            throw FormatError(file_nlab.filename().string() + ": has " +
                              std::to_string(nlab_lines.size()) + " rows for " +
                              std::to_string(total_nodes) + " nodes");
        for (auto& g : ds.graphs) g.node_labels.resize(g.node_count);
        std::set<int> values;
        for (std::size_t i = 0; i < total_nodes; ++i) {
            const auto& [lineno, text] = nlab_lines[i];
            // Some TU files carry a leading count field; take the last value.
            const auto fields = split_csv(text);
            const int v = int(parse_int(fields.back(), file_nlab, lineno));
            ds.graphs[node_graph[i]].node_labels[node_local[i]] = v;
            values.insert(v);
        }
        ds.node_label_values.assign(values.begin(), values.end());
    }

    return ds;
}

void write_tu_dataset(const std::filesystem::path& dir, const Dataset& dataset) {
    std::filesystem::create_directories(dir);
    const auto& name = dataset.name;
    std::ofstream fa(dir / (name + "_A.txt"));
    std::ofstream find(dir / (name + "_graph_indicator.txt"));
    std::ofstream fglab(dir / (name + "_graph_labels.txt"));
    std::ofstream fattr;
    std::ofstream fnlab;
    const bool attrs = dataset.has_attributes();
    const bool nlabs = dataset.has_node_labels();
    if (attrs) fattr.open(dir / (name + "_node_attributes.txt"));
    if (nlabs) fnlab.open(dir / (name + "_node_labels.txt"));

    std::size_t node_base = 1;  // 1-based global ids
    for (std::size_t gi = 0; gi < dataset.graphs.size(); ++gi) {
        const Graph& g = dataset.graphs[gi];
        fglab << g.raw_class_label << "\n";
        for (int i = 0; i < g.node_count; ++i) {
            find << (gi + 1) << "\n";
            if (attrs) {
                const auto& row = g.node_attrs[i];
                for (std::size_t j = 0; j < row.size(); ++j) {
                    if (j) fattr << ", ";
                    char buf[32];
                    std::snprintf(buf, sizeof(buf), "%.17g", row[j]);
                    fattr << buf;
                }
                fattr << "\n";
            }
            if (nlabs) fnlab << g.node_labels[i] << "\n";
        }
        for (const auto& [a, b] : g.edges) {
            fa << (node_base + a) << ", " << (node_base + b) << "\n";
            if (a != b) fa << (node_base + b) << ", " << (node_base + a) << "\n";
        }
        node_base += std::size_t(g.node_count);
    }
}

Dataset assign_anomaly_labels(Dataset dataset, const LabelRule& rule) {
    if (dataset.graphs.empty()) throw ProtocolError("assign_anomaly_labels: empty dataset");
    std::map<int, std::size_t> counts;
    for (const auto& g : dataset.graphs) counts[g.raw_class_label]++;

    int anomaly_class;
    if (rule.kind == LabelRule::Kind::minority) {
        auto best = counts.begin();
        for (auto it = counts.begin(); it != counts.end(); ++it)
            if (it->second < best->second) best = it;
        for (auto it = counts.begin(); it != counts.end(); ++it)
            if (it != best && it->second == best->second)
                throw ProtocolError(
                    "minority rule tie: classes " + std::to_string(best->first) + " and " +
                    std::to_string(it->first) + " both have " + std::to_string(best->second) +
                    " graphs; use an explicit anomaly class");
        anomaly_class = best->first;
    } else {
        if (!counts.count(rule.cls))
            throw ConfigError("explicit anomaly class " + std::to_string(rule.cls) +
                              " not present in dataset " + dataset.name);
        anomaly_class = rule.cls;
    }

    for (auto& g : dataset.graphs)
        g.anomaly_label = g.raw_class_label == anomaly_class ? 1 : 0;
    return dataset;
}

Dataset make_split(Dataset dataset, double test_fraction_normal, std::uint64_t seed) {
    if (test_fraction_normal < 0.0 || test_fraction_normal > 1.0)
        throw ConfigError("test_fraction_normal must be in [0, 1], got " +
                          std::to_string(test_fraction_normal));
    std::vector<int> normals, anomalies;
    for (std::size_t i = 0; i < dataset.graphs.size(); ++i) {
        (dataset.graphs[i].anomaly_label == 1 ? anomalies : normals).push_back(int(i));
    }
    if (anomalies.empty())
        throw ProtocolError("make_split: dataset has no anomalous graphs; assign labels first");

    Rng rng(seed);
    rng.shuffle(normals);
    const std::size_t k = std::size_t(std::llround(test_fraction_normal * double(normals.size())));

    dataset.test_indices = anomalies;
    dataset.test_indices.insert(dataset.test_indices.end(), normals.begin(), normals.begin() + k);
    dataset.train_indices.assign(normals.begin() + k, normals.end());
    std::sort(dataset.train_indices.begin(), dataset.train_indices.end());
    std::sort(dataset.test_indices.begin(), dataset.test_indices.end());
    dataset.test_fraction_normal = test_fraction_normal;
    dataset.split_seed = seed;
    return dataset;
}

GraphBatch make_batch(const Dataset& dataset, const std::vector<int>& member_ids) {
    GraphBatch b;
    b.graph_ids = member_ids;
    for (std::size_t k = 0; k < member_ids.size(); ++k) {
        const int id = member_ids[k];
        if (id < 0 || std::size_t(id) >= dataset.graphs.size())
            throw ContractError("make_batch: graph index " + std::to_string(id) + " out of range");
        const Graph& g = dataset.graphs[id];
        b.offsets.push_back(b.total_nodes);
        for (int i = 0; i < g.node_count; ++i) b.membership.push_back(int(k));
        for (const auto& [u, v] : g.edges)
            b.edges.emplace_back(int(b.total_nodes) + u, int(b.total_nodes) + v);
        b.total_nodes += std::size_t(g.node_count);
    }
    return b;
}

std::vector<GraphBatch> batch_graphs(const Dataset& dataset, const std::vector<int>& indices,
                                     std::size_t batch_size, bool shuffle, std::uint64_t seed) {
    if (batch_size == 0) throw ContractError("batch_graphs: batch_size must be >= 1");
    std::vector<int> order = indices;
    if (shuffle) {
        Rng rng(seed);
        rng.shuffle(order);
    }
    std::vector<GraphBatch> batches;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
        const std::size_t end = std::min(order.size(), start + batch_size);
        batches.push_back(make_batch(dataset, {order.begin() + start, order.begin() + end}));
    }
    return batches;
}

std::vector<GraphBatch> batch_graphs_by_nodes(const Dataset& dataset,
                                              const std::vector<int>& indices,
                                              std::size_t node_limit) {
    std::vector<GraphBatch> batches;
    std::vector<int> current;
    std::size_t nodes = 0;
    for (int id : indices) {
        const std::size_t n = std::size_t(dataset.graphs.at(id).node_count);
        if (!current.empty() && nodes + n > node_limit) {
            batches.push_back(make_batch(dataset, current));
            current.clear();
            nodes = 0;
        }
        current.push_back(id);
        nodes += n;
    }
    if (!current.empty()) batches.push_back(make_batch(dataset, current));
    return batches;
}

}  // namespace cvtgad
