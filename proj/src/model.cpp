#include "cvtgad/model.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cvtgad/errors.hpp"
#include "cvtgad/rng.hpp"

namespace cvtgad {

CvtgadModel::CvtgadModel(std::size_t feature_dim_, std::size_t structure_dim_,
                         const EncoderConfig& enc, const CvtConfig& cvt_, std::uint64_t init_seed)
    : feature_dim(feature_dim_), structure_dim(structure_dim_), encoder_cfg(enc), cvt_cfg(cvt_) {
    Rng rng(init_seed);
    encoder = Encoder(enc, feature_dim, structure_dim, rng);
    cvt = CvtParams(std::size_t(enc.hidden_dim), cvt_, rng);
}

EmbeddingBatch CvtgadModel::forward(const GraphBatch& batch, const Tensor& xf,
                                    const Tensor& xs) const {
    return embed_batch(encoder.encode(batch, xf, xs), cvt, cvt_cfg);
}

std::vector<Tensor> CvtgadModel::parameters() const {
    std::vector<Tensor> out;
    encoder.collect_params(out);
    cvt.collect_params(out);
    return out;
}

namespace {

constexpr const char* kMagic = "CVTGAD-CHECKPOINT v1";

// istream extraction does not accept hexfloats; strtod does.
std::vector<double> parse_doubles(const std::string& line, std::size_t expected,
                                  const std::string& what) {
    std::vector<double> out;
    out.reserve(expected);
    const char* p = line.c_str();
    char* endp = nullptr;
    while (*p) {
        const double v = std::strtod(p, &endp);
        if (endp == p) break;
        out.push_back(v);
        p = endp;
    }
    if (out.size() != expected)
        throw FormatError("checkpoint: expected " + std::to_string(expected) + " values for " +
                          what + ", got " + std::to_string(out.size()));
    return out;
}

void write_tensor(std::ofstream& out, std::size_t index, const Tensor& t) {
    out << "tensor p" << index << " " << t.rank();
    for (auto d : t.shape()) out << " " << d;
    out << "\n";
    char buf[40];
    for (std::size_t i = 0; i < t.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%a", t.data()[i]);
        out << buf << (i + 1 == t.size() ? "" : " ");
    }
    out << "\n";
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const CvtgadModel& model,
                     const ExperimentConfig& config, const ScoreStats& stats) {
    std::ofstream out(path);
    if (!out) throw IngestError("cannot write checkpoint: " + path.string());
    out << kMagic << "\n";
    out << "config " << config_to_json(config) << "\n";
    out << "dims " << model.feature_dim << " " << model.structure_dim << "\n";
    char buf[256];
    std::snprintf(buf, sizeof(buf), "stats %a %a %a %a %a %a %a", stats.mu_node,
                  stats.sigma_node, stats.mu_graph, stats.sigma_graph, stats.alpha,
                  stats.lambda_node, stats.lambda_graph);
    out << buf << "\n";
    const auto params = model.parameters();
    out << "params " << params.size() << "\n";
    for (std::size_t i = 0; i < params.size(); ++i) write_tensor(out, i, params[i]);
    out << "end\n";
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IngestError("cannot open checkpoint: " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != kMagic)
        throw FormatError("checkpoint " + path.string() + ": bad magic line '" + line + "'");

    Checkpoint ck;
    if (!std::getline(in, line) || line.rfind("config ", 0) != 0)
        throw FormatError("checkpoint: missing config line");
    ck.config = config_from_json(line.substr(7));

    std::size_t feature_dim = 0, structure_dim = 0;
    if (!std::getline(in, line) || std::sscanf(line.c_str(), "dims %zu %zu", &feature_dim,
                                               &structure_dim) != 2)
        throw FormatError("checkpoint: missing dims line");

    if (!std::getline(in, line) || line.rfind("stats ", 0) != 0)
        throw FormatError("checkpoint: missing stats line");
    {
        const auto v = parse_doubles(line.substr(6), 7, "stats");
        ck.stats = {v[0], v[1], v[2], v[3], v[4], v[5], v[6]};
    }

    ck.model = CvtgadModel(feature_dim, structure_dim, ck.config.encoder_config(),
                           ck.config.cvt_config(), ck.config.seed);
    auto params = ck.model.parameters();

    std::size_t count = 0;
    if (!std::getline(in, line) || std::sscanf(line.c_str(), "params %zu", &count) != 1)
        throw FormatError("checkpoint: missing params line");
    if (count != params.size())
        throw FormatError("checkpoint: holds " + std::to_string(count) +
                          " tensors, model expects " + std::to_string(params.size()));

    for (std::size_t i = 0; i < count; ++i) {
        if (!std::getline(in, line) || line.rfind("tensor ", 0) != 0)
            throw FormatError("checkpoint: missing tensor header " + std::to_string(i));
        std::istringstream hdr(line.substr(7));
        std::string name;
        std::size_t rank = 0;
        hdr >> name >> rank;
        std::vector<std::size_t> shape(rank);
        for (auto& d : shape) hdr >> d;
        if (!hdr) throw FormatError("checkpoint: malformed tensor header '" + line + "'");
        if (shape != params[i].shape())
            throw FormatError("checkpoint: tensor " + name + " has shape mismatch");
        if (!std::getline(in, line))
            throw FormatError("checkpoint: missing data for tensor " + name);
        params[i].data() = parse_doubles(line, params[i].size(), name);
    }
    return ck;
}

}  // namespace cvtgad
