#include "cvtgad/config.hpp"

#include <cstdlib>
#include <fstream>

#include <json.hpp>

#include "cvtgad/errors.hpp"

namespace cvtgad {

using nlohmann::json;

namespace {

// The 4 tox21-derived screens are an order of magnitude larger than the rest.
bool is_large_screen(const std::string& name) {
    return name == "HSE" || name == "MMP" || name == "p53" || name == "PPAR-gamma";
}

bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("config key '" + key + "': expected a boolean, got '" + v + "'");
}

long parse_long(const std::string& v, const std::string& key) {
    try {
        std::size_t pos = 0;
        long x = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': expected an integer, got '" + v + "'");
    }
}

double parse_real(const std::string& v, const std::string& key) {
    try {
        std::size_t pos = 0;
        double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': expected a number, got '" + v + "'");
    }
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

int ExperimentConfig::resolved_epochs() const {
    if (epochs > 0) return epochs;
    return is_large_screen(dataset) ? 20 : 100;
}

std::filesystem::path ExperimentConfig::resolved_data_dir() const {
    if (!data_dir.empty()) return data_dir;
    if (const char* env = std::getenv("CVTGAD_DATA_DIR")) return env;
    return "data";
}

LabelRule ExperimentConfig::label_rule() const {
    if (anomaly_rule == "minority") return LabelRule::minority();
    if (anomaly_rule.rfind("class:", 0) == 0)
        return LabelRule::explicit_class(int(parse_long(anomaly_rule.substr(6), "anomaly_rule")));
    throw ConfigError("anomaly_rule must be 'minority' or 'class:<int>', got '" + anomaly_rule +
                      "'");
}

EncoderConfig ExperimentConfig::encoder_config() const {
    EncoderConfig e;
    if (encoder_kind == "gin")
        e.kind = EncoderKind::gin;
    else if (encoder_kind == "gcn")
        e.kind = EncoderKind::gcn;
    else
        throw ConfigError("encoder.kind must be 'gin' or 'gcn', got '" + encoder_kind + "'");
    if (encoder_layers < 1) throw ConfigError("encoder.layers must be >= 1");
    if (encoder_hidden_dim < 1) throw ConfigError("encoder.hidden_dim must be >= 1");
    e.layers = encoder_layers;
    e.hidden_dim = encoder_hidden_dim;
    return e;
}

ViewsConfig ExperimentConfig::views_config() const {
    if (views_walk_steps < 1) throw ConfigError("views.walk_steps must be >= 1");
    return {views_walk_steps, views_use_node_labels};
}

CvtConfig ExperimentConfig::cvt_config() const {
    CvtConfig c;
    c.enabled = cvt_enabled;
    if (cvt_crossed_matrix == "k")
        c.crossed_matrix = CrossedMatrix::k;
    else if (cvt_crossed_matrix == "q")
        c.crossed_matrix = CrossedMatrix::q;
    else if (cvt_crossed_matrix == "v")
        c.crossed_matrix = CrossedMatrix::v;
    else if (cvt_crossed_matrix == "none")
        c.crossed_matrix = CrossedMatrix::none;
    else
        throw ConfigError("cvt.crossed_matrix must be one of k|q|v|none, got '" +
                          cvt_crossed_matrix + "'");
    if (cvt_normalization == "softmax_l1")
        c.normalization = AttnNorm::softmax_l1;
    else if (cvt_normalization == "softmax_only")
        c.normalization = AttnNorm::softmax_only;
    else
        throw ConfigError("cvt.normalization must be softmax_l1|softmax_only, got '" +
                          cvt_normalization + "'");
    if (cvt_node_scope == "batch")
        c.node_scope = NodeScope::batch;
    else if (cvt_node_scope == "per_graph")
        c.node_scope = NodeScope::per_graph;
    else
        throw ConfigError("cvt.node_scope must be batch|per_graph, got '" + cvt_node_scope + "'");
    if (cvt_proj_layers < 1 || cvt_proj_layers > 3)
        throw ConfigError("cvt.proj_layers must be 1, 2 or 3");
    if (cvt_residual_layers < 1 || cvt_residual_layers > 3)
        throw ConfigError("cvt.residual_layers must be 1, 2 or 3");
    if (cvt_d_k < 1) throw ConfigError("cvt.d_k must be >= 1");
    c.proj_layers = std::size_t(cvt_proj_layers);
    c.residual_layers = std::size_t(cvt_residual_layers);
    c.d_k = std::size_t(cvt_d_k);
    return c;
}

void apply_config_key(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "dataset") cfg.dataset = value;
    else if (key == "data_dir") cfg.data_dir = value;
    else if (key == "out_dir") cfg.out_dir = value;
    else if (key == "variant") cfg.variant = value;
    else if (key == "seed") cfg.seed = std::uint64_t(parse_long(value, key));
    else if (key == "epochs") cfg.epochs = int(parse_long(value, key));
    else if (key == "batch_size") cfg.batch_size = std::size_t(parse_long(value, key));
    else if (key == "split_fraction") cfg.split_fraction = parse_real(value, key);
    else if (key == "anomaly_rule") cfg.anomaly_rule = value;
    else if (key == "eval_node_limit") cfg.eval_node_limit = std::size_t(parse_long(value, key));
    else if (key == "lr") cfg.lr = parse_real(value, key);
    else if (key == "encoder.kind") cfg.encoder_kind = value;
    else if (key == "encoder.layers") cfg.encoder_layers = int(parse_long(value, key));
    else if (key == "encoder.hidden_dim") cfg.encoder_hidden_dim = int(parse_long(value, key));
    else if (key == "views.walk_steps") cfg.views_walk_steps = int(parse_long(value, key));
    else if (key == "views.use_node_labels") cfg.views_use_node_labels = parse_bool(value, key);
    else if (key == "cvt.enabled") cfg.cvt_enabled = parse_bool(value, key);
    else if (key == "cvt.crossed_matrix") cfg.cvt_crossed_matrix = value;
    else if (key == "cvt.normalization") cfg.cvt_normalization = value;
    else if (key == "cvt.node_scope") cfg.cvt_node_scope = value;
    else if (key == "cvt.proj_layers") cfg.cvt_proj_layers = int(parse_long(value, key));
    else if (key == "cvt.residual_layers") cfg.cvt_residual_layers = int(parse_long(value, key));
    else if (key == "cvt.d_k") cfg.cvt_d_k = int(parse_long(value, key));
    else if (key == "loss.tau") cfg.loss_tau = parse_real(value, key);
    else if (key == "loss.alpha") cfg.loss_alpha = parse_real(value, key);
    else throw ConfigError("unknown config key '" + key + "'");
}

ExperimentConfig load_config_file(const std::filesystem::path& path, ExperimentConfig base) {
    std::ifstream in(path);
    if (!in) throw IngestError("cannot open config file: " + path.string());
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw FormatError(path.filename().string() + ":" + std::to_string(lineno) +
                              ": expected 'key = value', got '" + line + "'");
        apply_config_key(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return base;
}

std::string config_to_json(const ExperimentConfig& c) {
    json j;
    j["dataset"] = c.dataset;
    j["data_dir"] = c.data_dir;
    j["out_dir"] = c.out_dir;
    j["variant"] = c.variant;
    j["seed"] = c.seed;
    j["epochs"] = c.epochs;
    j["batch_size"] = c.batch_size;
    j["split_fraction"] = c.split_fraction;
    j["anomaly_rule"] = c.anomaly_rule;
    j["eval_node_limit"] = c.eval_node_limit;
    j["lr"] = c.lr;
    j["encoder.kind"] = c.encoder_kind;
    j["encoder.layers"] = c.encoder_layers;
    j["encoder.hidden_dim"] = c.encoder_hidden_dim;
    j["views.walk_steps"] = c.views_walk_steps;
    j["views.use_node_labels"] = c.views_use_node_labels;
    j["cvt.enabled"] = c.cvt_enabled;
    j["cvt.crossed_matrix"] = c.cvt_crossed_matrix;
    j["cvt.normalization"] = c.cvt_normalization;
    j["cvt.node_scope"] = c.cvt_node_scope;
    j["cvt.proj_layers"] = c.cvt_proj_layers;
    j["cvt.residual_layers"] = c.cvt_residual_layers;
    j["cvt.d_k"] = c.cvt_d_k;
    j["loss.tau"] = c.loss_tau;
    j["loss.alpha"] = c.loss_alpha;
    return j.dump();
}

ExperimentConfig config_from_json(const std::string& text) {
    const json j = json::parse(text);
    ExperimentConfig c;
    c.dataset = j.at("dataset").get<std::string>();
    c.data_dir = j.at("data_dir").get<std::string>();
    c.out_dir = j.at("out_dir").get<std::string>();
    c.variant = j.at("variant").get<std::string>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.epochs = j.at("epochs").get<int>();
    c.batch_size = j.at("batch_size").get<std::size_t>();
    c.split_fraction = j.at("split_fraction").get<double>();
    c.anomaly_rule = j.at("anomaly_rule").get<std::string>();
    c.eval_node_limit = j.at("eval_node_limit").get<std::size_t>();
    c.lr = j.at("lr").get<double>();
    c.encoder_kind = j.at("encoder.kind").get<std::string>();
    c.encoder_layers = j.at("encoder.layers").get<int>();
    c.encoder_hidden_dim = j.at("encoder.hidden_dim").get<int>();
    c.views_walk_steps = j.at("views.walk_steps").get<int>();
    c.views_use_node_labels = j.at("views.use_node_labels").get<bool>();
    c.cvt_enabled = j.at("cvt.enabled").get<bool>();
    c.cvt_crossed_matrix = j.at("cvt.crossed_matrix").get<std::string>();
    c.cvt_normalization = j.at("cvt.normalization").get<std::string>();
    c.cvt_node_scope = j.at("cvt.node_scope").get<std::string>();
    c.cvt_proj_layers = j.at("cvt.proj_layers").get<int>();
    c.cvt_residual_layers = j.at("cvt.residual_layers").get<int>();
    c.cvt_d_k = j.at("cvt.d_k").get<int>();
    c.loss_tau = j.at("loss.tau").get<double>();
    c.loss_alpha = j.at("loss.alpha").get<double>();
    return c;
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
    return config_to_json(a) == config_to_json(b);
}

}  // namespace cvtgad
