#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "cvtgad/cvt.hpp"
#include "cvtgad/encoders.hpp"
#include "cvtgad/graph.hpp"
#include "cvtgad/views.hpp"

namespace cvtgad {

// Everything one run needs. Every field has a default; the whole struct is
// echoed verbatim into emitted results.
struct ExperimentConfig {
    std::string dataset;
    std::string data_dir;  // empty -> $CVTGAD_DATA_DIR -> ./data
    std::string out_dir = "results";
    std::string variant = "full";
    std::uint64_t seed = 1;
    int epochs = 0;  // 0 = auto: 20 for the ~8k-graph screens, 100 otherwise
    std::size_t batch_size = 64;
    double split_fraction = 0.2;
    std::string anomaly_rule = "minority";  // "minority" or "class:<int>"
    std::size_t eval_node_limit = 2048;
    double lr = 1e-3;

    std::string encoder_kind = "gin";  // gin | gcn
    int encoder_layers = 2;
    int encoder_hidden_dim = 16;

    int views_walk_steps = 8;
    bool views_use_node_labels = true;

    bool cvt_enabled = true;
    std::string cvt_crossed_matrix = "k";          // k | q | v | none
    std::string cvt_normalization = "softmax_l1";  // softmax_l1 | softmax_only
    std::string cvt_node_scope = "batch";          // batch | per_graph
    int cvt_proj_layers = 2;
    int cvt_residual_layers = 2;
    int cvt_d_k = 16;

    double loss_tau = 0.2;
    double loss_alpha = 1.0;

    int resolved_epochs() const;
    std::filesystem::path resolved_data_dir() const;
    LabelRule label_rule() const;

    EncoderConfig encoder_config() const;
    ViewsConfig views_config() const;
    CvtConfig cvt_config() const;
};

// Applies one `key = value` assignment using the dotted key names
// (encoder.kind, views.walk_steps, cvt.d_k, loss.tau, dataset, seed, ...).
void apply_config_key(ExperimentConfig& cfg, const std::string& key, const std::string& value);

// Plain-text config file: one `key = value` per line, '#' comments.
ExperimentConfig load_config_file(const std::filesystem::path& path,
                                  ExperimentConfig base = {});

std::string config_to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const std::string& json_text);

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

}  // namespace cvtgad
