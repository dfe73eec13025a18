#pragma once

#include <filesystem>
#include <vector>

#include "cvtgad/config.hpp"
#include "cvtgad/cvt.hpp"
#include "cvtgad/encoders.hpp"
#include "cvtgad/objective.hpp"

namespace cvtgad {

// GNN encoders for both views plus the cross-view transformer.
struct CvtgadModel {
    std::size_t feature_dim = 0;
    std::size_t structure_dim = 0;
    EncoderConfig encoder_cfg;
    CvtConfig cvt_cfg;
    Encoder encoder;
    CvtParams cvt;

    CvtgadModel() = default;
    CvtgadModel(std::size_t feature_dim, std::size_t structure_dim, const EncoderConfig& enc,
                const CvtConfig& cvt, std::uint64_t init_seed);

    // Preliminary GNN embeddings refined by the transformer (or passed
    // through when the transformer is disabled).
    EmbeddingBatch forward(const GraphBatch& batch, const Tensor& xf, const Tensor& xs) const;

    // All trainable tensors in a fixed construction order.
    std::vector<Tensor> parameters() const;
};

// Versioned text checkpoint: config echo, score stats, then every parameter
// tensor in order as hexfloats (bit-exact round trip).
void save_checkpoint(const std::filesystem::path& path, const CvtgadModel& model,
                     const ExperimentConfig& config, const ScoreStats& stats);

struct Checkpoint {
    CvtgadModel model;
    ExperimentConfig config;
    ScoreStats stats;
};

Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace cvtgad
