#pragma once

#include <utility>
#include <vector>

#include "cvtgad/encoders.hpp"
#include "cvtgad/nn.hpp"
#include "cvtgad/tensor.hpp"

namespace cvtgad {

// Which projection matrix is borrowed from the other view.
enum class CrossedMatrix { k, q, v, none };
// softmax over keys, then optionally L1 over the other axis.
enum class AttnNorm { softmax_l1, softmax_only };
// Receptive field of node-level attention.
enum class NodeScope { batch, per_graph };

struct CvtConfig {
    bool enabled = true;  // false bypasses the whole module (w/o Transformer-CA)
    CrossedMatrix crossed_matrix = CrossedMatrix::k;
    AttnNorm normalization = AttnNorm::softmax_l1;
    NodeScope node_scope = NodeScope::batch;
    std::size_t d_k = 16;
    std::size_t proj_layers = 2;
    std::size_t residual_layers = 2;
};

// Per-view sub-networks of one simplified transformer block.
struct ViewBlockParams {
    Mlp projection;    // d_h -> d_k
    Tensor wq, wk, wv;  // d_k x d_k
    Mlp residual;      // d_k -> d_k
    Mlp feed_forward;  // d_k -> d_k
    Tensor ln_gamma;   // {d_k}
    Tensor ln_beta;

    ViewBlockParams() = default;
    ViewBlockParams(std::size_t d_in, const CvtConfig& cfg, Rng& rng);
    void collect_params(std::vector<Tensor>& out) const;
};

struct LevelParams {
    ViewBlockParams f;
    ViewBlockParams s;
};

struct CvtParams {
    LevelParams node_level;
    LevelParams graph_level;

    CvtParams() = default;
    CvtParams(std::size_t d_h, const CvtConfig& cfg, Rng& rng);
    void collect_params(std::vector<Tensor>& out) const;
};

Tensor project(const Tensor& e, const Mlp& projection);

// Single-head scaled dot-product attention of Z against itself.
Tensor self_attention(const Tensor& z, const Tensor& wq, const Tensor& wk, const Tensor& wv);

// Both views' attention outputs; one of Q/K/V is borrowed from the other
// view per `crossed`, and the attention matrix gets softmax (rows) plus an
// optional L1 pass (columns).
std::pair<Tensor, Tensor> cross_view_attention(const Tensor& zf, const Tensor& zs,
                                               const ViewBlockParams& pf,
                                               const ViewBlockParams& ps, CrossedMatrix crossed,
                                               AttnNorm norm);

// project -> attention + residual shortcut -> feed-forward -> layer norm,
// for both views of one level. `membership` activates per-graph attention
// scope when non-null (node level only).
std::pair<Tensor, Tensor> transformer_level(const Tensor& ef, const Tensor& es,
                                            const LevelParams& params, const CvtConfig& cfg,
                                            const std::vector<int>* membership = nullptr,
                                            std::size_t n_graphs = 0);

// Refines all four embedding matrices; passthrough when cfg.enabled is false.
EmbeddingBatch embed_batch(const EmbeddingBatch& prelim, const CvtParams& params,
                           const CvtConfig& cfg);

}  // namespace cvtgad
