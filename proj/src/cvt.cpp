#include "cvtgad/cvt.hpp"

#include <cmath>

#include "cvtgad/errors.hpp"

namespace cvtgad {

ViewBlockParams::ViewBlockParams(std::size_t d_in, const CvtConfig& cfg, Rng& rng)
    : projection(d_in, cfg.d_k, cfg.d_k, cfg.proj_layers, rng),
      wq(xavier_uniform(cfg.d_k, cfg.d_k, rng)),
      wk(xavier_uniform(cfg.d_k, cfg.d_k, rng)),
      wv(xavier_uniform(cfg.d_k, cfg.d_k, rng)),
      residual(cfg.d_k, cfg.d_k, cfg.d_k, cfg.residual_layers, rng),
      feed_forward(cfg.d_k, cfg.d_k, cfg.d_k, 2, rng),
      ln_gamma(Tensor::full({cfg.d_k}, 1.0, /*requires_grad=*/true)),
      ln_beta(Tensor::zeros({cfg.d_k}, /*requires_grad=*/true)) {}

void ViewBlockParams::collect_params(std::vector<Tensor>& out) const {
    projection.collect_params(out);
    out.push_back(wq);
    out.push_back(wk);
    out.push_back(wv);
    residual.collect_params(out);
    feed_forward.collect_params(out);
    out.push_back(ln_gamma);
    out.push_back(ln_beta);
}

CvtParams::CvtParams(std::size_t d_h, const CvtConfig& cfg, Rng& rng)
    : node_level{ViewBlockParams(d_h, cfg, rng), ViewBlockParams(d_h, cfg, rng)},
      graph_level{ViewBlockParams(d_h, cfg, rng), ViewBlockParams(d_h, cfg, rng)} {}

void CvtParams::collect_params(std::vector<Tensor>& out) const {
    node_level.f.collect_params(out);
    node_level.s.collect_params(out);
    graph_level.f.collect_params(out);
    graph_level.s.collect_params(out);
}

Tensor project(const Tensor& e, const Mlp& projection) { return projection.forward(e); }

namespace {

Tensor attention_core(const Tensor& q, const Tensor& k, const Tensor& v, AttnNorm norm) {
    const double inv_sqrt_dk = 1.0 / std::sqrt(double(q.cols()));
    Tensor att = softmax_rows(scale(matmul(q, transpose(k)), inv_sqrt_dk));
    if (norm == AttnNorm::softmax_l1) att = l1_normalize_cols(att);
    return matmul(att, v);
}

}  // namespace

Tensor self_attention(const Tensor& z, const Tensor& wq, const Tensor& wk, const Tensor& wv) {
    return attention_core(matmul(z, wq), matmul(z, wk), matmul(z, wv), AttnNorm::softmax_only);
}

std::pair<Tensor, Tensor> cross_view_attention(const Tensor& zf, const Tensor& zs,
                                               const ViewBlockParams& pf,
                                               const ViewBlockParams& ps, CrossedMatrix crossed,
                                               AttnNorm norm) {
    if (zf.rows() != zs.rows())
        throw ContractError("cross_view_attention: view row counts differ, " + zf.shape_str() +
                            " vs " + zs.shape_str());

    const Tensor qf = matmul(zf, pf.wq), kf = matmul(zf, pf.wk), vf = matmul(zf, pf.wv);
    const Tensor qs = matmul(zs, ps.wq), ks = matmul(zs, ps.wk), vs = matmul(zs, ps.wv);

    switch (crossed) {
        case CrossedMatrix::k:
            return {attention_core(qf, ks, vf, norm), attention_core(qs, kf, vs, norm)};
        case CrossedMatrix::q:
            return {attention_core(qs, kf, vf, norm), attention_core(qf, ks, vs, norm)};
        case CrossedMatrix::v:
            return {attention_core(qf, kf, vs, norm), attention_core(qs, ks, vf, norm)};
        case CrossedMatrix::none:
            return {attention_core(qf, kf, vf, norm), attention_core(qs, ks, vs, norm)};
    }
    throw ContractError("cross_view_attention: unknown crossed matrix");
}

namespace {

// Attention restricted to each graph's own rows.
std::pair<Tensor, Tensor> scoped_attention(const Tensor& zf, const Tensor& zs,
                                           const LevelParams& params, const CvtConfig& cfg,
                                           const std::vector<int>& membership,
                                           std::size_t n_graphs) {
    std::vector<Tensor> parts_f, parts_s;
    std::size_t begin = 0;
    for (std::size_t g = 0; g < n_graphs; ++g) {
        std::size_t end = begin;
        while (end < membership.size() && std::size_t(membership[end]) == g) ++end;
        auto [af, as] = cross_view_attention(slice_rows(zf, begin, end),
                                             slice_rows(zs, begin, end), params.f, params.s,
                                             cfg.crossed_matrix, cfg.normalization);
        parts_f.push_back(af);
        parts_s.push_back(as);
        begin = end;
    }
    if (begin != membership.size())
        throw ContractError("scoped_attention: membership is not contiguous per graph");
    return {concat_rows(parts_f), concat_rows(parts_s)};
}

}  // namespace

std::pair<Tensor, Tensor> transformer_level(const Tensor& ef, const Tensor& es,
                                            const LevelParams& params, const CvtConfig& cfg,
                                            const std::vector<int>* membership,
                                            std::size_t n_graphs) {
    const Tensor zf = project(ef, params.f.projection);
    const Tensor zs = project(es, params.s.projection);

    std::pair<Tensor, Tensor> att;
    if (membership != nullptr && cfg.node_scope == NodeScope::per_graph)
        att = scoped_attention(zf, zs, params, cfg, *membership, n_graphs);
    else
        att = cross_view_attention(zf, zs, params.f, params.s, cfg.crossed_matrix,
                                   cfg.normalization);

    const Tensor hf = add(att.first, params.f.residual.forward(zf));
    const Tensor hs = add(att.second, params.s.residual.forward(zs));
    return {layer_norm(params.f.feed_forward.forward(hf), params.f.ln_gamma, params.f.ln_beta),
            layer_norm(params.s.feed_forward.forward(hs), params.s.ln_gamma, params.s.ln_beta)};
}

EmbeddingBatch embed_batch(const EmbeddingBatch& prelim, const CvtParams& params,
                           const CvtConfig& cfg) {
    if (!cfg.enabled) return prelim;

    EmbeddingBatch out;
    out.membership = prelim.membership;
    out.graph_count = prelim.graph_count;
    auto node = transformer_level(prelim.node_f, prelim.node_s, params.node_level, cfg,
                                  &prelim.membership, prelim.graph_count);
    out.node_f = node.first;
    out.node_s = node.second;
    auto graph = transformer_level(prelim.graph_f, prelim.graph_s, params.graph_level, cfg);
    out.graph_f = graph.first;
    out.graph_s = graph.second;
    return out;
}

}  // namespace cvtgad
