#include "cvtgad/nn.hpp"

#include <cmath>

#include "cvtgad/errors.hpp"

namespace cvtgad {

Tensor xavier_uniform(std::size_t in, std::size_t out, Rng& rng) {
    const double bound = std::sqrt(6.0 / double(in + out));
    std::vector<double> data(in * out);
    for (auto& v : data) v = rng.uniform(-bound, bound);
    return Tensor::from_data({in, out}, std::move(data), /*requires_grad=*/true);
}

Linear::Linear(std::size_t in, std::size_t out, Rng& rng)
    : weight(xavier_uniform(in, out, rng)),
      bias(Tensor::zeros({out}, /*requires_grad=*/true)) {}

void Linear::collect_params(std::vector<Tensor>& out) const {
    out.push_back(weight);
    out.push_back(bias);
}

Mlp::Mlp(std::size_t in, std::size_t hidden, std::size_t out, std::size_t depth, Rng& rng) {
    if (depth == 0) throw ContractError("Mlp: depth must be >= 1");
    std::size_t d = in;
    for (std::size_t l = 0; l < depth; ++l) {
        const std::size_t next = (l + 1 == depth) ? out : hidden;
        layers.emplace_back(d, next, rng);
        d = next;
    }
}

Tensor Mlp::forward(const Tensor& x) const {
    if (layers.empty()) throw ContractError("Mlp: no layers");
    Tensor h = x;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        h = layers[l].forward(h);
        if (l + 1 < layers.size()) h = relu(h);
    }
    return h;
}

void Mlp::collect_params(std::vector<Tensor>& out) const {
    for (const auto& l : layers) l.collect_params(out);
}

}  // namespace cvtgad
