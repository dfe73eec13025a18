#pragma once

#include <cstddef>
#include <vector>

#include "cvtgad/rng.hpp"
#include "cvtgad/tensor.hpp"

namespace cvtgad {

// Affine map x -> x.W + b with W: {in, out}, b: {out}.
struct Linear {
    Tensor weight;
    Tensor bias;

    Linear() = default;
    Linear(std::size_t in, std::size_t out, Rng& rng);

    Tensor forward(const Tensor& x) const { return add(matmul(x, weight), bias); }
    void collect_params(std::vector<Tensor>& out) const;

    std::size_t in_dim() const { return weight.shape()[0]; }
    std::size_t out_dim() const { return weight.shape()[1]; }
};

// Stack of Linear layers with ReLU between them (none after the last).
struct Mlp {
    std::vector<Linear> layers;

    Mlp() = default;
    Mlp(std::size_t in, std::size_t hidden, std::size_t out, std::size_t depth, Rng& rng);

    Tensor forward(const Tensor& x) const;
    void collect_params(std::vector<Tensor>& out) const;
};

// Glorot-uniform {in, out} parameter matrix.
Tensor xavier_uniform(std::size_t in, std::size_t out, Rng& rng);

}  // namespace cvtgad
