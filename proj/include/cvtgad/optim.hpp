#pragma once

#include <cstdint>
#include <vector>

#include "cvtgad/tensor.hpp"

namespace cvtgad {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// One Adam update for a single parameter buffer. `t` is the 1-based step
// count after incrementing. Exposed for direct testing.
void adam_step(std::vector<double>& param, const std::vector<double>& grad,
               std::vector<double>& m, std::vector<double>& v, std::uint64_t t,
               const AdamConfig& cfg);

class Adam {
public:
    explicit Adam(std::vector<Tensor> params, AdamConfig cfg = {});

    // Applies one update from the accumulated gradients. Parameters whose
    // gradient was never touched this step are treated as zero-gradient.
    void step();
    void zero_grad();

    std::uint64_t steps() const { return t_; }

private:
    std::vector<Tensor> params_;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> v_;
    std::uint64_t t_ = 0;
    AdamConfig cfg_;
};

}  // namespace cvtgad
