#include "cvtgad/optim.hpp"

#include <cmath>

#include "cvtgad/errors.hpp"

namespace cvtgad {

void adam_step(std::vector<double>& param, const std::vector<double>& grad,
               std::vector<double>& m, std::vector<double>& v, std::uint64_t t,
               const AdamConfig& cfg) {
    if (grad.size() != param.size() || m.size() != param.size() || v.size() != param.size())
        throw ContractError("adam_step: state size does not match parameter size");
    const double bc1 = 1.0 - std::pow(cfg.beta1, double(t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, double(t));
    for (std::size_t i = 0; i < param.size(); ++i) {
        m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * grad[i];
        v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        param[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
}

Adam::Adam(std::vector<Tensor> params, AdamConfig cfg)
    : params_(std::move(params)), cfg_(cfg) {
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (const auto& p : params_) {
        m_.emplace_back(p.size(), 0.0);
        v_.emplace_back(p.size(), 0.0);
    }
}

void Adam::step() {
    ++t_;
    for (std::size_t i = 0; i < params_.size(); ++i) {
        auto& node = *params_[i].node();
        if (node.grad.size() == node.data.size()) {
            adam_step(node.data, node.grad, m_[i], v_[i], t_, cfg_);
        } else {
            // Unreached parameter: zero gradient, moments still decay.
            std::vector<double> zeros(node.data.size(), 0.0);
            adam_step(node.data, zeros, m_[i], v_[i], t_, cfg_);
        }
    }
}

void Adam::zero_grad() {
    for (auto& p : params_) p.zero_grad();
}

}  // namespace cvtgad
