#include "cvtgad/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

namespace cvtgad {

namespace {

thread_local bool g_grad_enabled = true;

std::shared_ptr<TapeNode> make_node(std::vector<std::size_t> shape, std::vector<double> data) {
    auto n = std::make_shared<TapeNode>();
    n->shape = std::move(shape);
    n->data = std::move(data);
    return n;
}

// Attach parents and a pull-style backward closure when the tape is active
// and at least one parent is tracked.
void attach(const std::shared_ptr<TapeNode>& out,
            std::vector<std::shared_ptr<TapeNode>> parents,
            std::function<void(TapeNode&)> fn) {
    if (!g_grad_enabled) return;
    bool track = false;
    for (const auto& p : parents) track = track || p->requires_grad;
    if (!track) return;
    out->requires_grad = true;
    out->parents = std::move(parents);
    out->backward_fn = std::move(fn);
}

std::string shape_to_str(const std::vector<std::size_t>& s) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) os << " x ";
        os << s[i];
    }
    os << "]";
    return os.str();
}

std::size_t product(const std::vector<std::size_t>& s) {
    std::size_t p = 1;
    for (auto d : s) p *= d;
    return p;
}

void require_rank2(const Tensor& t, const char* op) {
    if (t.rank() != 2)
        throw ShapeError(std::string(op) + ": expected a rank-2 tensor, got " + t.shape_str());
}

}  // namespace

// ---- Tensor basics ----------------------------------------------------------

Tensor Tensor::zeros(std::vector<std::size_t> shape, bool requires_grad) {
    return full(std::move(shape), 0.0, requires_grad);
}

Tensor Tensor::full(std::vector<std::size_t> shape, double value, bool requires_grad) {
    auto n = make_node(shape, std::vector<double>(product(shape), value));
    n->requires_grad = requires_grad;
    return Tensor(std::move(n));
}

Tensor Tensor::from_data(std::vector<std::size_t> shape, std::vector<double> data,
                         bool requires_grad) {
    if (product(shape) != data.size())
        throw ShapeError("from_data: shape " + shape_to_str(shape) + " does not hold " +
                         std::to_string(data.size()) + " values");
    auto n = make_node(std::move(shape), std::move(data));
    n->requires_grad = requires_grad;
    return Tensor(std::move(n));
}

Tensor Tensor::scalar(double value) { return from_data({1}, {value}); }

std::size_t Tensor::rows() const {
    require_rank2(*this, "rows");
    return node_->shape[0];
}

std::size_t Tensor::cols() const {
    require_rank2(*this, "cols");
    return node_->shape[1];
}

std::string Tensor::shape_str() const { return shape_to_str(node_->shape); }

double Tensor::value() const {
    if (size() != 1)
        throw ContractError("value(): tensor of shape " + shape_str() + " is not a scalar");
    return node_->data[0];
}

const std::vector<double>& Tensor::grad() const {
    if (!node_ || node_->grad.size() != node_->data.size())
        throw ContractError("grad(): gradient has not been computed for this tensor");
    return node_->grad;
}

void Tensor::zero_grad() {
    if (node_) node_->grad.assign(node_->data.size(), 0.0);
}

void Tensor::backward() {
    if (!node_) throw ContractError("backward(): empty tensor");
    if (node_->data.size() != 1)
        throw ContractError("backward(): loss must be scalar, got shape " + shape_str());
    if (!node_->requires_grad) return;

    // Post-order DFS over tracked parents; reversed, every node's consumers
    // run before the node itself.
    std::vector<TapeNode*> topo;
    std::unordered_set<TapeNode*> visited;
    struct Frame {
        TapeNode* n;
        std::size_t next;
    };
    std::vector<Frame> stack{{node_.get(), 0}};
    visited.insert(node_.get());
    while (!stack.empty()) {
        Frame& f = stack.back();
        if (f.next < f.n->parents.size()) {
            TapeNode* p = f.n->parents[f.next++].get();
            if (p->requires_grad && !visited.count(p)) {
                visited.insert(p);
                stack.push_back({p, 0});
            }
        } else {
            topo.push_back(f.n);
            stack.pop_back();
        }
    }

    node_->ensure_grad();
    node_->grad[0] += 1.0;
    for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
        TapeNode* n = *it;
        if (n->backward_fn) n->backward_fn(*n);
    }
}

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }
bool grad_enabled() { return g_grad_enabled; }

// ---- elementwise suite --------------------------------------------------------

namespace {

enum class BinOp { add, sub, mul, div };

Tensor binary_elementwise(const Tensor& a, const Tensor& b, BinOp op, const char* name) {
    bool bcast;
    if (a.shape() == b.shape()) {
        bcast = false;
    } else if (a.rank() == 2 && b.rank() == 1 && b.shape()[0] == a.shape()[1]) {
        bcast = true;
    } else {
        throw ShapeError(std::string(name) + ": incompatible shapes " + a.shape_str() +
                         " and " + b.shape_str());
    }

    const auto& av = a.data();
    const auto& bv = b.data();
    if (op == BinOp::div) {
        for (double x : bv)
            if (x == 0.0) throw DomainError("div: zero divisor");
    }

    const std::size_t n = av.size();
    const std::size_t w = bcast ? b.size() : 0;
    std::vector<double> out(n);
    auto bval = [&](std::size_t i) { return bcast ? bv[i % w] : bv[i]; };
    switch (op) {
        case BinOp::add:
            for (std::size_t i = 0; i < n; ++i) out[i] = av[i] + bval(i);
            break;
        case BinOp::sub:
            for (std::size_t i = 0; i < n; ++i) out[i] = av[i] - bval(i);
            break;
        case BinOp::mul:
            for (std::size_t i = 0; i < n; ++i) out[i] = av[i] * bval(i);
            break;
        case BinOp::div:
            for (std::size_t i = 0; i < n; ++i) out[i] = av[i] / bval(i);
            break;
    }

    auto node = make_node(a.shape(), std::move(out));
    auto pa = a.node();
    auto pb = b.node();
    attach(node, {pa, pb}, [pa, pb, op, bcast, w](TapeNode& self) {
        const auto& g = self.grad;
        const std::size_t n = g.size();
        auto bval = [&](std::size_t i) { return bcast ? pb->data[i % w] : pb->data[i]; };
        if (pa->requires_grad) {
            pa->ensure_grad();
            switch (op) {
                case BinOp::add:
                    for (std::size_t i = 0; i < n; ++i) pa->grad[i] += g[i];
                    break;
                case BinOp::sub:
                    for (std::size_t i = 0; i < n; ++i) pa->grad[i] += g[i];
                    break;
                case BinOp::mul:
                    for (std::size_t i = 0; i < n; ++i) pa->grad[i] += g[i] * bval(i);
                    break;
                case BinOp::div:
                    for (std::size_t i = 0; i < n; ++i) pa->grad[i] += g[i] / bval(i);
                    break;
            }
        }
        if (pb->requires_grad) {
            pb->ensure_grad();
            auto slot = [&](std::size_t i) -> double& {
                return bcast ? pb->grad[i % w] : pb->grad[i];
            };
            switch (op) {
                case BinOp::add:
                    for (std::size_t i = 0; i < n; ++i) slot(i) += g[i];
                    break;
                case BinOp::sub:
                    for (std::size_t i = 0; i < n; ++i) slot(i) -= g[i];
                    break;
                case BinOp::mul:
                    for (std::size_t i = 0; i < n; ++i) slot(i) += g[i] * pa->data[i];
                    break;
                case BinOp::div:
                    for (std::size_t i = 0; i < n; ++i)
                        slot(i) -= g[i] * self.data[i] / bval(i);
                    break;
            }
        }
    });
    return Tensor(std::move(node));
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) { return binary_elementwise(a, b, BinOp::add, "add"); }
Tensor sub(const Tensor& a, const Tensor& b) { return binary_elementwise(a, b, BinOp::sub, "sub"); }
Tensor mul(const Tensor& a, const Tensor& b) { return binary_elementwise(a, b, BinOp::mul, "mul"); }
Tensor div(const Tensor& a, const Tensor& b) { return binary_elementwise(a, b, BinOp::div, "div"); }

Tensor exp(const Tensor& a) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::exp(a.data()[i]);
    auto node = make_node(a.shape(), std::move(out));
    auto pa = a.node();
    attach(node, {pa}, [pa](TapeNode& self) {
        if (!pa->requires_grad) return;
        pa->ensure_grad();
        for (std::size_t i = 0; i < self.data.size(); ++i)
            pa->grad[i] += self.grad[i] * self.data[i];
    });
    return Tensor(std::move(node));
}

Tensor log(const Tensor& a) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (a.data()[i] <= 0.0)
            throw DomainError("log: non-positive operand " + std::to_string(a.data()[i]));
        out[i] = std::log(a.data()[i]);
    }
    auto node = make_node(a.shape(), std::move(out));
    auto pa = a.node();
    attach(node, {pa}, [pa](TapeNode& self) {
        if (!pa->requires_grad) return;
        pa->ensure_grad();
        for (std::size_t i = 0; i < self.data.size(); ++i)
            pa->grad[i] += self.grad[i] / pa->data[i];
    });
    return Tensor(std::move(node));
}

Tensor relu(const Tensor& a) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] > 0.0 ? a.data()[i] : 0.0;
    auto node = make_node(a.shape(), std::move(out));
    auto pa = a.node();
    attach(node, {pa}, [pa](TapeNode& self) {
        if (!pa->requires_grad) return;
        pa->ensure_grad();
        for (std::size_t i = 0; i < self.data.size(); ++i)
            if (pa->data[i] > 0.0) pa->grad[i] += self.grad[i];
    });
    return Tensor(std::move(node));
}

Tensor scale(const Tensor& a, double c) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = c * a.data()[i];
    auto node = make_node(a.shape(), std::move(out));
    auto pa = a.node();
    attach(node, {pa}, [pa, c](TapeNode& self) {
        if (!pa->requires_grad) return;
        pa->ensure_grad();
        for (std::size_t i = 0; i < self.data.size(); ++i) pa->grad[i] += c * self.grad[i];
    });
    return Tensor(std::move(node));
}

// ---- linear algebra -------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
    require_rank2(a, "matmul");
    require_rank2(b, "matmul");
    const std::size_t m = a.shape()[0], k = a.shape()[1];
    const std::size_t k2 = b.shape()[0], n = b.shape()[1];
    if (k != k2)
        throw ShapeError("matmul: inner dimensions differ, " + a.shape_str() + " vs " +
                         b.shape_str());

    std::vector<double> out(m * n, 0.0);
    const auto& av = a.data();
    const auto& bv = b.data();
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t l = 0; l < k; ++l) {
            const double x = av[i * k + l];
            if (x == 0.0) continue;
            const double* brow = &bv[l * n];
            double* orow = &out[i * n];
            for (std::size_t j = 0; j < n; ++j) orow[j] += x * brow[j];
        }

    auto node = make_node({m, n}, std::move(out));
    auto pa = a.node();
    auto pb = b.node();
    attach(node, {pa, pb}, [pa, pb, m, k, n](TapeNode& self) {
        const auto& g = self.grad;
        if (pa->requires_grad) {
            pa->ensure_grad();  // dA = G . B^T
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t l = 0; l < k; ++l) {
                    double acc = 0.0;
                    const double* grow = &g[i * n];
                    const double* brow = &pb->data[l * n];
                    for (std::size_t j = 0; j < n; ++j) acc += grow[j] * brow[j];
                    pa->grad[i * k + l] += acc;
                }
        }
        if (pb->requires_grad) {
            pb->ensure_grad();  // dB = A^T . G
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t l = 0; l < k; ++l) {
                    const double x = pa->data[i * k + l];
                    if (x == 0.0) continue;
                    const double* grow = &g[i * n];
                    double* drow = &pb->grad[l * n];
                    for (std::size_t j = 0; j < n; ++j) drow[j] += x * grow[j];
                }
        }
    });
    return Tensor(std::move(node));
}

Tensor transpose(const Tensor& a) {
    require_rank2(a, "transpose");
    const std::size_t m = a.shape()[0], n = a.shape()[1];
    std::vector<double> out(m * n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) out[j * m + i] = a.data()[i * n + j];
    auto node = make_node({n, m}, std::move(out));
    auto pa = a.node();
    attach(node, {pa}, [pa, m, n](TapeNode& self) {
        if (!pa->requires_grad) return;
        pa->ensure_grad();
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) pa->grad[i * n + j] += self.grad[j * m + i];
    });
    return Tensor(std::move(node));
}

// ---- normalizations ---------------------------------------------------------------

Tensor softmax_rows(const Tensor& a) {
    require_rank2(a, "softmax_rows");
    const std::size_t m = a.shape()[0], n = a.shape()[1];
    for (double x : a.data())
        if (!std::isfinite(x)) throw DomainError("softmax_rows: non-finite input");

    std::vector<double> out(m * n);
    for (std::size_t i = 0; i < m; ++i) {
        const double* row = &a.data()[i * n];
        double mx = row[0];
        for (std::size_t j = 1; j < n; ++j) mx = std::max(mx, row[j]);
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            out[i * n + j] = std::exp(row[j] - mx);
            s += out[i * n + j];
        }
        for (std::size_t j = 0; j < n; ++j) out[i * n + j] /= s;
    }

    auto node = make_node({m, n}, std::move(out));
    auto pa = a.node();
    attach(node, {pa}, [pa, m, n](TapeNode& self) {
        if (!pa->requires_grad) return;
        pa->ensure_grad();
        for (std::size_t i = 0; i < m; ++i) {
            const double* y = &self.data[i * n];
            const double* g = &self.grad[i * n];
            double dot = 0.0;
            for (std::size_t j = 0; j < n; ++j) dot += g[j] * y[j];
            for (std::size_t j = 0; j < n; ++j) pa->grad[i * n + j] += y[j] * (g[j] - dot);
        }
    });
    return Tensor(std::move(node));
}

Tensor l1_normalize_cols(const Tensor& a) {
    require_rank2(a, "l1_normalize_cols");
    const std::size_t m = a.shape()[0], n = a.shape()[1];
    for (double x : a.data())
        if (x < 0.0) throw ContractError("l1_normalize_cols: negative input " + std::to_string(x));

    std::vector<double> sums(n, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) sums[j] += a.data()[i * n + j];

    std::vector<double> out(m * n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double x = a.data()[i * n + j];
            out[i * n + j] = sums[j] > 0.0 ? x / sums[j] : x;  // zero columns pass through
        }

    auto node = make_node({m, n}, std::move(out));
    auto pa = a.node();
    attach(node, {pa}, [pa, m, n, sums](TapeNode& self) {
        if (!pa->requires_grad) return;
        pa->ensure_grad();
        std::vector<double> coldot(n, 0.0);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j)
                coldot[j] += self.grad[i * n + j] * self.data[i * n + j];
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                if (sums[j] > 0.0)
                    pa->grad[i * n + j] += (self.grad[i * n + j] - coldot[j]) / sums[j];
                else
                    pa->grad[i * n + j] += self.grad[i * n + j];
            }
    });
    return Tensor(std::move(node));
}

Tensor layer_norm(const Tensor& a, const Tensor& gamma, const Tensor& beta, double eps) {
    require_rank2(a, "layer_norm");
    const std::size_t m = a.shape()[0], d = a.shape()[1];
    if (gamma.shape() != std::vector<std::size_t>{d} || beta.shape() != std::vector<std::size_t>{d})
        throw ShapeError("layer_norm: gamma/beta must be [" + std::to_string(d) + "], got " +
                         gamma.shape_str() + " and " + beta.shape_str());

    std::vector<double> out(m * d);
    std::vector<double> xhat(m * d);
    std::vector<double> inv_std(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double* row = &a.data()[i * d];
        double mean = 0.0;
        for (std::size_t j = 0; j < d; ++j) mean += row[j];
        mean /= double(d);
        double var = 0.0;
        for (std::size_t j = 0; j < d; ++j) var += (row[j] - mean) * (row[j] - mean);
        var /= double(d);
        const double inv = 1.0 / std::sqrt(var + eps);
        inv_std[i] = inv;
        for (std::size_t j = 0; j < d; ++j) {
            xhat[i * d + j] = (row[j] - mean) * inv;
            out[i * d + j] = gamma.data()[j] * xhat[i * d + j] + beta.data()[j];
        }
    }

    auto node = make_node({m, d}, std::move(out));
    auto pa = a.node();
    auto pg = gamma.node();
    auto pb = beta.node();
    attach(node, {pa, pg, pb},
           [pa, pg, pb, m, d, xhat = std::move(xhat), inv_std = std::move(inv_std)](TapeNode& self) {
               const auto& g = self.grad;
               if (pg->requires_grad) {
                   pg->ensure_grad();
                   for (std::size_t i = 0; i < m; ++i)
                       for (std::size_t j = 0; j < d; ++j)
                           pg->grad[j] += g[i * d + j] * xhat[i * d + j];
               }
               if (pb->requires_grad) {
                   pb->ensure_grad();
                   for (std::size_t i = 0; i < m; ++i)
                       for (std::size_t j = 0; j < d; ++j) pb->grad[j] += g[i * d + j];
               }
               if (pa->requires_grad) {
                   pa->ensure_grad();
                   for (std::size_t i = 0; i < m; ++i) {
                       double m1 = 0.0, m2 = 0.0;
                       for (std::size_t j = 0; j < d; ++j) {
                           const double dxh = g[i * d + j] * pg->data[j];
                           m1 += dxh;
                           m2 += dxh * xhat[i * d + j];
                       }
                       m1 /= double(d);
                       m2 /= double(d);
                       for (std::size_t j = 0; j < d; ++j) {
                           const double dxh = g[i * d + j] * pg->data[j];
                           pa->grad[i * d + j] +=
                               inv_std[i] * (dxh - m1 - xhat[i * d + j] * m2);
                       }
                   }
               }
           });
    return Tensor(std::move(node));
}

// ---- reductions and reshaping --------------------------------------------------

Tensor sum_all(const Tensor& a) {
    double s = 0.0;
    for (double x : a.data()) s += x;
    auto node = make_node({1}, {s});
    auto pa = a.node();
    attach(node, {pa}, [pa](TapeNode& self) {
        if (!pa->requires_grad) return;
        pa->ensure_grad();
        for (auto& gx : pa->grad) gx += self.grad[0];
    });
    return Tensor(std::move(node));
}

Tensor mean_all(const Tensor& a) {
    if (a.size() == 0) throw ContractError("mean_all: empty tensor");
    return scale(sum_all(a), 1.0 / double(a.size()));
}

Tensor row_sum(const Tensor& a) {
    require_rank2(a, "row_sum");
    const std::size_t m = a.shape()[0], n = a.shape()[1];
    std::vector<double> out(m, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) out[i] += a.data()[i * n + j];
    auto node = make_node({m}, std::move(out));
    auto pa = a.node();
    attach(node, {pa}, [pa, m, n](TapeNode& self) {
        if (!pa->requires_grad) return;
        pa->ensure_grad();
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) pa->grad[i * n + j] += self.grad[i];
    });
    return Tensor(std::move(node));
}

Tensor col_sum(const Tensor& a) {
    require_rank2(a, "col_sum");
    const std::size_t m = a.shape()[0], n = a.shape()[1];
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) out[j] += a.data()[i * n + j];
    auto node = make_node({n}, std::move(out));
    auto pa = a.node();
    attach(node, {pa}, [pa, m, n](TapeNode& self) {
        if (!pa->requires_grad) return;
        pa->ensure_grad();
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) pa->grad[i * n + j] += self.grad[j];
    });
    return Tensor(std::move(node));
}

Tensor diagonal(const Tensor& a) {
    require_rank2(a, "diagonal");
    const std::size_t m = a.shape()[0];
    if (a.shape()[1] != m)
        throw ShapeError("diagonal: matrix must be square, got " + a.shape_str());
    std::vector<double> out(m);
    for (std::size_t i = 0; i < m; ++i) out[i] = a.data()[i * m + i];
    auto node = make_node({m}, std::move(out));
    auto pa = a.node();
    attach(node, {pa}, [pa, m](TapeNode& self) {
        if (!pa->requires_grad) return;
        pa->ensure_grad();
        for (std::size_t i = 0; i < m; ++i) pa->grad[i * m + i] += self.grad[i];
    });
    return Tensor(std::move(node));
}

Tensor slice_rows(const Tensor& a, std::size_t begin, std::size_t end) {
    require_rank2(a, "slice_rows");
    const std::size_t m = a.shape()[0], n = a.shape()[1];
    if (begin > end || end > m)
        throw ContractError("slice_rows: range [" + std::to_string(begin) + ", " +
                            std::to_string(end) + ") out of bounds for " + a.shape_str());
    std::vector<double> out(a.data().begin() + begin * n, a.data().begin() + end * n);
    auto node = make_node({end - begin, n}, std::move(out));
    auto pa = a.node();
    attach(node, {pa}, [pa, begin, n](TapeNode& self) {
        if (!pa->requires_grad) return;
        pa->ensure_grad();
        for (std::size_t i = 0; i < self.data.size(); ++i)
            pa->grad[begin * n + i] += self.grad[i];
    });
    return Tensor(std::move(node));
}

Tensor concat_rows(std::span<const Tensor> parts) {
    if (parts.empty()) throw ContractError("concat_rows: no parts");
    const std::size_t n = parts[0].cols();
    std::size_t m = 0;
    for (const auto& p : parts) {
        require_rank2(p, "concat_rows");
        if (p.cols() != n)
            throw ShapeError("concat_rows: column mismatch, " + parts[0].shape_str() + " vs " +
                             p.shape_str());
        m += p.rows();
    }
    std::vector<double> out;
    out.reserve(m * n);
    std::vector<std::shared_ptr<TapeNode>> parents;
    std::vector<std::size_t> row_offsets;
    std::size_t off = 0;
    for (const auto& p : parts) {
        out.insert(out.end(), p.data().begin(), p.data().end());
        parents.push_back(p.node());
        row_offsets.push_back(off);
        off += p.rows();
    }
    auto node = make_node({m, n}, std::move(out));
    attach(node, parents, [parents, row_offsets, n](TapeNode& self) {
        for (std::size_t k = 0; k < parents.size(); ++k) {
            auto& p = parents[k];
            if (!p->requires_grad) continue;
            p->ensure_grad();
            const std::size_t base = row_offsets[k] * n;
            for (std::size_t i = 0; i < p->data.size(); ++i) p->grad[i] += self.grad[base + i];
        }
    });
    return Tensor(std::move(node));
}

Tensor segment_mean(const Tensor& a, const std::vector<int>& membership,
                    std::size_t n_segments) {
    const std::size_t rank = a.rank();
    if (rank != 1 && rank != 2)
        throw ShapeError("segment_mean: expected rank 1 or 2, got " + a.shape_str());
    const std::size_t rows = a.shape()[0];
    const std::size_t d = rank == 2 ? a.shape()[1] : 1;
    if (membership.size() != rows)
        throw ContractError("segment_mean: membership covers " +
                            std::to_string(membership.size()) + " rows, tensor has " +
                            std::to_string(rows));

    std::vector<std::size_t> counts(n_segments, 0);
    for (int s : membership) {
        if (s < 0 || std::size_t(s) >= n_segments)
            throw ContractError("segment_mean: membership id " + std::to_string(s) +
                                " out of range");
        counts[std::size_t(s)]++;
    }
    for (std::size_t s = 0; s < n_segments; ++s)
        if (counts[s] == 0)
            throw ContractError("segment_mean: segment " + std::to_string(s) + " is empty");

    std::vector<double> out(n_segments * d, 0.0);
    for (std::size_t i = 0; i < rows; ++i) {
        const std::size_t s = std::size_t(membership[i]);
        for (std::size_t j = 0; j < d; ++j) out[s * d + j] += a.data()[i * d + j];
    }
    for (std::size_t s = 0; s < n_segments; ++s)
        for (std::size_t j = 0; j < d; ++j) out[s * d + j] /= double(counts[s]);

    std::vector<std::size_t> shape =
        rank == 2 ? std::vector<std::size_t>{n_segments, d} : std::vector<std::size_t>{n_segments};
    auto node = make_node(std::move(shape), std::move(out));
    auto pa = a.node();
    attach(node, {pa}, [pa, membership, counts, rows, d](TapeNode& self) {
        if (!pa->requires_grad) return;
        pa->ensure_grad();
        for (std::size_t i = 0; i < rows; ++i) {
            const std::size_t s = std::size_t(membership[i]);
            const double inv = 1.0 / double(counts[s]);
            for (std::size_t j = 0; j < d; ++j)
                pa->grad[i * d + j] += self.grad[s * d + j] * inv;
        }
    });
    return Tensor(std::move(node));
}

// ---- similarity -----------------------------------------------------------------

Tensor cosine_similarity_matrix(const Tensor& a, const Tensor& b, double eps) {
    require_rank2(a, "cosine_similarity_matrix");
    require_rank2(b, "cosine_similarity_matrix");
    const std::size_t m = a.shape()[0], d = a.shape()[1], n = b.shape()[0];
    if (b.shape()[1] != d)
        throw ShapeError("cosine_similarity_matrix: feature dims differ, " + a.shape_str() +
                         " vs " + b.shape_str());

    std::vector<double> an(m), bn(n);
    for (std::size_t i = 0; i < m; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < d; ++j) s += a.data()[i * d + j] * a.data()[i * d + j];
        an[i] = std::sqrt(s);
    }
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < d; ++j) s += b.data()[i * d + j] * b.data()[i * d + j];
        bn[i] = std::sqrt(s);
    }

    std::vector<double> out(m * n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double dot = 0.0;
            for (std::size_t l = 0; l < d; ++l)
                dot += a.data()[i * d + l] * b.data()[j * d + l];
            out[i * n + j] = dot / (an[i] * bn[j] + eps);
        }

    auto node = make_node({m, n}, std::move(out));
    auto pa = a.node();
    auto pb = b.node();
    attach(node, {pa, pb},
           [pa, pb, m, n, d, eps, an = std::move(an), bn = std::move(bn)](TapeNode& self) {
               const auto& g = self.grad;
               const auto& s = self.data;
               if (pa->requires_grad) {
                   pa->ensure_grad();
                   for (std::size_t i = 0; i < m; ++i) {
                       const double ani = an[i];
                       for (std::size_t j = 0; j < n; ++j) {
                           const double denom = ani * bn[j] + eps;
                           const double c = g[i * n + j] / denom;
                           if (c == 0.0) continue;
                           const double k =
                               ani > 0.0 ? c * s[i * n + j] * bn[j] / ani : 0.0;
                           for (std::size_t l = 0; l < d; ++l)
                               pa->grad[i * d + l] +=
                                   c * pb->data[j * d + l] - k * pa->data[i * d + l];
                       }
                   }
               }
               if (pb->requires_grad) {
                   pb->ensure_grad();
                   for (std::size_t i = 0; i < m; ++i) {
                       for (std::size_t j = 0; j < n; ++j) {
                           const double denom = an[i] * bn[j] + eps;
                           const double c = g[i * n + j] / denom;
                           if (c == 0.0) continue;
                           const double k =
                               bn[j] > 0.0 ? c * s[i * n + j] * an[i] / bn[j] : 0.0;
                           for (std::size_t l = 0; l < d; ++l)
                               pb->grad[j * d + l] +=
                                   c * pa->data[i * d + l] - k * pb->data[j * d + l];
                       }
                   }
               }
           });
    return Tensor(std::move(node));
}

Tensor cosine_sim(const Tensor& u, const Tensor& v, double eps) {
    if (u.rank() != 1 || v.rank() != 1 || u.size() != v.size())
        throw ShapeError("cosine_sim: expected equal-length vectors, got " + u.shape_str() +
                         " and " + v.shape_str());
    const std::size_t d = u.size();
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        dot += u.data()[i] * v.data()[i];
        nu += u.data()[i] * u.data()[i];
        nv += v.data()[i] * v.data()[i];
    }
    nu = std::sqrt(nu);
    nv = std::sqrt(nv);
    const double denom = nu * nv + eps;
    auto node = make_node({1}, {dot / denom});
    auto pu = u.node();
    auto pv = v.node();
    attach(node, {pu, pv}, [pu, pv, d, nu, nv, denom](TapeNode& self) {
        const double g = self.grad[0];
        const double sim = self.data[0];
        if (pu->requires_grad) {
            pu->ensure_grad();
            const double k = nu > 0.0 ? g * sim * nv / (denom * nu) : 0.0;
            for (std::size_t i = 0; i < d; ++i)
                pu->grad[i] += g * pv->data[i] / denom - k * pu->data[i];
        }
        if (pv->requires_grad) {
            pv->ensure_grad();
            const double k = nv > 0.0 ? g * sim * nu / (denom * nv) : 0.0;
            for (std::size_t i = 0; i < d; ++i)
                pv->grad[i] += g * pu->data[i] / denom - k * pv->data[i];
        }
    });
    return Tensor(std::move(node));
}

// ---- sparse propagation ------------------------------------------------------

Tensor propagate(const Tensor& h, const std::vector<PropEntry>& entries) {
    require_rank2(h, "propagate");
    const std::size_t rows = h.shape()[0], d = h.shape()[1];
    for (const auto& e : entries)
        if (e.row >= rows || e.col >= rows)
            throw ContractError("propagate: entry (" + std::to_string(e.row) + ", " +
                                std::to_string(e.col) + ") out of range for " +
                                std::to_string(rows) + " rows");

    std::vector<double> out(rows * d, 0.0);
    for (const auto& e : entries) {
        const double* src = &h.data()[e.col * d];
        double* dst = &out[e.row * d];
        for (std::size_t j = 0; j < d; ++j) dst[j] += e.w * src[j];
    }
    auto node = make_node({rows, d}, std::move(out));
    auto ph = h.node();
    attach(node, {ph}, [ph, entries, d](TapeNode& self) {
        if (!ph->requires_grad) return;
        ph->ensure_grad();
        for (const auto& e : entries) {
            const double* g = &self.grad[e.row * d];
            double* dst = &ph->grad[e.col * d];
            for (std::size_t j = 0; j < d; ++j) dst[j] += e.w * g[j];
        }
    });
    return Tensor(std::move(node));
}

}  // namespace cvtgad
