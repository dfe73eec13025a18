#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "cvtgad/errors.hpp"

namespace cvtgad {

// One recorded node of the reverse-mode tape. Holds the forward value and,
// when gradients are required, a closure that pushes this node's gradient
// into its parents.
struct TapeNode {
    std::vector<std::size_t> shape;
    std::vector<double> data;
    std::vector<double> grad;
    bool requires_grad = false;
    std::vector<std::shared_ptr<TapeNode>> parents;
    std::function<void(TapeNode&)> backward_fn;

    std::size_t size() const { return data.size(); }
    void ensure_grad() {
        if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
    }
};

// Dense 64-bit tensor with value semantics over a shared tape node.
// Rank 1 ({n}) and rank 2 ({rows, cols}) cover everything in this project;
// scalars are {1}. Data is row-major.
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(std::vector<std::size_t> shape, bool requires_grad = false);
    static Tensor full(std::vector<std::size_t> shape, double value, bool requires_grad = false);
    static Tensor from_data(std::vector<std::size_t> shape, std::vector<double> data,
                            bool requires_grad = false);
    static Tensor scalar(double value);

    bool defined() const { return node_ != nullptr; }
    const std::vector<std::size_t>& shape() const { return node_->shape; }
    std::size_t size() const { return node_->data.size(); }
    std::size_t rank() const { return node_->shape.size(); }
    std::size_t rows() const;
    std::size_t cols() const;
    std::string shape_str() const;

    std::vector<double>& data() { return node_->data; }
    const std::vector<double>& data() const { return node_->data; }

    double value() const;                       // scalar tensors only
    double at(std::size_t i) const { return node_->data[i]; }
    double at(std::size_t r, std::size_t c) const { return node_->data[r * cols() + c]; }
    void set(std::size_t i, double v) { node_->data[i] = v; }
    void set(std::size_t r, std::size_t c, double v) { node_->data[r * cols() + c] = v; }

    bool requires_grad() const { return node_ && node_->requires_grad; }
    const std::vector<double>& grad() const;
    void zero_grad();

    // Reverse pass from a scalar loss. dL/dLoss is seeded with 1; repeated
    // calls without zero_grad() accumulate.
    void backward();

    std::shared_ptr<TapeNode> node() const { return node_; }
    explicit Tensor(std::shared_ptr<TapeNode> node) : node_(std::move(node)) {}

private:
    std::shared_ptr<TapeNode> node_;
};

// While alive, ops compute values but record nothing on the tape. Used for
// evaluation passes where gradients are not needed.
class NoGradGuard {
public:
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    bool previous_;
};

bool grad_enabled();

// ---- elementwise suite -----------------------------------------------------
// Binary ops accept exact shape matches, or a rank-1 right operand broadcast
// across the rows of a rank-2 left operand.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor scale(const Tensor& a, double c);

// ---- linear algebra ---------------------------------------------------------
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

// ---- normalizations ----------------------------------------------------------
// Rows sum to 1; stabilized by row-max subtraction.
Tensor softmax_rows(const Tensor& a);
// Columns sum to 1; requires non-negative input; all-zero columns pass
// through unchanged.
Tensor l1_normalize_cols(const Tensor& a);
// Per-row standardization scaled by gamma and shifted by beta (both {cols}).
Tensor layer_norm(const Tensor& a, const Tensor& gamma, const Tensor& beta,
                  double eps = 1e-5);

// ---- reductions and reshaping ------------------------------------------------
Tensor sum_all(const Tensor& a);
Tensor mean_all(const Tensor& a);
Tensor row_sum(const Tensor& a);   // {m,n} -> {m}
Tensor col_sum(const Tensor& a);   // {m,n} -> {n}
Tensor diagonal(const Tensor& a);  // {m,m} -> {m}
Tensor slice_rows(const Tensor& a, std::size_t begin, std::size_t end);
Tensor concat_rows(std::span<const Tensor> parts);

// Mean of the rows of each segment; `membership[i]` is the segment of row i.
// Every segment in [0, n_segments) must be non-empty.
Tensor segment_mean(const Tensor& a, const std::vector<int>& membership,
                    std::size_t n_segments);

// ---- similarity ----------------------------------------------------------------
// S[i][j] = a_i . b_j / (|a_i||b_j| + eps)
Tensor cosine_similarity_matrix(const Tensor& a, const Tensor& b, double eps = 1e-12);
Tensor cosine_sim(const Tensor& u, const Tensor& v, double eps = 1e-12);

// ---- sparse propagation -----------------------------------------------------
// out[row] += w * in[col], one entry per coefficient of a sparse operator.
struct PropEntry {
    std::uint32_t row;
    std::uint32_t col;
    double w;
};
Tensor propagate(const Tensor& h, const std::vector<PropEntry>& entries);

}  // namespace cvtgad
