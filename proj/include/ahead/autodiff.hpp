#pragma once

// Minimal reverse-mode differentiation over dense Eigen matrices.
//
// A Tape records every operation in creation order; backward() walks the
// record in reverse and accumulates gradients. Only the operations needed by
// the encoder/aggregator/decoder stack are provided.

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <vector>

namespace ahead {

using Matrix = Eigen::MatrixXd;
using RowVector = Eigen::RowVectorXd;
using IndexList = std::vector<Eigen::Index>;

namespace ad {

/// Handle to a node on a Tape. Only meaningful together with its tape.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Leaf that never receives a gradient.
  Var constant(Matrix value);
  /// Leaf whose gradient is tracked.
  Var leaf(Matrix value);

  const Matrix& value(Var v) const { return nodes_[v.id].value; }
  /// Gradient of the last backward() root with respect to v. Zero-sized if
  /// v received no gradient.
  const Matrix& grad(Var v) const { return nodes_[v.id].grad; }
  bool requires_grad(Var v) const { return nodes_[v.id].requires_grad; }

  /// Seeds d(root)/d(root) = 1 for a 1x1 root and backpropagates.
  void backward(Var root);

  std::size_t size() const { return nodes_.size(); }

  // Used by the op implementations.
  // `out` is the node's own forward value.
  using BackwardFn =
      std::function<void(Tape&, const Matrix& upstream, const Matrix& out)>;
  Var record(Matrix value, std::vector<Var> inputs, BackwardFn backward);
  void accumulate(Var v, const Matrix& g);
  template <typename Derived>
  void accumulate_block(Var v, Eigen::Index row, Eigen::Index col,
                        const Eigen::MatrixBase<Derived>& g);
  Matrix& grad_buffer(Var v);

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    BackwardFn backward;
  };
  std::vector<Node> nodes_;
};

template <typename Derived>
void Tape::accumulate_block(Var v, Eigen::Index row, Eigen::Index col,
                            const Eigen::MatrixBase<Derived>& g) {
  if (!nodes_[v.id].requires_grad) return;
  grad_buffer(v).block(row, col, g.rows(), g.cols()) += g;
}

// ---- operations -----------------------------------------------------------

Var matmul(Tape& t, Var a, Var b);
/// a * b^T
Var matmul_nt(Tape& t, Var a, Var b);
Var add(Tape& t, Var a, Var b);
Var sub(Tape& t, Var a, Var b);
/// Adds the 1 x c row `bias` to every row of `a`.
Var add_row(Tape& t, Var a, Var bias);
/// Multiplies every row of `a` elementwise by the 1 x c row `w`.
Var mul_row(Tape& t, Var a, Var w);
Var relu(Tape& t, Var a);
Var sigmoid(Tape& t, Var a);
Var scale(Tape& t, Var a, double factor);
/// a * s(row, col), with s(row, col) differentiable.
Var scale_by_entry(Tape& t, Var a, Var s, Eigen::Index row, Eigen::Index col);
/// out[e] = dot(p.row(p_index[e]), q.row(q_index[e])), shape E x 1.
Var gather_rowdot(Tape& t, Var p, Var q, const IndexList& p_index,
                  const IndexList& q_index);
Var concat_rows(Tape& t, const std::vector<Var>& parts);
Var concat_cols(Tape& t, const std::vector<Var>& parts);
Var slice_rows(Tape& t, Var a, Eigen::Index offset, Eigen::Index count);
/// Softmax of the E x 1 column `scores` within groups given by `segment`
/// (values in [0, num_segments)). Max-subtracted per group.
Var segment_softmax(Tape& t, Var scores, const IndexList& segment,
                    Eigen::Index num_segments);
/// out.row(dst[e]) += weight[e] * m.row(src[e]); out has `rows` rows.
Var scatter_weighted(Tape& t, Var weight, Var m, const IndexList& src,
                     const IndexList& dst, Eigen::Index rows);
/// Row-wise softmax.
Var softmax_rows(Tape& t, Var a);
/// Sum of squared entries of (a - target); 1 x 1. `target` is constant.
Var squared_distance(Tape& t, Var a, const Matrix& target);
/// sqrt(s + eps) for a 1 x 1 input.
Var sqrt_eps(Tape& t, Var s, double eps);

}  // namespace ad
}  // namespace ahead
