#include "ahead/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

namespace ahead::ad {

Var Tape::constant(Matrix value) {
  nodes_.push_back(Node{std::move(value), Matrix(), false, nullptr});
  return Var{static_cast<int>(nodes_.size() - 1)};
}

Var Tape::leaf(Matrix value) {
  nodes_.push_back(Node{std::move(value), Matrix(), true, nullptr});
  return Var{static_cast<int>(nodes_.size() - 1)};
}

Var Tape::record(Matrix value, std::vector<Var> inputs, BackwardFn backward) {
  const bool needs = std::any_of(inputs.begin(), inputs.end(),
                                 [&](Var v) { return nodes_[v.id].requires_grad; });
  nodes_.push_back(Node{std::move(value), Matrix(), needs,
                        needs ? std::move(backward) : nullptr});
  return Var{static_cast<int>(nodes_.size() - 1)};
}

Matrix& Tape::grad_buffer(Var v) {
  Node& n = nodes_[v.id];
  if (n.grad.size() == 0) n.grad = Matrix::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

void Tape::accumulate(Var v, const Matrix& g) {
  if (!nodes_[v.id].requires_grad) return;
  grad_buffer(v) += g;
}

void Tape::backward(Var root) {
  if (nodes_[root.id].value.size() != 1) {
    throw std::invalid_argument("backward() root must be 1x1");
  }
  for (auto& n : nodes_) n.grad.resize(0, 0);
  if (!nodes_[root.id].requires_grad) return;
  nodes_[root.id].grad = Matrix::Ones(1, 1);
  for (int i = root.id; i >= 0; --i) {
    Node& n = nodes_[i];
    if (!n.backward || n.grad.size() == 0) continue;
    // Closures only write into their inputs' buffers, never into node i.
    n.backward(*this, n.grad, n.value);
  }
}

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch");
  }
}

void require_column(const Matrix& a, const char* op) {
  if (a.cols() != 1) throw std::invalid_argument(std::string(op) + ": expected a column");
}

}  // namespace

Var matmul(Tape& t, Var a, Var b) {
  const Matrix& av = t.value(a);
  const Matrix& bv = t.value(b);
  if (av.cols() != bv.rows()) throw std::invalid_argument("matmul: shape mismatch");
  Matrix out = av * bv;
  return t.record(std::move(out), {a, b}, [a, b](Tape& tp, const Matrix& g, const Matrix&) {
    if (tp.requires_grad(a)) tp.grad_buffer(a).noalias() += g * tp.value(b).transpose();
    if (tp.requires_grad(b)) tp.grad_buffer(b).noalias() += tp.value(a).transpose() * g;
  });
}

Var matmul_nt(Tape& t, Var a, Var b) {
  const Matrix& av = t.value(a);
  const Matrix& bv = t.value(b);
  if (av.cols() != bv.cols()) throw std::invalid_argument("matmul_nt: shape mismatch");
  Matrix out = av * bv.transpose();
  return t.record(std::move(out), {a, b}, [a, b](Tape& tp, const Matrix& g, const Matrix&) {
    if (tp.requires_grad(a)) tp.grad_buffer(a).noalias() += g * tp.value(b);
    if (tp.requires_grad(b)) tp.grad_buffer(b).noalias() += g.transpose() * tp.value(a);
  });
}

Var add(Tape& t, Var a, Var b) {
  require_same_shape(t.value(a), t.value(b), "add");
  Matrix out = t.value(a) + t.value(b);
  return t.record(std::move(out), {a, b}, [a, b](Tape& tp, const Matrix& g, const Matrix&) {
    tp.accumulate(a, g);
    tp.accumulate(b, g);
  });
}

Var sub(Tape& t, Var a, Var b) {
  require_same_shape(t.value(a), t.value(b), "sub");
  Matrix out = t.value(a) - t.value(b);
  return t.record(std::move(out), {a, b}, [a, b](Tape& tp, const Matrix& g, const Matrix&) {
    tp.accumulate(a, g);
    if (tp.requires_grad(b)) tp.grad_buffer(b) -= g;
  });
}

Var add_row(Tape& t, Var a, Var bias) {
  const Matrix& bv = t.value(bias);
  if (bv.rows() != 1 || bv.cols() != t.value(a).cols()) {
    throw std::invalid_argument("add_row: bias must be 1 x cols");
  }
  Matrix out = t.value(a).rowwise() + bv.row(0);
  return t.record(std::move(out), {a, bias},
                  [a, bias](Tape& tp, const Matrix& g, const Matrix&) {
                    tp.accumulate(a, g);
                    if (tp.requires_grad(bias)) tp.grad_buffer(bias) += g.colwise().sum();
                  });
}

Var mul_row(Tape& t, Var a, Var w) {
  const Matrix& wv = t.value(w);
  if (wv.rows() != 1 || wv.cols() != t.value(a).cols()) {
    throw std::invalid_argument("mul_row: weight must be 1 x cols");
  }
  Matrix out = t.value(a).array().rowwise() * wv.row(0).array();
  return t.record(std::move(out), {a, w}, [a, w](Tape& tp, const Matrix& g, const Matrix&) {
    if (tp.requires_grad(a)) {
      tp.grad_buffer(a).array() += g.array().rowwise() * tp.value(w).row(0).array();
    }
    if (tp.requires_grad(w)) {
      tp.grad_buffer(w) += (g.array() * tp.value(a).array()).colwise().sum().matrix();
    }
  });
}

Var relu(Tape& t, Var a) {
  Matrix out = t.value(a).cwiseMax(0.0);
  return t.record(std::move(out), {a}, [a](Tape& tp, const Matrix& g, const Matrix&) {
    tp.grad_buffer(a).array() += (tp.value(a).array() > 0.0).select(g.array(), 0.0);
  });
}

Var sigmoid(Tape& t, Var a) {
  Matrix out = t.value(a).unaryExpr([](double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
  });
  return t.record(std::move(out), {a}, [a](Tape& tp, const Matrix& g, const Matrix& y) {
    tp.grad_buffer(a).array() += g.array() * y.array() * (1.0 - y.array());
  });
}

Var scale(Tape& t, Var a, double factor) {
  Matrix out = t.value(a) * factor;
  return t.record(std::move(out), {a}, [a, factor](Tape& tp, const Matrix& g, const Matrix&) {
    tp.grad_buffer(a) += g * factor;
  });
}

Var scale_by_entry(Tape& t, Var a, Var s, Eigen::Index row, Eigen::Index col) {
  const Matrix& sv = t.value(s);
  if (row < 0 || col < 0 || row >= sv.rows() || col >= sv.cols()) {
    throw std::out_of_range("scale_by_entry: entry out of range");
  }
  Matrix out = t.value(a) * sv(row, col);
  return t.record(std::move(out), {a, s},
                  [a, s, row, col](Tape& tp, const Matrix& g, const Matrix&) {
                    if (tp.requires_grad(a)) tp.grad_buffer(a) += g * tp.value(s)(row, col);
                    if (tp.requires_grad(s)) {
                      tp.grad_buffer(s)(row, col) += (g.array() * tp.value(a).array()).sum();
                    }
                  });
}

Var gather_rowdot(Tape& t, Var p, Var q, const IndexList& p_index, const IndexList& q_index) {
  if (p_index.size() != q_index.size()) {
    throw std::invalid_argument("gather_rowdot: index lists differ in length");
  }
  const Matrix& pv = t.value(p);
  const Matrix& qv = t.value(q);
  if (pv.cols() != qv.cols()) throw std::invalid_argument("gather_rowdot: shape mismatch");
  const auto n = static_cast<Eigen::Index>(p_index.size());
  Matrix out(n, 1);
  for (Eigen::Index e = 0; e < n; ++e) {
    out(e, 0) = pv.row(p_index[e]).dot(qv.row(q_index[e]));
  }
  return t.record(std::move(out), {p, q},
                  [p, q, p_index, q_index](Tape& tp, const Matrix& g, const Matrix&) {
                    const bool gp = tp.requires_grad(p);
                    const bool gq = tp.requires_grad(q);
                    Matrix* bp = gp ? &tp.grad_buffer(p) : nullptr;
                    Matrix* bq = gq ? &tp.grad_buffer(q) : nullptr;
                    const Matrix& pv2 = tp.value(p);
                    const Matrix& qv2 = tp.value(q);
                    for (std::size_t e = 0; e < p_index.size(); ++e) {
                      const double ge = g(static_cast<Eigen::Index>(e), 0);
                      if (gp) bp->row(p_index[e]) += ge * qv2.row(q_index[e]);
                      if (gq) bq->row(q_index[e]) += ge * pv2.row(p_index[e]);
                    }
                  });
}

Var concat_rows(Tape& t, const std::vector<Var>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_rows: no inputs");
  Eigen::Index rows = 0;
  const Eigen::Index cols = t.value(parts[0]).cols();
  for (Var v : parts) {
    if (t.value(v).cols() != cols) throw std::invalid_argument("concat_rows: shape mismatch");
    rows += t.value(v).rows();
  }
  Matrix out(rows, cols);
  Eigen::Index r = 0;
  for (Var v : parts) {
    out.middleRows(r, t.value(v).rows()) = t.value(v);
    r += t.value(v).rows();
  }
  return t.record(std::move(out), parts, [parts](Tape& tp, const Matrix& g, const Matrix&) {
    Eigen::Index r2 = 0;
    for (Var v : parts) {
      const Eigen::Index n = tp.value(v).rows();
      if (tp.requires_grad(v)) tp.grad_buffer(v) += g.middleRows(r2, n);
      r2 += n;
    }
  });
}

Var concat_cols(Tape& t, const std::vector<Var>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_cols: no inputs");
  Eigen::Index cols = 0;
  const Eigen::Index rows = t.value(parts[0]).rows();
  for (Var v : parts) {
    if (t.value(v).rows() != rows) throw std::invalid_argument("concat_cols: shape mismatch");
    cols += t.value(v).cols();
  }
  Matrix out(rows, cols);
  Eigen::Index c = 0;
  for (Var v : parts) {
    out.middleCols(c, t.value(v).cols()) = t.value(v);
    c += t.value(v).cols();
  }
  return t.record(std::move(out), parts, [parts](Tape& tp, const Matrix& g, const Matrix&) {
    Eigen::Index c2 = 0;
    for (Var v : parts) {
      const Eigen::Index n = tp.value(v).cols();
      if (tp.requires_grad(v)) tp.grad_buffer(v) += g.middleCols(c2, n);
      c2 += n;
    }
  });
}

Var slice_rows(Tape& t, Var a, Eigen::Index offset, Eigen::Index count) {
  const Matrix& av = t.value(a);
  if (offset < 0 || count < 0 || offset + count > av.rows()) {
    throw std::out_of_range("slice_rows: range out of bounds");
  }
  Matrix out = av.middleRows(offset, count);
  return t.record(std::move(out), {a},
                  [a, offset, count](Tape& tp, const Matrix& g, const Matrix&) {
                    tp.grad_buffer(a).middleRows(offset, count) += g;
                  });
}

Var segment_softmax(Tape& t, Var scores, const IndexList& segment, Eigen::Index num_segments) {
  const Matrix& sv = t.value(scores);
  require_column(sv, "segment_softmax");
  if (static_cast<Eigen::Index>(segment.size()) != sv.rows()) {
    throw std::invalid_argument("segment_softmax: segment list length mismatch");
  }
  const Eigen::Index n = sv.rows();
  Eigen::VectorXd group_max =
      Eigen::VectorXd::Constant(num_segments, -std::numeric_limits<double>::infinity());
  for (Eigen::Index e = 0; e < n; ++e) {
    group_max(segment[e]) = std::max(group_max(segment[e]), sv(e, 0));
  }
  Matrix out(n, 1);
  Eigen::VectorXd group_sum = Eigen::VectorXd::Zero(num_segments);
  for (Eigen::Index e = 0; e < n; ++e) {
    out(e, 0) = std::exp(sv(e, 0) - group_max(segment[e]));
    group_sum(segment[e]) += out(e, 0);
  }
  for (Eigen::Index e = 0; e < n; ++e) out(e, 0) /= group_sum(segment[e]);
  return t.record(std::move(out), {scores},
                  [scores, segment, num_segments](Tape& tp, const Matrix& g, const Matrix& y) {
                    // d s_e = y_e * (g_e - sum_{f in seg(e)} g_f y_f)
                    Eigen::VectorXd dot = Eigen::VectorXd::Zero(num_segments);
                    for (std::size_t e = 0; e < segment.size(); ++e) {
                      const auto i = static_cast<Eigen::Index>(e);
                      dot(segment[e]) += g(i, 0) * y(i, 0);
                    }
                    Matrix& b = tp.grad_buffer(scores);
                    for (std::size_t e = 0; e < segment.size(); ++e) {
                      const auto i = static_cast<Eigen::Index>(e);
                      b(i, 0) += y(i, 0) * (g(i, 0) - dot(segment[e]));
                    }
                  });
}

Var scatter_weighted(Tape& t, Var weight, Var m, const IndexList& src, const IndexList& dst,
                     Eigen::Index rows) {
  const Matrix& wv = t.value(weight);
  const Matrix& mv = t.value(m);
  require_column(wv, "scatter_weighted");
  if (src.size() != dst.size() || static_cast<Eigen::Index>(src.size()) != wv.rows()) {
    throw std::invalid_argument("scatter_weighted: index/weight length mismatch");
  }
  Matrix out = Matrix::Zero(rows, mv.cols());
  for (std::size_t e = 0; e < src.size(); ++e) {
    out.row(dst[e]) += wv(static_cast<Eigen::Index>(e), 0) * mv.row(src[e]);
  }
  return t.record(std::move(out), {weight, m},
                  [weight, m, src, dst](Tape& tp, const Matrix& g, const Matrix&) {
                    const bool gw = tp.requires_grad(weight);
                    const bool gm = tp.requires_grad(m);
                    Matrix* bw = gw ? &tp.grad_buffer(weight) : nullptr;
                    Matrix* bm = gm ? &tp.grad_buffer(m) : nullptr;
                    const Matrix& wv2 = tp.value(weight);
                    const Matrix& mv2 = tp.value(m);
                    for (std::size_t e = 0; e < src.size(); ++e) {
                      const auto i = static_cast<Eigen::Index>(e);
                      if (gw) (*bw)(i, 0) += g.row(dst[e]).dot(mv2.row(src[e]));
                      if (gm) bm->row(src[e]) += wv2(i, 0) * g.row(dst[e]);
                    }
                  });
}

Var softmax_rows(Tape& t, Var a) {
  const Matrix& av = t.value(a);
  Matrix out(av.rows(), av.cols());
  for (Eigen::Index r = 0; r < av.rows(); ++r) {
    const double mx = av.row(r).maxCoeff();
    out.row(r) = (av.row(r).array() - mx).exp().matrix();
    out.row(r) /= out.row(r).sum();
  }
  return t.record(std::move(out), {a}, [a](Tape& tp, const Matrix& g, const Matrix& y) {
    const Eigen::VectorXd dot = (g.array() * y.array()).rowwise().sum();
    tp.grad_buffer(a).array() += y.array() * (g.array().colwise() - dot.array());
  });
}

Var squared_distance(Tape& t, Var a, const Matrix& target) {
  require_same_shape(t.value(a), target, "squared_distance");
  Matrix out(1, 1);
  out(0, 0) = (t.value(a) - target).squaredNorm();
  return t.record(std::move(out), {a}, [a, target](Tape& tp, const Matrix& g, const Matrix&) {
    tp.grad_buffer(a) += (2.0 * g(0, 0)) * (tp.value(a) - target);
  });
}

Var sqrt_eps(Tape& t, Var s, double eps) {
  const Matrix& sv = t.value(s);
  if (sv.size() != 1) throw std::invalid_argument("sqrt_eps: expected 1x1 input");
  Matrix out(1, 1);
  out(0, 0) = std::sqrt(sv(0, 0) + eps);
  return t.record(std::move(out), {s}, [s](Tape& tp, const Matrix& g, const Matrix& y) {
    tp.grad_buffer(s)(0, 0) += g(0, 0) / (2.0 * y(0, 0));
  });
}

}  // namespace ahead::ad
