#include "tbdfs/tape.hpp"

#include <cmath>
#include <utility>

#include "tbdfs/errors.hpp"
#include "tbdfs/kernels.hpp"

namespace tbdfs {

namespace {

double stable_sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double stable_logsigmoid(double x) {
  if (x >= 0.0) {
    return -std::log1p(std::exp(-x));
  }
  return x - std::log1p(std::exp(x));
}

// How the two operands of an elementwise binary op line up.
enum class Bcast { kSame, kScalarA, kScalarB, kRowA, kRowB };

struct BcastPlan {
  Bcast kind;
  std::size_t rows, cols;
  std::vector<std::size_t> out_shape;
};

BcastPlan plan_bcast(const Tensor& a, const Tensor& b, const char* op) {
  if (a.same_shape(b)) {
    return {Bcast::kSame, a.rows(), a.cols(), a.shape};
  }
  if (a.is_scalar()) {
    return {Bcast::kScalarA, b.rows(), b.cols(), b.shape};
  }
  if (b.is_scalar()) {
    return {Bcast::kScalarB, a.rows(), a.cols(), a.shape};
  }
  if (a.cols() == b.cols() && a.rows() == 1 && b.rows() > 1) {
    return {Bcast::kRowA, b.rows(), b.cols(), b.shape};
  }
  if (a.cols() == b.cols() && b.rows() == 1 && a.rows() > 1) {
    return {Bcast::kRowB, a.rows(), a.cols(), a.shape};
  }
  throw ShapeError(std::string(op) + ": incompatible shapes " + a.shape_str() +
                   " and " + b.shape_str());
}

// Reduces a full-size gradient onto a (possibly broadcast) operand.
void reduce_into(std::vector<double>& scratch, const double* g,
                 const BcastPlan& plan, bool operand_was_broadcast,
                 std::size_t operand_numel) {
  scratch.assign(operand_numel, 0.0);
  const std::size_t full = plan.rows * plan.cols;
  if (!operand_was_broadcast) {
    for (std::size_t i = 0; i < full; ++i) scratch[i] = g[i];
    return;
  }
  if (operand_numel == 1) {
    double s = 0.0;
    for (std::size_t i = 0; i < full; ++i) s += g[i];
    scratch[0] = s;
    return;
  }
  // row-broadcast: column sums
  for (std::size_t r = 0; r < plan.rows; ++r) {
    for (std::size_t c = 0; c < plan.cols; ++c) {
      scratch[c] += g[r * plan.cols + c];
    }
  }
}

void transpose_into(const Tensor& x, std::vector<double>& out) {
  const std::size_t r = x.rows(), c = x.cols();
  out.resize(r * c);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      out[j * r + i] = x.values[i * c + j];
    }
  }
}

}  // namespace

void Tape::clear() { nodes_.clear(); }

int Tape::push(Tensor value, std::function<void(Tape&, int)> bw) {
  nodes_.push_back(Node{std::move(value), Tensor{}, std::move(bw), false});
  return static_cast<int>(nodes_.size()) - 1;
}

Var Tape::param(Tensor v) {
  int id = push(std::move(v), nullptr);
  nodes_[id].is_param = true;
  return Var{id};
}

Var Tape::constant(Tensor v) { return Var{push(std::move(v), nullptr)}; }

Tensor& Tape::grad_ref(int id) {
  Node& n = nodes_[id];
  if (n.grad.values.empty()) {
    n.grad = Tensor::zeros(n.value.shape);
  }
  return n.grad;
}

void Tape::accum(int id, const double* g, std::size_t n) {
  Tensor& gr = grad_ref(id);
  kern::active().axpy(1.0, g, gr.values.data(), n);
}

Tensor Tape::grad(Var v) const {
  const Node& n = nodes_[v.id];
  if (n.grad.values.empty()) return Tensor::zeros(n.value.shape);
  return n.grad;
}

void Tape::backward(Var loss) {
  if (!loss.valid() || !val(loss.id).is_scalar()) {
    throw ShapeError("backward: loss must be a scalar tensor");
  }
  for (Node& n : nodes_) n.grad = Tensor{};
  grad_ref(loss.id).values[0] = 1.0;
  for (int i = loss.id; i >= 0; --i) {
    Node& n = nodes_[i];
    if (n.grad.values.empty() || !n.backward) continue;
    n.backward(*this, i);
  }
}

std::unordered_map<int, Tensor> Tape::leaf_gradients() const {
  std::unordered_map<int, Tensor> out;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].is_param) out.emplace(static_cast<int>(i), grad(Var{(int)i}));
  }
  return out;
}

// ---- elementwise binaries ----

namespace {
enum class BinKind { kAdd, kSub, kMul };
}

Var Tape::add(Var a, Var b) {
  const Tensor& ta = val(a.id);
  const Tensor& tb = val(b.id);
  BcastPlan plan = plan_bcast(ta, tb, "add");
  Tensor out = Tensor::zeros(plan.out_shape);
  const std::size_t n = out.numel();
  switch (plan.kind) {
    case Bcast::kSame:
      kern::active().add(ta.values.data(), tb.values.data(), out.values.data(),
                         n);
      break;
    case Bcast::kScalarA:
      for (std::size_t i = 0; i < n; ++i) out.values[i] = ta.values[0] + tb.values[i];
      break;
    case Bcast::kScalarB:
      for (std::size_t i = 0; i < n; ++i) out.values[i] = ta.values[i] + tb.values[0];
      break;
    case Bcast::kRowA:
      for (std::size_t r = 0; r < plan.rows; ++r)
        for (std::size_t c = 0; c < plan.cols; ++c)
          out.values[r * plan.cols + c] = ta.values[c] + tb.values[r * plan.cols + c];
      break;
    case Bcast::kRowB:
      for (std::size_t r = 0; r < plan.rows; ++r)
        for (std::size_t c = 0; c < plan.cols; ++c)
          out.values[r * plan.cols + c] = ta.values[r * plan.cols + c] + tb.values[c];
      break;
  }
  int ai = a.id, bi = b.id;
  return Var{push(std::move(out), [ai, bi, plan](Tape& t, int self) {
    const Tensor& g = t.nodes_[self].grad;
    std::vector<double> scratch;
    bool a_bc = plan.kind == Bcast::kScalarA || plan.kind == Bcast::kRowA;
    bool b_bc = plan.kind == Bcast::kScalarB || plan.kind == Bcast::kRowB;
    reduce_into(scratch, g.values.data(), plan, a_bc, t.val(ai).numel());
    t.accum(ai, scratch.data(), scratch.size());
    reduce_into(scratch, g.values.data(), plan, b_bc, t.val(bi).numel());
    t.accum(bi, scratch.data(), scratch.size());
  })};
}

Var Tape::sub(Var a, Var b) {
  const Tensor& ta = val(a.id);
  const Tensor& tb = val(b.id);
  BcastPlan plan = plan_bcast(ta, tb, "sub");
  Tensor out = Tensor::zeros(plan.out_shape);
  const std::size_t n = out.numel();
  switch (plan.kind) {
    case Bcast::kSame:
      kern::active().sub(ta.values.data(), tb.values.data(), out.values.data(),
                         n);
      break;
    case Bcast::kScalarA:
      for (std::size_t i = 0; i < n; ++i) out.values[i] = ta.values[0] - tb.values[i];
      break;
    case Bcast::kScalarB:
      for (std::size_t i = 0; i < n; ++i) out.values[i] = ta.values[i] - tb.values[0];
      break;
    case Bcast::kRowA:
      for (std::size_t r = 0; r < plan.rows; ++r)
        for (std::size_t c = 0; c < plan.cols; ++c)
          out.values[r * plan.cols + c] = ta.values[c] - tb.values[r * plan.cols + c];
      break;
    case Bcast::kRowB:
      for (std::size_t r = 0; r < plan.rows; ++r)
        for (std::size_t c = 0; c < plan.cols; ++c)
          out.values[r * plan.cols + c] = ta.values[r * plan.cols + c] - tb.values[c];
      break;
  }
  int ai = a.id, bi = b.id;
  return Var{push(std::move(out), [ai, bi, plan](Tape& t, int self) {
    const Tensor& g = t.nodes_[self].grad;
    std::vector<double> scratch;
    bool a_bc = plan.kind == Bcast::kScalarA || plan.kind == Bcast::kRowA;
    bool b_bc = plan.kind == Bcast::kScalarB || plan.kind == Bcast::kRowB;
    reduce_into(scratch, g.values.data(), plan, a_bc, t.val(ai).numel());
    t.accum(ai, scratch.data(), scratch.size());
    reduce_into(scratch, g.values.data(), plan, b_bc, t.val(bi).numel());
    for (double& v : scratch) v = -v;
    t.accum(bi, scratch.data(), scratch.size());
  })};
}

Var Tape::mul(Var a, Var b) {
  const Tensor& ta = val(a.id);
  const Tensor& tb = val(b.id);
  BcastPlan plan = plan_bcast(ta, tb, "mul");
  Tensor out = Tensor::zeros(plan.out_shape);
  const std::size_t n = out.numel();
  auto a_at = [&](std::size_t r, std::size_t c) -> double {
    switch (plan.kind) {
      case Bcast::kScalarA: return ta.values[0];
      case Bcast::kRowA: return ta.values[c];
      default: return ta.values[r * plan.cols + c];
    }
  };
  auto b_at = [&](std::size_t r, std::size_t c) -> double {
    switch (plan.kind) {
      case Bcast::kScalarB: return tb.values[0];
      case Bcast::kRowB: return tb.values[c];
      default: return tb.values[r * plan.cols + c];
    }
  };
  if (plan.kind == Bcast::kSame) {
    kern::active().mul(ta.values.data(), tb.values.data(), out.values.data(), n);
  } else {
    for (std::size_t r = 0; r < plan.rows; ++r)
      for (std::size_t c = 0; c < plan.cols; ++c)
        out.values[r * plan.cols + c] = a_at(r, c) * b_at(r, c);
  }
  int ai = a.id, bi = b.id;
  return Var{push(std::move(out), [ai, bi, plan](Tape& t, int self) {
    const Tensor& g = t.nodes_[self].grad;
    const Tensor& ta2 = t.val(ai);
    const Tensor& tb2 = t.val(bi);
    const std::size_t full = plan.rows * plan.cols;
    std::vector<double> gfull(full), scratch;
    auto expand = [&](const Tensor& src, Bcast scalar_k, Bcast row_k,
                      std::size_t r, std::size_t c) -> double {
      if (plan.kind == scalar_k) return src.values[0];
      if (plan.kind == row_k) return src.values[c];
      return src.values[r * plan.cols + c];
    };
    // dA = g .* B (then reduce onto A's shape)
    for (std::size_t r = 0; r < plan.rows; ++r)
      for (std::size_t c = 0; c < plan.cols; ++c)
        gfull[r * plan.cols + c] = g.values[r * plan.cols + c] *
                                   expand(tb2, Bcast::kScalarB, Bcast::kRowB, r, c);
    bool a_bc = plan.kind == Bcast::kScalarA || plan.kind == Bcast::kRowA;
    reduce_into(scratch, gfull.data(), plan, a_bc, ta2.numel());
    t.accum(ai, scratch.data(), scratch.size());
    // dB = g .* A
    for (std::size_t r = 0; r < plan.rows; ++r)
      for (std::size_t c = 0; c < plan.cols; ++c)
        gfull[r * plan.cols + c] = g.values[r * plan.cols + c] *
                                   expand(ta2, Bcast::kScalarA, Bcast::kRowA, r, c);
    bool b_bc = plan.kind == Bcast::kScalarB || plan.kind == Bcast::kRowB;
    reduce_into(scratch, gfull.data(), plan, b_bc, tb2.numel());
    t.accum(bi, scratch.data(), scratch.size());
  })};
}

Var Tape::neg(Var a) { return scale(a, -1.0); }

Var Tape::scale(Var a, double c) {
  const Tensor& ta = val(a.id);
  Tensor out = Tensor::zeros(ta.shape);
  kern::active().scale(ta.values.data(), c, out.values.data(), ta.numel());
  int ai = a.id;
  return Var{push(std::move(out), [ai, c](Tape& t, int self) {
    const Tensor& g = t.nodes_[self].grad;
    Tensor& gr = t.grad_ref(ai);
    kern::active().axpy(c, g.values.data(), gr.values.data(), g.numel());
  })};
}

Var Tape::relu(Var a) {
  const Tensor& ta = val(a.id);
  Tensor out = ta;
  // keeps NaN as NaN so divergence stays visible
  for (double& v : out.values) {
    if (v < 0.0) v = 0.0;
  }
  int ai = a.id;
  return Var{push(std::move(out), [ai](Tape& t, int self) {
    const Tensor& g = t.nodes_[self].grad;
    const Tensor& x = t.val(ai);
    Tensor& gr = t.grad_ref(ai);
    for (std::size_t i = 0; i < g.numel(); ++i) {
      if (x.values[i] > 0.0) gr.values[i] += g.values[i];
    }
  })};
}

Var Tape::sigmoid(Var a) {
  const Tensor& ta = val(a.id);
  Tensor out = ta;
  for (double& v : out.values) v = stable_sigmoid(v);
  int ai = a.id;
  return Var{push(std::move(out), [ai](Tape& t, int self) {
    const Tensor& g = t.nodes_[self].grad;
    const Tensor& y = t.val(self);
    Tensor& gr = t.grad_ref(ai);
    for (std::size_t i = 0; i < g.numel(); ++i) {
      const double s = y.values[i];
      gr.values[i] += g.values[i] * s * (1.0 - s);
    }
  })};
}

Var Tape::log(Var a) {
  const Tensor& ta = val(a.id);
  Tensor out = ta;
  for (double& v : out.values) {
    if (v <= 0.0) {
      throw DomainError("log: non-positive input " + std::to_string(v));
    }
    v = std::log(v);
  }
  int ai = a.id;
  return Var{push(std::move(out), [ai](Tape& t, int self) {
    const Tensor& g = t.nodes_[self].grad;
    const Tensor& x = t.val(ai);
    Tensor& gr = t.grad_ref(ai);
    for (std::size_t i = 0; i < g.numel(); ++i) {
      gr.values[i] += g.values[i] / x.values[i];
    }
  })};
}

Var Tape::logsigmoid(Var a) {
  const Tensor& ta = val(a.id);
  Tensor out = ta;
  for (double& v : out.values) v = stable_logsigmoid(v);
  int ai = a.id;
  return Var{push(std::move(out), [ai](Tape& t, int self) {
    const Tensor& g = t.nodes_[self].grad;
    const Tensor& x = t.val(ai);
    Tensor& gr = t.grad_ref(ai);
    for (std::size_t i = 0; i < g.numel(); ++i) {
      gr.values[i] += g.values[i] * (1.0 - stable_sigmoid(x.values[i]));
    }
  })};
}

Var Tape::softmax(Var a, std::size_t axis) {
  const Tensor& ta = val(a.id);
  if (axis >= ta.rank()) {
    throw ShapeError("softmax: axis " + std::to_string(axis) +
                     " out of range for " + ta.shape_str());
  }
  const std::size_t len = ta.shape[axis];
  if (len == 0) {
    throw ShapeError("softmax: empty axis in " + ta.shape_str());
  }
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= ta.shape[i];
  for (std::size_t i = axis + 1; i < ta.rank(); ++i) inner *= ta.shape[i];

  Tensor out = ta;
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t j = 0; j < inner; ++j) {
      double mx = -1e300;
      for (std::size_t i = 0; i < len; ++i) {
        mx = std::max(mx, ta.values[(o * len + i) * inner + j]);
      }
      double sum = 0.0;
      for (std::size_t i = 0; i < len; ++i) {
        const std::size_t idx = (o * len + i) * inner + j;
        out.values[idx] = std::exp(ta.values[idx] - mx);
        sum += out.values[idx];
      }
      for (std::size_t i = 0; i < len; ++i) {
        out.values[(o * len + i) * inner + j] /= sum;
      }
    }
  }
  int ai = a.id;
  return Var{push(std::move(out),
                  [ai, outer, inner, len](Tape& t, int self) {
    const Tensor& g = t.nodes_[self].grad;
    const Tensor& y = t.val(self);
    Tensor& gr = t.grad_ref(ai);
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::size_t j = 0; j < inner; ++j) {
        double dot = 0.0;
        for (std::size_t i = 0; i < len; ++i) {
          const std::size_t idx = (o * len + i) * inner + j;
          dot += g.values[idx] * y.values[idx];
        }
        for (std::size_t i = 0; i < len; ++i) {
          const std::size_t idx = (o * len + i) * inner + j;
          gr.values[idx] += y.values[idx] * (g.values[idx] - dot);
        }
      }
    }
  })};
}

Var Tape::matmul(Var a, Var b) {
  const Tensor& ta = val(a.id);
  const Tensor& tb = val(b.id);
  if (ta.rank() != 2 || tb.rank() != 2) {
    throw ShapeError("matmul: expected rank-2 operands, got " + ta.shape_str() +
                     " and " + tb.shape_str());
  }
  if (ta.shape[1] != tb.shape[0]) {
    throw ShapeError("matmul: inner dimensions disagree, " + ta.shape_str() +
                     " vs " + tb.shape_str());
  }
  const std::size_t m = ta.shape[0], k = ta.shape[1], n = tb.shape[1];
  Tensor out = Tensor::zeros({m, n});
  kern::active().matmul(ta.values.data(), tb.values.data(), out.values.data(),
                        m, k, n, false);
  int ai = a.id, bi = b.id;
  return Var{push(std::move(out), [ai, bi, m, k, n](Tape& t, int self) {
    const Tensor& g = t.nodes_[self].grad;
    const Tensor& A = t.val(ai);
    const Tensor& B = t.val(bi);
    std::vector<double> tmp;
    // dA += g * B^T
    transpose_into(B, tmp);
    kern::active().matmul(g.values.data(), tmp.data(),
                          t.grad_ref(ai).values.data(), m, n, k, true);
    // dB += A^T * g
    transpose_into(A, tmp);
    kern::active().matmul(tmp.data(), g.values.data(),
                          t.grad_ref(bi).values.data(), k, m, n, true);
  })};
}

Var Tape::transpose(Var a) {
  const Tensor& ta = val(a.id);
  if (ta.rank() != 2) {
    throw ShapeError("transpose: expected rank-2, got " + ta.shape_str());
  }
  Tensor out = Tensor::zeros({ta.shape[1], ta.shape[0]});
  transpose_into(ta, out.values);
  int ai = a.id;
  return Var{push(std::move(out), [ai](Tape& t, int self) {
    const Tensor& g = t.nodes_[self].grad;
    const Tensor& x = t.val(ai);
    Tensor& gr = t.grad_ref(ai);
    const std::size_t r = x.rows(), c = x.cols();
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j)
        gr.values[i * c + j] += g.values[j * r + i];
  })};
}

Var Tape::concat(const std::vector<Var>& parts, std::size_t axis) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  const Tensor& first = val(parts[0].id);
  const std::size_t rank = first.rank();
  if (axis >= rank) {
    throw ShapeError("concat: axis " + std::to_string(axis) +
                     " out of range for rank " + std::to_string(rank));
  }
  std::vector<std::size_t> out_shape = first.shape;
  out_shape[axis] = 0;
  for (Var p : parts) {
    const Tensor& tp = val(p.id);
    if (tp.rank() != rank) {
      throw ShapeError("concat: rank mismatch " + tp.shape_str() + " vs " +
                       first.shape_str());
    }
    for (std::size_t d = 0; d < rank; ++d) {
      if (d != axis && tp.shape[d] != first.shape[d]) {
        throw ShapeError("concat: off-axis dims disagree, " + tp.shape_str() +
                         " vs " + first.shape_str());
      }
    }
    out_shape[axis] += tp.shape[axis];
  }

  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= out_shape[i];
  for (std::size_t i = axis + 1; i < rank; ++i) inner *= out_shape[i];
  const std::size_t out_len = out_shape[axis];

  Tensor out = Tensor::zeros(out_shape);
  std::vector<int> ids;
  std::vector<std::size_t> lens;
  std::size_t off = 0;
  for (Var p : parts) {
    const Tensor& tp = val(p.id);
    const std::size_t len = tp.shape[axis];
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::size_t i = 0; i < len; ++i) {
        for (std::size_t j = 0; j < inner; ++j) {
          out.values[(o * out_len + off + i) * inner + j] =
              tp.values[(o * len + i) * inner + j];
        }
      }
    }
    ids.push_back(p.id);
    lens.push_back(len);
    off += len;
  }
  return Var{push(std::move(out),
                  [ids, lens, outer, inner, out_len](Tape& t, int self) {
    const Tensor& g = t.nodes_[self].grad;
    std::size_t off2 = 0;
    std::vector<double> scratch;
    for (std::size_t pi = 0; pi < ids.size(); ++pi) {
      const std::size_t len = lens[pi];
      scratch.assign(outer * len * inner, 0.0);
      for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t i = 0; i < len; ++i) {
          for (std::size_t j = 0; j < inner; ++j) {
            scratch[(o * len + i) * inner + j] =
                g.values[(o * out_len + off2 + i) * inner + j];
          }
        }
      }
      t.accum(ids[pi], scratch.data(), scratch.size());
      off2 += len;
    }
  })};
}

Var Tape::dropout(Var a, double p, Mode mode, Rng& rng) {
  if (p < 0.0 || p >= 1.0) {
    throw ConfigError("dropout: p must lie in [0, 1), got " + std::to_string(p));
  }
  const Tensor& ta = val(a.id);
  int ai = a.id;
  if (mode == Mode::kEval || p == 0.0) {
    Tensor out = ta;
    return Var{push(std::move(out), [ai](Tape& t, int self) {
      const Tensor& g = t.nodes_[self].grad;
      t.accum(ai, g.values.data(), g.numel());
    })};
  }
  const double keep_scale = 1.0 / (1.0 - p);
  std::vector<double> mask(ta.numel());
  for (double& m : mask) m = rng.uniform() < p ? 0.0 : keep_scale;
  Tensor out = ta;
  for (std::size_t i = 0; i < out.numel(); ++i) out.values[i] *= mask[i];
  return Var{push(std::move(out), [ai, mask](Tape& t, int self) {
    const Tensor& g = t.nodes_[self].grad;
    Tensor& gr = t.grad_ref(ai);
    for (std::size_t i = 0; i < g.numel(); ++i) {
      gr.values[i] += g.values[i] * mask[i];
    }
  })};
}

Var Tape::sum_all(Var a) {
  const Tensor& ta = val(a.id);
  double s = 0.0;
  for (double v : ta.values) s += v;
  int ai = a.id;
  return Var{push(Tensor::scalar(s), [ai](Tape& t, int self) {
    const double g = t.nodes_[self].grad.values[0];
    Tensor& gr = t.grad_ref(ai);
    for (double& v : gr.values) v += g;
  })};
}

Var Tape::time_encode(Var freqs, double dt) {
  const Tensor& w = val(freqs.id);
  const std::size_t half = w.numel();
  const double s = std::sqrt(1.0 / static_cast<double>(half));
  Tensor out = Tensor::zeros({1, 2 * half});
  for (std::size_t k = 0; k < half; ++k) {
    out.values[2 * k] = s * std::cos(w.values[k] * dt);
    out.values[2 * k + 1] = s * std::sin(w.values[k] * dt);
  }
  int wi = freqs.id;
  return Var{push(std::move(out), [wi, dt, half, s](Tape& t, int self) {
    const Tensor& g = t.nodes_[self].grad;
    const Tensor& w2 = t.val(wi);
    Tensor& gr = t.grad_ref(wi);
    for (std::size_t k = 0; k < half; ++k) {
      const double a = w2.values[k] * dt;
      gr.values[k] += s * dt *
                      (-std::sin(a) * g.values[2 * k] +
                       std::cos(a) * g.values[2 * k + 1]);
    }
  })};
}

}  // namespace tbdfs
