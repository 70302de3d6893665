#pragma once

#include <functional>
#include <unordered_map>
#include <vector>

#include "tbdfs/rng.hpp"
#include "tbdfs/tensor.hpp"

namespace tbdfs {

// Handle into the active tape.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

enum class Mode { kTrain, kEval };

// Define-by-run reverse-mode tape. Records every forward op in topological
// order; backward() walks the record once in reverse. Single-owner: one tape
// per forward pass, never shared across threads.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  void reserve(std::size_t n) { nodes_.reserve(n); }
  std::size_t size() const { return nodes_.size(); }
  void clear();

  // Leaves. Params collect gradients; constants are tracked but their
  // gradients are not reported.
  Var param(Tensor v);
  Var constant(Tensor v);

  const Tensor& value(Var v) const { return nodes_[v.id].value; }
  // Gradient accumulated by the last backward(); zeros if none reached.
  Tensor grad(Var v) const;

  // Reverse pass from a scalar loss. Gradients of all reachable nodes are
  // populated; unreachable leaves read back as zero.
  void backward(Var loss);
  // {param node id -> gradient} for every param leaf.
  std::unordered_map<int, Tensor> leaf_gradients() const;

  // ---- forward ops ----
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var neg(Var a);
  Var scale(Var a, double c);
  Var relu(Var a);
  Var sigmoid(Var a);
  Var log(Var a);
  // log(sigmoid(x)) in the overflow-safe fused form -log1p(exp(-|x|)) + min(x,0)
  Var logsigmoid(Var a);
  Var softmax(Var a, std::size_t axis);
  Var matmul(Var a, Var b);
  Var transpose(Var a);
  Var concat(const std::vector<Var>& parts, std::size_t axis);
  Var dropout(Var a, double p, Mode mode, Rng& rng);
  Var sum_all(Var a);
  // sqrt(2/d) * [cos(w_1 dt), sin(w_1 dt), ...] for freqs {1, d/2} -> {1, d};
  // differentiable w.r.t. the frequencies.
  Var time_encode(Var freqs, double dt);

 private:
  struct Node {
    Tensor value;
    Tensor grad;  // empty until first touched by backward
    std::function<void(Tape&, int)> backward;
    bool is_param = false;
  };

  int push(Tensor value, std::function<void(Tape&, int)> bw);
  void accum(int id, const double* g, std::size_t n);
  Tensor& grad_ref(int id);
  const Tensor& val(int id) const { return nodes_[id].value; }

  std::vector<Node> nodes_;
};

}  // namespace tbdfs
