#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "tbdfs/config.hpp"
#include "tbdfs/graph.hpp"
#include "tbdfs/model.hpp"

namespace tbdfs {

// Corrupted destination for a positive edge: uniform over the destination
// partition on bipartite graphs, over all other nodes otherwise; never the
// true destination.
NodeId sample_negative(const EdgeEvent& edge, const TemporalGraph& g,
                       Rng& rng);

// -[log s(pos) + log s(-neg)] for one positive edge and its corrupted
// counterpart, as a {1,1} tape node.
Var edge_pair_loss(Tape& tape, const Model& model, const BoundParams& bp,
                   const EdgeEvent& edge, NodeId neg_dst, BranchMode branch,
                   Mode mode, Rng& rng);

// Sum of edge_pair_loss over a batch built on a single tape (tests and
// gradient checks; the training loop uses per-item tapes).
Var batch_loss(Tape& tape, const Model& model, const BoundParams& bp,
               const std::vector<EdgeEvent>& batch,
               const std::vector<NodeId>& neg_dsts, BranchMode branch,
               Mode mode, Rng& rng);

class Adam {
 public:
  Adam(const ModelParams& params, double lr, double beta1, double beta2,
       double weight_decay, double eps = 1e-8);
  void step(ModelParams& params, const std::vector<Tensor>& grads);

 private:
  std::vector<Tensor> m_, v_;
  double lr_, beta1_, beta2_, weight_decay_, eps_;
  long t_ = 0;
};

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;  // per positive edge
  double val_acc = 0.0;
  double val_f1 = 0.0;
  double seconds = 0.0;
};

struct TrainResult {
  ModelParams params;
  RunConfig config;
  int best_epoch = -1;
  double best_val_acc = 0.0;
  std::vector<EpochStats> log;
};

// (accuracy, F1) from per-example (positive, negative) pre-sigmoid scores.
// An example is predicted positive iff its sigmoid score exceeds 0.5, i.e.
// the logit is positive; F1 is on the positive class, 0 when undefined.
std::pair<double, double> metrics_from_logits(
    const std::vector<std::pair<double, double>>& pos_neg_logits);

// (accuracy, F1) over the balanced positive/negative pairs of a split;
// deterministic given (params, eval_seed).
std::pair<double, double> eval_split(const ModelParams& params,
                                     const TemporalGraph& g,
                                     const std::vector<EventId>& ids,
                                     const RunConfig& cfg,
                                     std::uint64_t eval_seed);

// Full training loop: chronological batches, one fresh negative per positive
// per epoch, Adam, best-validation checkpointing with early stopping.
// Deterministic given cfg.seed.
TrainResult train(const TemporalGraph& g, const SplitBundle& splits,
                  const RunConfig& cfg);

// Branch shortcut used everywhere a representation is evaluated: alpha == 1
// runs the pure BFS path, anything else runs the full pipeline.
BranchMode branch_for_alpha(double alpha);

}  // namespace tbdfs
