#include "tbdfs/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>

#include "tbdfs/errors.hpp"
#include "tbdfs/kernels.hpp"
#include "tbdfs/log.hpp"

namespace tbdfs {

BranchMode branch_for_alpha(double alpha) {
  return alpha == 1.0 ? BranchMode::kBfsOnly : BranchMode::kFull;
}

NodeId sample_negative(const EdgeEvent& edge, const TemporalGraph& g,
                       Rng& rng) {
  const PartitionInfo& part = g.partition();
  if (part.bipartite) {
    std::size_t usable = part.dst_nodes.size();
    for (NodeId n : part.dst_nodes) {
      if (n == edge.dst) --usable;
    }
    if (usable == 0) {
      throw SamplingError("no candidate negative destination exists");
    }
    while (true) {
      NodeId cand = part.dst_nodes[rng.below(part.dst_nodes.size())];
      if (cand != edge.dst) return cand;
    }
  }
  if (g.node_count() < 3) {
    throw SamplingError("graph too small for negative sampling");
  }
  while (true) {
    NodeId cand = static_cast<NodeId>(rng.below(g.node_count()));
    if (cand != edge.src && cand != edge.dst) return cand;
  }
}

Var edge_pair_loss(Tape& tape, const Model& model, const BoundParams& bp,
                   const EdgeEvent& edge, NodeId neg_dst, BranchMode branch,
                   Mode mode, Rng& rng) {
  Var h_src = model.represent(tape, bp, edge.src, edge.ts, branch, mode, rng);
  Var h_dst = model.represent(tape, bp, edge.dst, edge.ts, branch, mode, rng);
  Var h_neg = model.represent(tape, bp, neg_dst, edge.ts, branch, mode, rng);
  Var s_pos = link_logit(tape, bp.scorer, h_src, h_dst);
  Var s_neg = link_logit(tape, bp.scorer, h_src, h_neg);
  Var ll = tape.add(tape.logsigmoid(s_pos), tape.logsigmoid(tape.neg(s_neg)));
  return tape.neg(ll);
}

Var batch_loss(Tape& tape, const Model& model, const BoundParams& bp,
               const std::vector<EdgeEvent>& batch,
               const std::vector<NodeId>& neg_dsts, BranchMode branch,
               Mode mode, Rng& rng) {
  if (batch.empty()) throw ConfigError("batch_loss: empty batch");
  Var total;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    Var item = edge_pair_loss(tape, model, bp, batch[i], neg_dsts[i], branch,
                              mode, rng);
    total = i == 0 ? item : tape.add(total, item);
  }
  return total;
}

Adam::Adam(const ModelParams& params, double lr, double beta1, double beta2,
           double weight_decay, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), weight_decay_(weight_decay),
      eps_(eps) {
  params.visit([&](const std::string&, const Tensor& t) {
    m_.push_back(Tensor::zeros(t.shape));
    v_.push_back(Tensor::zeros(t.shape));
  });
}

void Adam::step(ModelParams& params, const std::vector<Tensor>& grads) {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  std::size_t idx = 0;
  params.visit([&](const std::string&, Tensor& p) {
    const Tensor& g = grads[idx];
    Tensor& m = m_[idx];
    Tensor& v = v_[idx];
    for (std::size_t i = 0; i < p.numel(); ++i) {
      double gi = g.values[i] + weight_decay_ * p.values[i];
      m.values[i] = beta1_ * m.values[i] + (1.0 - beta1_) * gi;
      v.values[i] = beta2_ * v.values[i] + (1.0 - beta2_) * gi * gi;
      const double mhat = m.values[i] / bc1;
      const double vhat = v.values[i] / bc2;
      p.values[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
    ++idx;
  });
}

namespace {

struct ItemResult {
  double loss = 0.0;
  std::vector<Tensor> grads;
};

ItemResult run_item(const Model& model, const ModelParams& params,
                    const EdgeEvent& edge, NodeId neg_dst, BranchMode branch,
                    std::uint64_t drop_seed) {
  Tape tape;
  tape.reserve(4096);
  BoundParams bp = bind_params(tape, params);
  Rng rng(drop_seed);
  Var loss = edge_pair_loss(tape, model, bp, edge, neg_dst, branch,
                            Mode::kTrain, rng);
  tape.backward(loss);
  ItemResult res;
  res.loss = tape.value(loss).values[0];
  res.grads.reserve(bp.flat.size());
  for (const auto& [name, var] : bp.flat) {
    res.grads.push_back(tape.grad(var));
  }
  return res;
}

}  // namespace

std::pair<double, double> metrics_from_logits(
    const std::vector<std::pair<double, double>>& pos_neg_logits) {
  long tp = 0, fp = 0, fn = 0, tn = 0;
  for (const auto& [s_pos, s_neg] : pos_neg_logits) {
    s_pos > 0.0 ? ++tp : ++fn;
    s_neg > 0.0 ? ++fp : ++tn;
  }
  const double total = static_cast<double>(tp + fp + fn + tn);
  const double acc = total > 0 ? (tp + tn) / total : 0.0;
  const double denom = static_cast<double>(2 * tp + fp + fn);
  const double f1 = denom > 0 ? 2.0 * tp / denom : 0.0;
  return {acc, f1};
}

std::pair<double, double> eval_split(const ModelParams& params,
                                     const TemporalGraph& g,
                                     const std::vector<EventId>& ids,
                                     const RunConfig& cfg,
                                     std::uint64_t eval_seed) {
  if (ids.empty()) throw ConfigError("eval_split: empty split");
  Model model(g, cfg.model());
  const BranchMode branch = branch_for_alpha(cfg.alpha);
  const int threads = std::max(1, cfg.threads);

  std::vector<std::pair<double, double>> results(ids.size());
  auto eval_item = [&](std::size_t i) {
    const EdgeEvent& e = g.event(ids[i]);
    Rng rng(derive_seed(eval_seed, 0xE7A1, static_cast<std::uint64_t>(i)));
    NodeId neg = sample_negative(e, g, rng);
    Tape tape;
    tape.reserve(4096);
    BoundParams bp = bind_params(tape, params);
    Var h_src = model.represent(tape, bp, e.src, e.ts, branch, Mode::kEval, rng);
    Var h_dst = model.represent(tape, bp, e.dst, e.ts, branch, Mode::kEval, rng);
    Var h_neg = model.represent(tape, bp, neg, e.ts, branch, Mode::kEval, rng);
    Var s_pos = link_logit(tape, bp.scorer, h_src, h_dst);
    Var s_neg = link_logit(tape, bp.scorer, h_src, h_neg);
    results[i] = {tape.value(s_pos).values[0], tape.value(s_neg).values[0]};
  };

  if (threads == 1) {
    for (std::size_t i = 0; i < ids.size(); ++i) eval_item(i);
  } else {
    const std::size_t wave_size = static_cast<std::size_t>(threads) * 3;
    for (std::size_t start = 0; start < ids.size(); start += wave_size) {
      std::vector<std::future<void>> wave;
      const std::size_t end = std::min(ids.size(), start + wave_size);
      for (std::size_t i = start; i < end; ++i) {
        wave.push_back(std::async(std::launch::async, eval_item, i));
      }
      for (auto& f : wave) f.get();
    }
  }

  return metrics_from_logits(results);
}

TrainResult train(const TemporalGraph& g, const SplitBundle& splits,
                  const RunConfig& cfg) {
  Model model(g, cfg.model());
  const BranchMode branch = branch_for_alpha(cfg.alpha);
  const int threads = std::max(1, cfg.threads);
  if (cfg.batch_size < 1) throw ConfigError("batch_size must be >= 1");

  TrainResult result;
  result.config = cfg;
  result.params = ModelParams::init(cfg.model(), cfg.seed);

  Adam opt(result.params, cfg.lr, cfg.beta1, cfg.beta2, cfg.weight_decay);
  const std::uint64_t val_seed = derive_seed(cfg.seed, 0x7A1);

  ModelParams best = result.params;
  double best_acc = -1.0;
  int best_epoch = -1;
  int since_best = 0;

  std::vector<Tensor> grad_accum;
  result.params.visit([&](const std::string&, const Tensor& t) {
    grad_accum.push_back(Tensor::zeros(t.shape));
  });

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    double epoch_loss = 0.0;
    const std::vector<EventId>& order = splits.train;

    for (std::size_t bstart = 0; bstart < order.size();
         bstart += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t bend = std::min(
          order.size(), bstart + static_cast<std::size_t>(cfg.batch_size));
      for (Tensor& t : grad_accum) {
        std::fill(t.values.begin(), t.values.end(), 0.0);
      }
      double batch_total = 0.0;

      // waves of async items; accumulation stays in batch order regardless
      // of completion order, so results do not depend on scheduling
      const std::size_t wave_size =
          threads == 1 ? 1 : static_cast<std::size_t>(threads) * 3;
      std::size_t i = bstart;
      while (i < bend) {
        const std::size_t wend = std::min(bend, i + wave_size);
        std::vector<std::future<ItemResult>> wave;
        for (std::size_t w = i; w < wend; ++w) {
          const EventId ev = order[w];
          const EdgeEvent& edge = g.event(ev);
          Rng neg_rng(derive_seed(cfg.seed, 0x4E6, epoch,
                                  static_cast<std::uint64_t>(ev)));
          NodeId neg = sample_negative(edge, g, neg_rng);
          const std::uint64_t drop_seed = derive_seed(
              cfg.seed, 0xD409, epoch, static_cast<std::uint64_t>(ev));
          wave.push_back(std::async(
              threads == 1 ? std::launch::deferred : std::launch::async,
              run_item, std::cref(model), std::cref(result.params), edge, neg,
              branch, drop_seed));
        }
        for (auto& fut : wave) {
          ItemResult item = fut.get();
          batch_total += item.loss;
          for (std::size_t p = 0; p < grad_accum.size(); ++p) {
            kern::active().axpy(1.0, item.grads[p].values.data(),
                                grad_accum[p].values.data(),
                                grad_accum[p].numel());
          }
        }
        i = wend;
      }

      if (!std::isfinite(batch_total)) {
        throw DomainError("training diverged: batch loss is not finite at "
                          "epoch " + std::to_string(epoch));
      }
      opt.step(result.params, grad_accum);
      epoch_loss += batch_total;
    }

    auto [val_acc, val_f1] = eval_split(result.params, g, splits.val, cfg,
                                        val_seed);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = epoch_loss / static_cast<double>(order.size());
    stats.val_acc = val_acc;
    stats.val_f1 = val_f1;
    stats.seconds = secs;
    result.log.push_back(stats);
    log_info("epoch " + std::to_string(epoch) + " loss " +
             std::to_string(stats.train_loss) + " val_acc " +
             std::to_string(val_acc));

    if (val_acc > best_acc) {
      best_acc = val_acc;
      best = result.params;
      best_epoch = epoch;
      since_best = 0;
    } else {
      ++since_best;
      if (since_best >= cfg.patience) break;
    }
  }

  if (best_epoch >= 0) {
    result.params = best;
  }
  result.best_epoch = best_epoch;
  result.best_val_acc = best_acc < 0.0 ? 0.0 : best_acc;
  return result;
}

}  // namespace tbdfs
