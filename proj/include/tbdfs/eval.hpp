#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "tbdfs/config.hpp"
#include "tbdfs/graph.hpp"
#include "tbdfs/trainer.hpp"

namespace tbdfs {

struct SeedMetrics {
  std::uint64_t seed = 0;
  double accuracy = 0.0;
  double f1 = 0.0;
};

struct MetricsReport {
  std::vector<SeedMetrics> per_seed;
  double acc_mean = 0.0;
  double acc_std = 0.0;
  double f1_mean = 0.0;
  double f1_std = 0.0;
  nlohmann::ordered_json config_snapshot;

  nlohmann::ordered_json to_json() const;
};

// Balanced link-prediction metrics of a trained parameter set on a split.
std::pair<double, double> evaluate(const ModelParams& params,
                                   const TemporalGraph& g,
                                   const std::vector<EventId>& split_ids,
                                   const RunConfig& cfg, std::uint64_t seed);

// Trains and evaluates once per seed; reports mean and sample std.
MetricsReport run_seeds(const TemporalGraph& g, const SplitBundle& splits,
                        const RunConfig& cfg,
                        const std::vector<std::uint64_t>& seeds,
                        bool use_test_split = true);

struct PairedTTest {
  double t = 0.0;
  double p = 1.0;
  bool defined = false;  // false when all differences are identical
};

// Two-tailed paired Student's t-test over per-seed metric pairs.
PairedTTest paired_t_test(const std::vector<double>& a,
                          const std::vector<double>& b);

// Two-tailed p-value of Student's t with `dof` degrees of freedom.
double student_t_two_tailed_p(double t, int dof);

struct AblationRow {
  std::string variant;
  MetricsReport report;
  nlohmann::ordered_json config_audit;  // fields changed vs the full model
  PairedTTest vs_full;  // accuracy t-test against the full row (per seed)
};

// {full, -BFS, -DFS, path-avg, paths-avg, -time}
std::vector<AblationRow> ablation_grid(const TemporalGraph& g,
                                       const SplitBundle& splits,
                                       const RunConfig& base,
                                       const std::vector<std::uint64_t>& seeds);

struct SweepRow {
  double alpha = 0.0;
  double acc_mean = 0.0;
  double acc_std = 0.0;
  double f1_mean = 0.0;
  double f1_std = 0.0;
};

std::vector<SweepRow> alpha_sweep(const TemporalGraph& g,
                                  const SplitBundle& splits,
                                  const RunConfig& base,
                                  const std::vector<double>& grid,
                                  const std::vector<std::uint64_t>& seeds);

// CSV with header alpha,acc_mean,acc_std,f1_mean,f1_std
std::string sweep_to_csv(const std::vector<SweepRow>& rows);

}  // namespace tbdfs
