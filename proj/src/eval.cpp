#include "tbdfs/eval.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "tbdfs/errors.hpp"
#include "tbdfs/log.hpp"

namespace tbdfs {

namespace {

std::pair<double, double> mean_std(const std::vector<double>& xs) {
  const double n = static_cast<double>(xs.size());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  if (xs.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0))};
}

// Continued fraction for the regularized incomplete beta function.
double betacf(double a, double b, double x) {
  const double eps = 3e-14;
  const double fpmin = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < fpmin) d = fpmin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 200; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < eps) break;
  }
  return h;
}

double incbeta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_beta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
  const double front =
      std::exp(a * std::log(x) + b * std::log(1.0 - x) - ln_beta);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * betacf(a, b, x) / a;
  }
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

}  // namespace

double student_t_two_tailed_p(double t, int dof) {
  if (dof <= 0) return 1.0;
  const double nu = static_cast<double>(dof);
  const double x = nu / (nu + t * t);
  return incbeta(nu / 2.0, 0.5, x);
}

PairedTTest paired_t_test(const std::vector<double>& a,
                          const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw ConfigError("paired_t_test: need two equally sized samples of "
                      "length >= 2");
  }
  std::vector<double> diff(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
  auto [mean, sd] = mean_std(diff);
  PairedTTest res;
  if (sd == 0.0) {
    // identical differences everywhere: no variance to test against
    res.defined = false;
    res.t = 0.0;
    res.p = mean == 0.0 ? 1.0 : 0.0;
    return res;
  }
  const double n = static_cast<double>(diff.size());
  res.defined = true;
  res.t = mean / (sd / std::sqrt(n));
  res.p = student_t_two_tailed_p(res.t, static_cast<int>(diff.size()) - 1);
  return res;
}

nlohmann::ordered_json MetricsReport::to_json() const {
  nlohmann::ordered_json j;
  nlohmann::ordered_json seeds = nlohmann::ordered_json::array();
  for (const SeedMetrics& s : per_seed) {
    seeds.push_back({{"seed", s.seed},
                     {"accuracy", s.accuracy},
                     {"f1", s.f1}});
  }
  j["per_seed"] = seeds;
  j["acc_mean"] = acc_mean;
  j["acc_std"] = acc_std;
  j["f1_mean"] = f1_mean;
  j["f1_std"] = f1_std;
  j["config"] = config_snapshot;
  return j;
}

std::pair<double, double> evaluate(const ModelParams& params,
                                   const TemporalGraph& g,
                                   const std::vector<EventId>& split_ids,
                                   const RunConfig& cfg, std::uint64_t seed) {
  return eval_split(params, g, split_ids, cfg, seed);
}

MetricsReport run_seeds(const TemporalGraph& g, const SplitBundle& splits,
                        const RunConfig& cfg,
                        const std::vector<std::uint64_t>& seeds,
                        bool use_test_split) {
  if (seeds.size() < 2) {
    throw ConfigError("run_seeds: need at least 2 seeds");
  }
  MetricsReport report;
  report.config_snapshot = cfg.to_json();
  std::vector<double> accs, f1s;
  for (std::uint64_t s : seeds) {
    RunConfig run_cfg = cfg;
    run_cfg.seed = s;
    TrainResult res = train(g, splits, run_cfg);
    const std::vector<EventId>& ids =
        use_test_split ? splits.test : splits.val;
    auto [acc, f1] =
        eval_split(res.params, g, ids, run_cfg, derive_seed(s, 0xEA01));
    report.per_seed.push_back(SeedMetrics{s, acc, f1});
    accs.push_back(acc);
    f1s.push_back(f1);
    log_info("seed " + std::to_string(s) + " acc " + std::to_string(acc) +
             " f1 " + std::to_string(f1));
  }
  std::tie(report.acc_mean, report.acc_std) = mean_std(accs);
  std::tie(report.f1_mean, report.f1_std) = mean_std(f1s);
  return report;
}

std::vector<AblationRow> ablation_grid(
    const TemporalGraph& g, const SplitBundle& splits, const RunConfig& base,
    const std::vector<std::uint64_t>& seeds) {
  static const char* kVariants[] = {"full",     "-BFS",      "-DFS",
                                    "path-avg", "paths-avg", "-time"};
  std::vector<AblationRow> rows;
  std::vector<double> full_accs;
  for (const char* v : kVariants) {
    RunConfig cfg = apply_variant(base, v);
    AblationRow row;
    row.variant = v;
    row.report = run_seeds(g, splits, cfg, seeds);
    row.config_audit = config_diff(base, cfg);
    std::vector<double> accs;
    for (const SeedMetrics& s : row.report.per_seed) {
      accs.push_back(s.accuracy);
    }
    if (row.variant == "full") {
      full_accs = accs;
    } else {
      row.vs_full = paired_t_test(full_accs, accs);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<SweepRow> alpha_sweep(const TemporalGraph& g,
                                  const SplitBundle& splits,
                                  const RunConfig& base,
                                  const std::vector<double>& grid,
                                  const std::vector<std::uint64_t>& seeds) {
  std::vector<SweepRow> rows;
  for (double alpha : grid) {
    RunConfig cfg = base;
    cfg.alpha = alpha;
    MetricsReport rep = run_seeds(g, splits, cfg, seeds);
    rows.push_back(SweepRow{alpha, rep.acc_mean, rep.acc_std, rep.f1_mean,
                            rep.f1_std});
  }
  return rows;
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "alpha,acc_mean,acc_std,f1_mean,f1_std\n";
  char buf[512];
  for (const SweepRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g\n", r.alpha,
                  r.acc_mean, r.acc_std, r.f1_mean, r.f1_std);
    os << buf;
  }
  return os.str();
}

}  // namespace tbdfs
