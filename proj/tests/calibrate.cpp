// Offline calibration harness for the planted benchmark. Not part of ctest;
// used to pick the pinned acceptance configuration.
#include <chrono>
#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "tbdfs/eval.hpp"
#include "tbdfs/synth.hpp"
#include "tbdfs/trainer.hpp"

using namespace tbdfs;

namespace {

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  PlantedParams pp;
  pp.n_users = 60;
  pp.n_items = 40;
  pp.revisit_prob = 0.8;
  pp.noise_edges = 450;
  pp.horizon = 4500;
  pp.feat_dim = 8;
  pp.recent_window = 1;
  std::uint64_t gen_seed = 20250810;

  RunConfig cfg;
  cfg.d = 8;
  cfg.layers = 2;
  cfg.heads = 1;
  cfg.fanout = 4;
  cfg.dropout = 0.1;
  cfg.lr = 3e-3;
  cfg.batch_size = 100;
  cfg.epochs = 8;
  cfg.patience = 8;
  cfg.threads = 2;

  std::vector<double> alphas = {0.25, 1.0};
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};

  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string k = argv[i];
    const std::string v = argv[i + 1];
    if (k == "--alphas") {
      alphas = parse_list(v);
    } else if (k == "--seeds") {
      seeds.clear();
      for (double s : parse_list(v)) seeds.push_back((std::uint64_t)s);
    } else if (k == "--epochs") {
      cfg.epochs = cfg.patience = std::stoi(v);
    } else if (k == "--lr") {
      cfg.lr = std::stod(v);
    } else if (k == "--fanout") {
      cfg.fanout = std::stoi(v);
    } else if (k == "--dim") {
      cfg.d = std::stoi(v);
      pp.feat_dim = cfg.d;
    } else if (k == "--batch") {
      cfg.batch_size = std::stoi(v);
    } else if (k == "--max-paths") {
      cfg.max_paths = std::stoull(v);
    } else if (k == "--users") {
      pp.n_users = std::stoi(v);
    } else if (k == "--items") {
      pp.n_items = std::stoi(v);
    } else if (k == "--noise") {
      pp.noise_edges = std::stoi(v);
    } else if (k == "--horizon") {
      pp.horizon = std::stoi(v);
    } else if (k == "--window") {
      pp.recent_window = std::stoi(v);
    } else if (k == "--revisit") {
      pp.revisit_prob = std::stod(v);
    } else if (k == "--gen-seed") {
      gen_seed = std::stoull(v);
    } else if (k == "--threads") {
      cfg.threads = std::stoi(v);
    } else {
      std::cerr << "unknown flag " << k << "\n";
      return 2;
    }
  }

  TemporalGraph g = gen_planted(pp, gen_seed);
  SplitBundle splits = chronological_split(g);
  std::cout << "events=" << g.event_count() << " test_pairs="
            << splits.test.size() << "\n";

  std::vector<std::vector<double>> acc_table;
  for (double alpha : alphas) {
    RunConfig run = cfg;
    run.alpha = alpha;
    std::vector<double> accs;
    const auto t0 = std::chrono::steady_clock::now();
    for (std::uint64_t s : seeds) {
      RunConfig rc = run;
      rc.seed = s;
      TrainResult res = train(g, splits, rc);
      auto [acc, f1] =
          eval_split(res.params, g, splits.test, rc, derive_seed(s, 0xEA01));
      (void)f1;
      accs.push_back(acc);
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    double mean = 0.0;
    for (double a : accs) mean += a;
    mean /= accs.size();
    std::cout << "alpha=" << alpha << " mean=" << mean << " accs=[";
    for (std::size_t i = 0; i < accs.size(); ++i) {
      std::cout << (i ? "," : "") << accs[i];
    }
    std::cout << "] " << secs << "s\n";
    acc_table.push_back(accs);
  }

  if (acc_table.size() >= 2 && seeds.size() >= 2) {
    // compare every alpha against the last one listed
    const std::vector<double>& baseline = acc_table.back();
    for (std::size_t i = 0; i + 1 < acc_table.size(); ++i) {
      PairedTTest t = paired_t_test(acc_table[i], baseline);
      std::cout << "alpha " << alphas[i] << " vs " << alphas.back()
                << ": t=" << t.t << " p=" << t.p << "\n";
    }
  }
  return 0;
}
