#include "tbdfs/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "tbdfs/checkpoint.hpp"
#include "tbdfs/errors.hpp"
#include "tbdfs/eval.hpp"
#include "tbdfs/kernels.hpp"
#include "tbdfs/log.hpp"
#include "tbdfs/synth.hpp"
#include "tbdfs/trainer.hpp"

namespace tbdfs {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) seeds.push_back(std::stoull(item));
  }
  if (seeds.empty()) throw ConfigError("no seeds given");
  return seeds;
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) grid.push_back(std::stod(item));
  }
  if (grid.empty()) throw ConfigError("empty alpha grid");
  return grid;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

struct CommonArgs {
  std::string data;
  std::string node_features;
  std::string config_file;
  std::string out_dir;
  std::string seeds_text = "1,2,3,4,5";
  RunConfig cfg;
};

// Config file values replace defaults, explicit flags replace both.
RunConfig effective_config(const CLI::App& cmd, const CommonArgs& args) {
  if (args.config_file.empty()) return args.cfg;
  std::ifstream in(args.config_file);
  if (!in) throw DataError("cannot open config file: " + args.config_file);
  nlohmann::json j;
  in >> j;
  RunConfig merged = RunConfig::from_json(j);
  const RunConfig& flags = args.cfg;
  auto pick = [&](const char* name, auto member) {
    if (cmd.count(name) > 0) merged.*member = flags.*member;
  };
  pick("--dim", &RunConfig::d);
  pick("--layers", &RunConfig::layers);
  pick("--heads", &RunConfig::heads);
  pick("--fanout", &RunConfig::fanout);
  pick("--alpha", &RunConfig::alpha);
  pick("--dropout", &RunConfig::dropout);
  pick("--lr", &RunConfig::lr);
  pick("--weight-decay", &RunConfig::weight_decay);
  pick("--batch-size", &RunConfig::batch_size);
  pick("--epochs", &RunConfig::epochs);
  pick("--patience", &RunConfig::patience);
  pick("--seed", &RunConfig::seed);
  pick("--threads", &RunConfig::threads);
  pick("--train-frac", &RunConfig::train_frac);
  pick("--val-frac", &RunConfig::val_frac);
  pick("--max-paths", &RunConfig::max_paths);
  pick("--path-agg", &RunConfig::path_agg);
  pick("--paths-agg", &RunConfig::paths_agg);
  pick("--fanout-policy", &RunConfig::fanout_policy);
  return merged;
}

void add_config_flags(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_file, "JSON config file");
  cmd->add_option("--dim", args.cfg.d, "feature/model dimension");
  cmd->add_option("--layers", args.cfg.layers, "attention layers L");
  cmd->add_option("--heads", args.cfg.heads, "attention heads M");
  cmd->add_option("--fanout", args.cfg.fanout, "temporal neighbor fan-out k");
  cmd->add_option("--alpha", args.cfg.alpha, "BFS/DFS balance in [0,1]");
  cmd->add_option("--dropout", args.cfg.dropout, "dropout probability");
  cmd->add_option("--lr", args.cfg.lr, "Adam learning rate");
  cmd->add_option("--weight-decay", args.cfg.weight_decay, "L2 coefficient");
  cmd->add_option("--batch-size", args.cfg.batch_size, "training batch size");
  cmd->add_option("--epochs", args.cfg.epochs, "max training epochs");
  cmd->add_option("--patience", args.cfg.patience, "early-stopping patience");
  cmd->add_option("--seed", args.cfg.seed, "master rng seed");
  cmd->add_option("--threads", args.cfg.threads, "worker thread cap");
  cmd->add_option("--train-frac", args.cfg.train_frac, "train split fraction");
  cmd->add_option("--val-frac", args.cfg.val_frac, "validation split fraction");
  cmd->add_option("--max-paths", args.cfg.max_paths,
                  "cap on paths per target (0 = unlimited)");
  cmd->add_option("--path-agg", args.cfg.path_agg,
                  "path node aggregation: attention|uniform");
  cmd->add_option("--paths-agg", args.cfg.paths_agg,
                  "path set aggregation: attention|mean");
  cmd->add_option("--fanout-policy", args.cfg.fanout_policy,
                  "neighbor sampling: recent|uniform");
}

TemporalGraph load_graph(const CommonArgs& args, std::size_t d) {
  if (args.data.empty()) throw ConfigError("--data is required");
  return TemporalGraph::load_csv(args.data, d, args.node_features);
}

ordered_json graph_stats_json(const TemporalGraph& g) {
  ordered_json j;
  j["nodes"] = g.node_count();
  j["events"] = g.event_count();
  j["ts_min"] = g.min_ts();
  j["ts_max"] = g.max_ts();
  j["feature_dim"] = g.feat_dim();
  j["bipartite"] = g.partition().bipartite;
  return j;
}

int cmd_stats(const CommonArgs& args) {
  TemporalGraph g = load_graph(args, static_cast<std::size_t>(args.cfg.d));
  std::cout << graph_stats_json(g).dump(2) << "\n";
  return 0;
}

int cmd_prepare(const CLI::App& cmd, const CommonArgs& args) {
  RunConfig cfg = effective_config(cmd, args);
  TemporalGraph g = load_graph(args, static_cast<std::size_t>(cfg.d));
  SplitBundle splits = chronological_split(g, cfg.train_frac, cfg.val_frac);
  ordered_json j;
  j["stats"] = graph_stats_json(g);
  j["splits"] = {{"train", splits.train.size()},
                 {"val", splits.val.size()},
                 {"test", splits.test.size()},
                 {"t_train_end", splits.t_train_end},
                 {"t_val_end", splits.t_val_end}};
  j["config"] = cfg.to_json();
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_gen_synth(const CommonArgs& args, const PlantedParams& params) {
  if (args.out_dir.empty()) throw ConfigError("--out directory is required");
  fs::create_directories(args.out_dir);
  TemporalGraph g = gen_planted(params, args.cfg.seed);
  const fs::path out(args.out_dir);
  write_graph_csv(g, (out / "events.csv").string(),
                  (out / "nodes.csv").string());
  ordered_json j;
  j["events_csv"] = (out / "events.csv").string();
  j["nodes_csv"] = (out / "nodes.csv").string();
  j["stats"] = graph_stats_json(g);
  j["params"] = {{"n_users", params.n_users},
                 {"n_items", params.n_items},
                 {"revisit_prob", params.revisit_prob},
                 {"noise_edges", params.noise_edges},
                 {"horizon", params.horizon},
                 {"feat_dim", params.feat_dim},
                 {"recent_window", params.recent_window},
                 {"seed", args.cfg.seed}};
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_train(const CLI::App& cmd, const CommonArgs& args,
              const std::string& variant) {
  RunConfig cfg = apply_variant(effective_config(cmd, args), variant);
  if (args.out_dir.empty()) throw ConfigError("--out directory is required");
  fs::create_directories(args.out_dir);
  TemporalGraph g = load_graph(args, static_cast<std::size_t>(cfg.d));
  SplitBundle splits = chronological_split(g, cfg.train_frac, cfg.val_frac);
  TrainResult res = train(g, splits, cfg);

  const fs::path out(args.out_dir);
  CheckpointMeta meta;
  meta.epoch = res.best_epoch;
  meta.val_acc = res.best_val_acc;
  meta.val_f1 = res.best_epoch >= 0 ? res.log[res.best_epoch].val_f1 : 0.0;
  meta.seed = cfg.seed;
  save_checkpoint((out / "checkpoint.tbdf").string(), res.params, cfg, meta);

  std::ostringstream log_lines;
  for (const EpochStats& e : res.log) {
    ordered_json line;
    line["epoch"] = e.epoch;
    line["train_loss"] = e.train_loss;
    line["val_acc"] = e.val_acc;
    line["val_f1"] = e.val_f1;
    line["seconds"] = e.seconds;
    log_lines << line.dump() << "\n";
  }
  write_text(out / "train_log.jsonl", log_lines.str());
  write_text(out / "effective_config.json", cfg.to_json().dump(2) + "\n");

  ordered_json j;
  j["checkpoint"] = (out / "checkpoint.tbdf").string();
  j["best_epoch"] = res.best_epoch;
  j["best_val_acc"] = res.best_val_acc;
  j["epochs_run"] = res.log.size();
  j["config"] = cfg.to_json();
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_eval(const CLI::App& cmd, const CommonArgs& args,
             const std::string& checkpoint_path, const std::string& split) {
  Checkpoint ck = load_checkpoint(checkpoint_path);
  RunConfig cfg = ck.config;
  if (cmd.count("--threads") > 0) cfg.threads = args.cfg.threads;
  const std::uint64_t eval_seed =
      cmd.count("--seed") > 0 ? args.cfg.seed : derive_seed(ck.meta.seed, 0xEA01);
  TemporalGraph g = load_graph(args, static_cast<std::size_t>(cfg.d));
  SplitBundle splits = chronological_split(g, cfg.train_frac, cfg.val_frac);
  const std::vector<EventId>& ids =
      split == "val" ? splits.val
                     : (split == "train" ? splits.train : splits.test);
  auto [acc, f1] = evaluate(ck.params, g, ids, cfg, eval_seed);
  ordered_json j;
  j["split"] = split;
  j["examples"] = 2 * ids.size();
  j["accuracy"] = acc;
  j["f1"] = f1;
  j["eval_seed"] = eval_seed;
  j["config"] = cfg.to_json();
  const std::string text = j.dump(2) + "\n";
  std::cout << text;
  if (!args.out_dir.empty()) {
    fs::create_directories(args.out_dir);
    write_text(fs::path(args.out_dir) / "eval.json", text);
  }
  return 0;
}

int cmd_ablate(const CLI::App& cmd, const CommonArgs& args) {
  RunConfig cfg = effective_config(cmd, args);
  TemporalGraph g = load_graph(args, static_cast<std::size_t>(cfg.d));
  SplitBundle splits = chronological_split(g, cfg.train_frac, cfg.val_frac);
  std::vector<std::uint64_t> seeds = parse_seeds(args.seeds_text);
  std::vector<AblationRow> rows = ablation_grid(g, splits, cfg, seeds);

  ordered_json j;
  j["base_config"] = cfg.to_json();
  j["seeds"] = seeds;
  ordered_json table = ordered_json::array();
  std::ostringstream csv;
  csv << "variant,acc_mean,acc_std,f1_mean,f1_std\n";
  for (const AblationRow& row : rows) {
    ordered_json rj;
    rj["variant"] = row.variant;
    rj["metrics"] = row.report.to_json();
    rj["config_audit"] = row.config_audit;
    if (row.variant != "full") {
      rj["acc_t_test_vs_full"] = {{"t", row.vs_full.t},
                                  {"p", row.vs_full.p},
                                  {"defined", row.vs_full.defined}};
    }
    table.push_back(rj);
    csv << row.variant << "," << row.report.acc_mean << ","
        << row.report.acc_std << "," << row.report.f1_mean << ","
        << row.report.f1_std << "\n";
  }
  j["rows"] = table;
  const std::string text = j.dump(2) + "\n";
  std::cout << text;
  if (!args.out_dir.empty()) {
    fs::create_directories(args.out_dir);
    write_text(fs::path(args.out_dir) / "ablation.json", text);
    write_text(fs::path(args.out_dir) / "ablation.csv", csv.str());
  }
  return 0;
}

int cmd_sweep(const CLI::App& cmd, const CommonArgs& args,
              const std::string& grid_text) {
  RunConfig cfg = effective_config(cmd, args);
  TemporalGraph g = load_graph(args, static_cast<std::size_t>(cfg.d));
  SplitBundle splits = chronological_split(g, cfg.train_frac, cfg.val_frac);
  std::vector<std::uint64_t> seeds = parse_seeds(args.seeds_text);
  std::vector<double> grid = parse_grid(grid_text);
  std::vector<SweepRow> rows = alpha_sweep(g, splits, cfg, grid, seeds);
  const std::string csv = sweep_to_csv(rows);
  std::cout << csv;
  if (!args.out_dir.empty()) {
    fs::create_directories(args.out_dir);
    write_text(fs::path(args.out_dir) / "alpha_sweep.csv", csv);
  }
  return 0;
}

int cmd_paths(const CLI::App& cmd, const CommonArgs& args,
              const std::string& node, double time, int depth) {
  RunConfig cfg = effective_config(cmd, args);
  TemporalGraph g = load_graph(args, static_cast<std::size_t>(cfg.d));
  NodeId id = g.find_node(node);
  SamplerOptions opts;
  opts.fanout = static_cast<std::size_t>(cfg.fanout);
  opts.policy = cfg.model().fanout_policy;
  opts.mask_future = cfg.mask_future;
  Rng rng(cfg.seed);
  BfsTree tree = expand(g, id, time, depth, opts, &rng);
  for (const TemporalPath& p : collect_paths(tree)) {
    ordered_json j;
    j["target"] = g.node_name(p.target);
    j["target_time"] = p.target_time;
    ordered_json hops = ordered_json::array();
    for (const PathHop& h : p.hops) {
      hops.push_back({{"node", g.node_name(h.node)},
                      {"ts", h.ts},
                      {"event", h.event}});
    }
    j["hops"] = hops;
    std::cout << j.dump() << "\n";
  }
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"temporal BFS/DFS graph attention engine"};
  app.require_subcommand(1);
  bool no_simd = false;
  app.add_flag("--no-simd", no_simd, "force scalar kernels");

  CommonArgs args;
  PlantedParams synth_params;
  std::string checkpoint_path, split = "test", grid_text =
      "0.0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0";
  std::string train_variant = "full";
  std::string paths_node;
  double paths_time = 0.0;
  int paths_depth = 2;

  auto add_data_flags = [&](CLI::App* cmd) {
    cmd->add_option("--data", args.data, "events CSV (src,dst,ts[,f...])");
    cmd->add_option("--node-features", args.node_features,
                    "node feature sidecar CSV");
  };

  CLI::App* stats = app.add_subcommand("stats", "dataset summary as JSON");
  add_data_flags(stats);
  stats->add_option("--dim", args.cfg.d, "feature dimension");

  CLI::App* prepare =
      app.add_subcommand("prepare", "validate ingestion and splits");
  add_data_flags(prepare);
  add_config_flags(prepare, args);

  CLI::App* gen = app.add_subcommand("gen-synth",
                                     "generate the planted revisit dataset");
  gen->add_option("--out", args.out_dir, "output directory")->required();
  gen->add_option("--users", synth_params.n_users, "user count");
  gen->add_option("--items", synth_params.n_items, "item count");
  gen->add_option("--revisit-prob", synth_params.revisit_prob,
                  "probability of a planted revisit");
  gen->add_option("--noise", synth_params.noise_edges, "uniform noise events");
  gen->add_option("--horizon", synth_params.horizon, "main-stream events");
  gen->add_option("--dim", synth_params.feat_dim, "feature dimension");
  gen->add_option("--recent-window", synth_params.recent_window,
                  "revisit window of recent distinct items");
  gen->add_option("--seed", args.cfg.seed, "generator seed");

  CLI::App* tr = app.add_subcommand("train", "train and checkpoint a model");
  add_data_flags(tr);
  add_config_flags(tr, args);
  tr->add_option("--out", args.out_dir, "output directory")->required();
  tr->add_option("--variant", train_variant,
                 "ablation variant: full|-BFS|-DFS|path-avg|paths-avg|-time");

  CLI::App* ev = app.add_subcommand("eval", "evaluate a checkpoint");
  add_data_flags(ev);
  ev->add_option("--checkpoint", checkpoint_path, "checkpoint file")
      ->required();
  ev->add_option("--split", split, "train|val|test");
  ev->add_option("--seed", args.cfg.seed, "negative-sampling seed");
  ev->add_option("--threads", args.cfg.threads, "worker thread cap");
  ev->add_option("--out", args.out_dir, "output directory");

  CLI::App* ab = app.add_subcommand("ablate", "run the ablation table");
  add_data_flags(ab);
  add_config_flags(ab, args);
  ab->add_option("--seeds", args.seeds_text, "comma-separated seeds");
  ab->add_option("--out", args.out_dir, "output directory");

  CLI::App* sw = app.add_subcommand("sweep", "alpha sweep");
  add_data_flags(sw);
  add_config_flags(sw, args);
  sw->add_option("--seeds", args.seeds_text, "comma-separated seeds");
  sw->add_option("--grid", grid_text, "comma-separated alpha grid");
  sw->add_option("--out", args.out_dir, "output directory");

  CLI::App* pa = app.add_subcommand("paths", "enumerate temporal paths");
  add_data_flags(pa);
  add_config_flags(pa, args);
  pa->add_option("--node", paths_node, "target node name")->required();
  pa->add_option("--time", paths_time, "target time")->required();
  pa->add_option("--depth", paths_depth, "max path length");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (no_simd) kern::force_scalar(true);

  try {
    if (stats->parsed()) return cmd_stats(args);
    if (prepare->parsed()) return cmd_prepare(*prepare, args);
    if (gen->parsed()) return cmd_gen_synth(args, synth_params);
    if (tr->parsed()) return cmd_train(*tr, args, train_variant);
    if (ev->parsed()) return cmd_eval(*ev, args, checkpoint_path, split);
    if (ab->parsed()) return cmd_ablate(*ab, args);
    if (sw->parsed()) return cmd_sweep(*sw, args, grid_text);
    if (pa->parsed()) return cmd_paths(*pa, args, paths_node, paths_time,
                                       paths_depth);
  } catch (const std::exception& e) {
    log_error(e.what());
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace tbdfs
