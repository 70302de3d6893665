#include "tbdfs/synth.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "tbdfs/errors.hpp"

namespace tbdfs {

TemporalGraph gen_planted(const PlantedParams& p, std::uint64_t seed) {
  if (p.n_users < 2 || p.n_items < 2 || p.horizon < 1 || p.feat_dim < 1 ||
      p.recent_window < 1) {
    throw ConfigError("gen_planted: degenerate sizes");
  }
  if (p.revisit_prob < 0.0 || p.revisit_prob > 1.0) {
    throw ConfigError("gen_planted: revisit_prob must lie in [0, 1]");
  }
  Rng rng(derive_seed(seed, 0x5A11));

  const NodeId item_base = static_cast<NodeId>(p.n_users);
  const std::size_t node_count =
      static_cast<std::size_t>(p.n_users + p.n_items);
  const std::size_t d = static_cast<std::size_t>(p.feat_dim);

  std::vector<std::vector<double>> node_feat(node_count,
                                             std::vector<double>(d));
  for (auto& f : node_feat) {
    for (double& x : f) x = rng.normal();
  }

  // last recent_window distinct items per user, most recent first
  std::vector<std::vector<NodeId>> recent(p.n_users);
  auto touch = [&](int user, NodeId item) {
    auto& r = recent[user];
    auto it = std::find(r.begin(), r.end(), item);
    if (it != r.end()) r.erase(it);
    r.insert(r.begin(), item);
    if (static_cast<int>(r.size()) > p.recent_window) r.pop_back();
  };

  std::vector<EdgeEvent> events;
  events.reserve(static_cast<std::size_t>(p.horizon + p.noise_edges));
  for (int step = 0; step < p.horizon; ++step) {
    const int user = static_cast<int>(rng.below(p.n_users));
    NodeId item;
    if (!recent[user].empty() && rng.uniform() < p.revisit_prob) {
      item = recent[user][rng.below(recent[user].size())];
    } else {
      item = item_base + static_cast<NodeId>(rng.below(p.n_items));
    }
    touch(user, item);
    events.push_back(
        EdgeEvent{static_cast<NodeId>(user), item, 1.0 + step});
  }
  for (int n = 0; n < p.noise_edges; ++n) {
    const int user = static_cast<int>(rng.below(p.n_users));
    const NodeId item = item_base + static_cast<NodeId>(rng.below(p.n_items));
    const double ts = rng.uniform(1.0, 1.0 + p.horizon);
    events.push_back(EdgeEvent{static_cast<NodeId>(user), item, ts});
  }

  std::vector<std::vector<double>> edge_feat(events.size(),
                                             std::vector<double>(d, 0.0));
  std::vector<std::string> names;
  names.reserve(node_count);
  for (int u = 0; u < p.n_users; ++u) names.push_back("u" + std::to_string(u));
  for (int i = 0; i < p.n_items; ++i) names.push_back("i" + std::to_string(i));

  return TemporalGraph(std::move(events), std::move(node_feat),
                       std::move(edge_feat), d, std::move(names));
}

void write_graph_csv(const TemporalGraph& g, const std::string& events_path,
                     const std::string& nodes_path) {
  std::ofstream ev(events_path);
  if (!ev) throw DataError("cannot write " + events_path);
  ev << "src,dst,ts\n";
  char buf[64];
  for (std::size_t e = 0; e < g.event_count(); ++e) {
    const EdgeEvent& edge = g.event(static_cast<EventId>(e));
    std::snprintf(buf, sizeof(buf), "%.17g", edge.ts);
    ev << g.node_name(edge.src) << "," << g.node_name(edge.dst) << "," << buf
       << "\n";
  }
  if (!ev) throw DataError("short write: " + events_path);

  std::ofstream nf(nodes_path);
  if (!nf) throw DataError("cannot write " + nodes_path);
  nf << "node_id";
  for (std::size_t c = 0; c < g.feat_dim(); ++c) nf << ",f" << (c + 1);
  nf << "\n";
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    nf << g.node_name(static_cast<NodeId>(i));
    for (double v : g.node_feature(static_cast<NodeId>(i))) {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      nf << "," << buf;
    }
    nf << "\n";
  }
  if (!nf) throw DataError("short write: " + nodes_path);
}

}  // namespace tbdfs
