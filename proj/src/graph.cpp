#include "tbdfs/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "tbdfs/errors.hpp"

namespace tbdfs {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

}  // namespace

TemporalGraph::TemporalGraph(std::vector<EdgeEvent> events,
                             std::vector<std::vector<double>> node_features,
                             std::vector<std::vector<double>> edge_features,
                             std::size_t feat_dim,
                             std::vector<std::string> node_names)
    : events_(std::move(events)),
      node_feat_(std::move(node_features)),
      edge_feat_(std::move(edge_features)),
      node_names_(std::move(node_names)),
      feat_dim_(feat_dim) {
  if (node_names_.empty()) {
    for (std::size_t i = 0; i < node_feat_.size(); ++i) {
      node_names_.push_back(std::to_string(i));
    }
  }
  adj_.resize(node_feat_.size());
  for (EventId e = 0; e < static_cast<EventId>(events_.size()); ++e) {
    const EdgeEvent& ev = events_[e];
    adj_[ev.src].push_back(Arc{ev.dst, ev.ts, e});
    adj_[ev.dst].push_back(Arc{ev.src, ev.ts, e});
  }
  for (auto& arcs : adj_) {
    std::sort(arcs.begin(), arcs.end(), [](const Arc& a, const Arc& b) {
      if (a.ts != b.ts) return a.ts < b.ts;
      return a.event < b.event;
    });
  }
  std::set<NodeId> srcs, dsts;
  for (const EdgeEvent& ev : events_) {
    srcs.insert(ev.src);
    dsts.insert(ev.dst);
  }
  partition_.bipartite = !events_.empty();
  for (NodeId s : srcs) {
    if (dsts.count(s)) {
      partition_.bipartite = false;
      break;
    }
  }
  partition_.dst_nodes.assign(dsts.begin(), dsts.end());
}

TemporalGraph TemporalGraph::load_csv(const std::string& path, std::size_t d,
                                      const std::string& node_feature_path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset file: " + path);

  std::string line;
  if (!std::getline(in, line)) {
    // empty file -> empty graph
    return TemporalGraph({}, {}, {}, d, {});
  }
  std::vector<std::string> header = split_line(line);
  if (header.size() < 3 || header[0] != "src" || header[1] != "dst" ||
      header[2] != "ts") {
    throw DataError(path + ": header must start with src,dst,ts");
  }

  std::unordered_map<std::string, NodeId> ids;
  std::vector<std::string> names;
  auto intern = [&](const std::string& name) {
    auto it = ids.find(name);
    if (it != ids.end()) return it->second;
    NodeId id = static_cast<NodeId>(names.size());
    ids.emplace(name, id);
    names.push_back(name);
    return id;
  };

  std::vector<EdgeEvent> events;
  std::vector<std::vector<double>> edge_feat;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f = split_line(line);
    if (f.size() < 3) {
      throw DataError(path + ":" + std::to_string(lineno) +
                      ": expected at least src,dst,ts");
    }
    double ts;
    try {
      ts = std::stod(f[2]);
    } catch (const std::exception&) {
      throw DataError(path + ":" + std::to_string(lineno) +
                      ": unparsable timestamp '" + f[2] + "'");
    }
    if (!(ts >= 0.0) || !std::isfinite(ts)) {
      throw DataError(path + ":" + std::to_string(lineno) +
                      ": negative or non-finite timestamp");
    }
    std::vector<double> feat(d, 0.0);
    for (std::size_t c = 3; c < f.size() && c - 3 < d; ++c) {
      try {
        feat[c - 3] = std::stod(f[c]);
      } catch (const std::exception&) {
        throw DataError(path + ":" + std::to_string(lineno) +
                        ": unparsable feature '" + f[c] + "'");
      }
    }
    events.push_back(EdgeEvent{intern(f[0]), intern(f[1]), ts});
    edge_feat.push_back(std::move(feat));
  }

  std::vector<std::vector<double>> node_feat(names.size(),
                                             std::vector<double>(d, 0.0));
  if (!node_feature_path.empty()) {
    std::ifstream nf(node_feature_path);
    if (!nf) throw DataError("cannot open node features: " + node_feature_path);
    std::string nline;
    std::getline(nf, nline);  // header
    std::size_t nlineno = 1;
    while (std::getline(nf, nline)) {
      ++nlineno;
      if (nline.empty()) continue;
      std::vector<std::string> f = split_line(nline);
      auto it = ids.find(f[0]);
      if (it == ids.end()) continue;  // features for a node with no events
      for (std::size_t c = 1; c < f.size() && c - 1 < d; ++c) {
        try {
          node_feat[it->second][c - 1] = std::stod(f[c]);
        } catch (const std::exception&) {
          throw DataError(node_feature_path + ":" + std::to_string(nlineno) +
                          ": unparsable feature '" + f[c] + "'");
        }
      }
    }
  }

  return TemporalGraph(std::move(events), std::move(node_feat),
                       std::move(edge_feat), d, std::move(names));
}

const std::vector<double>& TemporalGraph::node_feature(NodeId i) const {
  check_node(i);
  return node_feat_[i];
}

NodeId TemporalGraph::find_node(const std::string& name) const {
  for (std::size_t i = 0; i < node_names_.size(); ++i) {
    if (node_names_[i] == name) return static_cast<NodeId>(i);
  }
  throw LookupError("unknown node '" + name + "'");
}

double TemporalGraph::min_ts() const {
  double m = 0.0;
  bool first = true;
  for (const EdgeEvent& e : events_) {
    if (first || e.ts < m) m = e.ts;
    first = false;
  }
  return m;
}

double TemporalGraph::max_ts() const {
  double m = 0.0;
  for (const EdgeEvent& e : events_) m = std::max(m, e.ts);
  return m;
}

void TemporalGraph::check_node(NodeId i) const {
  if (i < 0 || static_cast<std::size_t>(i) >= node_feat_.size()) {
    throw LookupError("unknown node id " + std::to_string(i));
  }
}

std::size_t TemporalGraph::degree(NodeId i) const {
  check_node(i);
  return adj_[i].size();
}

std::vector<TemporalNeighbor> TemporalGraph::pick(const std::vector<Arc>& arcs,
                                                  std::size_t prefix,
                                                  std::size_t k,
                                                  FanoutPolicy policy,
                                                  Rng* rng) const {
  std::vector<std::size_t> chosen;
  if (prefix <= k) {
    chosen.resize(prefix);
    for (std::size_t i = 0; i < prefix; ++i) chosen[i] = i;
  } else if (policy == FanoutPolicy::kMostRecent) {
    chosen.resize(k);
    for (std::size_t i = 0; i < k; ++i) chosen[i] = prefix - k + i;
  } else {
    // uniform without replacement, then restored to time order
    std::vector<std::size_t> pool(prefix);
    for (std::size_t i = 0; i < prefix; ++i) pool[i] = i;
    for (std::size_t i = 0; i < k; ++i) {
      std::size_t j = i + static_cast<std::size_t>(rng->below(prefix - i));
      std::swap(pool[i], pool[j]);
    }
    chosen.assign(pool.begin(), pool.begin() + k);
    std::sort(chosen.begin(), chosen.end());
  }
  std::vector<TemporalNeighbor> out;
  out.reserve(chosen.size());
  for (std::size_t idx : chosen) {
    out.push_back(TemporalNeighbor{arcs[idx].dst, arcs[idx].ts, arcs[idx].event});
  }
  return out;
}

std::vector<TemporalNeighbor> TemporalGraph::temporal_neighbors(
    NodeId i, double t, std::size_t k, FanoutPolicy policy, Rng* rng) const {
  check_node(i);
  const std::vector<Arc>& arcs = adj_[i];
  // arcs sorted by ts: first index with ts >= t bounds the strict past
  std::size_t lo = 0, hi = arcs.size();
  while (lo < hi) {
    std::size_t mid = (lo + hi) / 2;
    if (arcs[mid].ts < t) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  return pick(arcs, lo, k, policy, rng);
}

std::vector<TemporalNeighbor> TemporalGraph::neighbors_unmasked(
    NodeId i, std::size_t k, FanoutPolicy policy, Rng* rng) const {
  check_node(i);
  return pick(adj_[i], adj_[i].size(), k, policy, rng);
}

SplitBundle chronological_split(const TemporalGraph& g, double train_frac,
                                double val_frac) {
  if (train_frac <= 0.0 || val_frac <= 0.0 || train_frac + val_frac >= 1.0) {
    throw ConfigError("split fractions must be positive and sum below 1");
  }
  const std::size_t n = g.event_count();
  if (n < 10) {
    throw DataError("refusing to split a graph with fewer than 10 events (" +
                    std::to_string(n) + ")");
  }
  std::vector<EventId> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<EventId>(i);
  std::sort(order.begin(), order.end(), [&](EventId a, EventId b) {
    if (g.event(a).ts != g.event(b).ts) return g.event(a).ts < g.event(b).ts;
    return a < b;
  });

  const std::size_t n_train = static_cast<std::size_t>(
      std::floor(train_frac * static_cast<double>(n)));
  std::size_t n_val = static_cast<std::size_t>(
      std::ceil(val_frac * static_cast<double>(n)));
  n_val = std::min(n_val, n - n_train);

  SplitBundle s;
  s.train.assign(order.begin(), order.begin() + n_train);
  s.val.assign(order.begin() + n_train, order.begin() + n_train + n_val);
  s.test.assign(order.begin() + n_train + n_val, order.end());
  s.t_train_end = s.train.empty() ? 0.0 : g.event(s.train.back()).ts;
  s.t_val_end = s.val.empty() ? s.t_train_end : g.event(s.val.back()).ts;
  return s;
}

}  // namespace tbdfs
