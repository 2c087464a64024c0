#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "repolens/identity.hpp"
#include "repolens/provenance.hpp"
#include "repolens/time_utils.hpp"

namespace repolens {

struct TimeWindow {
  Timestamp start = 0;  // inclusive
  Timestamp end = 0;    // exclusive

  bool contains(Timestamp t) const { return start <= t && t < end; }
  friend bool operator==(const TimeWindow&, const TimeWindow&) = default;
};

// Directed weighted co-editing network: edge (editor -> original_author) with
// total overwritten lines as weight. Nodes are canonical author keys; isolated
// but active developers are kept.
struct CoEditNetwork {
  std::map<std::string, AuthorId> nodes;
  std::map<std::pair<std::string, std::string>, std::uint64_t> edges;
  TimeWindow window;
  bool empty_window = false;  // no retained events in the window
};

struct BipartiteNetwork {
  std::map<std::string, AuthorId> dev_nodes;
  std::set<std::string> file_nodes;
  std::map<std::pair<std::string, std::string>, std::uint64_t> edges;  // (dev, file)
  TimeWindow window;
  bool empty_window = false;
};

// Undirected simple graph over string node ids; edges keyed with first < second.
struct SimpleGraph {
  std::set<std::string> nodes;
  std::map<std::pair<std::string, std::string>, double> edges;

  void add_edge(const std::string& u, const std::string& v, double w = 1.0);
  std::size_t n_nodes() const { return nodes.size(); }
  std::size_t n_edges() const { return edges.size(); }
};

CoEditNetwork build_coedit(const EventLog& log, const TimeWindow& window,
                           bool include_bots = false);

BipartiteNetwork build_bipartite(const EventLog& log, const TimeWindow& window,
                                 bool include_bots = false);

// One-mode file projection: {f,g} linked iff some developer touched both.
SimpleGraph project_to_files(const BipartiteNetwork& b);

// Undirected view with w{u,v} = w(u->v) + w(v->u); isolates preserved.
SimpleGraph symmetrize(const CoEditNetwork& n);

// Whole-log window helper.
TimeWindow lifetime_window(const EventLog& log);

// Edge-list CSV (source,target,weight) plus a JSON sidecar {nodes, window, type}.
std::string coedit_to_csv(const CoEditNetwork& n);
std::string bipartite_to_csv(const BipartiteNetwork& n);
std::string network_sidecar_json(const std::vector<std::string>& nodes, const TimeWindow& w,
                                 const std::string& type);

}  // namespace repolens
