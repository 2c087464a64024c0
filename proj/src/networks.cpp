#include "repolens/networks.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "repolens/csv.hpp"

namespace repolens {

void SimpleGraph::add_edge(const std::string& u, const std::string& v, double w) {
  if (u == v) return;
  nodes.insert(u);
  nodes.insert(v);
  auto key = u < v ? std::make_pair(u, v) : std::make_pair(v, u);
  edges[key] += w;
}

CoEditNetwork build_coedit(const EventLog& log, const TimeWindow& window, bool include_bots) {
  CoEditNetwork net;
  net.window = window;
  std::size_t retained = 0;
  for (const CoEditEvent& e : log.coedits) {
    if (!window.contains(e.time)) continue;
    if (!include_bots && (e.editor.is_bot || e.original_author.is_bot)) continue;
    if (e.editor.canonical_key == e.original_author.canonical_key) continue;
    ++retained;
    net.nodes.emplace(e.editor.canonical_key, e.editor);
    net.nodes.emplace(e.original_author.canonical_key, e.original_author);
    net.edges[{e.editor.canonical_key, e.original_author.canonical_key}] += e.lines;
  }
  // Active-but-isolated developers still count as nodes.
  for (const ContributionEvent& e : log.contributions) {
    if (!window.contains(e.time)) continue;
    if (!include_bots && e.developer.is_bot) continue;
    ++retained;
    net.nodes.emplace(e.developer.canonical_key, e.developer);
  }
  net.empty_window = retained == 0;
  return net;
}

BipartiteNetwork build_bipartite(const EventLog& log, const TimeWindow& window,
                                 bool include_bots) {
  BipartiteNetwork net;
  net.window = window;
  std::size_t retained = 0;
  for (const ContributionEvent& e : log.contributions) {
    if (!window.contains(e.time)) continue;
    if (!include_bots && e.developer.is_bot) continue;
    const std::uint64_t w = static_cast<std::uint64_t>(e.lines_added) + e.lines_removed;
    if (w == 0) continue;
    ++retained;
    net.dev_nodes.emplace(e.developer.canonical_key, e.developer);
    net.file_nodes.insert(e.file);
    net.edges[{e.developer.canonical_key, e.file}] += w;
  }
  net.empty_window = retained == 0;
  return net;
}

SimpleGraph project_to_files(const BipartiteNetwork& b) {
  SimpleGraph g;
  for (const auto& f : b.file_nodes) g.nodes.insert(f);
  std::map<std::string, std::vector<std::string>> files_of_dev;
  for (const auto& [key, w] : b.edges) files_of_dev[key.first].push_back(key.second);
  for (auto& [dev, files] : files_of_dev) {
    std::sort(files.begin(), files.end());
    for (std::size_t i = 0; i < files.size(); ++i)
      for (std::size_t j = i + 1; j < files.size(); ++j) {
        auto key = std::make_pair(files[i], files[j]);
        auto [it, inserted] = g.edges.emplace(key, 1.0);
        (void)it;
        (void)inserted;
      }
  }
  return g;
}

SimpleGraph symmetrize(const CoEditNetwork& n) {
  SimpleGraph g;
  for (const auto& [key, _] : n.nodes) g.nodes.insert(key);
  for (const auto& [key, w] : n.edges) {
    if (key.first == key.second) continue;
    auto undirected =
        key.first < key.second ? key : std::make_pair(key.second, key.first);
    g.edges[undirected] += static_cast<double>(w);
  }
  return g;
}

TimeWindow lifetime_window(const EventLog& log) {
  Timestamp lo = 0, hi = 0;
  bool any = false;
  auto fold = [&](Timestamp t) {
    if (!any) {
      lo = hi = t;
      any = true;
    } else {
      lo = std::min(lo, t);
      hi = std::max(hi, t);
    }
  };
  for (const auto& e : log.coedits) fold(e.time);
  for (const auto& e : log.contributions) fold(e.time);
  return any ? TimeWindow{lo, hi + 1} : TimeWindow{0, 1};
}

std::string coedit_to_csv(const CoEditNetwork& n) {
  std::string out = "source,target,weight\n";
  for (const auto& [key, w] : n.edges)
    out += csv_join({key.first, key.second, std::to_string(w)});
  return out;
}

std::string bipartite_to_csv(const BipartiteNetwork& n) {
  std::string out = "source,target,weight\n";
  for (const auto& [key, w] : n.edges)
    out += csv_join({key.first, key.second, std::to_string(w)});
  return out;
}

std::string network_sidecar_json(const std::vector<std::string>& nodes, const TimeWindow& w,
                                 const std::string& type) {
  nlohmann::json j{{"nodes", nodes},
                   {"window", {{"start", w.start}, {"end", w.end}}},
                   {"type", type}};
  return j.dump(2) + "\n";
}

}  // namespace repolens
