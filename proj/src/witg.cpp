#include "witg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <string>
#include <unordered_map>

#include "errors.hpp"

namespace gnno {

std::span<const TransitionGraph::Edge> TransitionGraph::neighbors_weighted(
    uint32_t i) const {
  if (i >= adjacency_.size()) throw DataError("node index out of range");
  return adjacency_[i];
}

std::vector<uint32_t> TransitionGraph::neighbor_set(uint32_t i) const {
  std::vector<uint32_t> out;
  const auto edges = neighbors_weighted(i);
  out.reserve(edges.size());
  for (const auto& [j, w] : edges) out.push_back(j);
  return out;
}

size_t TransitionGraph::degree(uint32_t i) const {
  return neighbors_weighted(i).size();
}

void TransitionGraph::add_weight(uint32_t i, uint32_t j, double w) {
  if (i >= adjacency_.size() || j >= adjacency_.size()) {
    throw DataError("edge endpoint out of range");
  }
  adjacency_[i].emplace_back(j, w);
  if (i != j) adjacency_[j].emplace_back(i, w);
}

void TransitionGraph::finalize() {
  num_edges_ = 0;
  for (size_t i = 0; i < adjacency_.size(); ++i) {
    auto& edges = adjacency_[i];
    std::sort(edges.begin(), edges.end());
    // merge duplicate neighbors by weight summation
    size_t out = 0;
    for (size_t in = 0; in < edges.size(); ++in) {
      if (out > 0 && edges[out - 1].first == edges[in].first) {
        edges[out - 1].second += edges[in].second;
      } else {
        edges[out++] = edges[in];
      }
    }
    edges.resize(out);
    for (const auto& [j, w] : edges) {
      if (j > i || j == i) ++num_edges_;  // count each undirected edge once
    }
  }
}

TransitionGraph build_witg(const std::vector<std::vector<uint32_t>>& sequences,
                           size_t num_items, const WitgConfig& config) {
  if (config.window < 1) throw UsageError("witg window must be >= 1");

  // accumulate per unordered pair, keyed (min << 32 | max)
  std::unordered_map<uint64_t, double> weights;
  for (size_t s = 0; s < sequences.size(); ++s) {
    const auto& seq = sequences[s];
    for (size_t m = 0; m < seq.size(); ++m) {
      if (seq[m] >= num_items) {
        throw DataError("sequence " + std::to_string(s) +
                        " contains an out-of-range item index");
      }
      const size_t max_hop = std::min<size_t>(config.window, seq.size() - 1 - m);
      for (size_t k = 1; k <= max_hop; ++k) {
        const uint32_t a = seq[m];
        const uint32_t b = seq[m + k];
        if (a == b && !config.allow_self_loops) continue;
        const uint64_t key =
            (static_cast<uint64_t>(std::min(a, b)) << 32) | std::max(a, b);
        weights[key] += 1.0 / static_cast<double>(k);
      }
    }
  }

  TransitionGraph graph(num_items);
  for (const auto& [key, w] : weights) {
    graph.add_weight(static_cast<uint32_t>(key >> 32),
                     static_cast<uint32_t>(key & 0xffffffffu), w);
  }
  graph.finalize();
  return graph;
}

void serialize_graph(const TransitionGraph& graph, std::ostream& out) {
  char buf[64];
  for (uint32_t i = 0; i < graph.num_nodes(); ++i) {
    for (const auto& [j, w] : graph.neighbors_weighted(i)) {
      if (j < i) continue;
      std::snprintf(buf, sizeof(buf), "%.12f", w);
      out << i << '\t' << j << '\t' << buf << '\n';
    }
  }
}

TransitionGraph deserialize_graph(std::istream& in, size_t num_nodes) {
  TransitionGraph graph(num_nodes);
  std::string line;
  size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    uint32_t i = 0, j = 0;
    double w = 0.0;
    if (std::sscanf(line.c_str(), "%u\t%u\t%lf", &i, &j, &w) != 3 ||
        !(w > 0.0) || !std::isfinite(w)) {
      throw DataError("graph line " + std::to_string(line_number) +
                      ": expected 'i TAB j TAB positive weight'");
    }
    graph.add_weight(i, j, w);
  }
  graph.finalize();
  return graph;
}

bool graphs_equal(const TransitionGraph& a, const TransitionGraph& b,
                  double weight_tolerance) {
  if (a.num_nodes() != b.num_nodes() || a.num_edges() != b.num_edges()) {
    return false;
  }
  for (uint32_t i = 0; i < a.num_nodes(); ++i) {
    const auto ea = a.neighbors_weighted(i);
    const auto eb = b.neighbors_weighted(i);
    if (ea.size() != eb.size()) return false;
    for (size_t n = 0; n < ea.size(); ++n) {
      if (ea[n].first != eb[n].first) return false;
      if (std::abs(ea[n].second - eb[n].second) > weight_tolerance) return false;
    }
  }
  return true;
}

}  // namespace gnno
