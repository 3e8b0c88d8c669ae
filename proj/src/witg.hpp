#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

namespace gnno {

struct WitgConfig {
  // Maximum hop distance considered within a sequence. Contributions decay
  // as 1/k, so hops beyond a few positions add little weight; the default
  // keeps construction linear in total sequence length.
  uint32_t window = 3;
  bool allow_self_loops = false;
};

// Undirected weighted item-item graph. Every within-window co-occurrence at
// hop distance k across all training sequences adds 1/k to the pair's weight.
class TransitionGraph {
 public:
  using Edge = std::pair<uint32_t, double>;  // (neighbor, weight)

  TransitionGraph() = default;
  explicit TransitionGraph(size_t num_nodes) : adjacency_(num_nodes) {}

  size_t num_nodes() const { return adjacency_.size(); }
  size_t num_edges() const { return num_edges_; }

  std::span<const Edge> neighbors_weighted(uint32_t i) const;
  // Sorted neighbor indices, weights dropped.
  std::vector<uint32_t> neighbor_set(uint32_t i) const;
  size_t degree(uint32_t i) const;

  // Adds w to the undirected edge {i, j}; used by the builder and loader.
  void add_weight(uint32_t i, uint32_t j, double w);
  // Sorts adjacency lists and counts edges; must be called once after the
  // last add_weight.
  void finalize();

 private:
  std::vector<std::vector<Edge>> adjacency_;
  size_t num_edges_ = 0;
};

TransitionGraph build_witg(const std::vector<std::vector<uint32_t>>& sequences,
                           size_t num_items, const WitgConfig& config);

// Edge-list text: one undirected edge per line as "i TAB j TAB weight" with
// i < j, sorted by (i, j), weight printed with 12 fractional digits.
void serialize_graph(const TransitionGraph& graph, std::ostream& out);
TransitionGraph deserialize_graph(std::istream& in, size_t num_nodes);

bool graphs_equal(const TransitionGraph& a, const TransitionGraph& b,
                  double weight_tolerance = 1e-9);

}  // namespace gnno
