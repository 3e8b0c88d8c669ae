#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "witg.hpp"

namespace gnno {

// Figure-style partition of item pairs by Jaccard neighborhood overlap.
enum class OverlapGroup { Zero, Low, Medium, High };

inline constexpr double kGroupLowHi = 0.15;
inline constexpr double kGroupMediumHi = 0.3;

OverlapGroup group_of(double j_value);
const char* group_name(OverlapGroup group);

// |N(i) ∩ N(j)| / |N(i) ∪ N(j)| over unweighted neighbor sets; 0 when both
// sets are empty.
double jaccard(const TransitionGraph& graph, uint32_t i, uint32_t j);

// Sparse symmetric index of all pairs with at least one common neighbor.
class OverlapIndex {
 public:
  using Entry = std::pair<uint32_t, double>;  // (other item, jaccard)

  OverlapIndex() = default;
  explicit OverlapIndex(size_t num_items) : entries_(num_items) {}

  size_t num_items() const { return entries_.size(); }
  // Stored pairs counted once (i < j).
  size_t pair_count() const { return pair_count_; }

  std::span<const Entry> overlaps(uint32_t i) const;
  // Stored value, or 0 when the pair has no common neighbor.
  double value(uint32_t i, uint32_t j) const;
  bool contains(uint32_t i, uint32_t j) const;

  void add_pair(uint32_t i, uint32_t j, double value);
  void finalize();

 private:
  std::vector<std::vector<Entry>> entries_;
  size_t pair_count_ = 0;
};

// Enumerates co-neighbor pairs through shared pivots (cost Σ_v degree(v)²)
// rather than over all n² pairs. Edges with weight <= min_edge_weight are
// ignored when extracting neighbor sets.
OverlapIndex build_overlap_index(const TransitionGraph& graph,
                                 double min_edge_weight = 0.0);

// "i TAB j TAB jaccard" with i < j, 12 fractional digits.
void serialize_overlap_index(const OverlapIndex& index, std::ostream& out);
OverlapIndex deserialize_overlap_index(std::istream& in, size_t num_items);

}  // namespace gnno
