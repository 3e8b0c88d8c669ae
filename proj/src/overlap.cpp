#include "overlap.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <string>
#include <unordered_map>

#include "errors.hpp"

namespace gnno {

OverlapGroup group_of(double j_value) {
  if (!(j_value >= 0.0) || j_value > 1.0) {
    throw DataError("jaccard value outside [0, 1]");
  }
  if (j_value == 0.0) return OverlapGroup::Zero;
  if (j_value <= kGroupLowHi) return OverlapGroup::Low;
  if (j_value <= kGroupMediumHi) return OverlapGroup::Medium;
  return OverlapGroup::High;
}

const char* group_name(OverlapGroup group) {
  switch (group) {
    case OverlapGroup::Zero: return "zero";
    case OverlapGroup::Low: return "low";
    case OverlapGroup::Medium: return "medium";
    case OverlapGroup::High: return "high";
  }
  return "?";
}

double jaccard(const TransitionGraph& graph, uint32_t i, uint32_t j) {
  const auto ni = graph.neighbors_weighted(i);
  const auto nj = graph.neighbors_weighted(j);
  if (ni.empty() && nj.empty()) return 0.0;  // 0/0 convention

  size_t common = 0;
  size_t a = 0, b = 0;
  while (a < ni.size() && b < nj.size()) {
    if (ni[a].first == nj[b].first) {
      ++common;
      ++a;
      ++b;
    } else if (ni[a].first < nj[b].first) {
      ++a;
    } else {
      ++b;
    }
  }
  const size_t uni = ni.size() + nj.size() - common;
  return static_cast<double>(common) / static_cast<double>(uni);
}

std::span<const OverlapIndex::Entry> OverlapIndex::overlaps(uint32_t i) const {
  if (i >= entries_.size()) throw DataError("item index out of range");
  return entries_[i];
}

double OverlapIndex::value(uint32_t i, uint32_t j) const {
  const auto list = overlaps(i);
  auto it = std::lower_bound(list.begin(), list.end(), j,
                             [](const Entry& e, uint32_t key) { return e.first < key; });
  if (it != list.end() && it->first == j) return it->second;
  return 0.0;
}

bool OverlapIndex::contains(uint32_t i, uint32_t j) const {
  return value(i, j) > 0.0;
}

void OverlapIndex::add_pair(uint32_t i, uint32_t j, double value) {
  if (i >= entries_.size() || j >= entries_.size() || i == j) {
    throw DataError("invalid overlap pair");
  }
  if (!(value > 0.0) || value > 1.0) {
    throw DataError("overlap value outside (0, 1]");
  }
  entries_[i].emplace_back(j, value);
  entries_[j].emplace_back(i, value);
}

void OverlapIndex::finalize() {
  pair_count_ = 0;
  for (size_t i = 0; i < entries_.size(); ++i) {
    auto& list = entries_[i];
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
    for (const auto& [j, v] : list) {
      if (j > i) ++pair_count_;
    }
  }
}

OverlapIndex build_overlap_index(const TransitionGraph& graph,
                                 double min_edge_weight) {
  const size_t n = graph.num_nodes();

  // neighbor sets after the optional edge-weight threshold
  std::vector<std::vector<uint32_t>> neighbors(n);
  for (uint32_t i = 0; i < n; ++i) {
    for (const auto& [j, w] : graph.neighbors_weighted(i)) {
      if (w > min_edge_weight) neighbors[i].push_back(j);
    }
  }

  // common-neighbor counts via pivot enumeration
  std::unordered_map<uint64_t, uint32_t> common;
  for (uint32_t pivot = 0; pivot < n; ++pivot) {
    const auto& adj = neighbors[pivot];
    for (size_t a = 0; a < adj.size(); ++a) {
      for (size_t b = a + 1; b < adj.size(); ++b) {
        const uint64_t key = (static_cast<uint64_t>(adj[a]) << 32) | adj[b];
        ++common[key];
      }
    }
  }

  OverlapIndex index(n);
  for (const auto& [key, c] : common) {
    const uint32_t i = static_cast<uint32_t>(key >> 32);
    const uint32_t j = static_cast<uint32_t>(key & 0xffffffffu);
    const size_t uni = neighbors[i].size() + neighbors[j].size() - c;
    index.add_pair(i, j, static_cast<double>(c) / static_cast<double>(uni));
  }
  index.finalize();
  return index;
}

void serialize_overlap_index(const OverlapIndex& index, std::ostream& out) {
  char buf[64];
  for (uint32_t i = 0; i < index.num_items(); ++i) {
    for (const auto& [j, v] : index.overlaps(i)) {
      if (j < i) continue;
      std::snprintf(buf, sizeof(buf), "%.12f", v);
      out << i << '\t' << j << '\t' << buf << '\n';
    }
  }
}

OverlapIndex deserialize_overlap_index(std::istream& in, size_t num_items) {
  OverlapIndex index(num_items);
  std::string line;
  size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    uint32_t i = 0, j = 0;
    double v = 0.0;
    if (std::sscanf(line.c_str(), "%u\t%u\t%lf", &i, &j, &v) != 3) {
      throw DataError("overlap line " + std::to_string(line_number) +
                      ": expected 'i TAB j TAB jaccard'");
    }
    index.add_pair(i, j, v);
  }
  index.finalize();
  return index;
}

}  // namespace gnno
