#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "overlap.hpp"
#include "rng.hpp"
#include "trainer.hpp"

namespace gnno {

struct AnalysisConfig {
  size_t max_pairs_per_group = 100000;
  size_t bins = 50;  // uniform over [-1, 1]
  uint64_t seed = 42;
};

struct GroupHistogram {
  OverlapGroup group = OverlapGroup::Zero;
  uint32_t epoch = 0;
  std::vector<double> bin_edges;  // bins + 1 edges
  std::vector<uint64_t> counts;
  size_t pair_count = 0;
  double mean = 0.0;
  double stddev = 0.0;
  std::vector<double> similarities;  // raw samples, kept for distance summaries
};

// Pairs in the group's Jaccard band; non-zero groups enumerate stored index
// entries (subsampled past max_pairs), group-zero draws uniform pairs and
// rejects indexed ones.
std::vector<std::pair<uint32_t, uint32_t>> sample_group_pairs(
    const OverlapIndex& index, OverlapGroup group, size_t max_pairs, Rng& rng);

// Cosine similarity of embedding rows; 0 when either row has zero norm.
double pair_similarity(const ModelParams& params, uint32_t i, uint32_t j);

std::vector<GroupHistogram> snapshot_distributions(const ModelParams& params,
                                                   const OverlapIndex& index,
                                                   uint32_t epoch,
                                                   const AnalysisConfig& config);

// Wasserstein-1 distance between two empirical sample sets.
double wasserstein1(std::span<const double> a, std::span<const double> b);

// CSV columns: epoch, group, bin_lo, bin_hi, count.
void write_histogram_csv(std::span<const GroupHistogram> histograms,
                         std::ostream& out, bool header);

}  // namespace gnno
