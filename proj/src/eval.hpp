#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "rng.hpp"
#include "trainer.hpp"

namespace gnno {

enum class EvalPhase { Valid, Test };

struct EvalProtocol {
  size_t candidate_set_size = 1000;  // 1 target + (size - 1) sampled
  std::vector<uint32_t> k_values = {5, 20};
  uint64_t seed = 42;
  EvalPhase phase = EvalPhase::Test;
  uint32_t max_prefix_length = 50;
};

struct EvalReport {
  // key "HR@5", "NDCG@20", ...
  std::map<std::string, double> metrics;
  size_t user_count = 0;
  std::string config_echo;

  std::string to_json() const;
  std::string csv_header() const;
  std::string csv_row(const std::string& label) const;
};

// Target first, then (size - 1) items drawn uniformly without replacement
// from the rest of the item set.
std::vector<uint32_t> build_candidates(uint32_t target, size_t num_items,
                                       size_t size, Rng& rng);

// 1 + number of candidates scored strictly above the target; ties count as
// ranked above (pessimistic).
size_t rank_of_target(std::span<const double> scores, size_t target_pos);

struct MetricPair {
  int hr = 0;
  double ndcg = 0.0;
};
MetricPair hr_ndcg_at_k(size_t rank, uint32_t k);

EvalReport evaluate(const ModelParams& params, const SplitCorpus& split,
                    const EvalProtocol& protocol, Encoder encoder);

}  // namespace gnno
