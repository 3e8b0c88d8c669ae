#include "eval.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "errors.hpp"

namespace gnno {

std::vector<uint32_t> build_candidates(uint32_t target, size_t num_items,
                                       size_t size, Rng& rng) {
  if (size > num_items) throw UsageError("candidate set larger than the item set");
  if (size == 0) throw UsageError("candidate set must be nonempty");

  std::vector<uint32_t> out;
  out.reserve(size);
  out.push_back(target);
  const size_t extra = size - 1;
  if (extra >= num_items / 2) {
    // partial Fisher-Yates over the complement of {target}
    std::vector<uint32_t> pool;
    pool.reserve(num_items - 1);
    for (uint32_t i = 0; i < num_items; ++i) {
      if (i != target) pool.push_back(i);
    }
    for (size_t k = 0; k < extra; ++k) {
      const size_t pick = k + rng.next_below(pool.size() - k);
      std::swap(pool[k], pool[pick]);
      out.push_back(pool[k]);
    }
  } else {
    std::unordered_set<uint32_t> seen{target};
    while (out.size() < size) {
      const uint32_t cand = static_cast<uint32_t>(rng.next_below(num_items));
      if (seen.insert(cand).second) out.push_back(cand);
    }
  }
  return out;
}

size_t rank_of_target(std::span<const double> scores, size_t target_pos) {
  if (target_pos >= scores.size()) throw UsageError("target position out of range");
  const double t = scores[target_pos];
  size_t above = 0;
  for (size_t i = 0; i < scores.size(); ++i) {
    if (i == target_pos) continue;
    if (scores[i] >= t) ++above;  // ties rank above the target
  }
  return 1 + above;
}

MetricPair hr_ndcg_at_k(size_t rank, uint32_t k) {
  MetricPair m;
  if (rank <= k) {
    m.hr = 1;
    m.ndcg = 1.0 / std::log2(static_cast<double>(rank) + 1.0);
  }
  return m;
}

EvalReport evaluate(const ModelParams& params, const SplitCorpus& split,
                    const EvalProtocol& protocol, Encoder encoder) {
  if (protocol.k_values.empty()) throw UsageError("eval needs at least one K");
  const uint32_t max_k =
      *std::max_element(protocol.k_values.begin(), protocol.k_values.end());
  if (protocol.candidate_set_size < max_k) {
    throw UsageError("candidate set smaller than the largest K");
  }

  std::vector<uint32_t> users;
  for (size_t u = 0; u < split.train.size(); ++u) {
    const int64_t target = protocol.phase == EvalPhase::Test
                               ? split.test_target[u]
                               : split.valid_target[u];
    if (target >= 0) users.push_back(static_cast<uint32_t>(u));
  }
  if (users.empty()) throw DataError("no users with evaluation targets");

  EvalReport report;
  report.user_count = users.size();
  std::map<std::string, double> sums;
  for (uint32_t k : protocol.k_values) {
    sums["HR@" + std::to_string(k)] = 0.0;
    sums["NDCG@" + std::to_string(k)] = 0.0;
  }

  const size_t cand_size = std::min(protocol.candidate_set_size, split.num_items);
  std::vector<double> scores(cand_size);
  for (size_t ordinal = 0; ordinal < users.size(); ++ordinal) {
    const uint32_t u = users[ordinal];
    std::vector<uint32_t> prefix = split.train[u];
    uint32_t target;
    if (protocol.phase == EvalPhase::Test) {
      // everything before the held-out test item is visible, incl. valid
      if (split.valid_target[u] >= 0) {
        prefix.push_back(static_cast<uint32_t>(split.valid_target[u]));
      }
      target = static_cast<uint32_t>(split.test_target[u]);
    } else {
      target = static_cast<uint32_t>(split.valid_target[u]);
    }
    if (prefix.size() > protocol.max_prefix_length) {
      prefix.erase(prefix.begin(),
                   prefix.end() - static_cast<ptrdiff_t>(protocol.max_prefix_length));
    }

    Rng rng(mix_seed({protocol.seed, ordinal,
                      protocol.phase == EvalPhase::Test ? 2ULL : 1ULL}));
    const auto candidates =
        build_candidates(target, split.num_items, cand_size, rng);

    std::vector<double> enc(params.dim);
    encode_prefix(params, prefix, encoder, enc);
    for (size_t c = 0; c < candidates.size(); ++c) {
      const auto row = params.row(candidates[c]);
      double s = 0.0;
      for (size_t d = 0; d < params.dim; ++d) s += enc[d] * row[d];
      scores[c] = s;
    }
    const size_t rank = rank_of_target({scores.data(), candidates.size()}, 0);
    for (uint32_t k : protocol.k_values) {
      const MetricPair m = hr_ndcg_at_k(rank, k);
      sums["HR@" + std::to_string(k)] += m.hr;
      sums["NDCG@" + std::to_string(k)] += m.ndcg;
    }
  }

  for (const auto& [key, sum] : sums) {
    report.metrics[key] = sum / static_cast<double>(users.size());
  }
  return report;
}

std::string EvalReport::to_json() const {
  nlohmann::json j;
  j["metrics"] = metrics;
  j["user_count"] = user_count;
  j["config"] = config_echo;
  return j.dump(2) + "\n";
}

std::string EvalReport::csv_header() const {
  std::ostringstream out;
  out << "label";
  for (const auto& [key, value] : metrics) out << ',' << key;
  out << ",user_count";
  return out.str();
}

std::string EvalReport::csv_row(const std::string& label) const {
  std::ostringstream out;
  out << label;
  out.setf(std::ios::fixed);
  out.precision(6);
  for (const auto& [key, value] : metrics) out << ',' << value;
  out << ',' << user_count;
  return out.str();
}

}  // namespace gnno
