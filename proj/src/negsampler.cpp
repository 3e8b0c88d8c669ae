#include "negsampler.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"

namespace gnno {

double lambda_at(const CurriculumSchedule& schedule, uint64_t q) {
  if (schedule.pace_c < 0.0 || schedule.initial_b < 0.0) {
    throw UsageError("curriculum requires c >= 0 and b >= 0");
  }
  if (!(schedule.lambda_max > 0.0) || schedule.lambda_max > 1.0) {
    throw UsageError("lambda_max must lie in (0, 1]");
  }
  return std::min(schedule.pace_c * static_cast<double>(q) + schedule.initial_b,
                  schedule.lambda_max);
}

std::vector<double> TargetDistribution::dense_probabilities(size_t num_items) const {
  std::vector<double> p(num_items, 0.0);
  const double z = total_mass();
  for (size_t idx = 0; idx < overlap_items.size(); ++idx) {
    const double w = overlap_cumweight[idx] -
                     (idx > 0 ? overlap_cumweight[idx - 1] : 0.0);
    p[overlap_items[idx]] = w / z;
  }
  for (uint32_t j = 0; j < num_items; ++j) {
    if (p[j] == 0.0 && !std::binary_search(blocked.begin(), blocked.end(), j)) {
      p[j] = 1.0 / z;
    }
  }
  return p;
}

NegSampler::NegSampler(const OverlapIndex& index, uint64_t seed)
    : index_(index), seed_(seed), cache_(index.num_items()) {}

void NegSampler::set_lambda(double lambda) {
  if (lambda < 0.0 || lambda > 1.0) throw UsageError("lambda outside [0, 1]");
  if (lambda != lambda_) {
    lambda_ = lambda;
    std::fill(cache_.begin(), cache_.end(), std::nullopt);
  }
}

const TargetDistribution& NegSampler::distribution_for(uint32_t target) const {
  if (target >= index_.num_items()) throw DataError("target index out of range");
  auto& slot = cache_[target];
  if (slot) return *slot;

  TargetDistribution dist;
  dist.target = target;
  const auto stored = index_.overlaps(target);
  dist.blocked.reserve(stored.size() + 1);
  double mass = 0.0;
  for (const auto& [j, v] : stored) {
    dist.blocked.push_back(j);
    if (v > lambda_) continue;  // group-high exclusion is strict
    mass += std::exp(v);
    dist.overlap_items.push_back(j);
    dist.overlap_cumweight.push_back(mass);
  }
  dist.overlap_mass = mass;
  dist.blocked.push_back(target);
  std::sort(dist.blocked.begin(), dist.blocked.end());
  dist.zero_count = index_.num_items() - dist.blocked.size();

  if (dist.zero_count == 0 && dist.overlap_items.empty()) {
    throw DataError("empty sampling support for target " + std::to_string(target) +
                    ": lambda too small for a saturated overlap index");
  }
  slot = std::move(dist);
  return *slot;
}

std::vector<uint32_t> NegSampler::sample_gnno(uint32_t target, size_t n,
                                              Rng& rng) const {
  const TargetDistribution& dist = distribution_for(target);
  const size_t num_items = index_.num_items();
  const double total = dist.total_mass();

  // exact complement when rejection would thrash
  std::vector<uint32_t> complement;
  const bool use_complement = dist.blocked.size() > num_items / 2;
  if (use_complement) {
    complement.reserve(dist.zero_count);
    size_t b = 0;
    for (uint32_t j = 0; j < num_items; ++j) {
      while (b < dist.blocked.size() && dist.blocked[b] < j) ++b;
      if (b < dist.blocked.size() && dist.blocked[b] == j) continue;
      complement.push_back(j);
    }
  }

  std::vector<uint32_t> out;
  out.reserve(n);
  while (out.size() < n) {
    const double u = rng.next_double() * total;
    uint32_t drawn;
    if (u < dist.overlap_mass) {
      const auto it = std::upper_bound(dist.overlap_cumweight.begin(),
                                       dist.overlap_cumweight.end(), u);
      const size_t idx = std::min<size_t>(it - dist.overlap_cumweight.begin(),
                                          dist.overlap_items.size() - 1);
      drawn = dist.overlap_items[idx];
    } else if (use_complement) {
      drawn = complement[rng.next_below(complement.size())];
    } else {
      // rejection over the implicit zero-overlap remainder
      for (;;) {
        const uint32_t cand = static_cast<uint32_t>(rng.next_below(num_items));
        if (std::binary_search(dist.blocked.begin(), dist.blocked.end(), cand)) {
          continue;
        }
        drawn = cand;
        break;
      }
    }
    if (audit_enabled_) {
      ++audit_.hard_draws;
      if (drawn == target) ++audit_.self_violations;
      if (index_.value(target, drawn) > lambda_) ++audit_.lambda_violations;
    }
    out.push_back(drawn);
  }
  return out;
}

std::vector<uint32_t> NegSampler::sample_uniform(uint32_t target, size_t n,
                                                 Rng& rng) const {
  const size_t num_items = index_.num_items();
  if (num_items < 2) throw DataError("uniform sampling needs at least 2 items");
  std::vector<uint32_t> out;
  out.reserve(n);
  while (out.size() < n) {
    // draw over num_items - 1 and skip past the target
    uint32_t cand = static_cast<uint32_t>(rng.next_below(num_items - 1));
    if (cand >= target) ++cand;
    out.push_back(cand);
  }
  return out;
}

std::vector<uint32_t> NegSampler::sample_dns(
    uint32_t target, size_t n, size_t pool_size,
    const std::function<double(uint32_t)>& scorer, Rng& rng) const {
  if (pool_size < 1) throw UsageError("dns pool_size must be >= 1");
  std::vector<uint32_t> out;
  out.reserve(n);
  for (size_t draw = 0; draw < n; ++draw) {
    uint32_t best = 0;
    double best_score = 0.0;
    bool have = false;
    for (size_t p = 0; p < pool_size; ++p) {
      const auto pool = sample_uniform(target, 1, rng);
      const uint32_t cand = pool[0];
      const double s = scorer(cand);
      if (!have || s > best_score || (s == best_score && cand < best)) {
        best = cand;
        best_score = s;
        have = true;
      }
    }
    out.push_back(best);
  }
  return out;
}

NegativeBatch NegSampler::sample_batch(const std::vector<uint32_t>& targets,
                                       size_t n_hard, size_t n_rand,
                                       uint64_t step) const {
  NegativeBatch batch;
  batch.hard_negatives.resize(targets.size());
  batch.random_negatives.resize(targets.size());
  for (size_t ordinal = 0; ordinal < targets.size(); ++ordinal) {
    Rng rng = stream_for(step, ordinal);
    if (n_hard > 0) {
      batch.hard_negatives[ordinal] = sample_gnno(targets[ordinal], n_hard, rng);
    }
    if (n_rand > 0) {
      batch.random_negatives[ordinal] = sample_uniform(targets[ordinal], n_rand, rng);
    }
  }
  return batch;
}

}  // namespace gnno
