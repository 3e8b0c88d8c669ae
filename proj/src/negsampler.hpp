#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "overlap.hpp"
#include "rng.hpp"

namespace gnno {

enum class StepUnit { Epoch, Batch };

// Linear hardness pacing lambda(q) = min(c*q + b, lambda_max).
struct CurriculumSchedule {
  double pace_c = 0.04;
  double initial_b = 0.0;
  double lambda_max = 0.5;
  StepUnit step_unit = StepUnit::Epoch;
  uint32_t max_step = 200;
};

double lambda_at(const CurriculumSchedule& schedule, uint64_t q);

// Sampling distribution for one target, decomposed into the sparse stored-
// overlap component (weights e^J, J <= lambda) and the implicit zero-overlap
// remainder (weight e^0 = 1 each). Items with J > lambda are excluded.
struct TargetDistribution {
  uint32_t target = 0;
  std::vector<uint32_t> overlap_items;    // sorted, J in (0, lambda]
  std::vector<double> overlap_cumweight;  // prefix sums of e^J
  std::vector<uint32_t> blocked;          // target + every stored-overlap item, sorted
  uint64_t zero_count = 0;                // items carrying weight e^0
  double overlap_mass = 0.0;

  double total_mass() const {
    return overlap_mass + static_cast<double>(zero_count);
  }
  // Closed-form dense probability vector; test/audit path.
  std::vector<double> dense_probabilities(size_t num_items) const;
};

struct NegativeBatch {
  std::vector<std::vector<uint32_t>> hard_negatives;    // per target
  std::vector<std::vector<uint32_t>> random_negatives;  // per target
};

// Counters for the exclusion-soundness audit; checked against the overlap
// index on every hard draw when enabled.
struct SamplerAudit {
  uint64_t hard_draws = 0;
  uint64_t lambda_violations = 0;
  uint64_t self_violations = 0;
};

class NegSampler {
 public:
  NegSampler(const OverlapIndex& index, uint64_t seed);

  void set_lambda(double lambda);
  double current_lambda() const { return lambda_; }
  size_t num_items() const { return index_.num_items(); }

  const TargetDistribution& distribution_for(uint32_t target) const;

  std::vector<uint32_t> sample_gnno(uint32_t target, size_t n, Rng& rng) const;
  std::vector<uint32_t> sample_uniform(uint32_t target, size_t n, Rng& rng) const;
  // Draws pool_size uniform candidates per output and keeps the best-scored;
  // ties go to the smallest index.
  std::vector<uint32_t> sample_dns(uint32_t target, size_t n, size_t pool_size,
                                   const std::function<double(uint32_t)>& scorer,
                                   Rng& rng) const;

  // Per-target streams derived from (seed, step, target ordinal): batch
  // results are deterministic and independent of traversal parallelism.
  NegativeBatch sample_batch(const std::vector<uint32_t>& targets, size_t n_hard,
                             size_t n_rand, uint64_t step) const;

  Rng stream_for(uint64_t step, uint64_t ordinal) const {
    return Rng(mix_seed({seed_, step, ordinal}));
  }

  void enable_audit(bool on) { audit_enabled_ = on; }
  const SamplerAudit& audit() const { return audit_; }

 private:
  const OverlapIndex& index_;
  uint64_t seed_;
  double lambda_ = 0.0;
  bool audit_enabled_ = false;
  mutable SamplerAudit audit_;
  // distributions depend only on (lambda, target); rebuilt when lambda moves
  mutable std::vector<std::optional<TargetDistribution>> cache_;
};

}  // namespace gnno
