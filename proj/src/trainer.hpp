#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "negsampler.hpp"

namespace gnno {

enum class Encoder { MeanPool, LastItem };
enum class SamplerKind { Gnno, Uniform, Dns };
enum class LossReduction { Sum, Mean };

struct TrainConfig {
  uint32_t epochs = 30;
  uint32_t batch_size = 4096;
  double learning_rate = 1e-3;
  uint32_t embedding_dim = 64;
  uint32_t max_sequence_length = 50;  // most-recent prefix items kept
  uint64_t seed = 42;
  Encoder encoder = Encoder::MeanPool;
  LossReduction reduction = LossReduction::Sum;
  SamplerKind sampler = SamplerKind::Gnno;
  size_t neg_hard = 9;
  size_t neg_rand = 16;
  size_t dns_pool_size = 10;
  bool exclude_sequence_items = false;
  CurriculumSchedule schedule;
};

// Item embedding table plus Adam accumulators.
struct ModelParams {
  size_t num_items = 0;
  size_t dim = 0;
  std::vector<double> embeddings;  // row-major, num_items x dim
  std::vector<double> adam_m;
  std::vector<double> adam_v;
  uint64_t adam_step = 0;

  std::span<double> row(uint32_t i) {
    return {embeddings.data() + static_cast<size_t>(i) * dim, dim};
  }
  std::span<const double> row(uint32_t i) const {
    return {embeddings.data() + static_cast<size_t>(i) * dim, dim};
  }

  static ModelParams init(size_t num_items, size_t dim, uint64_t seed);
};

struct TrainingExample {
  uint32_t user = 0;
  std::span<const uint32_t> prefix;
  uint32_t target = 0;
};

// Encoded prefix representation: mean of prefix rows or the last row.
void encode_prefix(const ModelParams& params, std::span<const uint32_t> prefix,
                   Encoder encoder, std::span<double> out);
double score(const ModelParams& params, std::span<const uint32_t> prefix,
             uint32_t item, Encoder encoder);

// Sum (or mean) over negatives of softplus(neg - pos).
double bpr_loss(double pos_score, std::span<const double> neg_scores,
                LossReduction reduction = LossReduction::Sum);

// Adds the analytic gradient of one example's loss (scaled by
// example_weight) into the dense buffer `grad`, recording touched rows.
// Returns the example loss. Exposed so tests can check it against finite
// differences.
double accumulate_example_gradient(const ModelParams& params,
                                   std::span<const uint32_t> prefix,
                                   uint32_t target,
                                   std::span<const uint32_t> negatives,
                                   Encoder encoder, LossReduction reduction,
                                   double example_weight,
                                   std::vector<double>& grad,
                                   std::vector<uint32_t>& touched);

struct EpochStats {
  uint32_t epoch = 0;
  double mean_loss = 0.0;
  double lambda = 0.0;
  size_t examples = 0;
};

// One pass over all (prefix, target) pairs, mini-batched, Adam updates on
// touched rows. lambda is advanced from the schedule before sampling.
EpochStats train_epoch(ModelParams& params, const SplitCorpus& split,
                       NegSampler& sampler, const TrainConfig& config,
                       uint32_t epoch_index);

struct TrainResult {
  std::vector<EpochStats> history;
};

TrainResult train(ModelParams& params, const SplitCorpus& split,
                  NegSampler& sampler, const TrainConfig& config,
                  const std::function<void(uint32_t, const ModelParams&)>&
                      epoch_callback = {});

// Versioned binary checkpoint: embeddings + optimizer state + a config echo.
void save_checkpoint(const ModelParams& params, const std::string& config_echo,
                     std::ostream& out);
ModelParams load_checkpoint(std::istream& in, std::string* config_echo = nullptr);

}  // namespace gnno
