#include "trainer.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>

#include "errors.hpp"

namespace gnno {

namespace {

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

double softplus(double x) {
  // log(1 + e^x) without overflow
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

ModelParams ModelParams::init(size_t num_items, size_t dim, uint64_t seed) {
  ModelParams params;
  params.num_items = num_items;
  params.dim = dim;
  params.embeddings.resize(num_items * dim);
  params.adam_m.assign(num_items * dim, 0.0);
  params.adam_v.assign(num_items * dim, 0.0);
  Rng rng(mix_seed({seed, 0x696e6974ULL}));
  const double bound = 0.1 / std::sqrt(static_cast<double>(dim));
  for (double& x : params.embeddings) {
    x = (2.0 * rng.next_double() - 1.0) * bound;
  }
  return params;
}

void encode_prefix(const ModelParams& params, std::span<const uint32_t> prefix,
                   Encoder encoder, std::span<double> out) {
  if (prefix.empty()) throw DataError("cannot encode an empty prefix");
  if (encoder == Encoder::LastItem) {
    const auto last = params.row(prefix.back());
    std::copy(last.begin(), last.end(), out.begin());
    return;
  }
  std::fill(out.begin(), out.end(), 0.0);
  for (uint32_t item : prefix) {
    const auto row = params.row(item);
    for (size_t d = 0; d < params.dim; ++d) out[d] += row[d];
  }
  const double inv = 1.0 / static_cast<double>(prefix.size());
  for (double& x : out) x *= inv;
}

double score(const ModelParams& params, std::span<const uint32_t> prefix,
             uint32_t item, Encoder encoder) {
  std::vector<double> enc(params.dim);
  encode_prefix(params, prefix, encoder, enc);
  const auto row = params.row(item);
  double s = 0.0;
  for (size_t d = 0; d < params.dim; ++d) s += enc[d] * row[d];
  return s;
}

double bpr_loss(double pos_score, std::span<const double> neg_scores,
                LossReduction reduction) {
  double loss = 0.0;
  for (double neg : neg_scores) loss += softplus(neg - pos_score);
  if (reduction == LossReduction::Mean && !neg_scores.empty()) {
    loss /= static_cast<double>(neg_scores.size());
  }
  return loss;
}

double accumulate_example_gradient(const ModelParams& params,
                                   std::span<const uint32_t> prefix,
                                   uint32_t target,
                                   std::span<const uint32_t> negatives,
                                   Encoder encoder, LossReduction reduction,
                                   double example_weight,
                                   std::vector<double>& grad,
                                   std::vector<uint32_t>& touched) {
  const size_t dim = params.dim;
  std::vector<double> enc(dim);
  encode_prefix(params, prefix, encoder, enc);

  const auto target_row = params.row(target);
  double pos = 0.0;
  for (size_t d = 0; d < dim; ++d) pos += enc[d] * target_row[d];

  const double scale =
      example_weight * (reduction == LossReduction::Mean && !negatives.empty()
                            ? 1.0 / static_cast<double>(negatives.size())
                            : 1.0);

  double loss = 0.0;
  double sum_sig = 0.0;
  std::vector<double> grad_enc(dim, 0.0);
  for (uint32_t neg : negatives) {
    const auto neg_row = params.row(neg);
    double q = 0.0;
    for (size_t d = 0; d < dim; ++d) q += enc[d] * neg_row[d];
    loss += softplus(q - pos);
    const double s = sigmoid(q - pos);
    sum_sig += s;
    // dL/dq = scale * s
    double* gneg = grad.data() + static_cast<size_t>(neg) * dim;
    for (size_t d = 0; d < dim; ++d) {
      gneg[d] += scale * s * enc[d];
      grad_enc[d] += scale * s * neg_row[d];
    }
    touched.push_back(neg);
  }

  // dL/dpos = -scale * sum_sig
  double* gpos = grad.data() + static_cast<size_t>(target) * dim;
  for (size_t d = 0; d < dim; ++d) {
    gpos[d] -= scale * sum_sig * enc[d];
    grad_enc[d] -= scale * sum_sig * target_row[d];
  }
  touched.push_back(target);

  if (encoder == Encoder::LastItem) {
    double* glast = grad.data() + static_cast<size_t>(prefix.back()) * dim;
    for (size_t d = 0; d < dim; ++d) glast[d] += grad_enc[d];
    touched.push_back(prefix.back());
  } else {
    const double inv = 1.0 / static_cast<double>(prefix.size());
    for (uint32_t item : prefix) {
      double* gitem = grad.data() + static_cast<size_t>(item) * dim;
      for (size_t d = 0; d < dim; ++d) gitem[d] += inv * grad_enc[d];
      touched.push_back(item);
    }
  }

  if (reduction == LossReduction::Mean && !negatives.empty()) {
    loss /= static_cast<double>(negatives.size());
  }
  return loss;
}

namespace {

struct ExampleRef {
  uint32_t user;
  uint32_t t;  // target position within the train sequence
};

std::vector<ExampleRef> enumerate_examples(const SplitCorpus& split) {
  std::vector<ExampleRef> out;
  for (size_t u = 0; u < split.train.size(); ++u) {
    for (size_t t = 1; t < split.train[u].size(); ++t) {
      out.push_back({static_cast<uint32_t>(u), static_cast<uint32_t>(t)});
    }
  }
  return out;
}

void apply_adam(ModelParams& params, std::vector<double>& grad,
                std::vector<uint32_t>& touched, double lr) {
  ++params.adam_step;
  const double bc1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(params.adam_step));
  const double bc2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(params.adam_step));
  std::sort(touched.begin(), touched.end());
  touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
  for (uint32_t r : touched) {
    const size_t base = static_cast<size_t>(r) * params.dim;
    for (size_t d = 0; d < params.dim; ++d) {
      const double g = grad[base + d];
      double& m = params.adam_m[base + d];
      double& v = params.adam_v[base + d];
      m = kAdamBeta1 * m + (1.0 - kAdamBeta1) * g;
      v = kAdamBeta2 * v + (1.0 - kAdamBeta2) * g * g;
      const double update = lr * (m / bc1) / (std::sqrt(v / bc2) + kAdamEps);
      params.embeddings[base + d] -= update;
      if (!std::isfinite(params.embeddings[base + d])) {
        throw std::runtime_error("non-finite parameter after update (row " +
                                 std::to_string(r) + ")");
      }
      grad[base + d] = 0.0;
    }
  }
  touched.clear();
}

std::vector<uint32_t> draw_negatives(const NegSampler& sampler,
                                     const ModelParams& params,
                                     std::span<const uint32_t> prefix,
                                     uint32_t target, const TrainConfig& config,
                                     Rng& rng) {
  std::vector<uint32_t> negatives;
  switch (config.sampler) {
    case SamplerKind::Gnno: {
      negatives = sampler.sample_gnno(target, config.neg_hard, rng);
      const auto rand = sampler.sample_uniform(target, config.neg_rand, rng);
      negatives.insert(negatives.end(), rand.begin(), rand.end());
      break;
    }
    case SamplerKind::Uniform:
      negatives = sampler.sample_uniform(target, config.neg_hard + config.neg_rand, rng);
      break;
    case SamplerKind::Dns: {
      auto scorer = [&](uint32_t item) {
        return score(params, prefix, item, config.encoder);
      };
      negatives = sampler.sample_dns(target, config.neg_hard, config.dns_pool_size,
                                     scorer, rng);
      const auto rand = sampler.sample_uniform(target, config.neg_rand, rng);
      negatives.insert(negatives.end(), rand.begin(), rand.end());
      break;
    }
  }
  return negatives;
}

}  // namespace

EpochStats train_epoch(ModelParams& params, const SplitCorpus& split,
                       NegSampler& sampler, const TrainConfig& config,
                       uint32_t epoch_index) {
  const double lambda = lambda_at(config.schedule, epoch_index);
  sampler.set_lambda(lambda);

  std::vector<ExampleRef> examples = enumerate_examples(split);
  Rng shuffle_rng(mix_seed({config.seed, epoch_index, 0x73687566ULL}));
  for (size_t i = examples.size(); i > 1; --i) {
    std::swap(examples[i - 1], examples[shuffle_rng.next_below(i)]);
  }

  std::vector<double> grad(params.num_items * params.dim, 0.0);
  std::vector<uint32_t> touched;
  double total_loss = 0.0;
  size_t in_batch = 0;
  std::vector<double> batch_losses;  // per-example, flushed with the batch

  for (size_t ordinal = 0; ordinal < examples.size(); ++ordinal) {
    const auto [user, t] = examples[ordinal];
    const auto& seq = split.train[user];
    const size_t start = t > config.max_sequence_length ? t - config.max_sequence_length : 0;
    const std::span<const uint32_t> prefix(seq.data() + start, t - start);
    const uint32_t target = seq[t];

    Rng rng = sampler.stream_for(epoch_index, ordinal);
    std::vector<uint32_t> negatives =
        draw_negatives(sampler, params, prefix, target, config, rng);
    if (config.exclude_sequence_items) {
      std::vector<uint32_t> in_seq(seq.begin(), seq.end());
      std::sort(in_seq.begin(), in_seq.end());
      for (auto& neg : negatives) {
        size_t retries = 0;
        while (std::binary_search(in_seq.begin(), in_seq.end(), neg) &&
               retries++ < 100) {
          neg = sampler.sample_uniform(target, 1, rng)[0];
        }
      }
    }

    const double loss = accumulate_example_gradient(
        params, prefix, target, negatives, config.encoder, config.reduction,
        1.0, grad, touched);
    if (!std::isfinite(loss)) {
      throw std::runtime_error("non-finite loss at epoch " +
                               std::to_string(epoch_index) + ", example " +
                               std::to_string(ordinal));
    }
    total_loss += loss;
    ++in_batch;

    if (in_batch == config.batch_size || ordinal + 1 == examples.size()) {
      // gradients averaged over the batch
      const double inv = 1.0 / static_cast<double>(in_batch);
      for (uint32_t r : touched) {
        const size_t base = static_cast<size_t>(r) * params.dim;
        for (size_t d = 0; d < params.dim; ++d) grad[base + d] *= inv;
      }
      apply_adam(params, grad, touched, config.learning_rate);
      in_batch = 0;
    }
  }

  EpochStats stats;
  stats.epoch = epoch_index;
  stats.lambda = lambda;
  stats.examples = examples.size();
  stats.mean_loss = examples.empty() ? 0.0 : total_loss / static_cast<double>(examples.size());
  return stats;
}

TrainResult train(ModelParams& params, const SplitCorpus& split,
                  NegSampler& sampler, const TrainConfig& config,
                  const std::function<void(uint32_t, const ModelParams&)>& epoch_callback) {
  TrainResult result;
  if (epoch_callback) epoch_callback(0, params);
  for (uint32_t epoch = 0; epoch < config.epochs; ++epoch) {
    result.history.push_back(train_epoch(params, split, sampler, config, epoch));
    if (epoch_callback) epoch_callback(epoch + 1, params);
  }
  return result;
}

void save_checkpoint(const ModelParams& params, const std::string& config_echo,
                     std::ostream& out) {
  const char magic[8] = {'G', 'N', 'N', 'O', 'C', 'K', 'P', '1'};
  out.write(magic, 8);
  const uint64_t header[3] = {params.num_items, params.dim, params.adam_step};
  out.write(reinterpret_cast<const char*>(header), sizeof(header));
  const uint64_t echo_len = config_echo.size();
  out.write(reinterpret_cast<const char*>(&echo_len), sizeof(echo_len));
  out.write(config_echo.data(), static_cast<std::streamsize>(echo_len));
  auto write_vec = [&](const std::vector<double>& v) {
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
  };
  write_vec(params.embeddings);
  write_vec(params.adam_m);
  write_vec(params.adam_v);
}

ModelParams load_checkpoint(std::istream& in, std::string* config_echo) {
  char magic[8];
  in.read(magic, 8);
  if (!in || std::string(magic, 8) != "GNNOCKP1") {
    throw DataError("not a recognized checkpoint file");
  }
  uint64_t header[3];
  in.read(reinterpret_cast<char*>(header), sizeof(header));
  uint64_t echo_len = 0;
  in.read(reinterpret_cast<char*>(&echo_len), sizeof(echo_len));
  std::string echo(echo_len, '\0');
  in.read(echo.data(), static_cast<std::streamsize>(echo_len));
  if (config_echo) *config_echo = echo;

  ModelParams params;
  params.num_items = header[0];
  params.dim = header[1];
  params.adam_step = header[2];
  const size_t n = params.num_items * params.dim;
  params.embeddings.resize(n);
  params.adam_m.resize(n);
  params.adam_v.resize(n);
  auto read_vec = [&](std::vector<double>& v) {
    in.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
  };
  read_vec(params.embeddings);
  read_vec(params.adam_m);
  read_vec(params.adam_v);
  if (!in) throw DataError("truncated checkpoint file");
  return params;
}

}  // namespace gnno
