#include <doctest.h>

#include <cmath>
#include <sstream>

#include "dataset.hpp"
#include "errors.hpp"
#include "negsampler.hpp"
#include "rng.hpp"
#include "trainer.hpp"

using namespace gnno;

namespace {

ModelParams unit_vector_params(size_t num_items, size_t dim) {
  ModelParams p;
  p.num_items = num_items;
  p.dim = dim;
  p.embeddings.assign(num_items * dim, 0.0);
  p.adam_m.assign(num_items * dim, 0.0);
  p.adam_v.assign(num_items * dim, 0.0);
  return p;
}

// loss recomputed through the public scoring path only
double loss_via_scores(const ModelParams& params, std::span<const uint32_t> prefix,
                       uint32_t target, std::span<const uint32_t> negatives,
                       Encoder encoder, LossReduction reduction) {
  const double pos = score(params, prefix, target, encoder);
  std::vector<double> negs;
  for (uint32_t n : negatives) negs.push_back(score(params, prefix, n, encoder));
  return bpr_loss(pos, negs, reduction);
}

SplitCorpus split_from_sequences(std::vector<std::vector<uint32_t>> train,
                                 size_t num_items) {
  SplitCorpus split;
  split.train = std::move(train);
  split.valid_target.assign(split.train.size(), -1);
  split.test_target.assign(split.train.size(), -1);
  split.num_items = num_items;
  return split;
}

}  // namespace

TEST_CASE("score with both encoders") {
  SUBCASE("LastItem on identical unit vectors") {
    auto p = unit_vector_params(3, 4);
    p.row(0)[0] = 1.0;  // emb(a) = e1
    p.row(2)[0] = 1.0;  // emb(x) = e1
    const std::vector<uint32_t> prefix = {0};
    CHECK(score(p, prefix, 2, Encoder::LastItem) == doctest::Approx(1.0));
  }
  SUBCASE("MeanPool cancellation") {
    auto p = unit_vector_params(4, 4);
    for (size_t d = 0; d < 4; ++d) {
      p.row(0)[d] = static_cast<double>(d) + 1.0;
      p.row(1)[d] = -(static_cast<double>(d) + 1.0);
      p.row(3)[d] = 0.7;
    }
    const std::vector<uint32_t> prefix = {0, 1};
    CHECK(score(p, prefix, 3, Encoder::MeanPool) == doctest::Approx(0.0));
  }
  SUBCASE("MeanPool equals hand-computed mean-then-dot") {
    Rng rng(5);
    auto p = unit_vector_params(6, 8);
    for (double& x : p.embeddings) x = rng.next_double() - 0.5;
    const std::vector<uint32_t> prefix = {1, 4, 2};
    double expected = 0.0;
    for (size_t d = 0; d < 8; ++d) {
      const double mean = (p.row(1)[d] + p.row(4)[d] + p.row(2)[d]) / 3.0;
      expected += mean * p.row(5)[d];
    }
    CHECK(score(p, prefix, 5, Encoder::MeanPool) ==
          doctest::Approx(expected).epsilon(1e-6));
  }
  SUBCASE("empty prefix rejected") {
    auto p = unit_vector_params(2, 2);
    CHECK_THROWS_AS(score(p, {}, 0, Encoder::MeanPool), DataError);
  }
}

TEST_CASE("bpr_loss stable softplus form") {
  const std::vector<double> one_neg = {0.0};
  CHECK(bpr_loss(0.0, one_neg) == doctest::Approx(std::log(2.0)));
  const std::vector<double> gap2 = {1.0};
  CHECK(bpr_loss(3.0, gap2) == doctest::Approx(std::log(1.0 + std::exp(-2.0))));
  const std::vector<double> far = {0.0};
  CHECK(bpr_loss(40.0, far) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(bpr_loss(-40.0, far) == doctest::Approx(40.0));

  SUBCASE("sum vs mean reduction") {
    const std::vector<double> negs = {0.0, 0.0};
    CHECK(bpr_loss(0.0, negs, LossReduction::Sum) ==
          doctest::Approx(2.0 * std::log(2.0)));
    CHECK(bpr_loss(0.0, negs, LossReduction::Mean) ==
          doctest::Approx(std::log(2.0)));
  }
  SUBCASE("loss is non-negative") {
    Rng rng(3);
    for (int t = 0; t < 100; ++t) {
      const std::vector<double> negs = {rng.next_double() * 10 - 5};
      CHECK(bpr_loss(rng.next_double() * 10 - 5, negs) >= 0.0);
    }
  }
}

TEST_CASE("analytic gradients match central finite differences") {
  Rng rng(19);
  for (int trial = 0; trial < 25; ++trial) {
    const size_t num_items = 5;
    const size_t dim = 3 + rng.next_below(4);
    auto params = unit_vector_params(num_items, dim);
    for (double& x : params.embeddings) x = rng.next_double() - 0.5;

    const Encoder encoder = trial % 2 == 0 ? Encoder::MeanPool : Encoder::LastItem;
    const LossReduction reduction =
        trial % 3 == 0 ? LossReduction::Mean : LossReduction::Sum;
    std::vector<uint32_t> prefix;
    const size_t plen = 1 + rng.next_below(4);
    for (size_t t = 0; t < plen; ++t) {
      prefix.push_back(static_cast<uint32_t>(rng.next_below(num_items)));
    }
    const uint32_t target = static_cast<uint32_t>(rng.next_below(num_items));
    std::vector<uint32_t> negatives;
    for (size_t t = 0; t < 1 + rng.next_below(4); ++t) {
      negatives.push_back(static_cast<uint32_t>(rng.next_below(num_items)));
    }

    std::vector<double> grad(num_items * dim, 0.0);
    std::vector<uint32_t> touched;
    accumulate_example_gradient(params, prefix, target, negatives, encoder,
                                reduction, 1.0, grad, touched);

    const double h = 1e-4;
    for (size_t idx = 0; idx < num_items * dim; ++idx) {
      auto perturbed = params;
      perturbed.embeddings[idx] += h;
      const double up = loss_via_scores(perturbed, prefix, target, negatives,
                                        encoder, reduction);
      perturbed.embeddings[idx] -= 2 * h;
      const double down = loss_via_scores(perturbed, prefix, target, negatives,
                                          encoder, reduction);
      const double numeric = (up - down) / (2 * h);
      const double denom = std::max({std::abs(numeric), std::abs(grad[idx]), 1e-6});
      CHECK(std::abs(numeric - grad[idx]) / denom <= 1e-3);
    }
  }
}

TEST_CASE("train_epoch example enumeration and determinism") {
  OverlapIndex index(3);
  index.finalize();

  TrainConfig config;
  config.epochs = 1;
  config.embedding_dim = 8;
  config.batch_size = 4;
  config.sampler = SamplerKind::Uniform;
  config.neg_hard = 1;
  config.neg_rand = 1;

  SUBCASE("sequence [a,b,c] yields 2 examples per epoch") {
    auto split = split_from_sequences({{0, 1, 2}}, 3);
    NegSampler sampler(index, config.seed);
    auto params = ModelParams::init(3, config.embedding_dim, config.seed);
    const auto stats = train_epoch(params, split, sampler, config, 0);
    CHECK(stats.examples == 2);
  }
  SUBCASE("same seed and config give bit-identical parameters") {
    auto split = split_from_sequences({{0, 1, 2}, {2, 0, 1, 2}}, 3);
    auto run = [&] {
      NegSampler sampler(index, config.seed);
      auto params = ModelParams::init(3, config.embedding_dim, config.seed);
      for (uint32_t e = 0; e < 3; ++e) {
        train_epoch(params, split, sampler, config, e);
      }
      return params.embeddings;
    };
    CHECK(run() == run());
  }
  SUBCASE("items never touched by training stay at initialization") {
    // sampler index covers only items 0 and 1, so rows 2 and 3 are never
    // visited as positives or negatives
    auto split = split_from_sequences({{0, 1, 0, 1}}, 4);
    OverlapIndex narrow(2);
    narrow.finalize();
    NegSampler narrow_sampler(narrow, config.seed);
    auto params = ModelParams::init(4, config.embedding_dim, config.seed);
    const auto initial = params;
    train_epoch(params, split, narrow_sampler, config, 0);
    bool touched_rows_moved = false;
    for (uint32_t r : {0u, 1u}) {
      for (size_t d = 0; d < params.dim; ++d) {
        if (params.row(r)[d] != initial.row(r)[d]) touched_rows_moved = true;
      }
    }
    CHECK(touched_rows_moved);
    for (uint32_t r : {2u, 3u}) {
      for (size_t d = 0; d < params.dim; ++d) {
        CHECK(params.row(r)[d] == initial.row(r)[d]);
      }
    }
  }
}

TEST_CASE("training reduces loss on a structured corpus") {
  // 20 items, 200 sequences with deterministic transitions i -> i+1
  std::vector<std::vector<uint32_t>> train;
  Rng rng(8);
  for (int s = 0; s < 200; ++s) {
    std::vector<uint32_t> seq;
    uint32_t item = static_cast<uint32_t>(rng.next_below(20));
    for (int t = 0; t < 10; ++t) {
      seq.push_back(item);
      item = (item + 1) % 20;
    }
    train.push_back(std::move(seq));
  }
  auto split = split_from_sequences(std::move(train), 20);

  const auto graph = build_witg(split.train, 20, {.window = 3});
  const auto index = build_overlap_index(graph);
  NegSampler sampler(index, 4);

  TrainConfig config;
  config.epochs = 30;
  config.embedding_dim = 16;
  config.batch_size = 64;
  config.learning_rate = 0.01;
  config.encoder = Encoder::LastItem;
  config.sampler = SamplerKind::Gnno;
  config.neg_hard = 2;
  config.neg_rand = 4;
  config.schedule.pace_c = 0.04;
  config.schedule.lambda_max = 0.5;

  auto params = ModelParams::init(20, config.embedding_dim, 4);
  double initial_loss = 0.0, final_loss = 0.0;
  for (uint32_t e = 0; e < config.epochs; ++e) {
    const auto stats = train_epoch(params, split, sampler, config, e);
    if (e == 0) initial_loss = stats.mean_loss;
    final_loss = stats.mean_loss;
  }
  CHECK(final_loss < 0.5 * initial_loss);
}

TEST_CASE("checkpoint round trip") {
  auto params = ModelParams::init(7, 5, 99);
  params.adam_step = 12;
  params.adam_m[3] = 0.25;
  params.adam_v[8] = 1.5;
  std::ostringstream out(std::ios::binary);
  save_checkpoint(params, "config-echo", out);

  std::istringstream in(out.str());
  std::string echo;
  const auto loaded = load_checkpoint(in, &echo);
  CHECK(echo == "config-echo");
  CHECK(loaded.num_items == 7);
  CHECK(loaded.dim == 5);
  CHECK(loaded.adam_step == 12);
  CHECK(loaded.embeddings == params.embeddings);
  CHECK(loaded.adam_m == params.adam_m);
  CHECK(loaded.adam_v == params.adam_v);

  SUBCASE("garbage rejected") {
    std::istringstream bad("not a checkpoint");
    CHECK_THROWS_AS(load_checkpoint(bad), DataError);
  }
}
