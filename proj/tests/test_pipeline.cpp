#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "config.hpp"
#include "errors.hpp"
#include "pipeline.hpp"
#include "synth.hpp"

using namespace gnno;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("gnno_test_" + tag);
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str() const { return path.string(); }
};

ExperimentConfig tiny_synth_config(const std::string& out_dir) {
  ExperimentConfig config;
  config.use_synth = true;
  config.synth = {.num_items = 30,
                  .num_blocks = 3,
                  .num_users = 60,
                  .sequence_length = 8,
                  .stay_prob = 0.85,
                  .seed = 11};
  config.kcore = 2;
  config.train.epochs = 2;
  config.train.embedding_dim = 8;
  config.train.batch_size = 64;
  config.train.neg_hard = 2;
  config.train.neg_rand = 2;
  // tiny dense graphs have no zero-overlap pairs; start the curriculum open
  config.train.schedule.initial_b = 1.0;
  config.eval.candidate_set_size = 20;
  config.eval.k_values = {5};
  config.analysis.max_pairs_per_group = 200;
  config.analysis.bins = 10;
  config.out_dir = out_dir;
  return config;
}

}  // namespace

TEST_CASE("config keys, presets, and overrides") {
  ExperimentConfig config;
  SUBCASE("defaults reflect the reference setup") {
    CHECK(config.witg.window == 3);
    CHECK(config.train.embedding_dim == 64);
    CHECK(config.train.epochs == 30);
    CHECK(config.eval.candidate_set_size == 1000);
    CHECK(config.kcore == 5);
  }
  SUBCASE("preset profiles") {
    config.apply_preset("beauty");
    CHECK(config.train.neg_hard == 9);
    CHECK(config.train.neg_rand == 16);
    CHECK(config.train.schedule.pace_c == doctest::Approx(0.04));
    CHECK(config.train.schedule.lambda_max == doctest::Approx(0.5));
    config.apply_preset("toys");
    CHECK(config.train.neg_hard == 2);
    CHECK(config.train.schedule.lambda_max == doctest::Approx(0.2));
    config.apply_preset("phones");
    CHECK(config.train.neg_rand == 10);
    CHECK(config.train.schedule.pace_c == doctest::Approx(0.01));
    CHECK_THROWS_AS(config.apply_preset("nope"), UsageError);
  }
  SUBCASE("set covers typed keys and validates values") {
    config.set("graph.window", "5");
    CHECK(config.witg.window == 5);
    config.set("sampler.kind", "dns");
    CHECK(config.train.sampler == SamplerKind::Dns);
    config.set("train.encoder", "last_item");
    CHECK(config.train.encoder == Encoder::LastItem);
    config.set("eval.k_values", "1,5,10");
    CHECK(config.eval.k_values == std::vector<uint32_t>{1, 5, 10});
    CHECK_THROWS_AS(config.set("graph.window", "abc"), UsageError);
    CHECK_THROWS_AS(config.set("no.such.key", "1"), UsageError);
    CHECK_THROWS_AS(config.set("train.encoder", "transformer"), UsageError);
  }
  SUBCASE("seed fans out to component seeds") {
    config.set("seed", "123");
    CHECK(config.seed == 123);
    CHECK(config.train.seed == 123);
    CHECK(config.eval.seed == 123);
    CHECK(config.analysis.seed == 123);
    CHECK(config.synth.seed == 123);
  }
  SUBCASE("apply_overrides requires key=value") {
    config.apply_overrides({"train.epochs=7", "seed=9"});
    CHECK(config.train.epochs == 7);
    CHECK(config.seed == 9);
    CHECK_THROWS_AS(config.apply_overrides({"train.epochs"}), UsageError);
  }
  SUBCASE("hash is stable and sensitive") {
    ExperimentConfig other;
    CHECK(config.config_hash() == other.config_hash());
    other.set("train.epochs", "31");
    CHECK(config.config_hash() != other.config_hash());
    CHECK(config.config_hash_hex().size() == 16);
  }
  SUBCASE("snapshot epochs default to start, midpoint, end") {
    config.set("train.epochs", "30");
    CHECK(config.snapshot_epochs() == std::vector<uint32_t>{0, 15, 30});
    config.set("analysis.epochs", "4,0,4");
    CHECK(config.snapshot_epochs() == std::vector<uint32_t>{0, 4});
  }
}

TEST_CASE("config file parsing") {
  TempDir dir("config");
  const auto path = (dir.path / "exp.conf").string();
  {
    std::ofstream out(path);
    out << "# comment line\n"
        << "train.epochs = 12\n"
        << "seed=77   # trailing comment\n"
        << "\n"
        << "preset=toys\n";
  }
  const auto config = ExperimentConfig::from_file(path);
  CHECK(config.train.epochs == 12);
  CHECK(config.seed == 77);
  CHECK(config.train.neg_hard == 2);

  SUBCASE("missing file and malformed lines rejected") {
    CHECK_THROWS_AS(ExperimentConfig::from_file((dir.path / "nope").string()),
                    UsageError);
    std::ofstream bad((dir.path / "bad.conf").string());
    bad << "not a pair\n";
    bad.close();
    CHECK_THROWS_AS(ExperimentConfig::from_file((dir.path / "bad.conf").string()),
                    UsageError);
  }
}

TEST_CASE("stage and sampler name parsing") {
  CHECK(parse_stages("all").size() == 6);
  const auto subset = parse_stages("train,ingest");
  REQUIRE(subset.size() == 2);
  CHECK(subset[0] == Stage::Ingest);  // reordered to pipeline order
  CHECK(subset[1] == Stage::Train);
  CHECK_THROWS_AS(parse_stages("bogus"), UsageError);

  for (SamplerKind kind : {SamplerKind::Gnno, SamplerKind::Uniform, SamplerKind::Dns}) {
    CHECK(sampler_from_name(sampler_name(kind)) == kind);
  }
  CHECK_THROWS_AS(sampler_from_name("hard"), UsageError);
}

TEST_CASE("synthetic block corpus") {
  SynthConfig config{.num_items = 40,
                     .num_blocks = 4,
                     .num_users = 25,
                     .sequence_length = 12,
                     .stay_prob = 0.9,
                     .seed = 5};
  const auto records = generate_block_corpus(config);
  CHECK(records.size() == 25u * 12u);

  SUBCASE("tokens, timestamps, and item range") {
    std::map<std::string, int64_t> last_ts;
    for (const auto& r : records) {
      CHECK(r.user.rfind("u", 0) == 0);
      REQUIRE(r.item.rfind("i", 0) == 0);
      const int id = std::stoi(r.item.substr(1));
      CHECK(id >= 0);
      CHECK(id < 40);
      if (last_ts.count(r.user)) CHECK(r.timestamp > last_ts[r.user]);
      last_ts[r.user] = r.timestamp;
    }
    CHECK(last_ts.size() == 25);
  }
  SUBCASE("stay probability keeps most transitions within a block") {
    // block of item id: id / (num_items / num_blocks)
    size_t same = 0, total = 0;
    std::map<std::string, int> prev;
    for (const auto& r : records) {
      const int block = std::stoi(r.item.substr(1)) / 10;
      if (prev.count(r.user)) {
        ++total;
        if (block == prev[r.user]) ++same;
      }
      prev[r.user] = block;
    }
    CHECK(static_cast<double>(same) / static_cast<double>(total) > 0.75);
  }
  SUBCASE("deterministic in the seed") {
    const auto again = generate_block_corpus(config);
    REQUIRE(again.size() == records.size());
    for (size_t r = 0; r < records.size(); ++r) {
      CHECK(again[r].user == records[r].user);
      CHECK(again[r].item == records[r].item);
      CHECK(again[r].timestamp == records[r].timestamp);
    }
    SynthConfig other = config;
    other.seed = 6;
    const auto different = generate_block_corpus(other);
    bool any_diff = false;
    for (size_t r = 0; r < records.size(); ++r) {
      if (different[r].item != records[r].item) any_diff = true;
    }
    CHECK(any_diff);
  }
}

TEST_CASE("full pipeline run on a tiny synthetic corpus") {
  TempDir dir("pipeline");
  auto config = tiny_synth_config(dir.str());
  Pipeline pipeline(config);
  pipeline.run(parse_stages("all"), false);

  const std::vector<std::string> artifacts = {
      "item_vocab.tsv",    "sequences.tsv",         "graph.tsv",
      "overlap.tsv",       "checkpoint.bin",        "train_log.jsonl",
      "eval.json",         "eval.csv",              "analysis_hist.csv",
      "analysis_summary.json"};
  for (const auto& name : artifacts) {
    CHECK(fs::exists(pipeline.artifact_path(name)));
  }
  for (const char* stage : {"ingest", "graph", "overlap", "train", "eval", "analyze"}) {
    CHECK(fs::exists(pipeline.artifact_path(std::string("manifest_") + stage + ".json")));
  }
  // snapshots for epochs 0, 1, 2
  for (uint32_t e : config.snapshot_epochs()) {
    CHECK(fs::exists(
        pipeline.artifact_path("snapshot_epoch_" + std::to_string(e) + ".bin")));
  }

  SUBCASE("second run skips completed stages and leaves artifacts intact") {
    const auto before = fs::last_write_time(pipeline.artifact_path("checkpoint.bin"));
    pipeline.run(parse_stages("all"), false);
    CHECK(fs::last_write_time(pipeline.artifact_path("checkpoint.bin")) == before);
  }
  SUBCASE("changed config is an error without force") {
    auto changed = config;
    changed.set("train.epochs", "3");
    Pipeline other(changed);
    CHECK_THROWS_AS(other.run(parse_stages("train"), false), DataError);
    other.run(parse_stages("train"), true);  // force rebuilds
    CHECK(fs::exists(other.artifact_path("checkpoint.bin")));
  }
  SUBCASE("eval json echoes the config hash") {
    std::ifstream in(pipeline.artifact_path("eval.json"));
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    CHECK(text.find(config.config_hash_hex()) != std::string::npos);
  }
}

TEST_CASE("stages demand their inputs") {
  TempDir dir("prereq");
  auto config = tiny_synth_config(dir.str());
  Pipeline pipeline(config);
  CHECK_THROWS_AS(pipeline.run({Stage::Graph}, false), DataError);
  CHECK_THROWS_AS(pipeline.run({Stage::Train}, false), DataError);
}

TEST_CASE("compare_samplers writes a summary table") {
  TempDir dir("compare");
  auto config = tiny_synth_config(dir.str());
  Pipeline pipeline(config);
  const auto table = (dir.path / "compare.csv").string();
  pipeline.compare_samplers({SamplerKind::Uniform, SamplerKind::Gnno}, 2, table);

  REQUIRE(fs::exists(table));
  std::ifstream in(table);
  std::string header;
  REQUIRE(std::getline(in, header));
  CHECK(header.rfind("sampler", 0) == 0);
  CHECK(header.find("NDCG@5") != std::string::npos);
  std::set<std::string> rows;
  std::string line;
  while (std::getline(in, line)) {
    rows.insert(line.substr(0, line.find(',')));
  }
  CHECK(rows == std::set<std::string>{"uniform", "gnno"});
  CHECK(fs::exists(table + ".json"));

  SUBCASE("argument validation") {
    CHECK_THROWS_AS(pipeline.compare_samplers({}, 1, table), UsageError);
    CHECK_THROWS_AS(pipeline.compare_samplers({SamplerKind::Uniform}, 0, table),
                    UsageError);
  }
}
