#include "pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "analysis.hpp"
#include "dataset.hpp"
#include "errors.hpp"
#include "eval.hpp"
#include "negsampler.hpp"
#include "overlap.hpp"
#include "synth.hpp"
#include "trainer.hpp"
#include "witg.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace gnno {

namespace {

constexpr Stage kStageOrder[] = {Stage::Ingest, Stage::Graph, Stage::Overlap,
                                 Stage::Train, Stage::Eval, Stage::Analyze};

std::string file_hash_hex(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "' for hashing");
  uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    h = fnv1a(buf, static_cast<size_t>(in.gcount()), h);
  }
  return hex64(h);
}

struct StageOutputs {
  std::vector<std::string> inputs;   // artifact names consumed
  std::vector<std::string> outputs;  // artifact names produced
};

StageOutputs stage_files(Stage stage) {
  switch (stage) {
    case Stage::Ingest:
      return {{}, {"item_vocab.tsv", "sequences.tsv"}};
    case Stage::Graph:
      return {{"item_vocab.tsv", "sequences.tsv"}, {"graph.tsv"}};
    case Stage::Overlap:
      return {{"graph.tsv", "item_vocab.tsv"}, {"overlap.tsv"}};
    case Stage::Train:
      return {{"item_vocab.tsv", "sequences.tsv", "overlap.tsv"},
              {"checkpoint.bin", "train_log.jsonl"}};
    case Stage::Eval:
      return {{"item_vocab.tsv", "sequences.tsv", "checkpoint.bin"},
              {"eval.json", "eval.csv"}};
    case Stage::Analyze:
      return {{"overlap.tsv", "checkpoint.bin"},
              {"analysis_hist.csv", "analysis_summary.json"}};
  }
  return {};
}

Stage producer_of(const std::string& artifact) {
  for (Stage stage : kStageOrder) {
    const auto files = stage_files(stage);
    if (std::find(files.outputs.begin(), files.outputs.end(), artifact) !=
        files.outputs.end()) {
      return stage;
    }
  }
  throw std::runtime_error("no producer for artifact " + artifact);
}

}  // namespace

const char* stage_name(Stage stage) {
  switch (stage) {
    case Stage::Ingest: return "ingest";
    case Stage::Graph: return "graph";
    case Stage::Overlap: return "overlap";
    case Stage::Train: return "train";
    case Stage::Eval: return "eval";
    case Stage::Analyze: return "analyze";
  }
  return "?";
}

std::vector<Stage> parse_stages(const std::string& csv) {
  if (csv == "all" || csv.empty()) {
    return {kStageOrder, kStageOrder + std::size(kStageOrder)};
  }
  std::vector<Stage> out;
  std::istringstream ss(csv);
  std::string part;
  while (std::getline(ss, part, ',')) {
    bool found = false;
    for (Stage stage : kStageOrder) {
      if (part == stage_name(stage)) {
        out.push_back(stage);
        found = true;
        break;
      }
    }
    if (!found) throw UsageError("unknown stage '" + part + "'");
  }
  // run in pipeline order regardless of how they were listed
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  if (out.empty()) throw UsageError("no stages requested");
  return out;
}

const char* sampler_name(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::Gnno: return "gnno";
    case SamplerKind::Uniform: return "uniform";
    case SamplerKind::Dns: return "dns";
  }
  return "?";
}

SamplerKind sampler_from_name(const std::string& name) {
  if (name == "gnno") return SamplerKind::Gnno;
  if (name == "uniform") return SamplerKind::Uniform;
  if (name == "dns") return SamplerKind::Dns;
  throw UsageError("unknown sampler '" + name + "'");
}

Pipeline::Pipeline(ExperimentConfig config) : config_(std::move(config)) {}

std::string Pipeline::artifact_path(const std::string& name) const {
  return (fs::path(config_.out_dir) / name).string();
}

bool Pipeline::stage_complete(Stage stage) const {
  const std::string manifest =
      artifact_path(std::string("manifest_") + stage_name(stage) + ".json");
  if (!fs::exists(manifest)) return false;
  std::ifstream in(manifest);
  json j;
  try {
    in >> j;
  } catch (const json::exception&) {
    return false;
  }
  if (j.value("config_hash", "") != config_.config_hash_hex()) return false;
  for (const auto& out : stage_files(stage).outputs) {
    if (!fs::exists(artifact_path(out))) return false;
  }
  return true;
}

void Pipeline::require_artifact(const std::string& name, Stage) const {
  if (!fs::exists(artifact_path(name))) {
    throw DataError("missing artifact '" + name + "': run stage '" +
                    stage_name(producer_of(name)) + "' first");
  }
}

void Pipeline::write_manifest(Stage stage, const std::vector<std::string>& inputs,
                              const std::vector<std::string>& outputs,
                              double seconds) {
  json j;
  j["stage"] = stage_name(stage);
  j["config_hash"] = config_.config_hash_hex();
  j["seed"] = config_.seed;
  j["seconds"] = seconds;
  json in_hashes = json::object();
  for (const auto& name : inputs) in_hashes[name] = file_hash_hex(artifact_path(name));
  j["inputs"] = in_hashes;
  j["outputs"] = outputs;
  std::ofstream out(
      artifact_path(std::string("manifest_") + stage_name(stage) + ".json"));
  out << j.dump(2) << '\n';
}

void Pipeline::run(const std::vector<Stage>& stages, bool force) {
  fs::create_directories(config_.out_dir);
  for (Stage stage : stages) {
    const std::string manifest =
        artifact_path(std::string("manifest_") + stage_name(stage) + ".json");
    if (!force && fs::exists(manifest)) {
      std::ifstream in(manifest);
      json j;
      bool parsed = true;
      try {
        in >> j;
      } catch (const json::exception&) {
        parsed = false;
      }
      if (parsed && j.value("config_hash", "") != config_.config_hash_hex()) {
        throw DataError(std::string("stage '") + stage_name(stage) +
                        "' has cached artifacts from a different config; "
                        "rerun with --force to overwrite");
      }
    }
    if (!force && stage_complete(stage)) {
      std::cerr << "[pipeline] " << stage_name(stage) << ": up to date, skipping\n";
      continue;
    }
    run_stage(stage, force);
  }
}

void Pipeline::run_stage(Stage stage, bool) {
  for (const auto& input : stage_files(stage).inputs) {
    require_artifact(input, stage);
  }
  const auto start = std::chrono::steady_clock::now();
  switch (stage) {
    case Stage::Ingest: do_ingest(); break;
    case Stage::Graph: do_graph(); break;
    case Stage::Overlap: do_overlap(); break;
    case Stage::Train: do_train(); break;
    case Stage::Eval: do_eval(); break;
    case Stage::Analyze: do_analyze(); break;
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const auto files = stage_files(stage);
  write_manifest(stage, files.inputs, files.outputs, seconds);
  std::cerr << "[pipeline] " << stage_name(stage) << ": done in " << seconds << "s\n";
}

namespace {

InteractionCorpus load_corpus_artifacts(const Pipeline& pipeline) {
  std::ifstream vocab(pipeline.artifact_path("item_vocab.tsv"));
  std::ifstream seqs(pipeline.artifact_path("sequences.tsv"));
  if (!vocab || !seqs) throw DataError("corpus artifacts missing or unreadable");
  return load_corpus(vocab, seqs);
}

}  // namespace

void Pipeline::do_ingest() {
  std::vector<InteractionRecord> records;
  if (config_.use_synth) {
    records = generate_block_corpus(config_.synth);
  } else {
    if (config_.input_path.empty()) {
      throw UsageError("data.input is required unless data.synthetic=true");
    }
    std::ifstream in(config_.input_path);
    if (!in) throw DataError("cannot open input '" + config_.input_path + "'");
    ParseOptions opts;
    opts.delimiter = config_.delimiter;
    opts.skip_header = config_.has_header;
    ParseResult parsed = parse_log(in, opts);
    if (!parsed.issues.empty()) {
      std::ofstream report(artifact_path("ingest_issues.log"));
      for (const auto& issue : parsed.issues) {
        report << "line " << issue.line_number << ": " << issue.message << '\n';
      }
      std::cerr << "[ingest] " << parsed.issues.size()
                << " malformed lines, see ingest_issues.log\n";
    }
    records = std::move(parsed.records);
  }

  const KcoreResult filtered = kcore_filter(records, config_.kcore);
  if (filtered.emptied || filtered.records.empty()) {
    throw DataError("no interactions survive " + std::to_string(config_.kcore) +
                    "-core filtering");
  }
  const InteractionCorpus corpus = build_corpus(filtered.records);

  std::ofstream vocab(artifact_path("item_vocab.tsv"));
  save_vocab(corpus, vocab);
  std::ofstream seqs(artifact_path("sequences.tsv"));
  save_sequences(corpus, seqs);
  std::cerr << "[ingest] " << corpus.num_users() << " users, " << corpus.num_items()
            << " items, " << filtered.records.size() << " interactions\n";
}

void Pipeline::do_graph() {
  const InteractionCorpus corpus = load_corpus_artifacts(*this);
  const SplitCorpus split = leave_one_out_split(corpus);
  const TransitionGraph graph = build_witg(split.train, corpus.num_items(), config_.witg);
  std::ofstream out(artifact_path("graph.tsv"));
  serialize_graph(graph, out);
  std::cerr << "[graph] " << graph.num_nodes() << " nodes, " << graph.num_edges()
            << " edges (window " << config_.witg.window << ")\n";
}

void Pipeline::do_overlap() {
  const InteractionCorpus corpus = load_corpus_artifacts(*this);
  std::ifstream gin(artifact_path("graph.tsv"));
  const TransitionGraph graph = deserialize_graph(gin, corpus.num_items());

  size_t pivot_cost = 0;
  for (uint32_t i = 0; i < graph.num_nodes(); ++i) {
    pivot_cost += graph.degree(i) * graph.degree(i);
  }
  std::cerr << "[overlap] pivot enumeration cost (sum of degree^2): "
            << pivot_cost << "\n";

  const OverlapIndex index =
      build_overlap_index(graph, config_.overlap_min_edge_weight);
  std::ofstream out(artifact_path("overlap.tsv"));
  serialize_overlap_index(index, out);
  std::cerr << "[overlap] " << index.pair_count() << " overlapping pairs\n";
}

void Pipeline::do_train() {
  const InteractionCorpus corpus = load_corpus_artifacts(*this);
  const SplitCorpus split = leave_one_out_split(corpus);
  std::ifstream oin(artifact_path("overlap.tsv"));
  const OverlapIndex index = deserialize_overlap_index(oin, corpus.num_items());

  NegSampler sampler(index, config_.train.seed);
  ModelParams params =
      ModelParams::init(corpus.num_items(), config_.train.embedding_dim,
                        config_.train.seed);

  const auto snapshots = config_.snapshot_epochs();
  std::ofstream log(artifact_path("train_log.jsonl"));
  auto callback = [&](uint32_t epoch, const ModelParams& p) {
    if (std::find(snapshots.begin(), snapshots.end(), epoch) != snapshots.end()) {
      std::ofstream snap(artifact_path("snapshot_epoch_" + std::to_string(epoch) + ".bin"),
                         std::ios::binary);
      save_checkpoint(p, config_.canonical(), snap);
    }
  };

  TrainConfig train_config = config_.train;
  for (uint32_t epoch = 0; epoch < train_config.epochs; ++epoch) {
    if (epoch == 0) callback(0, params);
    const EpochStats stats = train_epoch(params, split, sampler, train_config, epoch);
    callback(epoch + 1, params);
    json j;
    j["epoch"] = stats.epoch;
    j["mean_loss"] = stats.mean_loss;
    j["lambda"] = stats.lambda;
    j["examples"] = stats.examples;
    log << j.dump() << '\n';
  }

  std::ofstream ckpt(artifact_path("checkpoint.bin"), std::ios::binary);
  save_checkpoint(params, config_.canonical(), ckpt);
  std::cerr << "[train] " << train_config.epochs << " epochs ("
            << sampler_name(train_config.sampler) << " sampler)\n";
}

void Pipeline::do_eval() {
  const InteractionCorpus corpus = load_corpus_artifacts(*this);
  const SplitCorpus split = leave_one_out_split(corpus);
  std::ifstream ckpt(artifact_path("checkpoint.bin"), std::ios::binary);
  const ModelParams params = load_checkpoint(ckpt);

  EvalProtocol protocol = config_.eval;
  protocol.max_prefix_length = config_.train.max_sequence_length;
  EvalReport report = evaluate(params, split, protocol, config_.train.encoder);
  report.config_echo = config_.config_hash_hex();

  std::ofstream jout(artifact_path("eval.json"));
  jout << report.to_json();
  std::ofstream cout_(artifact_path("eval.csv"));
  cout_ << report.csv_header() << '\n'
        << report.csv_row(sampler_name(config_.train.sampler)) << '\n';
  std::cerr << "[eval] " << report.user_count << " users";
  for (const auto& [key, value] : report.metrics) std::cerr << ", " << key << "=" << value;
  std::cerr << '\n';
}

void Pipeline::do_analyze() {
  const InteractionCorpus corpus = load_corpus_artifacts(*this);
  std::ifstream oin(artifact_path("overlap.tsv"));
  const OverlapIndex index = deserialize_overlap_index(oin, corpus.num_items());

  const auto snapshots = config_.snapshot_epochs();
  std::ofstream csv(artifact_path("analysis_hist.csv"));
  json summary;
  std::vector<std::vector<GroupHistogram>> all;
  bool header = true;
  for (uint32_t epoch : snapshots) {
    const std::string snap_path =
        artifact_path("snapshot_epoch_" + std::to_string(epoch) + ".bin");
    if (!fs::exists(snap_path)) {
      throw DataError("missing snapshot for epoch " + std::to_string(epoch) +
                      ": run stage 'train' first");
    }
    std::ifstream snap(snap_path, std::ios::binary);
    const ModelParams params = load_checkpoint(snap);
    auto hists = snapshot_distributions(params, index, epoch, config_.analysis);
    write_histogram_csv(hists, csv, header);
    header = false;
    all.push_back(std::move(hists));
  }

  for (size_t e = 0; e < all.size(); ++e) {
    for (size_t gidx = 0; gidx < all[e].size(); ++gidx) {
      const auto& hist = all[e][gidx];
      json g;
      g["epoch"] = hist.epoch;
      g["group"] = group_name(hist.group);
      g["pair_count"] = hist.pair_count;
      g["mean"] = hist.mean;
      g["stddev"] = hist.stddev;
      if (e > 0 && !hist.similarities.empty() &&
          !all[0][gidx].similarities.empty()) {
        g["wasserstein_to_epoch0"] =
            wasserstein1(all[0][gidx].similarities, hist.similarities);
      }
      summary["groups"].push_back(g);
    }
  }
  summary["seed"] = config_.seed;
  std::ofstream jout(artifact_path("analysis_summary.json"));
  jout << summary.dump(2) << '\n';
  std::cerr << "[analyze] " << snapshots.size() << " snapshots\n";
}

void Pipeline::compare_samplers(const std::vector<SamplerKind>& samplers,
                                int num_seeds, const std::string& out_path) {
  if (samplers.empty()) throw UsageError("compare needs at least one sampler");
  if (num_seeds < 1) throw UsageError("compare needs at least one seed");

  // shared corpus/graph/overlap artifacts
  run({Stage::Ingest, Stage::Graph, Stage::Overlap}, false);
  const InteractionCorpus corpus = load_corpus_artifacts(*this);
  const SplitCorpus split = leave_one_out_split(corpus);
  std::ifstream oin(artifact_path("overlap.tsv"));
  const OverlapIndex index = deserialize_overlap_index(oin, corpus.num_items());

  struct Run {
    SamplerKind sampler;
    uint64_t seed;
    std::map<std::string, double> metrics;
  };
  std::vector<Run> runs;
  for (SamplerKind kind : samplers) {
    for (int s = 0; s < num_seeds; ++s) {
      const uint64_t seed = config_.seed + static_cast<uint64_t>(s);
      TrainConfig train_config = config_.train;
      train_config.sampler = kind;
      train_config.seed = seed;
      NegSampler sampler(index, seed);
      ModelParams params = ModelParams::init(
          corpus.num_items(), train_config.embedding_dim, seed);
      train(params, split, sampler, train_config);

      EvalProtocol protocol = config_.eval;
      protocol.seed = seed;
      protocol.max_prefix_length = train_config.max_sequence_length;
      const EvalReport report = evaluate(params, split, protocol, train_config.encoder);
      runs.push_back({kind, seed, report.metrics});
      std::cerr << "[compare] " << sampler_name(kind) << " seed " << seed << " done\n";
    }
  }

  // per-sampler mean and stddev per metric
  std::vector<std::string> metric_names;
  for (const auto& [key, value] : runs.front().metrics) metric_names.push_back(key);

  std::ofstream out(out_path);
  if (!out) throw DataError("cannot write comparison table to '" + out_path + "'");
  out << "sampler";
  for (const auto& m : metric_names) out << ',' << m << ',' << m << "_std";
  out << '\n';
  out.setf(std::ios::fixed);
  out.precision(6);
  json jsummary;
  for (SamplerKind kind : samplers) {
    out << sampler_name(kind);
    json jrow;
    for (const auto& m : metric_names) {
      double sum = 0.0, sum_sq = 0.0;
      size_t n = 0;
      for (const auto& run : runs) {
        if (run.sampler != kind) continue;
        sum += run.metrics.at(m);
        sum_sq += run.metrics.at(m) * run.metrics.at(m);
        ++n;
      }
      const double mean = sum / static_cast<double>(n);
      const double var = std::max(0.0, sum_sq / static_cast<double>(n) - mean * mean);
      out << ',' << mean << ',' << std::sqrt(var);
      jrow[m] = {{"mean", mean}, {"std", std::sqrt(var)}};
    }
    out << '\n';
    jsummary[sampler_name(kind)] = jrow;
  }

  std::ofstream jout(out_path + ".json");
  jout << jsummary.dump(2) << '\n';
}

}  // namespace gnno
