#include "config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "errors.hpp"

namespace gnno {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw UsageError("expected a boolean, got '" + v + "'");
}

double parse_double(const std::string& v) {
  try {
    size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw UsageError("expected a number, got '" + v + "'");
  }
}

uint64_t parse_u64(const std::string& v) {
  try {
    size_t pos = 0;
    const uint64_t u = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return u;
  } catch (const std::exception&) {
    throw UsageError("expected a non-negative integer, got '" + v + "'");
  }
}

std::vector<uint32_t> parse_u32_list(const std::string& v) {
  std::vector<uint32_t> out;
  std::istringstream ss(v);
  std::string part;
  while (std::getline(ss, part, ',')) {
    part = trim(part);
    if (!part.empty()) out.push_back(static_cast<uint32_t>(parse_u64(part)));
  }
  return out;
}

}  // namespace

void ExperimentConfig::apply_preset(const std::string& name) {
  auto& t = train;
  if (name == "beauty") {
    t.neg_hard = 9;
    t.neg_rand = 16;
    t.schedule.pace_c = 0.04;
    t.schedule.lambda_max = 0.5;
  } else if (name == "toys") {
    t.neg_hard = 2;
    t.neg_rand = 10;
    t.schedule.pace_c = 0.05;
    t.schedule.lambda_max = 0.2;
  } else if (name == "phones") {
    t.neg_hard = 4;
    t.neg_rand = 10;
    t.schedule.pace_c = 0.01;
    t.schedule.lambda_max = 0.9;
  } else {
    throw UsageError("unknown preset '" + name + "' (expected beauty/toys/phones)");
  }
  t.schedule.initial_b = 0.0;
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  if (key == "preset" || key == "sampler.preset") {
    apply_preset(value);
  } else if (key == "data.input") {
    input_path = value;
  } else if (key == "data.delimiter") {
    if (value == "tab" || value == "\\t") {
      delimiter = '\t';
    } else if (value.size() == 1) {
      delimiter = value[0];
    } else {
      throw UsageError("delimiter must be a single character or 'tab'");
    }
  } else if (key == "data.has_header") {
    has_header = parse_bool(value);
  } else if (key == "data.kcore") {
    kcore = static_cast<int>(parse_u64(value));
  } else if (key == "data.synthetic") {
    use_synth = parse_bool(value);
  } else if (key == "synth.num_items") {
    synth.num_items = static_cast<uint32_t>(parse_u64(value));
  } else if (key == "synth.num_blocks") {
    synth.num_blocks = static_cast<uint32_t>(parse_u64(value));
  } else if (key == "synth.num_users") {
    synth.num_users = static_cast<uint32_t>(parse_u64(value));
  } else if (key == "synth.sequence_length") {
    synth.sequence_length = static_cast<uint32_t>(parse_u64(value));
  } else if (key == "synth.stay_prob") {
    synth.stay_prob = parse_double(value);
  } else if (key == "graph.window") {
    witg.window = static_cast<uint32_t>(parse_u64(value));
  } else if (key == "graph.allow_self_loops") {
    witg.allow_self_loops = parse_bool(value);
  } else if (key == "overlap.min_edge_weight") {
    overlap_min_edge_weight = parse_double(value);
  } else if (key == "sampler.kind") {
    if (value == "gnno") {
      train.sampler = SamplerKind::Gnno;
    } else if (value == "uniform") {
      train.sampler = SamplerKind::Uniform;
    } else if (value == "dns") {
      train.sampler = SamplerKind::Dns;
    } else {
      throw UsageError("unknown sampler '" + value + "'");
    }
  } else if (key == "sampler.neg_hard") {
    train.neg_hard = parse_u64(value);
  } else if (key == "sampler.neg_rand") {
    train.neg_rand = parse_u64(value);
  } else if (key == "sampler.pace_c") {
    train.schedule.pace_c = parse_double(value);
  } else if (key == "sampler.initial_b") {
    train.schedule.initial_b = parse_double(value);
  } else if (key == "sampler.lambda_max") {
    train.schedule.lambda_max = parse_double(value);
  } else if (key == "sampler.step_unit") {
    if (value == "epoch") {
      train.schedule.step_unit = StepUnit::Epoch;
    } else if (value == "batch") {
      train.schedule.step_unit = StepUnit::Batch;
    } else {
      throw UsageError("step_unit must be epoch or batch");
    }
  } else if (key == "sampler.dns_pool_size") {
    train.dns_pool_size = parse_u64(value);
  } else if (key == "sampler.exclude_sequence_items") {
    train.exclude_sequence_items = parse_bool(value);
  } else if (key == "train.epochs") {
    train.epochs = static_cast<uint32_t>(parse_u64(value));
    train.schedule.max_step = train.epochs;
  } else if (key == "train.batch_size") {
    train.batch_size = static_cast<uint32_t>(parse_u64(value));
  } else if (key == "train.learning_rate") {
    train.learning_rate = parse_double(value);
  } else if (key == "train.embedding_dim") {
    train.embedding_dim = static_cast<uint32_t>(parse_u64(value));
  } else if (key == "train.max_sequence_length") {
    train.max_sequence_length = static_cast<uint32_t>(parse_u64(value));
  } else if (key == "train.encoder") {
    if (value == "mean_pool") {
      train.encoder = Encoder::MeanPool;
    } else if (value == "last_item") {
      train.encoder = Encoder::LastItem;
    } else {
      throw UsageError("encoder must be mean_pool or last_item");
    }
  } else if (key == "train.loss_reduction") {
    if (value == "sum") {
      train.reduction = LossReduction::Sum;
    } else if (value == "mean") {
      train.reduction = LossReduction::Mean;
    } else {
      throw UsageError("loss_reduction must be sum or mean");
    }
  } else if (key == "eval.candidate_set_size") {
    eval.candidate_set_size = parse_u64(value);
  } else if (key == "eval.k_values") {
    eval.k_values = parse_u32_list(value);
  } else if (key == "eval.phase") {
    if (value == "valid") {
      eval.phase = EvalPhase::Valid;
    } else if (value == "test") {
      eval.phase = EvalPhase::Test;
    } else {
      throw UsageError("eval.phase must be valid or test");
    }
  } else if (key == "analysis.max_pairs") {
    analysis.max_pairs_per_group = parse_u64(value);
  } else if (key == "analysis.bins") {
    analysis.bins = parse_u64(value);
  } else if (key == "analysis.epochs") {
    analysis_epochs = parse_u32_list(value);
  } else if (key == "out_dir") {
    out_dir = value;
  } else if (key == "seed") {
    seed = parse_u64(value);
    train.seed = seed;
    eval.seed = seed;
    analysis.seed = seed;
    synth.seed = seed;
  } else {
    throw UsageError("unknown config key '" + key + "'");
  }
}

std::vector<uint32_t> ExperimentConfig::snapshot_epochs() const {
  if (!analysis_epochs.empty()) {
    auto epochs = analysis_epochs;
    std::sort(epochs.begin(), epochs.end());
    epochs.erase(std::unique(epochs.begin(), epochs.end()), epochs.end());
    return epochs;
  }
  std::vector<uint32_t> epochs = {0, train.epochs / 2, train.epochs};
  std::sort(epochs.begin(), epochs.end());
  epochs.erase(std::unique(epochs.begin(), epochs.end()), epochs.end());
  return epochs;
}

std::string ExperimentConfig::canonical() const {
  std::ostringstream out;
  out << "analysis.bins=" << analysis.bins << '\n'
      << "analysis.epochs=";
  const auto epochs = snapshot_epochs();
  for (size_t i = 0; i < epochs.size(); ++i) out << (i ? "," : "") << epochs[i];
  out << '\n'
      << "analysis.max_pairs=" << analysis.max_pairs_per_group << '\n'
      << "data.delimiter=" << static_cast<int>(delimiter) << '\n'
      << "data.has_header=" << has_header << '\n'
      << "data.input=" << input_path << '\n'
      << "data.kcore=" << kcore << '\n'
      << "data.synthetic=" << use_synth << '\n'
      << "eval.candidate_set_size=" << eval.candidate_set_size << '\n'
      << "eval.k_values=";
  for (size_t i = 0; i < eval.k_values.size(); ++i) {
    out << (i ? "," : "") << eval.k_values[i];
  }
  out << '\n'
      << "eval.phase=" << (eval.phase == EvalPhase::Test ? "test" : "valid") << '\n'
      << "graph.allow_self_loops=" << witg.allow_self_loops << '\n'
      << "graph.window=" << witg.window << '\n'
      << "overlap.min_edge_weight=" << overlap_min_edge_weight << '\n'
      << "sampler.dns_pool_size=" << train.dns_pool_size << '\n'
      << "sampler.exclude_sequence_items=" << train.exclude_sequence_items << '\n'
      << "sampler.initial_b=" << train.schedule.initial_b << '\n'
      << "sampler.kind=" << static_cast<int>(train.sampler) << '\n'
      << "sampler.lambda_max=" << train.schedule.lambda_max << '\n'
      << "sampler.neg_hard=" << train.neg_hard << '\n'
      << "sampler.neg_rand=" << train.neg_rand << '\n'
      << "sampler.pace_c=" << train.schedule.pace_c << '\n'
      << "sampler.step_unit="
      << (train.schedule.step_unit == StepUnit::Epoch ? "epoch" : "batch") << '\n'
      << "seed=" << seed << '\n'
      << "synth.num_blocks=" << synth.num_blocks << '\n'
      << "synth.num_items=" << synth.num_items << '\n'
      << "synth.num_users=" << synth.num_users << '\n'
      << "synth.seed=" << synth.seed << '\n'
      << "synth.sequence_length=" << synth.sequence_length << '\n'
      << "synth.stay_prob=" << synth.stay_prob << '\n'
      << "train.batch_size=" << train.batch_size << '\n'
      << "train.embedding_dim=" << train.embedding_dim << '\n'
      << "train.encoder=" << (train.encoder == Encoder::MeanPool ? "mean_pool" : "last_item")
      << '\n'
      << "train.epochs=" << train.epochs << '\n'
      << "train.learning_rate=" << train.learning_rate << '\n'
      << "train.loss_reduction=" << (train.reduction == LossReduction::Sum ? "sum" : "mean")
      << '\n'
      << "train.max_sequence_length=" << train.max_sequence_length << '\n'
      << "train.seed=" << train.seed << '\n';
  return out.str();
}

uint64_t ExperimentConfig::config_hash() const {
  const std::string text = canonical();
  return fnv1a(text.data(), text.size());
}

std::string ExperimentConfig::config_hash_hex() const { return hex64(config_hash()); }

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  ExperimentConfig config;
  std::string line;
  size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(path + ":" + std::to_string(line_number) +
                       ": expected key=value");
    }
    try {
      config.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const UsageError& e) {
      throw UsageError(path + ":" + std::to_string(line_number) + ": " + e.what());
    }
  }
  return config;
}

void ExperimentConfig::apply_overrides(const std::vector<std::string>& pairs) {
  for (const auto& pair : pairs) {
    const auto eq = pair.find('=');
    if (eq == std::string::npos) {
      throw UsageError("override '" + pair + "' is not key=value");
    }
    set(trim(pair.substr(0, eq)), trim(pair.substr(eq + 1)));
  }
}

uint64_t fnv1a(const void* data, size_t len, uint64_t seed) {
  uint64_t h = seed;
  const auto* bytes = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < len; ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

}  // namespace gnno
