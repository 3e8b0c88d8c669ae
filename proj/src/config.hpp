#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "analysis.hpp"
#include "eval.hpp"
#include "synth.hpp"
#include "trainer.hpp"
#include "witg.hpp"

namespace gnno {

// Full pipeline configuration. Populated from a key=value file, preset
// names, and per-key overrides; the canonical form backs artifact manifests.
struct ExperimentConfig {
  // data
  std::string input_path;
  char delimiter = '\t';
  bool has_header = false;
  int kcore = 5;
  bool use_synth = false;
  SynthConfig synth;

  WitgConfig witg;
  double overlap_min_edge_weight = 0.0;

  TrainConfig train;
  EvalProtocol eval;
  AnalysisConfig analysis;
  std::vector<uint32_t> analysis_epochs;  // empty -> {0, mid, final}

  std::string out_dir = "out";
  uint64_t seed = 42;

  // Named hyper-parameter profiles (neg counts, pace, lambda_max).
  void apply_preset(const std::string& name);
  void set(const std::string& key, const std::string& value);

  std::vector<uint32_t> snapshot_epochs() const;

  std::string canonical() const;
  uint64_t config_hash() const;
  std::string config_hash_hex() const;

  static ExperimentConfig from_file(const std::string& path);
  void apply_overrides(const std::vector<std::string>& key_value_pairs);
};

uint64_t fnv1a(const void* data, size_t len, uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(uint64_t value);

}  // namespace gnno
