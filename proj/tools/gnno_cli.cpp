// Command-line front end; links only the C API.
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gnno/gnno.h"

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  std::string seed;
  std::vector<std::string> overrides;
  bool force = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "key=value config file");
  cmd->add_option("--out", opts.out_dir, "output directory for artifacts");
  cmd->add_option("--seed", opts.seed, "global random seed");
  cmd->add_option("--set", opts.overrides,
                  "config override, key=value (repeatable)");
  cmd->add_flag("--force", opts.force, "rerun stages even if cached");
}

int fail(gnno_status status, const char* message) {
  std::fprintf(stderr, "error: %s\n", message);
  return static_cast<int>(status);
}

// Opens the experiment and applies common overrides; returns nullptr after
// printing the error (status left in *status_out).
gnno_experiment* open_experiment(const CommonOpts& opts, int* status_out) {
  gnno_experiment* exp = nullptr;
  gnno_status status = gnno_experiment_open(
      opts.config_path.empty() ? nullptr : opts.config_path.c_str(), &exp);
  if (status != GNNO_OK) {
    *status_out = fail(status, gnno_last_error());
    return nullptr;
  }
  auto apply = [&](const char* key, const std::string& value) {
    if (value.empty()) return true;
    status = gnno_experiment_set(exp, key, value.c_str());
    if (status != GNNO_OK) {
      *status_out = fail(status, gnno_experiment_last_error(exp));
      gnno_experiment_close(exp);
      return false;
    }
    return true;
  };
  if (!apply("seed", opts.seed)) return nullptr;
  if (!apply("out_dir", opts.out_dir)) return nullptr;
  for (const auto& kv : opts.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      *status_out = fail(GNNO_USAGE_ERROR, ("--set expects key=value, got " + kv).c_str());
      gnno_experiment_close(exp);
      return nullptr;
    }
    if (!apply(kv.substr(0, eq).c_str(), kv.substr(eq + 1))) return nullptr;
  }
  return exp;
}

int run_stages(const CommonOpts& opts, const char* stages) {
  int status_out = 0;
  gnno_experiment* exp = open_experiment(opts, &status_out);
  if (exp == nullptr) return status_out;
  const gnno_status status = gnno_experiment_run(exp, stages, opts.force ? 1 : 0);
  int rc = 0;
  if (status != GNNO_OK) rc = fail(status, gnno_experiment_last_error(exp));
  gnno_experiment_close(exp);
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gnno: graph-based hard-negative mining for sequential recommendation"};
  app.require_subcommand(1);

  struct StageCmd {
    const char* name;
    const char* stages;
    const char* help;
  };
  const StageCmd stage_cmds[] = {
      {"ingest", "ingest", "parse, k-core filter, and split the interaction log"},
      {"build-graph", "graph", "build the weighted item transition graph"},
      {"build-overlap", "overlap", "build the Jaccard overlap index"},
      {"train", "train", "train the recommender with the configured sampler"},
      {"eval", "eval", "leave-one-out HR@K / NDCG@K evaluation"},
      {"analyze", "analyze", "per-group embedding-similarity distributions"},
  };
  std::vector<CommonOpts> stage_opts(std::size(stage_cmds));
  for (size_t i = 0; i < std::size(stage_cmds); ++i) {
    auto* cmd = app.add_subcommand(stage_cmds[i].name, stage_cmds[i].help);
    add_common(cmd, stage_opts[i]);
  }

  CommonOpts compare_opts;
  std::string compare_samplers = "uniform,gnno";
  int compare_seeds = 1;
  std::string compare_out = "compare.csv";
  auto* compare_cmd =
      app.add_subcommand("compare", "train and evaluate one model per sampler");
  add_common(compare_cmd, compare_opts);
  compare_cmd->add_option("--samplers", compare_samplers,
                          "comma-separated: uniform,dns,gnno");
  compare_cmd->add_option("--seeds", compare_seeds, "seeds per sampler");
  compare_cmd->add_option("--table", compare_out, "comparison table output path");

  uint32_t synth_items = 500, synth_blocks = 10, synth_users = 2000, synth_len = 20;
  double synth_stay = 0.9;
  uint64_t synth_seed = 42;
  std::string synth_out = "synthetic.tsv";
  auto* synth_cmd =
      app.add_subcommand("synth-data", "write a synthetic block-structured log");
  synth_cmd->add_option("--items", synth_items, "number of items");
  synth_cmd->add_option("--blocks", synth_blocks, "number of blocks");
  synth_cmd->add_option("--users", synth_users, "number of users");
  synth_cmd->add_option("--length", synth_len, "interactions per user");
  synth_cmd->add_option("--stay-prob", synth_stay, "within-block walk probability");
  synth_cmd->add_option("--seed", synth_seed, "generator seed");
  synth_cmd->add_option("--output", synth_out, "output TSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(GNNO_USAGE_ERROR);
  }

  for (size_t i = 0; i < std::size(stage_cmds); ++i) {
    if (app.get_subcommand(stage_cmds[i].name)->parsed()) {
      return run_stages(stage_opts[i], stage_cmds[i].stages);
    }
  }

  if (compare_cmd->parsed()) {
    int status_out = 0;
    gnno_experiment* exp = open_experiment(compare_opts, &status_out);
    if (exp == nullptr) return status_out;
    const gnno_status status = gnno_experiment_compare(
        exp, compare_samplers.c_str(), compare_seeds, compare_out.c_str());
    int rc = 0;
    if (status != GNNO_OK) rc = fail(status, gnno_experiment_last_error(exp));
    gnno_experiment_close(exp);
    return rc;
  }

  if (synth_cmd->parsed()) {
    const gnno_status status =
        gnno_synth_corpus(synth_items, synth_blocks, synth_users, synth_len,
                          synth_stay, synth_seed, synth_out.c_str());
    if (status != GNNO_OK) return fail(status, gnno_last_error());
    return 0;
  }

  return static_cast<int>(GNNO_USAGE_ERROR);
}
