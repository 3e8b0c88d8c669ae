#pragma once

#include <string>
#include <vector>

#include "config.hpp"

namespace gnno {

enum class Stage { Ingest, Graph, Overlap, Train, Eval, Analyze };

const char* stage_name(Stage stage);
// Accepts "all" or a comma-separated subset of stage names.
std::vector<Stage> parse_stages(const std::string& csv);

// Runs stages in pipeline order against the config's output directory.
// Completed stages (matching manifest hash, outputs present) are skipped;
// a hash mismatch with a cached artifact is an error unless force is set.
class Pipeline {
 public:
  explicit Pipeline(ExperimentConfig config);

  void run(const std::vector<Stage>& stages, bool force);
  void compare_samplers(const std::vector<SamplerKind>& samplers, int num_seeds,
                        const std::string& out_path);

  const ExperimentConfig& config() const { return config_; }
  std::string artifact_path(const std::string& name) const;

 private:
  void run_stage(Stage stage, bool force);
  bool stage_complete(Stage stage) const;
  void require_artifact(const std::string& name, Stage producer) const;
  void write_manifest(Stage stage, const std::vector<std::string>& inputs,
                      const std::vector<std::string>& outputs, double seconds);

  void do_ingest();
  void do_graph();
  void do_overlap();
  void do_train();
  void do_eval();
  void do_analyze();

  ExperimentConfig config_;
};

const char* sampler_name(SamplerKind kind);
SamplerKind sampler_from_name(const std::string& name);

}  // namespace gnno
