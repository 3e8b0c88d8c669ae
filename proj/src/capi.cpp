#include "gnno/gnno.h"

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "config.hpp"
#include "errors.hpp"
#include "pipeline.hpp"
#include "synth.hpp"

using namespace gnno;

struct gnno_experiment {
  ExperimentConfig config;
  std::string last_error;
};

namespace {

thread_local std::string g_last_error;

template <typename Fn>
gnno_status guard(std::string& error_sink, Fn&& fn) {
  try {
    fn();
    error_sink.clear();
    return GNNO_OK;
  } catch (const UsageError& e) {
    error_sink = e.what();
    return GNNO_USAGE_ERROR;
  } catch (const DataError& e) {
    error_sink = e.what();
    return GNNO_DATA_ERROR;
  } catch (const std::exception& e) {
    error_sink = e.what();
    return GNNO_INTERNAL_ERROR;
  }
}

}  // namespace

extern "C" {

const char* gnno_version(void) { return "0.1.0"; }

gnno_status gnno_experiment_open(const char* config_path, gnno_experiment** out) {
  if (out == nullptr) {
    g_last_error = "output handle pointer is NULL";
    return GNNO_USAGE_ERROR;
  }
  *out = nullptr;
  auto exp = new gnno_experiment();
  const gnno_status status = guard(g_last_error, [&] {
    if (config_path != nullptr && config_path[0] != '\0') {
      exp->config = ExperimentConfig::from_file(config_path);
    }
  });
  if (status != GNNO_OK) {
    delete exp;
    return status;
  }
  *out = exp;
  return GNNO_OK;
}

void gnno_experiment_close(gnno_experiment* exp) { delete exp; }

const char* gnno_experiment_last_error(const gnno_experiment* exp) {
  return exp != nullptr ? exp->last_error.c_str() : g_last_error.c_str();
}

gnno_status gnno_experiment_set(gnno_experiment* exp, const char* key,
                                const char* value) {
  if (exp == nullptr || key == nullptr || value == nullptr) {
    g_last_error = "NULL argument";
    return GNNO_USAGE_ERROR;
  }
  return guard(exp->last_error, [&] { exp->config.set(key, value); });
}

gnno_status gnno_experiment_run(gnno_experiment* exp, const char* stages_csv,
                                int force) {
  if (exp == nullptr) {
    g_last_error = "NULL experiment handle";
    return GNNO_USAGE_ERROR;
  }
  return guard(exp->last_error, [&] {
    Pipeline pipeline(exp->config);
    pipeline.run(parse_stages(stages_csv != nullptr ? stages_csv : "all"),
                 force != 0);
  });
}

gnno_status gnno_experiment_compare(gnno_experiment* exp,
                                    const char* samplers_csv, int num_seeds,
                                    const char* out_path) {
  if (exp == nullptr || samplers_csv == nullptr || out_path == nullptr) {
    g_last_error = "NULL argument";
    return GNNO_USAGE_ERROR;
  }
  return guard(exp->last_error, [&] {
    std::vector<SamplerKind> samplers;
    std::istringstream ss(samplers_csv);
    std::string part;
    while (std::getline(ss, part, ',')) {
      if (!part.empty()) samplers.push_back(sampler_from_name(part));
    }
    Pipeline pipeline(exp->config);
    pipeline.compare_samplers(samplers, num_seeds, out_path);
  });
}

gnno_status gnno_synth_corpus(uint32_t num_items, uint32_t num_blocks,
                              uint32_t num_users, uint32_t sequence_length,
                              double stay_prob, uint64_t seed,
                              const char* out_path) {
  if (out_path == nullptr) {
    g_last_error = "NULL output path";
    return GNNO_USAGE_ERROR;
  }
  return guard(g_last_error, [&] {
    SynthConfig config;
    config.num_items = num_items;
    config.num_blocks = num_blocks;
    config.num_users = num_users;
    config.sequence_length = sequence_length;
    config.stay_prob = stay_prob;
    config.seed = seed;
    const auto records = generate_block_corpus(config);
    std::ofstream out(out_path);
    if (!out) throw DataError(std::string("cannot write to '") + out_path + "'");
    write_records_tsv(records, out);
  });
}

const char* gnno_last_error(void) { return g_last_error.c_str(); }

}  // extern "C"
