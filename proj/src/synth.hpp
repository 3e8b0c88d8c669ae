#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "dataset.hpp"

namespace gnno {

// Block-structured transition model: items are partitioned into blocks;
// each sequence walks within its current block with probability stay_prob
// and jumps to a different block otherwise.
struct SynthConfig {
  uint32_t num_items = 500;
  uint32_t num_blocks = 10;
  uint32_t num_users = 2000;
  uint32_t sequence_length = 20;
  double stay_prob = 0.9;
  uint64_t seed = 42;
};

std::vector<InteractionRecord> generate_block_corpus(const SynthConfig& config);

// TAB-delimited (user, item, timestamp) lines, the ingest input format.
void write_records_tsv(const std::vector<InteractionRecord>& records,
                       std::ostream& out);

}  // namespace gnno
