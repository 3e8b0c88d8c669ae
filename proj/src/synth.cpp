#include "synth.hpp"

#include <ostream>
#include <string>

#include "errors.hpp"
#include "rng.hpp"

namespace gnno {

std::vector<InteractionRecord> generate_block_corpus(const SynthConfig& config) {
  if (config.num_blocks == 0 || config.num_items < config.num_blocks) {
    throw UsageError("need at least one item per block");
  }
  if (config.stay_prob < 0.0 || config.stay_prob > 1.0) {
    throw UsageError("stay_prob must lie in [0, 1]");
  }

  const uint32_t block_size = config.num_items / config.num_blocks;
  auto item_in_block = [&](uint32_t block, uint64_t offset) {
    // the last block absorbs the remainder items
    const uint32_t lo = block * block_size;
    const uint32_t hi = (block + 1 == config.num_blocks) ? config.num_items
                                                         : lo + block_size;
    return lo + static_cast<uint32_t>(offset % (hi - lo));
  };
  auto block_width = [&](uint32_t block) {
    const uint32_t lo = block * block_size;
    const uint32_t hi = (block + 1 == config.num_blocks) ? config.num_items
                                                         : lo + block_size;
    return hi - lo;
  };

  std::vector<InteractionRecord> records;
  records.reserve(static_cast<size_t>(config.num_users) * config.sequence_length);
  for (uint32_t u = 0; u < config.num_users; ++u) {
    Rng rng(mix_seed({config.seed, u, 0x73796e74ULL}));
    uint32_t block = static_cast<uint32_t>(rng.next_below(config.num_blocks));
    uint32_t item = item_in_block(block, rng.next_below(block_width(block)));
    const std::string user = "u" + std::to_string(u);
    for (uint32_t t = 0; t < config.sequence_length; ++t) {
      records.push_back({user, "i" + std::to_string(item),
                         static_cast<int64_t>(t)});
      if (rng.next_double() >= config.stay_prob && config.num_blocks > 1) {
        uint32_t next_block =
            static_cast<uint32_t>(rng.next_below(config.num_blocks - 1));
        if (next_block >= block) ++next_block;
        block = next_block;
      }
      // local within-block move keeps neighborhoods structured
      const uint32_t width = block_width(block);
      const uint32_t lo = block * block_size;
      const uint32_t pos = item >= lo && item < lo + width ? item - lo
                                                           : static_cast<uint32_t>(
                                                                 rng.next_below(width));
      const uint32_t hop = 1 + static_cast<uint32_t>(rng.next_below(3));
      item = lo + (pos + hop) % width;
    }
  }
  return records;
}

void write_records_tsv(const std::vector<InteractionRecord>& records,
                       std::ostream& out) {
  for (const auto& rec : records) {
    out << rec.user << '\t' << rec.item << '\t' << rec.timestamp << '\n';
  }
}

}  // namespace gnno
