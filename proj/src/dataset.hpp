#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

namespace gnno {

struct InteractionRecord {
  std::string user;
  std::string item;
  int64_t timestamp = 0;
};

struct ParseIssue {
  size_t line_number = 0;  // 1-based
  std::string message;
};

struct ParseOptions {
  char delimiter = '\t';
  bool skip_header = false;
};

// Records in file order plus per-line issues; malformed lines are reported,
// never silently dropped.
struct ParseResult {
  std::vector<InteractionRecord> records;
  std::vector<ParseIssue> issues;
};

ParseResult parse_log(std::istream& in, const ParseOptions& opts = {});

struct KcoreResult {
  std::vector<InteractionRecord> records;
  bool emptied = false;  // warning: the fixpoint removed everything
};

// Alternately drops users and items with fewer than k interactions until
// both minimum-degree constraints hold simultaneously.
KcoreResult kcore_filter(const std::vector<InteractionRecord>& records, int k);

struct InteractionCorpus {
  // user index -> chronologically ordered item indices
  std::vector<std::vector<uint32_t>> sequences;
  std::vector<std::string> item_tokens;   // dense index -> token
  std::vector<std::string> user_tokens;
  std::unordered_map<std::string, uint32_t> item_index;
  std::unordered_map<std::string, uint32_t> user_index;

  size_t num_items() const { return item_tokens.size(); }
  size_t num_users() const { return user_tokens.size(); }
};

// Sequences sorted by (timestamp, input order); vocab indices dense, in
// first-appearance order.
InteractionCorpus build_corpus(const std::vector<InteractionRecord>& records);

struct SplitCorpus {
  std::vector<std::vector<uint32_t>> train;  // per user prefix
  // -1 when the user has no held-out target (sequence shorter than 3)
  std::vector<int64_t> valid_target;
  std::vector<int64_t> test_target;
  size_t num_items = 0;
  size_t short_sequence_count = 0;

  std::vector<uint32_t> eval_users() const;
};

SplitCorpus leave_one_out_split(const InteractionCorpus& corpus);

// Corpus serialization: vocab map as "token TAB index" lines, sequences as
// "user_index TAB space-separated item indices" lines.
void save_vocab(const InteractionCorpus& corpus, std::ostream& out);
void save_sequences(const InteractionCorpus& corpus, std::ostream& out);
InteractionCorpus load_corpus(std::istream& vocab_in, std::istream& sequences_in);

}  // namespace gnno
