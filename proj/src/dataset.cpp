#include "dataset.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "errors.hpp"

namespace gnno {

namespace {

bool parse_int64(const std::string& s, int64_t& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last;
}

}  // namespace

ParseResult parse_log(std::istream& in, const ParseOptions& opts) {
  ParseResult result;
  std::string line;
  size_t line_number = 0;
  bool header_pending = opts.skip_header;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (header_pending) {
      header_pending = false;
      continue;
    }
    if (line.empty()) continue;

    std::vector<std::string> fields;
    size_t start = 0;
    for (;;) {
      const size_t pos = line.find(opts.delimiter, start);
      if (pos == std::string::npos) {
        fields.push_back(line.substr(start));
        break;
      }
      fields.push_back(line.substr(start, pos - start));
      start = pos + 1;
    }
    if (fields.size() < 3) {
      result.issues.push_back({line_number, "expected at least 3 fields"});
      continue;
    }
    if (fields[0].empty() || fields[1].empty()) {
      result.issues.push_back({line_number, "empty user or item token"});
      continue;
    }
    int64_t ts = 0;
    if (!parse_int64(fields[2], ts) || ts < 0) {
      result.issues.push_back(
          {line_number, "unparseable timestamp '" + fields[2] + "'"});
      continue;
    }
    result.records.push_back({std::move(fields[0]), std::move(fields[1]), ts});
  }
  return result;
}

KcoreResult kcore_filter(const std::vector<InteractionRecord>& records, int k) {
  if (k < 1) throw UsageError("k-core requires k >= 1");

  std::vector<char> keep(records.size(), 1);
  bool changed = true;
  while (changed) {
    changed = false;
    std::unordered_map<std::string, size_t> user_count;
    std::unordered_map<std::string, size_t> item_count;
    for (size_t idx = 0; idx < records.size(); ++idx) {
      if (!keep[idx]) continue;
      ++user_count[records[idx].user];
      ++item_count[records[idx].item];
    }
    for (size_t idx = 0; idx < records.size(); ++idx) {
      if (!keep[idx]) continue;
      if (user_count[records[idx].user] < static_cast<size_t>(k) ||
          item_count[records[idx].item] < static_cast<size_t>(k)) {
        keep[idx] = 0;
        changed = true;
      }
    }
  }

  KcoreResult result;
  for (size_t idx = 0; idx < records.size(); ++idx) {
    if (keep[idx]) result.records.push_back(records[idx]);
  }
  result.emptied = !records.empty() && result.records.empty();
  return result;
}

InteractionCorpus build_corpus(const std::vector<InteractionRecord>& records) {
  if (records.empty()) throw DataError("cannot build a corpus from zero records");

  InteractionCorpus corpus;
  // (user, item, timestamp, input order) tuples with dense ids
  struct Entry {
    uint32_t user;
    uint32_t item;
    int64_t timestamp;
    size_t order;
  };
  std::vector<Entry> entries;
  entries.reserve(records.size());
  for (size_t idx = 0; idx < records.size(); ++idx) {
    const auto& rec = records[idx];
    auto [uit, uinserted] =
        corpus.user_index.emplace(rec.user, static_cast<uint32_t>(corpus.user_tokens.size()));
    if (uinserted) corpus.user_tokens.push_back(rec.user);
    auto [iit, iinserted] =
        corpus.item_index.emplace(rec.item, static_cast<uint32_t>(corpus.item_tokens.size()));
    if (iinserted) corpus.item_tokens.push_back(rec.item);
    entries.push_back({uit->second, iit->second, rec.timestamp, idx});
  }

  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.user != b.user) return a.user < b.user;
    if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
    return a.order < b.order;
  });

  corpus.sequences.assign(corpus.user_tokens.size(), {});
  for (const auto& e : entries) corpus.sequences[e.user].push_back(e.item);
  return corpus;
}

SplitCorpus leave_one_out_split(const InteractionCorpus& corpus) {
  SplitCorpus split;
  split.num_items = corpus.num_items();
  split.train.resize(corpus.sequences.size());
  split.valid_target.assign(corpus.sequences.size(), -1);
  split.test_target.assign(corpus.sequences.size(), -1);
  for (size_t u = 0; u < corpus.sequences.size(); ++u) {
    const auto& seq = corpus.sequences[u];
    if (seq.size() < 3) {
      split.train[u] = seq;
      ++split.short_sequence_count;
      continue;
    }
    split.train[u].assign(seq.begin(), seq.end() - 2);
    split.valid_target[u] = seq[seq.size() - 2];
    split.test_target[u] = seq[seq.size() - 1];
  }
  return split;
}

std::vector<uint32_t> SplitCorpus::eval_users() const {
  std::vector<uint32_t> users;
  for (size_t u = 0; u < test_target.size(); ++u) {
    if (test_target[u] >= 0) users.push_back(static_cast<uint32_t>(u));
  }
  return users;
}

void save_vocab(const InteractionCorpus& corpus, std::ostream& out) {
  for (size_t i = 0; i < corpus.item_tokens.size(); ++i) {
    out << corpus.item_tokens[i] << '\t' << i << '\n';
  }
}

void save_sequences(const InteractionCorpus& corpus, std::ostream& out) {
  for (size_t u = 0; u < corpus.sequences.size(); ++u) {
    out << u << '\t';
    const auto& seq = corpus.sequences[u];
    for (size_t t = 0; t < seq.size(); ++t) {
      if (t > 0) out << ' ';
      out << seq[t];
    }
    out << '\n';
  }
}

InteractionCorpus load_corpus(std::istream& vocab_in, std::istream& sequences_in) {
  InteractionCorpus corpus;
  std::string line;
  size_t line_number = 0;
  while (std::getline(vocab_in, line)) {
    ++line_number;
    if (line.empty()) continue;
    const size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      throw DataError("vocab line " + std::to_string(line_number) + ": missing TAB");
    }
    const std::string token = line.substr(0, tab);
    const uint32_t index = static_cast<uint32_t>(std::stoul(line.substr(tab + 1)));
    if (index != corpus.item_tokens.size()) {
      throw DataError("vocab line " + std::to_string(line_number) +
                      ": indices must be dense and in order");
    }
    corpus.item_index.emplace(token, index);
    corpus.item_tokens.push_back(token);
  }

  line_number = 0;
  while (std::getline(sequences_in, line)) {
    ++line_number;
    if (line.empty()) continue;
    const size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      throw DataError("sequences line " + std::to_string(line_number) + ": missing TAB");
    }
    const uint32_t user = static_cast<uint32_t>(std::stoul(line.substr(0, tab)));
    if (user != corpus.sequences.size()) {
      throw DataError("sequences line " + std::to_string(line_number) +
                      ": user indices must be dense and in order");
    }
    std::vector<uint32_t> seq;
    std::istringstream items(line.substr(tab + 1));
    uint32_t item = 0;
    while (items >> item) {
      if (item >= corpus.item_tokens.size()) {
        throw DataError("sequences line " + std::to_string(line_number) +
                        ": item index out of vocab range");
      }
      seq.push_back(item);
    }
    corpus.sequences.push_back(std::move(seq));
    corpus.user_tokens.push_back(std::to_string(user));
    corpus.user_index.emplace(corpus.user_tokens.back(), user);
  }
  return corpus;
}

}  // namespace gnno
