#include <doctest.h>

#include <map>
#include <set>
#include <sstream>

#include "dataset.hpp"
#include "errors.hpp"
#include "rng.hpp"

using namespace gnno;

namespace {

std::vector<InteractionRecord> make_records(
    std::initializer_list<std::tuple<const char*, const char*, int64_t>> rows) {
  std::vector<InteractionRecord> out;
  for (const auto& [u, i, t] : rows) out.push_back({u, i, t});
  return out;
}

// direct recount of per-user and per-item interaction counts
std::pair<size_t, size_t> min_degrees(const std::vector<InteractionRecord>& records) {
  std::map<std::string, size_t> users, items;
  for (const auto& r : records) {
    ++users[r.user];
    ++items[r.item];
  }
  size_t mu = SIZE_MAX, mi = SIZE_MAX;
  for (const auto& [k, v] : users) mu = std::min(mu, v);
  for (const auto& [k, v] : items) mi = std::min(mi, v);
  return {mu, mi};
}

}  // namespace

TEST_CASE("parse_log handles well-formed and malformed lines") {
  SUBCASE("single well-formed line") {
    std::istringstream in("u1\tA\t100");
    const auto result = parse_log(in);
    REQUIRE(result.records.size() == 1);
    CHECK(result.records[0].user == "u1");
    CHECK(result.records[0].item == "A");
    CHECK(result.records[0].timestamp == 100);
    CHECK(result.issues.empty());
  }
  SUBCASE("malformed timestamp reported with line number") {
    std::istringstream in("u1\tA\tx");
    const auto result = parse_log(in);
    CHECK(result.records.empty());
    REQUIRE(result.issues.size() == 1);
    CHECK(result.issues[0].line_number == 1);
  }
  SUBCASE("file order preserved, no sorting") {
    std::istringstream in("u1\tA\t300\nu1\tB\t100\nu1\tC\t200\n");
    const auto result = parse_log(in);
    REQUIRE(result.records.size() == 3);
    CHECK(result.records[0].timestamp == 300);
    CHECK(result.records[1].timestamp == 100);
    CHECK(result.records[2].timestamp == 200);
  }
  SUBCASE("empty input is an empty list, not an error") {
    std::istringstream in("");
    const auto result = parse_log(in);
    CHECK(result.records.empty());
    CHECK(result.issues.empty());
  }
  SUBCASE("header skipped on request") {
    std::istringstream in("user\titem\tts\nu1\tA\t1\n");
    ParseOptions opts;
    opts.skip_header = true;
    const auto result = parse_log(in, opts);
    CHECK(result.records.size() == 1);
    CHECK(result.issues.empty());
  }
  SUBCASE("too few fields reported") {
    std::istringstream in("u1\tA\nu2\tB\t5\n");
    const auto result = parse_log(in);
    CHECK(result.records.size() == 1);
    REQUIRE(result.issues.size() == 1);
    CHECK(result.issues[0].line_number == 1);
  }
  SUBCASE("custom delimiter") {
    std::istringstream in("u1,A,7");
    ParseOptions opts;
    opts.delimiter = ',';
    const auto result = parse_log(in, opts);
    REQUIRE(result.records.size() == 1);
    CHECK(result.records[0].timestamp == 7);
  }
}

TEST_CASE("kcore_filter iterates to a fixpoint") {
  SUBCASE("1-core is identity on nonempty users/items") {
    const auto records = make_records({{"u1", "A", 1}, {"u2", "B", 2}});
    const auto result = kcore_filter(records, 1);
    CHECK(result.records.size() == 2);
    CHECK_FALSE(result.emptied);
  }
  SUBCASE("cascade empties the dataset") {
    // u2 dropped, then B has 1 interaction, then u1 has 1 interaction
    const auto records =
        make_records({{"u1", "A", 1}, {"u1", "B", 2}, {"u2", "A", 3}});
    const auto result = kcore_filter(records, 2);
    CHECK(result.records.empty());
    CHECK(result.emptied);
  }
  SUBCASE("stable 2-core unchanged") {
    const auto records = make_records({{"u1", "A", 1},
                                       {"u1", "B", 2},
                                       {"u2", "A", 3},
                                       {"u2", "B", 4}});
    const auto result = kcore_filter(records, 2);
    CHECK(result.records.size() == 4);
  }
  SUBCASE("k < 1 rejected") {
    CHECK_THROWS_AS(kcore_filter({}, 0), UsageError);
  }
}

TEST_CASE("kcore_filter invariants on random data") {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<InteractionRecord> records;
    const size_t n = 30 + rng.next_below(100);
    for (size_t r = 0; r < n; ++r) {
      records.push_back({"u" + std::to_string(rng.next_below(12)),
                         "i" + std::to_string(rng.next_below(15)),
                         static_cast<int64_t>(rng.next_below(1000))});
    }
    const int k = 2 + static_cast<int>(rng.next_below(3));
    const auto filtered = kcore_filter(records, k);
    if (!filtered.records.empty()) {
      const auto [mu, mi] = min_degrees(filtered.records);
      CHECK(mu >= static_cast<size_t>(k));
      CHECK(mi >= static_cast<size_t>(k));
    }
    // re-running on its own output is the identity
    const auto again = kcore_filter(filtered.records, k);
    CHECK(again.records.size() == filtered.records.size());
  }
}

TEST_CASE("build_corpus sorts and assigns dense vocab") {
  SUBCASE("sorted by timestamp") {
    const auto corpus = build_corpus(
        make_records({{"u1", "A", 300}, {"u1", "B", 100}, {"u1", "C", 200}}));
    REQUIRE(corpus.sequences.size() == 1);
    const auto& seq = corpus.sequences[0];
    REQUIRE(seq.size() == 3);
    CHECK(corpus.item_tokens[seq[0]] == "B");
    CHECK(corpus.item_tokens[seq[1]] == "C");
    CHECK(corpus.item_tokens[seq[2]] == "A");
  }
  SUBCASE("shared items share one vocab index") {
    const auto corpus =
        build_corpus(make_records({{"u1", "A", 1}, {"u2", "A", 2}}));
    CHECK(corpus.num_items() == 1);
    CHECK(corpus.sequences[0][0] == corpus.sequences[1][0]);
  }
  SUBCASE("equal timestamps tie-break by input order") {
    const auto corpus =
        build_corpus(make_records({{"u1", "A", 100}, {"u1", "B", 100}}));
    const auto& seq = corpus.sequences[0];
    CHECK(corpus.item_tokens[seq[0]] == "A");
    CHECK(corpus.item_tokens[seq[1]] == "B");
  }
  SUBCASE("vocab density: max index = size - 1") {
    const auto corpus = build_corpus(make_records(
        {{"u1", "A", 1}, {"u1", "B", 2}, {"u2", "C", 3}, {"u2", "A", 4}}));
    uint32_t max_index = 0;
    for (const auto& seq : corpus.sequences) {
      for (uint32_t i : seq) max_index = std::max(max_index, i);
    }
    CHECK(max_index == corpus.num_items() - 1);
  }
  SUBCASE("empty input rejected") {
    CHECK_THROWS_AS(build_corpus({}), DataError);
  }
}

TEST_CASE("leave_one_out_split") {
  SUBCASE("last item to test, second-to-last to valid") {
    const auto corpus = build_corpus(
        make_records({{"u1", "A", 300}, {"u1", "B", 100}, {"u1", "C", 200}}));
    const auto split = leave_one_out_split(corpus);
    // sequence is [B, C, A]
    REQUIRE(split.train[0].size() == 1);
    CHECK(corpus.item_tokens[split.train[0][0]] == "B");
    CHECK(corpus.item_tokens[static_cast<uint32_t>(split.valid_target[0])] == "C");
    CHECK(corpus.item_tokens[static_cast<uint32_t>(split.test_target[0])] == "A");
  }
  SUBCASE("length-2 sequence stays in train, user excluded from eval") {
    const auto corpus =
        build_corpus(make_records({{"u1", "A", 1}, {"u1", "B", 2}}));
    const auto split = leave_one_out_split(corpus);
    CHECK(split.train[0].size() == 2);
    CHECK(split.valid_target[0] == -1);
    CHECK(split.test_target[0] == -1);
    CHECK(split.short_sequence_count == 1);
    CHECK(split.eval_users().empty());
  }
  SUBCASE("one valid and one test target per eligible user") {
    std::vector<InteractionRecord> records;
    for (int u = 0; u < 100; ++u) {
      for (int t = 0; t < 4; ++t) {
        records.push_back({"u" + std::to_string(u), "i" + std::to_string(t), t});
      }
    }
    const auto split = leave_one_out_split(build_corpus(records));
    CHECK(split.eval_users().size() == 100);
  }
  SUBCASE("partition: prefix + valid + test = original length") {
    Rng rng(3);
    std::vector<InteractionRecord> records;
    for (int u = 0; u < 20; ++u) {
      const size_t len = 1 + rng.next_below(8);
      for (size_t t = 0; t < len; ++t) {
        records.push_back({"u" + std::to_string(u),
                           "i" + std::to_string(rng.next_below(30)),
                           static_cast<int64_t>(t)});
      }
    }
    const auto corpus = build_corpus(records);
    const auto split = leave_one_out_split(corpus);
    for (size_t u = 0; u < corpus.sequences.size(); ++u) {
      const size_t held = (split.valid_target[u] >= 0 ? 1 : 0) +
                          (split.test_target[u] >= 0 ? 1 : 0);
      CHECK(split.train[u].size() + held == corpus.sequences[u].size());
    }
  }
}

TEST_CASE("corpus serialization round trip") {
  const auto corpus = build_corpus(
      make_records({{"u1", "A", 300}, {"u1", "B", 100}, {"u1", "C", 200},
                    {"u2", "A", 5}, {"u2", "C", 9}}));
  std::ostringstream vocab_out, seq_out;
  save_vocab(corpus, vocab_out);
  save_sequences(corpus, seq_out);

  std::istringstream vocab_in(vocab_out.str()), seq_in(seq_out.str());
  const auto loaded = load_corpus(vocab_in, seq_in);
  CHECK(loaded.num_items() == corpus.num_items());
  REQUIRE(loaded.sequences.size() == corpus.sequences.size());
  for (size_t u = 0; u < corpus.sequences.size(); ++u) {
    CHECK(loaded.sequences[u] == corpus.sequences[u]);
  }
  CHECK(loaded.item_tokens == corpus.item_tokens);
}

TEST_CASE("load_corpus rejects malformed artifacts") {
  std::istringstream bad_vocab("A\t1\n");  // index not dense from 0
  std::istringstream seqs("");
  CHECK_THROWS_AS(load_corpus(bad_vocab, seqs), DataError);
}
