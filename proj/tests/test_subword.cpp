#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <string>

#include "dialectqe/errors.hpp"
#include "dialectqe/rng.hpp"
#include "dialectqe/subword.hpp"
#include "support/oracles.hpp"
#include "support/paths.hpp"

using namespace dialectqe;
using namespace dialectqe::subword;
using testsupport::TempDir;

namespace {

std::string merge_left(const TokenizerModel& m, std::size_t i) {
  return m.token_bytes(m.merges()[i].first);
}
std::string merge_right(const TokenizerModel& m, std::size_t i) {
  return m.token_bytes(m.merges()[i].second);
}

}  // namespace

TEST_SUITE("subword") {

TEST_CASE("train_bpe on the abab corpus") {
  const TokenizerModel m = train_bpe({"abab", "ab"}, {258, 1});
  REQUIRE(m.merges().size() == 2);
  CHECK(merge_left(m, 0) == "a");
  CHECK(merge_right(m, 0) == "b");
  CHECK(merge_left(m, 1) == "ab");
  CHECK(merge_right(m, 1) == "ab");
  CHECK(m.token_id("ab").has_value());
  CHECK(m.token_id("abab").has_value());
  CHECK(m.vocab_size() == 258);

  // encode applies both merges in order
  const auto ids = m.encode("abab");
  REQUIRE(ids.size() == 1);
  CHECK(m.token_bytes(ids[0]) == "abab");
}

TEST_CASE("train_bpe degenerate cases") {
  const TokenizerModel m = train_bpe({"x"}, {256, 1});
  CHECK(m.merges().empty());
  CHECK(m.vocab_size() == 256);

  CHECK_THROWS_AS(train_bpe({}, {300, 1}), Error);
  CHECK_THROWS_AS(train_bpe({"abc"}, {255, 1}), Error);
  CHECK_THROWS_AS(train_bpe({"abc"}, {300, 0}), Error);
}

TEST_CASE("train_bpe determinism") {
  SplitMix64 rng(5);
  const auto corpus = testsupport::random_small_corpus(rng, 600);
  const TokenizerModel a = train_bpe(corpus, {300, 2});
  const TokenizerModel b = train_bpe(corpus, {300, 2});
  REQUIRE(a.merges().size() == b.merges().size());
  for (std::size_t i = 0; i < a.merges().size(); ++i)
    CHECK(a.merges()[i] == b.merges()[i]);
}

TEST_CASE("min_pair_frequency stops training") {
  // every pair unique -> nothing reaches frequency 2
  const TokenizerModel m = train_bpe({"abcdefg"}, {400, 2});
  CHECK(m.merges().empty());
}

TEST_CASE("merge sequence matches the brute-force oracle") {
  SplitMix64 rng(31337);
  for (int iter = 0; iter < 10; ++iter) {
    const auto corpus = testsupport::random_small_corpus(rng, 800);
    const std::size_t target = 256 + 1 + rng.next_below(60);
    const std::size_t min_freq = 1 + rng.next_below(3);

    const TokenizerModel model = train_bpe(corpus, {target, min_freq});
    testsupport::BruteForceBpe oracle;
    oracle.train(corpus, target, min_freq);

    REQUIRE(model.merges().size() == oracle.merges.size());
    for (std::size_t i = 0; i < oracle.merges.size(); ++i) {
      CHECK(merge_left(model, i) == oracle.merges[i].first);
      CHECK(merge_right(model, i) == oracle.merges[i].second);
    }
  }
}

TEST_CASE("encode/decode identity on random UTF-8") {
  SplitMix64 rng(17);
  const auto corpus = testsupport::random_small_corpus(rng, 1000);
  const TokenizerModel m = train_bpe(corpus, {320, 1});
  for (int iter = 0; iter < 200; ++iter) {
    const std::string s = testsupport::random_utf8(rng, 80);
    const auto decoded = m.decode(m.encode(s));
    CHECK(decoded.text == s);
    CHECK_FALSE(decoded.lossy);
  }
  CHECK(m.encode("").empty());
  CHECK(m.decode({}).text == "");
}

TEST_CASE("decode error and replacement policy") {
  const TokenizerModel m = train_bpe({"ab"}, {257, 1});
  CHECK_THROWS_AS(m.decode({999999}), Error);
  // 0xE0 alone is an ill-formed UTF-8 prefix
  const auto d = m.decode({0xE0, 'a'});
  CHECK(d.lossy);
  CHECK(d.text.find("\xEF\xBF\xBD") != std::string::npos);
}

TEST_CASE("vocab_diff basics and closure") {
  const TokenizerModel dialect = train_bpe({"যাইনু যাইনু যাইনু"}, {290, 1});
  const TokenizerModel base = train_bpe({"the cat sat the cat"}, {280, 1});

  const auto diff = vocab_diff(dialect, base);
  CHECK(!diff.empty());
  // dialect-id order and no byte symbols
  for (const auto& tok : diff) CHECK(tok.size() > 1);

  const auto same = vocab_diff(base, base);
  CHECK(same.empty());

  const TokenizerModel extended = extend_vocab(base, diff);
  CHECK(vocab_diff(dialect, extended).empty());
}

TEST_CASE("extend_vocab appends, preserves ids, idempotent") {
  const TokenizerModel base = train_bpe({"aa bb aa bb"}, {260, 1});
  const std::size_t v = base.vocab_size();

  const TokenizerModel ext = extend_vocab(base, {"xyz", "pqr"});
  CHECK(ext.vocab_size() == v + 2);
  for (std::size_t id = 0; id < v; ++id)
    CHECK(ext.token_bytes(static_cast<int>(id)) == base.token_bytes(static_cast<int>(id)));
  CHECK(ext.added_tokens() == std::vector<std::string>{"xyz", "pqr"});

  const TokenizerModel same = extend_vocab(ext, {"xyz", "pqr"});
  CHECK(same.vocab_size() == ext.vocab_size());
  CHECK(same.added_tokens() == ext.added_tokens());

  // extending with an existing merge token is a no-op too
  const std::string existing = base.token_bytes(256);
  CHECK(extend_vocab(base, {existing}).vocab_size() == v);

  CHECK_THROWS_AS(extend_vocab(base, {""}), Error);
}

TEST_CASE("added tokens match greedily before BPE") {
  const TokenizerModel base = train_bpe({"hello hello"}, {260, 1});
  const TokenizerModel ext = extend_vocab(base, {"ab", "abc"});

  // longest added token wins at a position
  const auto ids = ext.encode("abcx");
  REQUIRE(ids.size() == 2);
  CHECK(ext.token_bytes(ids[0]) == "abc");
  CHECK(ext.token_bytes(ids[1]) == "x");

  const auto ids2 = ext.encode("abx");
  REQUIRE(ids2.size() == 2);
  CHECK(ext.token_bytes(ids2[0]) == "ab");

  // round trip still holds with added tokens
  const auto d = ext.decode(ext.encode("xxabcabyy"));
  CHECK(d.text == "xxabcabyy");
}

TEST_CASE("trained vocab bounds and merge count invariant") {
  SplitMix64 rng(8);
  const auto corpus = testsupport::random_small_corpus(rng, 900);
  const TokenizerModel m = train_bpe(corpus, {310, 1});
  CHECK(m.vocab_size() <= 310);
  CHECK(m.merges().size() == m.vocab_size() - 256);
}

TEST_CASE("grafting never lengthens dialect-corpus tokenizations") {
  // The bundled base corpus is ASCII-only, so base merges cannot straddle the
  // boundaries of grafted Bengali-script tokens.
  std::ifstream in(testsupport::data_file("dialect_corpus.txt"), std::ios::binary);
  REQUIRE(in);
  std::vector<std::string> dialect_lines;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) dialect_lines.push_back(line);
  REQUIRE(dialect_lines.size() > 50);

  const TokenizerModel base = load_tokenizer(testsupport::data_file("base_tokenizer.json"));
  const TokenizerModel dialect = train_bpe(dialect_lines, {1200, 2});
  const auto novel = vocab_diff(dialect, base);
  REQUIRE(!novel.empty());
  const TokenizerModel extended = extend_vocab(base, novel);

  std::size_t shorter = 0;
  for (const auto& sentence : dialect_lines) {
    const std::size_t base_len = base.encode(sentence).size();
    const std::size_t ext_len = extended.encode(sentence).size();
    CHECK(ext_len <= base_len);
    if (ext_len < base_len) ++shorter;
  }
  // the grafted vocabulary must actually help, not just not hurt
  CHECK(shorter > dialect_lines.size() / 2);
}

TEST_CASE("save/load round trip is observationally identical") {
  TempDir tmp("subword");
  SplitMix64 rng(23);
  const auto corpus = testsupport::random_small_corpus(rng, 700);
  TokenizerModel m = train_bpe(corpus, {300, 1});
  m = extend_vocab(m, {"added-one", "আমি"});

  save_tokenizer(m, tmp.file("tok.json"));
  const TokenizerModel loaded = load_tokenizer(tmp.file("tok.json"));

  CHECK(loaded.vocab_size() == m.vocab_size());
  CHECK(loaded.added_tokens() == m.added_tokens());
  for (int iter = 0; iter < 100; ++iter) {
    const std::string probe = testsupport::random_utf8(rng, 60);
    CHECK(loaded.encode(probe) == m.encode(probe));
  }
}

TEST_CASE("load_tokenizer rejects corrupt and unknown-version files") {
  TempDir tmp("subword");
  const TokenizerModel m = train_bpe({"abab"}, {258, 1});
  save_tokenizer(m, tmp.file("tok.json"));

  const std::string full = testsupport::read_file(tmp.file("tok.json"));
  testsupport::write_file(tmp.file("trunc.json"), full.substr(0, full.size() / 2));
  try {
    load_tokenizer(tmp.file("trunc.json"));
    FAIL("expected format error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::format);
  }

  std::string versioned = full;
  const auto pos = versioned.find("\"version\": 1");
  REQUIRE(pos != std::string::npos);
  versioned.replace(pos, 12, "\"version\": 9");
  testsupport::write_file(tmp.file("v9.json"), versioned);
  try {
    load_tokenizer(tmp.file("v9.json"));
    FAIL("expected version error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::format);
    CHECK(std::string(e.what()).find("version") != std::string::npos);
  }

  testsupport::write_file(tmp.file("notok.json"), "{\"format\": \"something-else\"}");
  CHECK_THROWS_AS(load_tokenizer(tmp.file("notok.json")), Error);
}

}  // TEST_SUITE
