#include <doctest.h>

#include <stdexcept>

#include <cstdio>
#include <string>

#include "hemb/tokenizer.hpp"
#include "hemb/vocabulary.hpp"

using namespace hemb;

namespace {

VocabBuilder builder_from(const std::vector<std::string>& texts) {
  VocabBuilder builder;
  for (const auto& text : texts) builder.add_all(tokenize(text));
  return builder;
}

}  // namespace

TEST_CASE("build keeps the most frequent words, ties lexicographic, freq over full stream") {
  auto vocab = builder_from({"a a b", "b c"}).build(2);
  REQUIRE(vocab.size() == 2);
  CHECK(vocab.word(0) == "a");
  CHECK(vocab.word(1) == "b");
  CHECK(vocab.count(0) == 2);
  CHECK(vocab.count(1) == 2);
  // 5 tokens seen in total, including the truncated-away 'c'.
  CHECK(vocab.freq(0) == doctest::Approx(2.0 / 5.0).epsilon(1e-12));
  CHECK(vocab.freq(1) == doctest::Approx(2.0 / 5.0).epsilon(1e-12));
  CHECK(vocab.total_tokens() == 5);
  CHECK(!vocab.find("c"));
}

TEST_CASE("max_size 1 keeps the single most frequent word") {
  auto vocab = builder_from({"a b a"}).build(1);
  REQUIRE(vocab.size() == 1);
  CHECK(vocab.word(0) == "a");
}

TEST_CASE("60K distinct tokens truncate to a 50K vocabulary") {
  VocabBuilder builder;
  for (int i = 0; i < 60000; ++i) builder.add("t" + std::to_string(i));
  auto vocab = builder.build(50000);
  CHECK(vocab.size() == 50000);
}

TEST_CASE("empty stream is an error") {
  VocabBuilder builder;
  CHECK_THROWS_WITH_AS(builder.build(10), "empty corpus", std::runtime_error);
}

TEST_CASE("word ids round-trip and order is count-descending") {
  auto vocab = builder_from({"d d d c c b a", "b c d"}).build(10);
  for (WordId id = 0; id < vocab.size(); ++id) {
    CHECK(vocab.id_of(vocab.word(id)) == id);
  }
  for (WordId id = 1; id < vocab.size(); ++id) {
    const bool ordered = vocab.count(id - 1) > vocab.count(id) ||
                         (vocab.count(id - 1) == vocab.count(id) &&
                          vocab.word(id - 1) < vocab.word(id));
    CHECK(ordered);
  }
}

TEST_CASE("untruncated frequencies sum to one") {
  auto vocab = builder_from({"a a b c", "d e f g a b"}).build(100);
  double sum = 0.0;
  for (WordId id = 0; id < vocab.size(); ++id) sum += vocab.freq(id);
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("sharded builders merge associatively") {
  VocabBuilder a = builder_from({"x x y"});
  VocabBuilder b = builder_from({"y z"});
  a.merge(b);
  auto vocab = a.build(10);
  CHECK(vocab.count(vocab.id_of("x")) == 2);
  CHECK(vocab.count(vocab.id_of("y")) == 2);
  CHECK(vocab.count(vocab.id_of("z")) == 1);
  CHECK(vocab.total_tokens() == 5);
}

TEST_CASE("vocabulary file round-trip") {
  auto vocab = builder_from({"alpha alpha beta gamma"}).build(10);
  const std::string path = "vocab_roundtrip_test.tsv";
  vocab.save(path);
  auto loaded = Vocabulary::load(path);
  REQUIRE(loaded.size() == vocab.size());
  for (WordId id = 0; id < vocab.size(); ++id) {
    CHECK(loaded.word(id) == vocab.word(id));
    CHECK(loaded.count(id) == vocab.count(id));
  }
  std::remove(path.c_str());
}
