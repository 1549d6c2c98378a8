#include <doctest.h>

#include "openattr/vocab.hpp"
#include "test_util.hpp"

using namespace openattr;

TEST_SUITE_BEGIN("vocab");

namespace {

std::vector<TokenizedBook> corpus_of(const std::vector<std::string>& texts) {
  std::vector<TokenizedBook> books;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    books.push_back(testutil::text_book(static_cast<int>(i), 0, BookRole::Known, texts[i]));
  }
  return books;
}

}  // namespace

TEST_CASE("build_vocabulary ranks by frequency") {
  auto books = corpus_of({"the cat the dog the cat"});
  Vocabulary v = build_vocabulary(books, 2);
  REQUIRE(v.words.size() == 2);
  CHECK(v.words[0] == "the");
  CHECK(v.words[1] == "cat");
}

TEST_CASE("frequency ties break lexicographically") {
  auto books = corpus_of({"b a b a b a b a b a c"});
  Vocabulary v = build_vocabulary(books, 3);
  REQUIRE(v.words.size() == 3);
  CHECK(v.words[0] == "a");  // a and b tie at 5; a sorts first
  CHECK(v.words[1] == "b");
  CHECK(v.words[2] == "c");
}

TEST_CASE("capitalization heuristic excludes name-like tokens") {
  // "london" capitalized in all non-sentence-initial occurrences, >= 10 times.
  std::string text;
  for (int i = 0; i < 12; ++i) text += "we went to London again. ";
  text += "the road was long and the road was dusty. ";
  auto books = corpus_of({text});
  Vocabulary v = build_vocabulary(books, 5);
  CHECK(!lookup(v, "london").has_value());
  CHECK(lookup(v, "we").has_value());

  NameFilterPolicy off;
  off.enabled = false;
  Vocabulary raw = build_vocabulary(books, 5, off);
  CHECK(lookup(raw, "london").has_value());
}

TEST_CASE("rare capitalized tokens stay (below the count threshold)") {
  std::string text = "we saw Westminster today. ";
  text += "the cat sat on the mat and the dog sat on the rug. ";
  auto books = corpus_of({text});
  Vocabulary v = build_vocabulary(books, 12);  // every distinct token
  CHECK(lookup(v, "westminster").has_value());  // only 1 occurrence, heuristic silent
}

TEST_CASE("honorifics are excluded by the static list") {
  std::string text;
  for (int i = 0; i < 20; ++i) text += "then mr smith spoke to the crowd. ";
  auto books = corpus_of({text});
  Vocabulary v = build_vocabulary(books, 5);
  CHECK(!lookup(v, "mr").has_value());
  // "smith" always follows "mr" but lowercase here, so it survives
  CHECK(lookup(v, "smith").has_value());
}

TEST_CASE("lookup returns rank index or nothing") {
  auto books = corpus_of({"the cat the"});
  Vocabulary v = build_vocabulary(books, 2);
  CHECK(lookup(v, "the") == 0);
  CHECK(lookup(v, "cat") == 1);
  CHECK(!lookup(v, "dog").has_value());
  CHECK(!lookup(v, "").has_value());
}

TEST_CASE("build_vocabulary rejects k beyond the distinct token count") {
  auto books = corpus_of({"one two three"});
  CHECK_THROWS_AS(build_vocabulary(books, 4), Error);
  CHECK_THROWS_AS(build_vocabulary(books, 0), Error);
}

TEST_CASE("smaller vocabulary is a prefix of a larger one") {
  std::string text =
      "the cat sat on a mat while the dog ran over the hill and a bird "
      "flew over the river then the cat slept and the dog slept too";
  auto books = corpus_of({text});
  Vocabulary small = build_vocabulary(books, 4);
  Vocabulary large = build_vocabulary(books, 9);
  for (std::size_t i = 0; i < small.words.size(); ++i) {
    CHECK(small.words[i] == large.words[i]);
  }
}

TEST_CASE("frequency ordering invariant holds") {
  std::string text =
      "alpha alpha alpha beta beta gamma gamma delta epsilon epsilon epsilon epsilon";
  auto books = corpus_of({text});
  Vocabulary v = build_vocabulary(books, 5);
  std::unordered_map<std::string, int> freq;
  for (const auto& s : books[0].text.sentences) {
    for (const auto& t : s) freq[t]++;
  }
  for (std::size_t i = 0; i + 1 < v.words.size(); ++i) {
    int fi = freq[v.words[i]], fj = freq[v.words[i + 1]];
    CHECK(fi >= fj);
    if (fi == fj) CHECK(v.words[i] < v.words[i + 1]);
  }
}

TEST_CASE("vocabulary serialization is bit-stable and round-trips") {
  auto books = corpus_of({"the cat sat on the mat with the dog"});
  Vocabulary v = build_vocabulary(books, 5);
  std::string first = vocabulary_to_json(v).dump(2);
  std::string second = vocabulary_to_json(build_vocabulary(books, 5)).dump(2);
  CHECK(first == second);
  Vocabulary back = vocabulary_from_json(nlohmann::json::parse(first));
  CHECK(back.words == v.words);
  CHECK(vocabulary_to_json(back).dump(2) == first);
}

TEST_CASE("vocabulary json rejects bad versions") {
  nlohmann::json j = {{"version", 99}, {"k", 1}, {"words", {"a"}}};
  CHECK_THROWS_AS(vocabulary_from_json(j), Error);
}

TEST_SUITE_END();
