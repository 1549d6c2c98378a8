#include <doctest.h>

#include "openattr/experiments.hpp"
#include "openattr/synthetic.hpp"
#include "test_util.hpp"

using namespace openattr;

TEST_SUITE_BEGIN("synthetic");

namespace {

SyntheticSpec small_spec() {
  SyntheticSpec s;
  s.n_authors = 3;
  s.n_ood_authors = 2;
  s.books_per_author = 3;
  s.ood_books_per_author = 2;
  s.sentences_per_book = 120;
  s.vocab_pool = 80;
  s.separation = 6.0;
  s.seed = 11;
  return s;
}

}  // namespace

TEST_CASE("generation is byte-identical for the same seed") {
  testutil::TempDir d1("synth_a");
  testutil::TempDir d2("synth_b");
  SyntheticSpec spec = small_spec();
  auto m1 = make_synthetic_corpus(spec, d1.path());
  auto m2 = make_synthetic_corpus(spec, d2.path());
  CHECK(read_file(m1) == read_file(m2));
  Corpus c1 = load_manifest(m1);
  Corpus c2 = load_manifest(m2);
  REQUIRE(c1.books.size() == c2.books.size());
  for (std::size_t i = 0; i < c1.books.size(); ++i) {
    CHECK(read_file(c1.books[i].path) == read_file(c2.books[i].path));
  }
}

TEST_CASE("different seeds change the text") {
  testutil::TempDir d1("synth_c");
  testutil::TempDir d2("synth_d");
  SyntheticSpec spec = small_spec();
  auto m1 = make_synthetic_corpus(spec, d1.path());
  spec.seed = 12;
  auto m2 = make_synthetic_corpus(spec, d2.path());
  Corpus c1 = load_manifest(m1);
  Corpus c2 = load_manifest(m2);
  CHECK(read_file(c1.books[0].path) != read_file(c2.books[0].path));
}

TEST_CASE("generated corpus has the requested shape") {
  testutil::TempDir dir("synth_shape");
  SyntheticSpec spec = small_spec();
  auto manifest = make_synthetic_corpus(spec, dir.path());
  Corpus corpus = load_manifest(manifest);
  CHECK(corpus.authors.size() == 5);
  CHECK(corpus.books.size() == 3 * 3 + 2 * 2);
  int known = 0, ood_val = 0, ood_test = 0;
  for (const BookRef& b : corpus.books) {
    if (b.role == BookRole::Known) ++known;
    if (b.role == BookRole::OodValidation) ++ood_val;
    if (b.role == BookRole::OodTest) ++ood_test;
  }
  CHECK(known == 9);
  CHECK(ood_val == 2);   // one ood author's books
  CHECK(ood_test == 2);  // the other's
  std::vector<TokenizedBook> books = tokenize_corpus(corpus);
  for (const TokenizedBook& tb : books) {
    CHECK(tb.text.sentences.size() == 120);
  }
}

TEST_CASE("sentence lengths respect the configured range") {
  testutil::TempDir dir("synth_len");
  SyntheticSpec spec = small_spec();
  spec.sentence_words_min = 4;
  spec.sentence_words_max = 6;
  auto manifest = make_synthetic_corpus(spec, dir.path());
  Corpus corpus = load_manifest(manifest);
  std::vector<TokenizedBook> books = tokenize_corpus(corpus);
  for (const auto& sentence : books[0].text.sentences) {
    CHECK(sentence.size() >= 4);
    CHECK(sentence.size() <= 6);
  }
}

TEST_CASE("high separation makes authors trivially distinguishable") {
  testutil::TempDir dir("synth_sep");
  SyntheticSpec spec = small_spec();
  spec.n_ood_authors = 0;
  spec.separation = 10.0;
  auto manifest = make_synthetic_corpus(spec, dir.path());
  PreparedCorpus pc = prepare_corpus(manifest, 42);
  ExperimentConfig cfg;
  cfg.seed = 42;
  cfg.train.epochs = 10;
  cfg.train.alpha_grid = {1e-4, 1e-3, 1e-2};
  cfg.grid_chunk_sizes = {ChunkSize::count(20)};
  cfg.grid_vocab_sizes = {40};
  GridResult g = run_grid_closed(pc, cfg);
  CHECK(g.macro_f1[0][0] >= 0.9);
}

TEST_CASE("invalid specs are rejected") {
  testutil::TempDir dir("synth_bad");
  SyntheticSpec spec = small_spec();
  spec.books_per_author = 2;
  CHECK_THROWS_AS(make_synthetic_corpus(spec, dir.path()), Error);
  spec = small_spec();
  spec.ood_clone_of = 99;
  CHECK_THROWS_AS(make_synthetic_corpus(spec, dir.path()), Error);
}

TEST_SUITE_END();
