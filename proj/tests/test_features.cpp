#include <doctest.h>

#include <sstream>

#include "openattr/features.hpp"
#include "openattr/rng.hpp"
#include "test_util.hpp"

using namespace openattr;

TEST_SUITE_BEGIN("features");

namespace {

Vocabulary tiny_vocab(const std::vector<std::string>& words) {
  Vocabulary v;
  v.words = words;
  for (std::size_t i = 0; i < words.size(); ++i) v.index.emplace(words[i], static_cast<int>(i));
  return v;
}

FeatureVector random_sparse(Rng& rng, std::uint32_t dim) {
  FeatureVector fv;
  fv.dim = dim;
  for (std::uint32_t i = 0; i < dim; ++i) {
    if (rng.uniform01() < 0.3) {
      fv.indices.push_back(i);
      fv.values.push_back(0.05 + rng.uniform01() * 10.0);
    }
  }
  return fv;
}

}  // namespace

TEST_CASE("chunk_book drops the trailing partial chunk") {
  TokenizedBook tb = testutil::dummy_book(3, 1, BookRole::Known, 120);
  auto chunks = chunk_book(tb, ChunkSize::count(50));
  REQUIRE(chunks.size() == 2);
  CHECK(chunks[0].start_sentence == 0);
  CHECK(chunks[0].n_sentences == 50);
  CHECK(chunks[1].start_sentence == 50);
  CHECK(chunks[1].n_sentences == 50);
  CHECK(chunks[0].book_id == 3);
  CHECK(chunks[0].author_id == 1);
}

TEST_CASE("chunk_book exact fit and whole-book modes") {
  TokenizedBook tb = testutil::dummy_book(0, 0, BookRole::Known, 50);
  CHECK(chunk_book(tb, ChunkSize::count(50)).size() == 1);
  auto whole = chunk_book(tb, ChunkSize::whole_book());
  REQUIRE(whole.size() == 1);
  CHECK(whole[0].n_sentences == 50);
  TokenizedBook longer = testutil::dummy_book(1, 0, BookRole::Known, 777);
  CHECK(chunk_book(longer, ChunkSize::whole_book()).size() == 1);
}

TEST_CASE("chunk_book yields nothing for a too-short book") {
  TokenizedBook tb = testutil::dummy_book(0, 0, BookRole::Known, 30);
  CHECK(chunk_book(tb, ChunkSize::count(50)).empty());
}

TEST_CASE("vectorize counts vocabulary hits") {
  Vocabulary v = tiny_vocab({"the", "cat", "dog"});
  std::vector<std::string> tokens = {"the", "cat", "the"};
  FeatureVector fv = vectorize_tokens(tokens, v);
  CHECK(fv.indices == std::vector<std::uint32_t>{0, 1});
  CHECK(fv.values == std::vector<double>{2.0, 1.0});
  CHECK(fv.dim == 3);
}

TEST_CASE("vectorize ignores out-of-vocabulary tokens") {
  Vocabulary v = tiny_vocab({"the", "cat"});
  std::vector<std::string> oov = {"fish", "bird"};
  CHECK(vectorize_tokens(oov, v).nnz() == 0);
  std::vector<std::string> none;
  CHECK(vectorize_tokens(none, v).nnz() == 0);
}

TEST_CASE("vectorize is permutation-invariant") {
  Vocabulary v = tiny_vocab({"a", "b", "c", "d"});
  std::vector<std::string> tokens = {"a", "c", "b", "a", "c", "c", "x"};
  FeatureVector fv1 = vectorize_tokens(tokens, v);
  std::vector<std::string> shuffled = {"c", "a", "x", "c", "b", "a", "c"};
  CHECK(vectorize_tokens(shuffled, v) == fv1);
}

TEST_CASE("row_normalize divides by the maximum stored value") {
  FeatureVector fv;
  fv.dim = 5;
  fv.indices = {0, 2, 4};
  fv.values = {2.0, 4.0, 1.0};
  FeatureVector out = row_normalize(fv);
  CHECK(out.values == std::vector<double>{0.5, 1.0, 0.25});
  CHECK(out.indices == fv.indices);

  FeatureVector single;
  single.dim = 1;
  single.indices = {0};
  single.values = {3.0};
  CHECK(row_normalize(single).values == std::vector<double>{1.0});

  FeatureVector empty;
  empty.dim = 4;
  CHECK(row_normalize(empty) == empty);
}

TEST_CASE("column scaler from two hand-computed rows") {
  FeatureVector a;
  a.dim = 2;
  a.indices = {0, 1};
  a.values = {1.0, 0.5};
  FeatureVector b;
  b.dim = 2;
  b.indices = {0};
  b.values = {0.25};
  ColumnScaler s = fit_column_scaler({a, b}, 2);
  CHECK(s.max_abs == std::vector<double>{1.0, 0.5});
  FeatureVector scaled = apply_scaler(s, a);
  CHECK(scaled.values == std::vector<double>{1.0, 1.0});
}

TEST_CASE("scaler passes through columns never seen in training") {
  FeatureVector train;
  train.dim = 3;
  train.indices = {0};
  train.values = {2.0};
  ColumnScaler s = fit_column_scaler({train}, 3);
  FeatureVector test;
  test.dim = 3;
  test.indices = {1};
  test.values = {0.7};
  FeatureVector out = apply_scaler(s, test);
  CHECK(out.values == std::vector<double>{0.7});

  FeatureVector empty;
  empty.dim = 3;
  CHECK(apply_scaler(s, empty) == empty);
}

TEST_CASE("scaler rejects dimension mismatches") {
  ColumnScaler s;
  s.max_abs = {1.0, 2.0};
  FeatureVector fv;
  fv.dim = 3;
  CHECK_THROWS_AS(apply_scaler(s, fv), Error);
  FeatureVector row;
  row.dim = 5;
  CHECK_THROWS_AS(fit_column_scaler({row}, 2), Error);
}

TEST_CASE("normalization preserves sparsity and bounds values") {
  Rng rng(1234);
  for (int iter = 0; iter < 300; ++iter) {
    std::uint32_t dim = static_cast<std::uint32_t>(rng.uniform_int(1, 40));
    std::vector<FeatureVector> train;
    for (int r = 0; r < 5; ++r) train.push_back(random_sparse(rng, dim));
    ColumnScaler scaler = fit_column_scaler(train, dim);

    FeatureVector fv = random_sparse(rng, dim);
    FeatureVector normalized = row_normalize(fv);
    CHECK(normalized.indices == fv.indices);
    if (!normalized.values.empty()) {
      double max_seen = 0.0;
      for (double v : normalized.values) {
        CHECK(v > 0.0);
        CHECK(v <= 1.0);
        max_seen = std::max(max_seen, v);
      }
      CHECK(max_seen == 1.0);
    }
    FeatureVector scaled = apply_scaler(scaler, normalized);
    CHECK(scaled.indices == normalized.indices);
  }
}

TEST_CASE("pipeline is deterministic") {
  Vocabulary v = tiny_vocab({"a", "b", "c"});
  std::vector<std::string> tokens = {"a", "b", "b", "c", "c", "c"};
  FeatureVector r1 = row_normalize(vectorize_tokens(tokens, v));
  FeatureVector r2 = row_normalize(vectorize_tokens(tokens, v));
  CHECK(r1 == r2);
}

TEST_CASE("feature dump format") {
  DocumentChunk chunk{7, 2, 1, 50, 50};
  FeatureVector fv;
  fv.dim = 4;
  fv.indices = {0, 3};
  fv.values = {1.0, 0.25};
  std::ostringstream out;
  write_feature_record(out, chunk, fv);
  CHECK(out.str() == "7,1,2,0:1 3:0.25\n");
}

TEST_SUITE_END();
