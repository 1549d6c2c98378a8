#include <doctest.h>

#include <sstream>

#include "openattr/experiments.hpp"
#include "test_util.hpp"

using namespace openattr;

TEST_SUITE_BEGIN("interfaces");

TEST_CASE("vocabulary file round-trip") {
  testutil::TempDir dir("vocab_file");
  Vocabulary v;
  v.words = {"the", "cat", "don't"};
  for (std::size_t i = 0; i < v.words.size(); ++i) v.index.emplace(v.words[i], (int)i);
  save_vocabulary(v, dir.path() / "vocab.json");
  Vocabulary back = load_vocabulary(dir.path() / "vocab.json");
  CHECK(back.words == v.words);
  nlohmann::json j = nlohmann::json::parse(read_file(dir.path() / "vocab.json"));
  CHECK(j["version"] == 1);
  CHECK(j["k"] == 3);
}

TEST_CASE("model file round-trip preserves the serialized form") {
  testutil::TempDir dir("model_file");
  OpenSetModel m;
  m.vocab.words = {"a", "b"};
  m.vocab.index = {{"a", 0}, {"b", 1}};
  m.scaler.max_abs = {1.0, 0.5};
  m.feature_config = FeatureConfig{ChunkSize::count(10), 2, true, {}};
  for (int a = 0; a < 2; ++a) {
    AuthorModel am;
    am.author_id = a;
    am.name = "author_" + std::to_string(a);
    am.model.weights = {0.25 * (a + 1), -0.125};
    am.model.bias = 0.0625 - a;
    am.model.alpha = 1e-3;
    m.models.push_back(std::move(am));
  }
  save_open_set_model(m, dir.path() / "model.json");
  OpenSetModel back = load_open_set_model(dir.path() / "model.json");
  CHECK(open_set_model_to_json(back).dump(2) == open_set_model_to_json(m).dump(2));
  CHECK(back.feature_config.chunk.sentences == 10);
  CHECK(back.models[1].model.bias == m.models[1].model.bias);
}

TEST_CASE("feature dump records parse back to the same sparse rows") {
  std::ostringstream out;
  DocumentChunk c1{0, 0, 0, 0, 10};
  DocumentChunk c2{1, 1, 3, 30, 10};
  FeatureVector f1;
  f1.dim = 5;
  f1.indices = {1, 4};
  f1.values = {0.5, 1.0};
  FeatureVector f2;
  f2.dim = 5;
  write_feature_record(out, c1, f1);
  write_feature_record(out, c2, f2);
  std::istringstream in(out.str());
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "0,0,0,1:0.5 4:1");
  REQUIRE(std::getline(in, line));
  CHECK(line == "1,3,1,");
  CHECK(!std::getline(in, line));
}

TEST_CASE("config files load with relative manifest resolution") {
  testutil::TempDir dir("config_file");
  write_file(dir.path() / "corpus" / "manifest.csv", "author,title,path,role\n");
  nlohmann::ordered_json j;
  j["version"] = 1;
  j["manifest"] = "corpus/manifest.csv";
  j["seed"] = 7;
  j["epochs"] = 5;
  write_file(dir.path() / "config.json", j.dump(2));
  ExperimentConfig cfg = load_experiment_config(dir.path() / "config.json");
  CHECK(cfg.seed == 7);
  CHECK(cfg.train.epochs == 5);
  CHECK(cfg.manifest == dir.path() / "corpus" / "manifest.csv");
}

TEST_CASE("manifest role strings are strict") {
  testutil::TempDir dir("roles");
  write_file(dir.path() / "b.txt", "Text.");
  write_file(dir.path() / "m.csv",
             "author,title,path,role\n"
             "X,One,b.txt,KNOWN\n");
  CHECK_THROWS_AS(load_manifest(dir.path() / "m.csv"), Error);
}

TEST_SUITE_END();
