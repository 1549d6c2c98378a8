#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "openattr/corpus.hpp"
#include "openattr/error.hpp"
#include "openattr/features.hpp"
#include "openattr/parallel.hpp"
#include "openattr/svm.hpp"
#include "openattr/vocab.hpp"

namespace openattr {

// Label value for "none of the known authors".
inline constexpr int kUnknownLabel = -1;

struct Prediction {
  int label = kUnknownLabel;  // author id, or kUnknownLabel
  std::vector<double> scores;  // one decision value per known author (id-ascending)
};

// Reject-or-argmax rule: UNKNOWN iff no score is positive, otherwise the
// first (lowest-slot) maximum.
inline int open_set_slot(const std::vector<double>& scores) {
  int best = -1;
  double best_score = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i] > 0.0 && (best < 0 || scores[i] > best_score)) {
      best = static_cast<int>(i);
      best_score = scores[i];
    }
  }
  return best;  // -1: rejected
}

// Plain argmax, no reject option; ties go to the lowest slot.
inline int closed_set_slot(const std::vector<double>& scores) {
  if (scores.empty()) fail("openset", "empty score vector");
  int best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  }
  return best;
}

struct FeatureConfig {
  ChunkSize chunk = ChunkSize::count(50);
  int vocab_size = 1000;
  bool normalize = true;  // row max normalization + column max-abs scaling
  NameFilterPolicy name_filter{};
};

struct AuthorModel {
  int author_id = -1;
  std::string name;
  LinearModel model;
  double validation_f1 = 0.0;
};

struct OpenSetModel {
  std::vector<AuthorModel> models;  // ascending author id
  Vocabulary vocab;
  ColumnScaler scaler;
  FeatureConfig feature_config;
  TrainConfig train_config;
  Regularization reg = Regularization::L2;

  int author_count() const { return static_cast<int>(models.size()); }
};

// ---------------------------------------------------------------------------
// Dataset assembly: chunk + vectorize + (optional) row normalization.
// Column scaling is applied afterwards with a scaler fitted on train rows.
// ---------------------------------------------------------------------------

struct Dataset {
  std::vector<FeatureVector> rows;
  std::vector<int> authors;        // true author id per row
  std::vector<DocumentChunk> docs;  // provenance per row
  int dropped_books = 0;            // books shorter than one chunk
};

inline Dataset make_dataset(const std::vector<TokenizedBook>& books,
                            const std::vector<int>& book_ids, ChunkSize chunk,
                            const Vocabulary& vocab, bool row_norm) {
  Dataset ds;
  for (int id : book_ids) {
    const TokenizedBook& tb = books.at(static_cast<std::size_t>(id));
    std::vector<DocumentChunk> chunks = chunk_book(tb, chunk);
    if (chunks.empty()) {
      ds.dropped_books++;
      continue;
    }
    for (const DocumentChunk& c : chunks) {
      FeatureVector fv = vectorize(tb, c, vocab);
      if (row_norm) fv = row_normalize(std::move(fv));
      ds.rows.push_back(std::move(fv));
      ds.authors.push_back(c.author_id);
      ds.docs.push_back(c);
    }
  }
  return ds;
}

inline void scale_dataset(Dataset& ds, const ColumnScaler& scaler) {
  for (FeatureVector& fv : ds.rows) fv = apply_scaler(scaler, std::move(fv));
}

// Builds the ranked vocabulary from the train split (known books only reach
// the train split, so there is no leakage from validation/test text).
inline Vocabulary build_vocabulary_for_splits(const std::vector<TokenizedBook>& books,
                                              const SplitAssignment& splits, int k,
                                              const NameFilterPolicy& policy) {
  std::vector<const TokenizedBook*> train;
  for (int id : splits.books_in(Split::Train)) {
    train.push_back(&books.at(static_cast<std::size_t>(id)));
  }
  return build_vocabulary(train, k, policy);
}

enum class TrainMode {
  OpenSet,   // validation includes ood_validation books as negatives
  ClosedSet  // validation restricted to known authors
};

// One tuned binary model per known author, all text of the author positive
// and everything else negative. The column scaler is fitted on train rows
// only and stored with the model.
inline OpenSetModel train_open_set(const Corpus& corpus, const std::vector<TokenizedBook>& books,
                                   const SplitAssignment& splits, const Vocabulary& vocab,
                                   const FeatureConfig& fc, const TrainConfig& tc,
                                   Regularization reg = Regularization::L2,
                                   TrainMode mode = TrainMode::OpenSet, int threads = 1) {
  std::vector<int> train_ids = splits.books_in(Split::Train);
  std::vector<int> val_ids;
  for (int id : splits.books_in(Split::Validation)) {
    const BookRef& ref = corpus.books.at(static_cast<std::size_t>(id));
    if (mode == TrainMode::ClosedSet && ref.role != BookRole::Known) continue;
    val_ids.push_back(id);
  }

  Dataset train_ds = make_dataset(books, train_ids, fc.chunk, vocab, fc.normalize);
  if (train_ds.rows.empty()) fail("openset", "no training documents after chunking");
  ColumnScaler scaler;
  if (fc.normalize) {
    scaler = fit_column_scaler(train_ds.rows, static_cast<std::uint32_t>(vocab.k()));
    scale_dataset(train_ds, scaler);
  }
  Dataset val_ds = make_dataset(books, val_ids, fc.chunk, vocab, fc.normalize);
  if (fc.normalize) scale_dataset(val_ds, scaler);

  std::vector<int> known_authors;
  for (const Author& a : corpus.authors) {
    if (a.known) known_authors.push_back(a.id);
  }
  std::sort(known_authors.begin(), known_authors.end());
  if (known_authors.size() < 2) {
    fail("openset", "one-vs-all needs at least 2 known authors");
  }
  for (int a : known_authors) {
    if (std::count(train_ds.authors.begin(), train_ds.authors.end(), a) == 0) {
      fail("openset", "author '" + corpus.authors.at(static_cast<std::size_t>(a)).name +
                          "' has no training documents");
    }
  }

  OpenSetModel model;
  model.vocab = vocab;
  model.scaler = scaler;
  model.feature_config = fc;
  model.train_config = tc;
  model.reg = reg;
  model.models.resize(known_authors.size());
  parallel_for(known_authors.size(), threads, [&](std::size_t slot) {
    int author = known_authors[slot];
    std::vector<int> train_labels(train_ds.rows.size());
    for (std::size_t i = 0; i < train_ds.rows.size(); ++i) {
      train_labels[i] = train_ds.authors[i] == author ? 1 : -1;
    }
    std::vector<int> val_labels(val_ds.rows.size());
    for (std::size_t i = 0; i < val_ds.rows.size(); ++i) {
      val_labels[i] = val_ds.authors[i] == author ? 1 : -1;
    }
    const std::string& name = corpus.authors.at(static_cast<std::size_t>(author)).name;
    TuneTrace trace;
    LinearModel lm;
    try {
      lm = tune_alpha(train_ds.rows, train_labels, val_ds.rows, val_labels, tc, reg, &trace);
    } catch (const Error& e) {
      fail(e.type(), "author '" + name + "': " + e.what());
    }
    AuthorModel& am = model.models[slot];
    am.author_id = author;
    am.name = name;
    am.model = std::move(lm);
    am.validation_f1 = trace.best_f1;
  });
  return model;
}

inline std::vector<double> decision_scores(const OpenSetModel& m, const FeatureVector& fv) {
  std::vector<double> scores;
  scores.reserve(m.models.size());
  for (const AuthorModel& am : m.models) scores.push_back(decision(am.model, fv));
  return scores;
}

inline Prediction predict(const OpenSetModel& m, const FeatureVector& fv) {
  Prediction p;
  p.scores = decision_scores(m, fv);
  int slot = open_set_slot(p.scores);
  p.label = slot < 0 ? kUnknownLabel : m.models[static_cast<std::size_t>(slot)].author_id;
  return p;
}

inline int predict_closed(const OpenSetModel& m, const FeatureVector& fv) {
  std::vector<double> scores = decision_scores(m, fv);
  return m.models[static_cast<std::size_t>(closed_set_slot(scores))].author_id;
}

// ---------------------------------------------------------------------------
// Whole-document attribution.
// ---------------------------------------------------------------------------

struct AttributionReport {
  Prediction prediction;
  std::vector<std::pair<std::string, double>> top_authors;  // up to 5, by score
  std::size_t sentence_count = 0;
  std::size_t token_count = 0;
  std::size_t in_vocabulary_tokens = 0;
};

inline FeatureVector featurize_document(const OpenSetModel& m, const TokenizedText& text) {
  std::vector<std::string> tokens;
  for (const auto& s : text.sentences) tokens.insert(tokens.end(), s.begin(), s.end());
  FeatureVector fv = vectorize_tokens(tokens, m.vocab);
  if (m.feature_config.normalize) {
    fv = apply_scaler(m.scaler, row_normalize(std::move(fv)));
  }
  return fv;
}

inline AttributionReport attribute_document(const OpenSetModel& m, std::string_view raw_text) {
  TokenizedText text = tokenize(raw_text);
  if (text.token_count() == 0) fail("openset", "document is empty after tokenization");

  AttributionReport report;
  report.sentence_count = text.sentences.size();
  report.token_count = text.token_count();
  for (const auto& s : text.sentences) {
    for (const auto& t : s) {
      if (lookup(m.vocab, t)) report.in_vocabulary_tokens++;
    }
  }
  FeatureVector fv = featurize_document(m, text);
  report.prediction = predict(m, fv);

  std::vector<std::size_t> slots(m.models.size());
  std::iota(slots.begin(), slots.end(), 0);
  std::sort(slots.begin(), slots.end(), [&](std::size_t a, std::size_t b) {
    if (report.prediction.scores[a] != report.prediction.scores[b]) {
      return report.prediction.scores[a] > report.prediction.scores[b];
    }
    return a < b;
  });
  for (std::size_t i = 0; i < slots.size() && i < 5; ++i) {
    report.top_authors.emplace_back(m.models[slots[i]].name, report.prediction.scores[slots[i]]);
  }
  return report;
}

// Line record `doc_id,predicted_label,max_score,second_label,second_score`;
// the full score vector is appended as a sixth space-separated field when
// requested. Doubles use shortest round-trip formatting.
inline std::string prediction_record(const std::string& doc_id, const Prediction& p,
                                     const OpenSetModel& m, bool with_scores = false) {
  std::size_t first = 0, second = 1;
  if (p.scores.size() < 2) fail("openset", "prediction record needs at least 2 scores");
  if (p.scores[second] > p.scores[first]) std::swap(first, second);
  for (std::size_t i = 2; i < p.scores.size(); ++i) {
    if (p.scores[i] > p.scores[first]) {
      second = first;
      first = i;
    } else if (p.scores[i] > p.scores[second]) {
      second = i;
    }
  }
  std::string label = "UNKNOWN";
  if (p.label != kUnknownLabel) {
    for (const AuthorModel& am : m.models) {
      if (am.author_id == p.label) {
        label = am.name;
        break;
      }
    }
  }
  std::string out = doc_id + "," + label + "," + detail::format_double(p.scores[first]) + "," +
                    m.models[second].name + "," + detail::format_double(p.scores[second]);
  if (with_scores) {
    out += ",";
    for (std::size_t i = 0; i < p.scores.size(); ++i) {
      if (i > 0) out += " ";
      out += detail::format_double(p.scores[i]);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization. Doubles round-trip exactly, so deserialized models give
// bit-identical decision values.
// ---------------------------------------------------------------------------

inline constexpr int kOpenSetModelFormatVersion = 1;

inline nlohmann::ordered_json feature_config_to_json(const FeatureConfig& fc) {
  nlohmann::ordered_json j;
  if (fc.chunk.whole()) {
    j["chunk_sentences"] = "whole";
  } else {
    j["chunk_sentences"] = fc.chunk.sentences;
  }
  j["vocab_size"] = fc.vocab_size;
  j["normalize"] = fc.normalize;
  j["name_filter"] = {{"enabled", fc.name_filter.enabled},
                      {"min_count", fc.name_filter.min_count},
                      {"capitalized_fraction", fc.name_filter.capitalized_fraction},
                      {"static_exclusions", fc.name_filter.static_exclusions}};
  return j;
}

inline FeatureConfig feature_config_from_json(const nlohmann::json& j) {
  FeatureConfig fc;
  const auto& c = j.at("chunk_sentences");
  fc.chunk = c.is_string() ? ChunkSize::whole_book() : ChunkSize::count(c.get<int>());
  fc.vocab_size = j.at("vocab_size").get<int>();
  fc.normalize = j.at("normalize").get<bool>();
  const auto& nf = j.at("name_filter");
  fc.name_filter.enabled = nf.at("enabled").get<bool>();
  fc.name_filter.min_count = nf.at("min_count").get<std::uint32_t>();
  fc.name_filter.capitalized_fraction = nf.at("capitalized_fraction").get<double>();
  fc.name_filter.static_exclusions = nf.at("static_exclusions").get<std::vector<std::string>>();
  return fc;
}

inline nlohmann::ordered_json train_config_to_json(const TrainConfig& tc) {
  nlohmann::ordered_json j;
  j["alpha_grid"] = tc.alpha_grid;
  j["epochs"] = tc.epochs;
  j["eta0"] = tc.eta0;
  j["seed"] = tc.seed;
  j["class_weighting"] = tc.class_weighting == ClassWeighting::Balanced ? "balanced" : "none";
  return j;
}

inline TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig tc;
  tc.alpha_grid = j.at("alpha_grid").get<std::vector<double>>();
  tc.epochs = j.at("epochs").get<int>();
  tc.eta0 = j.at("eta0").get<double>();
  tc.seed = j.at("seed").get<std::uint64_t>();
  std::string cw = j.at("class_weighting").get<std::string>();
  if (cw == "balanced") {
    tc.class_weighting = ClassWeighting::Balanced;
  } else if (cw == "none") {
    tc.class_weighting = ClassWeighting::None;
  } else {
    fail("openset", "unknown class_weighting '" + cw + "'");
  }
  return tc;
}

inline nlohmann::ordered_json open_set_model_to_json(const OpenSetModel& m) {
  nlohmann::ordered_json j;
  j["version"] = kOpenSetModelFormatVersion;
  j["type"] = "openattr-model";
  j["reg"] = regularization_name(m.reg);
  j["feature_config"] = feature_config_to_json(m.feature_config);
  j["train_config"] = train_config_to_json(m.train_config);
  j["vocabulary"] = vocabulary_to_json(m.vocab);
  j["scaler"] = {{"max_abs", m.scaler.max_abs}};
  nlohmann::ordered_json models = nlohmann::ordered_json::array();
  for (const AuthorModel& am : m.models) {
    nlohmann::ordered_json mj;
    mj["author"] = am.author_id;
    mj["name"] = am.name;
    mj["validation_f1"] = am.validation_f1;
    mj["model"] = linear_model_to_json(am.model);
    models.push_back(std::move(mj));
  }
  j["models"] = std::move(models);
  return j;
}

inline OpenSetModel open_set_model_from_json(const nlohmann::json& j) {
  if (!j.contains("version") || j.at("version").get<int>() != kOpenSetModelFormatVersion) {
    fail("openset", "unsupported model format version");
  }
  OpenSetModel m;
  m.reg = regularization_from_name(j.at("reg").get<std::string>());
  m.feature_config = feature_config_from_json(j.at("feature_config"));
  m.train_config = train_config_from_json(j.at("train_config"));
  m.vocab = vocabulary_from_json(j.at("vocabulary"));
  m.scaler.max_abs = j.at("scaler").at("max_abs").get<std::vector<double>>();
  int prev_author = -1;
  for (const auto& mj : j.at("models")) {
    AuthorModel am;
    am.author_id = mj.at("author").get<int>();
    am.name = mj.at("name").get<std::string>();
    am.validation_f1 = mj.at("validation_f1").get<double>();
    am.model = linear_model_from_json(mj.at("model"));
    if (am.author_id <= prev_author) fail("openset", "model authors must be id-ascending");
    if (am.model.weights.size() != static_cast<std::size_t>(m.vocab.k())) {
      fail("openset", "per-author model dimension does not match the vocabulary");
    }
    prev_author = am.author_id;
    m.models.push_back(std::move(am));
  }
  if (m.models.empty()) fail("openset", "model has no per-author classifiers");
  return m;
}

inline void save_open_set_model(const OpenSetModel& m, const std::filesystem::path& path) {
  write_file(path, open_set_model_to_json(m).dump(2) + "\n");
}

inline OpenSetModel load_open_set_model(const std::filesystem::path& path) {
  return open_set_model_from_json(nlohmann::json::parse(read_file(path)));
}

}  // namespace openattr
