#pragma once

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "openattr/corpus.hpp"
#include "openattr/error.hpp"
#include "openattr/features.hpp"
#include "openattr/io.hpp"
#include "openattr/metrics.hpp"
#include "openattr/openset.hpp"
#include "openattr/svm.hpp"
#include "openattr/synthetic.hpp"
#include "openattr/vocab.hpp"

namespace openattr {

// ---------------------------------------------------------------------------
// Configuration. One versioned JSON file drives every experiment; CLI flags
// may override seed / normalization / output directory.
// ---------------------------------------------------------------------------

inline constexpr int kConfigFormatVersion = 1;

struct ExperimentConfig {
  std::filesystem::path manifest;
  std::uint64_t seed = 42;
  int threads = 1;
  bool normalize = true;  // false reproduces raw-count runs
  Regularization reg = Regularization::L2;
  TrainConfig train;
  NameFilterPolicy name_filter;

  // defaults for one-off model training
  ChunkSize train_chunk = ChunkSize::count(50);
  int train_vocab = 1000;

  // grid experiments
  std::vector<ChunkSize> grid_chunk_sizes = {ChunkSize::count(10), ChunkSize::count(25),
                                             ChunkSize::count(50), ChunkSize::count(100),
                                             ChunkSize::whole_book()};
  std::vector<int> grid_vocab_sizes = {100, 500, 1000, 5000, 10000};
  ChunkSize mismatched_train_chunk = ChunkSize::count(50);

  // open-set controlled experiment
  ChunkSize open_chunk = ChunkSize::count(100);
  std::vector<int> open_vocab_sizes = {1000, 2000};

  // top predictive words
  ChunkSize top_words_chunk = ChunkSize::count(50);
  int top_words_vocab = 1000;
  int top_words_n = 100;

  std::optional<SyntheticSpec> synthetic;
};

namespace detail {

inline ChunkSize chunk_size_from_json(const nlohmann::json& j) {
  if (j.is_string()) {
    std::string s = j.get<std::string>();
    if (s == "whole" || s == "whole_book") return ChunkSize::whole_book();
    fail("config", "bad chunk size '" + s + "' (expected integer or \"whole\")");
  }
  return ChunkSize::count(j.get<int>());
}

inline nlohmann::ordered_json chunk_size_to_json(ChunkSize c) {
  if (c.whole()) return nlohmann::ordered_json("whole");
  return nlohmann::ordered_json(c.sentences);
}

inline SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j) {
  SyntheticSpec s;
  if (j.contains("n_authors")) s.n_authors = j.at("n_authors").get<int>();
  if (j.contains("n_ood_authors")) s.n_ood_authors = j.at("n_ood_authors").get<int>();
  if (j.contains("books_per_author")) s.books_per_author = j.at("books_per_author").get<int>();
  if (j.contains("ood_books_per_author")) {
    s.ood_books_per_author = j.at("ood_books_per_author").get<int>();
  }
  if (j.contains("sentences_per_book")) {
    s.sentences_per_book = j.at("sentences_per_book").get<int>();
  }
  if (j.contains("vocab_pool")) s.vocab_pool = j.at("vocab_pool").get<int>();
  if (j.contains("separation")) s.separation = j.at("separation").get<double>();
  if (j.contains("signature_fraction")) {
    s.signature_fraction = j.at("signature_fraction").get<double>();
  }
  if (j.contains("sentence_words_min")) s.sentence_words_min = j.at("sentence_words_min").get<int>();
  if (j.contains("sentence_words_max")) s.sentence_words_max = j.at("sentence_words_max").get<int>();
  if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("ood_clone_of")) s.ood_clone_of = j.at("ood_clone_of").get<int>();
  return s;
}

inline nlohmann::ordered_json synthetic_spec_to_json(const SyntheticSpec& s) {
  nlohmann::ordered_json j;
  j["n_authors"] = s.n_authors;
  j["n_ood_authors"] = s.n_ood_authors;
  j["books_per_author"] = s.books_per_author;
  j["ood_books_per_author"] = s.ood_books_per_author;
  j["sentences_per_book"] = s.sentences_per_book;
  j["vocab_pool"] = s.vocab_pool;
  j["separation"] = s.separation;
  j["signature_fraction"] = s.signature_fraction;
  j["sentence_words_min"] = s.sentence_words_min;
  j["sentence_words_max"] = s.sentence_words_max;
  j["seed"] = s.seed;
  j["ood_clone_of"] = s.ood_clone_of;
  return j;
}

}  // namespace detail

inline ExperimentConfig experiment_config_from_json(const nlohmann::json& j,
                                                    const std::filesystem::path& base_dir = {}) {
  if (!j.contains("version") || j.at("version").get<int>() != kConfigFormatVersion) {
    fail("config", "unsupported config version (expected " +
                       std::to_string(kConfigFormatVersion) + ")");
  }
  static const std::vector<std::string> known_keys = {
      "version",          "manifest",        "seed",
      "threads",          "normalize",       "regularization",
      "epochs",           "alpha_grid",      "eta0",
      "class_weighting",  "name_filter",     "chunk_sentences",
      "vocab_size",       "grid_chunk_sizes", "grid_vocab_sizes",
      "mismatched_train_chunk", "open_chunk", "open_vocab_sizes",
      "top_words_chunk",  "top_words_vocab", "top_words_n",
      "synthetic"};
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (std::find(known_keys.begin(), known_keys.end(), key) == known_keys.end()) {
      fail("config", "unknown config key '" + key + "'");
    }
  }

  ExperimentConfig cfg;
  if (j.contains("manifest")) {
    std::filesystem::path m = j.at("manifest").get<std::string>();
    cfg.manifest = m.is_absolute() || base_dir.empty() ? m : base_dir / m;
  }
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.train.seed = cfg.seed;  // one seed drives splits and training
  if (j.contains("threads")) cfg.threads = j.at("threads").get<int>();
  if (j.contains("normalize")) cfg.normalize = j.at("normalize").get<bool>();
  if (j.contains("regularization")) {
    cfg.reg = regularization_from_name(j.at("regularization").get<std::string>());
  }
  if (j.contains("epochs")) cfg.train.epochs = j.at("epochs").get<int>();
  if (j.contains("alpha_grid")) cfg.train.alpha_grid = j.at("alpha_grid").get<std::vector<double>>();
  if (j.contains("eta0")) cfg.train.eta0 = j.at("eta0").get<double>();
  if (j.contains("class_weighting")) {
    std::string cw = j.at("class_weighting").get<std::string>();
    if (cw == "balanced") {
      cfg.train.class_weighting = ClassWeighting::Balanced;
    } else if (cw == "none") {
      cfg.train.class_weighting = ClassWeighting::None;
    } else {
      fail("config", "class_weighting must be balanced|none");
    }
  }
  if (j.contains("name_filter")) {
    const auto& nf = j.at("name_filter");
    if (nf.contains("enabled")) cfg.name_filter.enabled = nf.at("enabled").get<bool>();
    if (nf.contains("min_count")) cfg.name_filter.min_count = nf.at("min_count").get<std::uint32_t>();
    if (nf.contains("capitalized_fraction")) {
      cfg.name_filter.capitalized_fraction = nf.at("capitalized_fraction").get<double>();
    }
    if (nf.contains("static_exclusions")) {
      cfg.name_filter.static_exclusions =
          nf.at("static_exclusions").get<std::vector<std::string>>();
    }
  }
  if (j.contains("chunk_sentences")) {
    cfg.train_chunk = detail::chunk_size_from_json(j.at("chunk_sentences"));
  }
  if (j.contains("vocab_size")) cfg.train_vocab = j.at("vocab_size").get<int>();
  auto read_chunks = [&](const char* key, std::vector<ChunkSize>& out) {
    if (!j.contains(key)) return;
    out.clear();
    for (const auto& c : j.at(key)) out.push_back(detail::chunk_size_from_json(c));
    if (out.empty()) fail("config", std::string(key) + " must not be empty");
  };
  read_chunks("grid_chunk_sizes", cfg.grid_chunk_sizes);
  if (j.contains("grid_vocab_sizes")) {
    cfg.grid_vocab_sizes = j.at("grid_vocab_sizes").get<std::vector<int>>();
  }
  if (j.contains("mismatched_train_chunk")) {
    cfg.mismatched_train_chunk = detail::chunk_size_from_json(j.at("mismatched_train_chunk"));
  }
  if (j.contains("open_chunk")) cfg.open_chunk = detail::chunk_size_from_json(j.at("open_chunk"));
  if (j.contains("open_vocab_sizes")) {
    cfg.open_vocab_sizes = j.at("open_vocab_sizes").get<std::vector<int>>();
  }
  if (j.contains("top_words_chunk")) {
    cfg.top_words_chunk = detail::chunk_size_from_json(j.at("top_words_chunk"));
  }
  if (j.contains("top_words_vocab")) cfg.top_words_vocab = j.at("top_words_vocab").get<int>();
  if (j.contains("top_words_n")) cfg.top_words_n = j.at("top_words_n").get<int>();
  if (j.contains("synthetic")) {
    cfg.synthetic = detail::synthetic_spec_from_json(j.at("synthetic"));
  }
  return cfg;
}

inline ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  nlohmann::json j = nlohmann::json::parse(read_file(path));
  return experiment_config_from_json(j, path.has_parent_path() ? path.parent_path()
                                                               : std::filesystem::path("."));
}

inline nlohmann::ordered_json experiment_config_to_json(const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  j["version"] = kConfigFormatVersion;
  j["manifest"] = cfg.manifest.string();
  j["seed"] = cfg.seed;
  j["threads"] = cfg.threads;
  j["normalize"] = cfg.normalize;
  j["regularization"] = regularization_name(cfg.reg);
  j["epochs"] = cfg.train.epochs;
  j["alpha_grid"] = cfg.train.alpha_grid;
  j["eta0"] = cfg.train.eta0;
  j["class_weighting"] =
      cfg.train.class_weighting == ClassWeighting::Balanced ? "balanced" : "none";
  j["name_filter"] = {{"enabled", cfg.name_filter.enabled},
                      {"min_count", cfg.name_filter.min_count},
                      {"capitalized_fraction", cfg.name_filter.capitalized_fraction},
                      {"static_exclusions", cfg.name_filter.static_exclusions}};
  j["chunk_sentences"] = detail::chunk_size_to_json(cfg.train_chunk);
  j["vocab_size"] = cfg.train_vocab;
  nlohmann::ordered_json chunks = nlohmann::ordered_json::array();
  for (ChunkSize c : cfg.grid_chunk_sizes) chunks.push_back(detail::chunk_size_to_json(c));
  j["grid_chunk_sizes"] = std::move(chunks);
  j["grid_vocab_sizes"] = cfg.grid_vocab_sizes;
  j["mismatched_train_chunk"] = detail::chunk_size_to_json(cfg.mismatched_train_chunk);
  j["open_chunk"] = detail::chunk_size_to_json(cfg.open_chunk);
  j["open_vocab_sizes"] = cfg.open_vocab_sizes;
  j["top_words_chunk"] = detail::chunk_size_to_json(cfg.top_words_chunk);
  j["top_words_vocab"] = cfg.top_words_vocab;
  j["top_words_n"] = cfg.top_words_n;
  if (cfg.synthetic) j["synthetic"] = detail::synthetic_spec_to_json(*cfg.synthetic);
  return j;
}

// ---------------------------------------------------------------------------
// Corpus preparation shared by all experiments.
// ---------------------------------------------------------------------------

struct PreparedCorpus {
  Corpus corpus;
  std::vector<TokenizedBook> books;
  SplitAssignment splits;

  std::vector<int> known_author_ids() const {
    std::vector<int> out;
    for (const Author& a : corpus.authors) {
      if (a.known) out.push_back(a.id);
    }
    return out;
  }

  std::vector<std::string> author_names() const {
    std::vector<std::string> names;
    for (const Author& a : corpus.authors) names.push_back(a.name);
    return names;
  }
};

inline PreparedCorpus prepare_corpus(const std::filesystem::path& manifest, std::uint64_t seed,
                                     int threads = 1) {
  PreparedCorpus pc;
  pc.corpus = load_manifest(manifest);
  pc.books = tokenize_corpus(pc.corpus, threads);
  pc.splits = make_splits(pc.books, seed);
  return pc;
}

namespace detail {

inline std::vector<int> split_books(const PreparedCorpus& pc, Split split, bool known_only) {
  std::vector<int> ids;
  for (int id : pc.splits.books_in(split)) {
    if (known_only && pc.corpus.books[static_cast<std::size_t>(id)].role != BookRole::Known) {
      continue;
    }
    ids.push_back(id);
  }
  return ids;
}

// Truth label for evaluation: the author id for known books, UNKNOWN for
// out-of-distribution books.
inline int truth_label(const PreparedCorpus& pc, int author_id) {
  return pc.corpus.authors.at(static_cast<std::size_t>(author_id)).known ? author_id
                                                                         : kUnknownLabel;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Experiment: closed-set grid over (document length, vocabulary size).
// ---------------------------------------------------------------------------

struct GridResult {
  std::vector<ChunkSize> row_chunks;
  std::vector<int> col_vocabs;
  std::vector<std::vector<double>> macro_f1;       // [row][col]
  std::vector<std::vector<double>> book_accuracy;  // [row][col] (may be empty)
};

namespace detail {

inline std::string grid_csv(const GridResult& g, bool book_acc) {
  std::ostringstream out;
  out << "chunk_sentences";
  for (int v : g.col_vocabs) out << ",v" << v;
  out << "\n";
  for (std::size_t r = 0; r < g.row_chunks.size(); ++r) {
    out << g.row_chunks[r].label();
    const auto& row = book_acc ? g.book_accuracy[r] : g.macro_f1[r];
    for (double v : row) out << ',' << format_double(v);
    out << "\n";
  }
  return std::move(out).str();
}

inline nlohmann::ordered_json grid_json(const GridResult& g) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (ChunkSize c : g.row_chunks) rows.push_back(chunk_size_to_json(c));
  j["chunk_sizes"] = std::move(rows);
  j["vocab_sizes"] = g.col_vocabs;
  j["macro_f1"] = g.macro_f1;
  if (!g.book_accuracy.empty()) j["book_accuracy"] = g.book_accuracy;
  return j;
}

}  // namespace detail

// One closed-set train/evaluate cycle per (chunk size, vocabulary size)
// cell; every cell shares the same book-level splits.
inline GridResult run_grid_closed(const PreparedCorpus& pc, const ExperimentConfig& cfg) {
  GridResult result;
  result.row_chunks = cfg.grid_chunk_sizes;
  result.col_vocabs = cfg.grid_vocab_sizes;
  result.macro_f1.assign(result.row_chunks.size(),
                         std::vector<double>(result.col_vocabs.size(), 0.0));

  std::map<int, Vocabulary> vocab_cache;
  for (int k : cfg.grid_vocab_sizes) {
    vocab_cache.emplace(k, build_vocabulary_for_splits(pc.books, pc.splits, k, cfg.name_filter));
  }
  std::vector<int> test_ids = detail::split_books(pc, Split::Test, /*known_only=*/true);

  for (std::size_t r = 0; r < result.row_chunks.size(); ++r) {
    for (std::size_t c = 0; c < result.col_vocabs.size(); ++c) {
      FeatureConfig fc;
      fc.chunk = result.row_chunks[r];
      fc.vocab_size = result.col_vocabs[c];
      fc.normalize = cfg.normalize;
      fc.name_filter = cfg.name_filter;
      const Vocabulary& vocab = vocab_cache.at(fc.vocab_size);
      OpenSetModel model = train_open_set(pc.corpus, pc.books, pc.splits, vocab, fc, cfg.train,
                                          cfg.reg, TrainMode::ClosedSet, cfg.threads);
      Dataset test = make_dataset(pc.books, test_ids, fc.chunk, vocab, fc.normalize);
      if (fc.normalize) scale_dataset(test, model.scaler);

      std::vector<std::pair<int, Prediction>> labeled;
      labeled.reserve(test.rows.size());
      for (std::size_t i = 0; i < test.rows.size(); ++i) {
        Prediction p;
        p.scores = decision_scores(model, test.rows[i]);
        p.label = model.models[static_cast<std::size_t>(closed_set_slot(p.scores))].author_id;
        labeled.emplace_back(test.authors[i], std::move(p));
      }
      EvalReport report = evaluate(labeled, pc.known_author_ids());
      result.macro_f1[r][c] = report.macro_f1;
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Experiment: fixed training length, varying test length. Also reports
// book-level attribution accuracy from the per-book majority vote.
// ---------------------------------------------------------------------------

inline GridResult run_grid_mismatched(const PreparedCorpus& pc, const ExperimentConfig& cfg) {
  GridResult result;
  result.row_chunks = cfg.grid_chunk_sizes;
  result.col_vocabs = cfg.grid_vocab_sizes;
  result.macro_f1.assign(result.row_chunks.size(),
                         std::vector<double>(result.col_vocabs.size(), 0.0));
  result.book_accuracy.assign(result.row_chunks.size(),
                              std::vector<double>(result.col_vocabs.size(), 0.0));

  std::vector<int> test_ids = detail::split_books(pc, Split::Test, /*known_only=*/true);
  for (std::size_t c = 0; c < result.col_vocabs.size(); ++c) {
    Vocabulary vocab = build_vocabulary_for_splits(pc.books, pc.splits, result.col_vocabs[c],
                                                   cfg.name_filter);
    FeatureConfig fc;
    fc.chunk = cfg.mismatched_train_chunk;
    fc.vocab_size = result.col_vocabs[c];
    fc.normalize = cfg.normalize;
    fc.name_filter = cfg.name_filter;
    OpenSetModel model = train_open_set(pc.corpus, pc.books, pc.splits, vocab, fc, cfg.train,
                                        cfg.reg, TrainMode::ClosedSet, cfg.threads);

    for (std::size_t r = 0; r < result.row_chunks.size(); ++r) {
      Dataset test = make_dataset(pc.books, test_ids, result.row_chunks[r], vocab, fc.normalize);
      if (fc.normalize) scale_dataset(test, model.scaler);

      std::vector<std::pair<int, Prediction>> labeled;
      std::map<int, std::vector<Prediction>> by_book;
      std::map<int, int> book_truth;
      for (std::size_t i = 0; i < test.rows.size(); ++i) {
        Prediction p;
        p.scores = decision_scores(model, test.rows[i]);
        p.label = model.models[static_cast<std::size_t>(closed_set_slot(p.scores))].author_id;
        by_book[test.docs[i].book_id].push_back(p);
        book_truth[test.docs[i].book_id] = test.authors[i];
        labeled.emplace_back(test.authors[i], std::move(p));
      }
      EvalReport report = evaluate(labeled, pc.known_author_ids());
      result.macro_f1[r][c] = report.macro_f1;

      int correct_books = 0;
      for (const auto& [book_id, preds] : by_book) {
        if (book_level_vote(preds) == book_truth[book_id]) ++correct_books;
      }
      result.book_accuracy[r][c] =
          by_book.empty() ? 0.0
                          : static_cast<double>(correct_books) / static_cast<double>(by_book.size());
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Experiment: open-set controlled evaluation per vocabulary size.
// ---------------------------------------------------------------------------

struct FalseNegativeDistribution {
  // Known authors bucketed by how many out-of-distribution documents were
  // misattributed to them: exactly 0, exactly 1, 2-5, 6-10, more than 10.
  int authors_0 = 0;
  int authors_1 = 0;
  int authors_2_5 = 0;
  int authors_6_10 = 0;
  int authors_over_10 = 0;
};

struct OpenControlledRow {
  int vocab_size = 0;
  EvalReport report;
  FalseNegativeDistribution fn_distribution;
  double ood_share = 0.0;  // fraction of test documents that are ood
  std::map<int, int> fn_by_author;  // ood documents claimed per known author
};

struct OpenControlledResult {
  std::vector<OpenControlledRow> rows;
};

inline OpenControlledResult run_open_controlled(const PreparedCorpus& pc,
                                                const ExperimentConfig& cfg) {
  OpenControlledResult result;
  std::vector<int> test_ids = detail::split_books(pc, Split::Test, /*known_only=*/false);

  for (int k : cfg.open_vocab_sizes) {
    Vocabulary vocab = build_vocabulary_for_splits(pc.books, pc.splits, k, cfg.name_filter);
    FeatureConfig fc;
    fc.chunk = cfg.open_chunk;
    fc.vocab_size = k;
    fc.normalize = cfg.normalize;
    fc.name_filter = cfg.name_filter;
    OpenSetModel model = train_open_set(pc.corpus, pc.books, pc.splits, vocab, fc, cfg.train,
                                        cfg.reg, TrainMode::OpenSet, cfg.threads);

    Dataset test = make_dataset(pc.books, test_ids, fc.chunk, vocab, fc.normalize);
    if (fc.normalize) scale_dataset(test, model.scaler);

    OpenControlledRow row;
    row.vocab_size = k;
    std::vector<std::pair<int, Prediction>> labeled;
    int ood_docs = 0;
    for (std::size_t i = 0; i < test.rows.size(); ++i) {
      Prediction p = predict(model, test.rows[i]);
      int truth = detail::truth_label(pc, test.authors[i]);
      if (truth == kUnknownLabel) {
        ++ood_docs;
        if (p.label != kUnknownLabel) row.fn_by_author[p.label]++;
      }
      labeled.emplace_back(truth, std::move(p));
    }
    row.report = evaluate(labeled, pc.known_author_ids());
    row.ood_share = test.rows.empty()
                        ? 0.0
                        : static_cast<double>(ood_docs) / static_cast<double>(test.rows.size());
    for (int a : pc.known_author_ids()) {
      int fn = row.fn_by_author.count(a) ? row.fn_by_author.at(a) : 0;
      if (fn == 0) {
        row.fn_distribution.authors_0++;
      } else if (fn == 1) {
        row.fn_distribution.authors_1++;
      } else if (fn <= 5) {
        row.fn_distribution.authors_2_5++;
      } else if (fn <= 10) {
        row.fn_distribution.authors_6_10++;
      } else {
        row.fn_distribution.authors_over_10++;
      }
    }
    result.rows.push_back(std::move(row));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Experiment: per-author top predictive words (sparse models).
// ---------------------------------------------------------------------------

struct TopWordsResult {
  struct AuthorWords {
    int author_id = -1;
    std::string name;
    std::vector<std::pair<std::string, double>> words;  // (word, signed coefficient)
  };
  std::vector<AuthorWords> authors;
};

inline TopWordsResult run_top_words(const PreparedCorpus& pc, const ExperimentConfig& cfg) {
  Vocabulary vocab = build_vocabulary_for_splits(pc.books, pc.splits, cfg.top_words_vocab,
                                                 cfg.name_filter);
  FeatureConfig fc;
  fc.chunk = cfg.top_words_chunk;
  fc.vocab_size = cfg.top_words_vocab;
  fc.normalize = cfg.normalize;
  fc.name_filter = cfg.name_filter;
  OpenSetModel model = train_open_set(pc.corpus, pc.books, pc.splits, vocab, fc, cfg.train,
                                      Regularization::L1, TrainMode::ClosedSet, cfg.threads);
  TopWordsResult result;
  for (const AuthorModel& am : model.models) {
    TopWordsResult::AuthorWords aw;
    aw.author_id = am.author_id;
    aw.name = am.name;
    aw.words = top_coefficients(am.model, cfg.top_words_n, vocab);
    result.authors.push_back(std::move(aw));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Output writing. Every experiment writes a run manifest of its resolved
// parameters next to its outputs; contents are a pure function of the
// config, so re-runs are byte-identical.
// ---------------------------------------------------------------------------

namespace detail {

inline void write_run_manifest(const std::filesystem::path& out_dir, const std::string& name,
                               const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  j["experiment"] = name;
  j["resolved_config"] = experiment_config_to_json(cfg);
  write_file(out_dir / "run_manifest.json", j.dump(2) + "\n");
}

}  // namespace detail

inline void write_grid_result(const GridResult& g, const ExperimentConfig& cfg,
                              const std::string& name, const std::filesystem::path& out_dir) {
  detail::write_run_manifest(out_dir, name, cfg);
  write_file(out_dir / (name + ".csv"), detail::grid_csv(g, /*book_acc=*/false));
  if (!g.book_accuracy.empty()) {
    write_file(out_dir / (name + "_book_accuracy.csv"), detail::grid_csv(g, /*book_acc=*/true));
  }
  write_file(out_dir / (name + ".json"), detail::grid_json(g).dump(2) + "\n");
}

inline void write_open_controlled_result(const OpenControlledResult& res,
                                         const ExperimentConfig& cfg,
                                         const std::vector<std::string>& names,
                                         const std::filesystem::path& out_dir) {
  detail::write_run_manifest(out_dir, "open_controlled", cfg);
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  std::ostringstream csv;
  csv << "vocab_size,known_precision,known_recall,known_macro_f1,"
         "detection_precision,detection_recall,detection_f1,ood_share,"
         "fn_authors_0,fn_authors_1,fn_authors_2_5,fn_authors_6_10,fn_authors_over_10\n";
  for (const OpenControlledRow& row : res.rows) {
    nlohmann::ordered_json rj;
    rj["vocab_size"] = row.vocab_size;
    rj["report"] = report_to_json(row.report, names);
    rj["ood_share"] = row.ood_share;
    rj["fn_distribution"] = {{"0", row.fn_distribution.authors_0},
                             {"1", row.fn_distribution.authors_1},
                             {"2-5", row.fn_distribution.authors_2_5},
                             {"6-10", row.fn_distribution.authors_6_10},
                             {">10", row.fn_distribution.authors_over_10}};
    nlohmann::ordered_json fnj = nlohmann::ordered_json::object();
    for (const auto& [author, fn] : row.fn_by_author) fnj[std::to_string(author)] = fn;
    rj["fn_by_author"] = std::move(fnj);
    j.push_back(std::move(rj));

    const DetectionMetrics dm = row.report.detection.value_or(DetectionMetrics{});
    csv << row.vocab_size << ',' << detail::format_double(row.report.macro_precision) << ','
        << detail::format_double(row.report.macro_recall) << ','
        << detail::format_double(row.report.macro_f1) << ',' << detail::format_double(dm.precision)
        << ',' << detail::format_double(dm.recall) << ',' << detail::format_double(dm.f1) << ','
        << detail::format_double(row.ood_share) << ',' << row.fn_distribution.authors_0 << ','
        << row.fn_distribution.authors_1 << ',' << row.fn_distribution.authors_2_5 << ','
        << row.fn_distribution.authors_6_10 << ',' << row.fn_distribution.authors_over_10 << "\n";
  }
  write_file(out_dir / "open_controlled.json", j.dump(2) + "\n");
  write_file(out_dir / "open_controlled.csv", std::move(csv).str());
}

inline void write_top_words_result(const TopWordsResult& res, const ExperimentConfig& cfg,
                                   const std::filesystem::path& out_dir) {
  detail::write_run_manifest(out_dir, "top_words", cfg);
  std::ostringstream csv;
  csv << "author_id,author,word,coefficient\n";
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& aw : res.authors) {
    nlohmann::ordered_json a;
    a["author"] = aw.author_id;
    a["name"] = aw.name;
    nlohmann::ordered_json words = nlohmann::ordered_json::array();
    for (const auto& [word, coef] : aw.words) {
      words.push_back({{"word", word}, {"coefficient", coef}});
      csv << aw.author_id << ',' << aw.name << ',' << word << ','
          << detail::format_double(coef) << "\n";
    }
    a["words"] = std::move(words);
    j.push_back(std::move(a));
  }
  write_file(out_dir / "top_words.csv", std::move(csv).str());
  write_file(out_dir / "top_words.json", j.dump(2) + "\n");
}

}  // namespace openattr
