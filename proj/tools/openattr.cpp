// openattr: authorship attribution over plain-text corpora.
//
// Subcommands: ingest, vocab, featurize, train, evaluate, attribute,
// top-words, experiment. Errors exit nonzero with a JSON object on stderr.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "openattr/experiments.hpp"
#include "openattr/metrics.hpp"
#include "openattr/openset.hpp"

namespace fs = std::filesystem;
using namespace openattr;

namespace {

struct CommonOpts {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  bool raw_counts = false;
  bool scores = false;
  int threads = 1;
};

ExperimentConfig resolve_config(const CommonOpts& opts, bool require_manifest = true) {
  ExperimentConfig cfg;
  if (!opts.config_path.empty()) cfg = load_experiment_config(opts.config_path);
  if (opts.seed) {
    cfg.seed = *opts.seed;
    cfg.train.seed = *opts.seed;
  } else {
    cfg.train.seed = cfg.seed;
  }
  if (opts.raw_counts) cfg.normalize = false;
  if (opts.threads > 1) cfg.threads = opts.threads;
  if (require_manifest && cfg.manifest.empty()) {
    fail("cli", "no corpus manifest given (config key \"manifest\" or --manifest)");
  }
  return cfg;
}

void warn_dropped(const Dataset& ds, const char* what) {
  if (ds.dropped_books > 0) {
    std::cerr << "warning: " << ds.dropped_books << " " << what
              << " book(s) shorter than one chunk were dropped\n";
  }
}

int cmd_ingest(const CommonOpts& opts, const std::string& manifest_override) {
  ExperimentConfig cfg = resolve_config(opts, false);
  if (!manifest_override.empty()) cfg.manifest = manifest_override;
  if (cfg.manifest.empty()) fail("cli", "ingest needs --manifest or a config file");
  PreparedCorpus pc = prepare_corpus(cfg.manifest, cfg.seed, cfg.threads);

  std::size_t sentences = 0, tokens = 0;
  int known = 0, ood_val = 0, ood_test = 0;
  for (const TokenizedBook& tb : pc.books) {
    sentences += tb.text.sentences.size();
    tokens += tb.text.token_count();
    switch (tb.book.role) {
      case BookRole::Known: ++known; break;
      case BookRole::OodValidation: ++ood_val; break;
      case BookRole::OodTest: ++ood_test; break;
    }
  }
  nlohmann::ordered_json summary;
  summary["books"] = pc.books.size();
  summary["authors"] = pc.corpus.authors.size();
  summary["known_authors"] = pc.known_author_ids().size();
  summary["books_by_role"] = {{"known", known}, {"ood_validation", ood_val},
                              {"ood_test", ood_test}};
  summary["sentences"] = sentences;
  summary["tokens"] = tokens;
  summary["splits"] = {{"train", pc.splits.books_in(Split::Train).size()},
                       {"validation", pc.splits.books_in(Split::Validation).size()},
                       {"test", pc.splits.books_in(Split::Test).size()}};
  std::cout << summary.dump(2) << "\n";
  if (!opts.out_dir.empty()) {
    write_file(fs::path(opts.out_dir) / "corpus_summary.json", summary.dump(2) + "\n");
  }
  return 0;
}

int cmd_vocab(const CommonOpts& opts, const std::string& manifest_override, int k,
              bool no_name_filter, const std::string& out_path) {
  ExperimentConfig cfg = resolve_config(opts, false);
  if (!manifest_override.empty()) cfg.manifest = manifest_override;
  if (cfg.manifest.empty()) fail("cli", "vocab needs --manifest or a config file");
  if (no_name_filter) cfg.name_filter.enabled = false;
  PreparedCorpus pc = prepare_corpus(cfg.manifest, cfg.seed, cfg.threads);
  Vocabulary v = build_vocabulary_for_splits(pc.books, pc.splits, k, cfg.name_filter);
  save_vocabulary(v, out_path);
  std::cout << "wrote " << out_path << " (k=" << v.k() << ")\n";
  return 0;
}

int cmd_featurize(const CommonOpts& opts, const std::string& manifest_override,
                  const std::string& vocab_path, const std::string& chunk_arg,
                  const std::string& out_path) {
  ExperimentConfig cfg = resolve_config(opts, false);
  if (!manifest_override.empty()) cfg.manifest = manifest_override;
  if (cfg.manifest.empty()) fail("cli", "featurize needs --manifest or a config file");
  Vocabulary vocab = load_vocabulary(vocab_path);
  ChunkSize chunk = chunk_arg == "whole" ? ChunkSize::whole_book()
                                         : ChunkSize::count(std::stoi(chunk_arg));
  PreparedCorpus pc = prepare_corpus(cfg.manifest, cfg.seed, cfg.threads);

  std::vector<int> all_ids(pc.books.size());
  for (std::size_t i = 0; i < all_ids.size(); ++i) all_ids[i] = static_cast<int>(i);
  Dataset all = make_dataset(pc.books, all_ids, chunk, vocab, cfg.normalize);
  warn_dropped(all, "corpus");
  if (cfg.normalize) {
    Dataset train = make_dataset(pc.books, pc.splits.books_in(Split::Train), chunk, vocab, true);
    ColumnScaler scaler = fit_column_scaler(train.rows, static_cast<std::uint32_t>(vocab.k()));
    scale_dataset(all, scaler);
  }
  std::ostringstream out;
  for (std::size_t i = 0; i < all.rows.size(); ++i) {
    write_feature_record(out, all.docs[i], all.rows[i]);
  }
  write_file(out_path, std::move(out).str());
  std::cout << "wrote " << out_path << " (" << all.rows.size() << " documents)\n";
  return 0;
}

OpenSetModel train_from_config(const ExperimentConfig& cfg, const PreparedCorpus& pc,
                               ChunkSize chunk, int vocab_size) {
  FeatureConfig fc;
  fc.chunk = chunk;
  fc.vocab_size = vocab_size;
  fc.normalize = cfg.normalize;
  fc.name_filter = cfg.name_filter;
  Vocabulary vocab = build_vocabulary_for_splits(pc.books, pc.splits, vocab_size, cfg.name_filter);
  return train_open_set(pc.corpus, pc.books, pc.splits, vocab, fc, cfg.train, cfg.reg,
                        TrainMode::OpenSet, cfg.threads);
}

int cmd_train(const CommonOpts& opts, const std::string& chunk_arg, int vocab_size,
              const std::string& out_path) {
  ExperimentConfig cfg = resolve_config(opts);
  ChunkSize chunk = chunk_arg.empty()
                        ? cfg.train_chunk
                        : (chunk_arg == "whole" ? ChunkSize::whole_book()
                                                : ChunkSize::count(std::stoi(chunk_arg)));
  int k = vocab_size > 0 ? vocab_size : cfg.train_vocab;
  PreparedCorpus pc = prepare_corpus(cfg.manifest, cfg.seed, cfg.threads);
  OpenSetModel model = train_from_config(cfg, pc, chunk, k);
  save_open_set_model(model, out_path);
  std::cout << "wrote " << out_path << " (" << model.models.size() << " author models, k=" << k
            << ")\n";
  return 0;
}

int cmd_evaluate(const CommonOpts& opts, const std::string& model_path,
                 const std::string& manifest_override, bool closed) {
  ExperimentConfig cfg = resolve_config(opts, false);
  if (!manifest_override.empty()) cfg.manifest = manifest_override;
  if (cfg.manifest.empty()) fail("cli", "evaluate needs --manifest or a config file");
  OpenSetModel model = load_open_set_model(model_path);
  std::uint64_t seed = opts.seed ? *opts.seed : model.train_config.seed;
  PreparedCorpus pc = prepare_corpus(cfg.manifest, seed, cfg.threads);

  std::vector<int> test_ids;
  for (int id : pc.splits.books_in(Split::Test)) {
    if (closed && pc.corpus.books[static_cast<std::size_t>(id)].role != BookRole::Known) continue;
    test_ids.push_back(id);
  }
  Dataset test = make_dataset(pc.books, test_ids, model.feature_config.chunk, model.vocab,
                              model.feature_config.normalize);
  warn_dropped(test, "test");
  if (model.feature_config.normalize) scale_dataset(test, model.scaler);

  std::vector<std::pair<int, Prediction>> labeled;
  std::ostringstream records;
  for (std::size_t i = 0; i < test.rows.size(); ++i) {
    Prediction p;
    if (closed) {
      p.scores = decision_scores(model, test.rows[i]);
      p.label = model.models[static_cast<std::size_t>(closed_set_slot(p.scores))].author_id;
    } else {
      p = predict(model, test.rows[i]);
    }
    int truth = pc.corpus.authors[static_cast<std::size_t>(test.authors[i])].known
                    ? test.authors[i]
                    : kUnknownLabel;
    std::string doc_id =
        "book" + std::to_string(test.docs[i].book_id) + ":" + std::to_string(test.docs[i].chunk_index);
    records << prediction_record(doc_id, p, model, opts.scores) << "\n";
    labeled.emplace_back(truth, std::move(p));
  }
  if (labeled.empty()) fail("cli", "no test documents (corpus too small for the chunk size?)");
  EvalReport report = evaluate(labeled, pc.known_author_ids());
  std::cout << format_report(report, pc.author_names());
  if (!opts.out_dir.empty()) {
    write_file(fs::path(opts.out_dir) / "report.json",
               report_to_json(report, pc.author_names()).dump(2) + "\n");
    write_file(fs::path(opts.out_dir) / "predictions.txt", records.str());
    std::cout << "wrote " << (fs::path(opts.out_dir) / "report.json").string() << "\n";
  }
  return 0;
}

int cmd_attribute(const CommonOpts& opts, const std::string& model_path,
                  const std::vector<std::string>& files) {
  OpenSetModel model = load_open_set_model(model_path);
  for (const std::string& file : files) {
    AttributionReport report = attribute_document(model, read_file(file));
    std::cout << prediction_record(file, report.prediction, model, opts.scores) << "\n";
    std::cout << "# " << file << ": " << report.sentence_count << " sentences, "
              << report.token_count << " tokens, " << report.in_vocabulary_tokens
              << " in vocabulary\n";
    for (std::size_t i = 0; i < report.top_authors.size(); ++i) {
      char line[160];
      std::snprintf(line, sizeof(line), "#   %zu. %-24s %+.6f\n", i + 1,
                    report.top_authors[i].first.c_str(), report.top_authors[i].second);
      std::cout << line;
    }
  }
  return 0;
}

int cmd_top_words(const CommonOpts& opts, int n_override) {
  ExperimentConfig cfg = resolve_config(opts);
  if (n_override > 0) cfg.top_words_n = n_override;
  PreparedCorpus pc = prepare_corpus(cfg.manifest, cfg.seed, cfg.threads);
  TopWordsResult res = run_top_words(pc, cfg);
  fs::path out_dir = opts.out_dir.empty() ? fs::path(".") : fs::path(opts.out_dir);
  write_top_words_result(res, cfg, out_dir);
  for (const auto& aw : res.authors) {
    std::cout << aw.name << ":";
    for (std::size_t i = 0; i < aw.words.size() && i < 8; ++i) {
      std::cout << " " << aw.words[i].first << (aw.words[i].second > 0 ? "(+)" : "(-)");
    }
    std::cout << "\n";
  }
  std::cout << "wrote " << (out_dir / "top_words.csv").string() << "\n";
  return 0;
}

int cmd_experiment(const CommonOpts& opts, const std::string& name) {
  ExperimentConfig cfg = resolve_config(opts, name != "synth");
  fs::path out_dir = opts.out_dir.empty() ? fs::path("experiment_out") : fs::path(opts.out_dir);

  if (name == "synth") {
    if (!cfg.synthetic) fail("cli", "config has no \"synthetic\" block");
    SyntheticSpec spec = *cfg.synthetic;
    if (opts.seed) spec.seed = *opts.seed;
    fs::path manifest = make_synthetic_corpus(spec, out_dir);
    std::cout << "wrote " << manifest.string() << "\n";
    return 0;
  }

  PreparedCorpus pc = prepare_corpus(cfg.manifest, cfg.seed, cfg.threads);
  if (name == "grid-closed") {
    GridResult g = run_grid_closed(pc, cfg);
    write_grid_result(g, cfg, "grid_closed", out_dir);
    std::cout << read_file(out_dir / "grid_closed.csv");
  } else if (name == "grid-mismatched") {
    GridResult g = run_grid_mismatched(pc, cfg);
    write_grid_result(g, cfg, "grid_mismatched", out_dir);
    std::cout << read_file(out_dir / "grid_mismatched.csv");
  } else if (name == "open-controlled") {
    OpenControlledResult res = run_open_controlled(pc, cfg);
    write_open_controlled_result(res, cfg, pc.author_names(), out_dir);
    std::cout << read_file(out_dir / "open_controlled.csv");
  } else if (name == "top-words") {
    TopWordsResult res = run_top_words(pc, cfg);
    write_top_words_result(res, cfg, out_dir);
    std::cout << "wrote " << (out_dir / "top_words.csv").string() << "\n";
  } else {
    fail("cli", "unknown experiment '" + name +
                    "' (grid-closed|grid-mismatched|open-controlled|top-words|synth)");
  }
  std::cout << "outputs in " << out_dir.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"authorship attribution with frequent-word features and one-vs-all linear SVMs"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string manifest_override, vocab_path, model_path, chunk_arg, out_path, experiment_name;
  std::vector<std::string> files;
  int k = 1000, top_n = 0, vocab_size = 0;
  bool no_name_filter = false, closed = false;

  auto add_common = [&](CLI::App* cmd, bool with_scores = false) {
    cmd->add_option("--config", opts.config_path, "config file (json)");
    cmd->add_option("--seed", [&opts](const std::vector<std::string>& v) {
      opts.seed = std::stoull(v.at(0));
      return true;
    }, "random seed override");
    cmd->add_option("--out-dir", opts.out_dir, "output directory");
    cmd->add_flag("--raw-counts", opts.raw_counts, "skip row/column normalization");
    cmd->add_option("--threads", opts.threads, "worker threads");
    if (with_scores) cmd->add_flag("--scores", opts.scores, "emit full score vectors");
  };

  CLI::App* ingest = app.add_subcommand("ingest", "load, tokenize and summarize a corpus");
  add_common(ingest);
  ingest->add_option("--manifest", manifest_override, "corpus manifest csv");

  CLI::App* vocab = app.add_subcommand("vocab", "build the most-frequent-word vocabulary");
  add_common(vocab);
  vocab->add_option("--manifest", manifest_override, "corpus manifest csv");
  vocab->add_option("--k", k, "vocabulary size")->required();
  vocab->add_flag("--no-name-filter", no_name_filter, "disable the name filter");
  vocab->add_option("--out", out_path, "output path")->default_val("vocabulary.json");

  CLI::App* featurize = app.add_subcommand("featurize", "dump the sparse feature matrix");
  add_common(featurize);
  featurize->add_option("--manifest", manifest_override, "corpus manifest csv");
  featurize->add_option("--vocab", vocab_path, "vocabulary json")->required();
  featurize->add_option("--chunk", chunk_arg, "sentences per document or 'whole'")->required();
  featurize->add_option("--out", out_path, "output path")->default_val("features.txt");

  CLI::App* train = app.add_subcommand("train", "train the one-vs-all open-set model");
  add_common(train);
  train->add_option("--chunk", chunk_arg, "sentences per document or 'whole'");
  train->add_option("--vocab-size", vocab_size, "vocabulary size");
  train->add_option("--out", out_path, "model output path")->default_val("model.json");

  CLI::App* evaluate_cmd = app.add_subcommand("evaluate", "evaluate a model on the test split");
  add_common(evaluate_cmd, true);
  evaluate_cmd->add_option("--model", model_path, "model json")->required();
  evaluate_cmd->add_option("--manifest", manifest_override, "corpus manifest csv");
  evaluate_cmd->add_flag("--closed", closed, "closed-set evaluation (argmax, no reject)");

  CLI::App* attribute = app.add_subcommand("attribute", "attribute external documents");
  add_common(attribute, true);
  attribute->add_option("--model", model_path, "model json")->required();
  attribute->add_option("files", files, "text files to attribute")->required();

  CLI::App* top_words = app.add_subcommand("top-words", "per-author top predictive words");
  add_common(top_words);
  top_words->add_option("--n", top_n, "coefficients per author");

  CLI::App* experiment = app.add_subcommand("experiment", "run a configured experiment");
  add_common(experiment, true);
  experiment->add_option("name", experiment_name,
                         "grid-closed|grid-mismatched|open-controlled|top-words|synth")
      ->required();

  try {
    app.parse(argc, argv);
    if (ingest->parsed()) return cmd_ingest(opts, manifest_override);
    if (vocab->parsed()) return cmd_vocab(opts, manifest_override, k, no_name_filter, out_path);
    if (featurize->parsed()) {
      return cmd_featurize(opts, manifest_override, vocab_path, chunk_arg, out_path);
    }
    if (train->parsed()) return cmd_train(opts, chunk_arg, vocab_size, out_path);
    if (evaluate_cmd->parsed()) return cmd_evaluate(opts, model_path, manifest_override, closed);
    if (attribute->parsed()) return cmd_attribute(opts, model_path, files);
    if (top_words->parsed()) return cmd_top_words(opts, top_n);
    if (experiment->parsed()) return cmd_experiment(opts, experiment_name);
    return 0;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    nlohmann::ordered_json err;
    err["error"] = {{"type", "usage"}, {"message", e.what()}};
    std::cerr << err.dump() << "\n";
    return 2;
  } catch (const Error& e) {
    nlohmann::ordered_json err;
    err["error"] = {{"type", e.type()}, {"message", e.what()}};
    std::cerr << err.dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    nlohmann::ordered_json err;
    err["error"] = {{"type", "internal"}, {"message", e.what()}};
    std::cerr << err.dump() << "\n";
    return 1;
  }
}
