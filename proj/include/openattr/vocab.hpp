#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "openattr/corpus.hpp"
#include "openattr/error.hpp"

namespace openattr {

// Heuristic stand-in for entity recognition: drop tokens that are almost
// always capitalized when not sentence-initial (proper names), plus a fixed
// honorific list whose occurrences are glued to names.
struct NameFilterPolicy {
  bool enabled = true;
  std::uint32_t min_count = 10;       // occurrences before the heuristic applies
  double capitalized_fraction = 0.95;  // of non-sentence-initial occurrences
  std::vector<std::string> static_exclusions = {"mr",    "mrs",  "miss", "dr",  "sir",
                                                "madam", "lady", "lord", "rev", "esq"};
};

// Most-frequent-K word list in rank order (ties broken lexicographically)
// with its inverse index.
struct Vocabulary {
  std::vector<std::string> words;
  std::unordered_map<std::string, int> index;

  int k() const { return static_cast<int>(words.size()); }
};

inline std::optional<int> lookup(const Vocabulary& v, std::string_view token) {
  auto it = v.index.find(std::string(token));
  if (it == v.index.end()) return std::nullopt;
  return it->second;
}

inline Vocabulary build_vocabulary(const std::vector<const TokenizedBook*>& training_books, int k,
                                   const NameFilterPolicy& policy = {}) {
  if (k < 1) fail("vocab", "vocabulary size must be >= 1");
  if (training_books.empty()) fail("vocab", "no training books");

  std::unordered_map<std::string, std::uint64_t> freq;
  std::unordered_map<std::string, TokenCaseStats> cases;
  for (const TokenizedBook* tb : training_books) {
    for (const auto& sentence : tb->text.sentences) {
      for (const auto& token : sentence) freq[token]++;
    }
    for (const auto& [token, st] : tb->text.case_stats) {
      TokenCaseStats& acc = cases[token];
      acc.total += st.total;
      acc.non_initial += st.non_initial;
      acc.non_initial_capitalized += st.non_initial_capitalized;
    }
  }

  std::unordered_set<std::string> excluded;
  if (policy.enabled) {
    excluded.insert(policy.static_exclusions.begin(), policy.static_exclusions.end());
  }
  auto looks_like_name = [&](const std::string& token) {
    if (!policy.enabled) return false;
    auto it = cases.find(token);
    if (it == cases.end()) return false;
    const TokenCaseStats& st = it->second;
    if (st.total < policy.min_count || st.non_initial == 0) return false;
    double frac = static_cast<double>(st.non_initial_capitalized) /
                  static_cast<double>(st.non_initial);
    return frac >= policy.capitalized_fraction;
  };

  std::vector<std::pair<std::string, std::uint64_t>> ranked;
  ranked.reserve(freq.size());
  for (const auto& [token, count] : freq) {
    if (excluded.count(token) > 0 || looks_like_name(token)) continue;
    ranked.emplace_back(token, count);
  }
  if (static_cast<int>(ranked.size()) < k) {
    fail("vocab", "only " + std::to_string(ranked.size()) +
                      " admissible distinct tokens; need k=" + std::to_string(k));
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  Vocabulary v;
  v.words.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    v.words.push_back(ranked[static_cast<std::size_t>(i)].first);
    v.index.emplace(v.words.back(), i);
  }
  return v;
}

inline Vocabulary build_vocabulary(const std::vector<TokenizedBook>& training_books, int k,
                                   const NameFilterPolicy& policy = {}) {
  std::vector<const TokenizedBook*> refs;
  refs.reserve(training_books.size());
  for (const TokenizedBook& tb : training_books) refs.push_back(&tb);
  return build_vocabulary(refs, k, policy);
}

// --- serialization: {version, k, words[]} ---

inline constexpr int kVocabularyFormatVersion = 1;

inline nlohmann::ordered_json vocabulary_to_json(const Vocabulary& v) {
  nlohmann::ordered_json j;
  j["version"] = kVocabularyFormatVersion;
  j["k"] = v.k();
  j["words"] = v.words;
  return j;
}

inline Vocabulary vocabulary_from_json(const nlohmann::json& j) {
  if (!j.contains("version") || j.at("version").get<int>() != kVocabularyFormatVersion) {
    fail("vocab", "unsupported vocabulary format version");
  }
  Vocabulary v;
  v.words = j.at("words").get<std::vector<std::string>>();
  if (j.at("k").get<int>() != static_cast<int>(v.words.size())) {
    fail("vocab", "vocabulary k does not match word count");
  }
  for (std::size_t i = 0; i < v.words.size(); ++i) {
    if (!v.index.emplace(v.words[i], static_cast<int>(i)).second) {
      fail("vocab", "duplicate word in vocabulary: " + v.words[i]);
    }
  }
  return v;
}

inline void save_vocabulary(const Vocabulary& v, const std::filesystem::path& path) {
  write_file(path, vocabulary_to_json(v).dump(2) + "\n");
}

inline Vocabulary load_vocabulary(const std::filesystem::path& path) {
  return vocabulary_from_json(nlohmann::json::parse(read_file(path)));
}

}  // namespace openattr
