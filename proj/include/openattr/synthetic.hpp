#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "openattr/error.hpp"
#include "openattr/io.hpp"
#include "openattr/rng.hpp"

namespace openattr {

// Desk-scale corpus generator: every author samples words from a tilted
// mixture over one shared pool. separation = 0 makes all authors identical;
// large separation gives each author a strong signature-word profile.
struct SyntheticSpec {
  int n_authors = 8;
  int n_ood_authors = 0;
  int books_per_author = 5;
  int ood_books_per_author = 3;
  int sentences_per_book = 600;
  int vocab_pool = 800;
  double separation = 4.0;
  double signature_fraction = 0.15;  // share of pool words boosted per author
  int sentence_words_min = 8;
  int sentence_words_max = 18;
  std::uint64_t seed = 42;
  int ood_clone_of = -1;  // >= 0: the first ood author copies this known author's mixture
};

namespace detail {

// Pronounceable unique pseudo-words: three consonant-vowel syllables.
inline std::string pool_word(int index) {
  static constexpr char consonants[] = "bcdfgklmnprstvz";
  static constexpr char vowels[] = "aeiou";
  constexpr int kSyllables = 15 * 5;
  std::string w;
  int x = index;
  for (int s = 0; s < 3; ++s) {
    int syl = x % kSyllables;
    x /= kSyllables;
    w.push_back(consonants[syl / 5]);
    w.push_back(vowels[syl % 5]);
  }
  return w;
}

inline std::vector<double> author_mixture_cdf(const SyntheticSpec& spec,
                                              std::uint64_t author_stream) {
  Rng rng = Rng::stream(spec.seed, 0x6d697800ULL + author_stream);
  std::vector<double> cdf(static_cast<std::size_t>(spec.vocab_pool));
  double acc = 0.0;
  for (int r = 0; r < spec.vocab_pool; ++r) {
    double base = 1.0 / std::pow(static_cast<double>(r) + 20.0, 0.8);
    bool signature = rng.uniform01() < spec.signature_fraction;
    double strength = 0.5 + 0.5 * rng.uniform01();
    double tilt = signature ? spec.separation * strength : 0.0;
    acc += base * (1.0 + tilt);
    cdf[static_cast<std::size_t>(r)] = acc;
  }
  return cdf;
}

inline int sample_from_cdf(const std::vector<double>& cdf, Rng& rng) {
  double u = rng.uniform01() * cdf.back();
  auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  if (it == cdf.end()) --it;
  return static_cast<int>(it - cdf.begin());
}

}  // namespace detail

// Writes books/<name>.txt files plus manifest.csv under out_dir and returns
// the manifest path. Byte-identical output for identical spec.
inline std::filesystem::path make_synthetic_corpus(const SyntheticSpec& spec,
                                                   const std::filesystem::path& out_dir) {
  if (spec.n_authors < 1) fail("synthetic", "need at least one author");
  if (spec.books_per_author < 3) fail("synthetic", "known authors need >= 3 books");
  if (spec.vocab_pool < 1) fail("synthetic", "empty word pool");
  if (spec.sentence_words_min < 1 || spec.sentence_words_max < spec.sentence_words_min) {
    fail("synthetic", "bad sentence length range");
  }
  if (spec.ood_clone_of >= spec.n_authors) fail("synthetic", "ood_clone_of out of range");

  std::vector<std::string> pool(static_cast<std::size_t>(spec.vocab_pool));
  for (int i = 0; i < spec.vocab_pool; ++i) {
    pool[static_cast<std::size_t>(i)] = detail::pool_word(i);
  }

  const int total_authors = spec.n_authors + spec.n_ood_authors;
  std::vector<std::vector<double>> cdfs(static_cast<std::size_t>(total_authors));
  for (int a = 0; a < total_authors; ++a) {
    if (a == spec.n_authors && spec.ood_clone_of >= 0) {
      cdfs[static_cast<std::size_t>(a)] = detail::author_mixture_cdf(
          spec, static_cast<std::uint64_t>(spec.ood_clone_of));
    } else {
      cdfs[static_cast<std::size_t>(a)] =
          detail::author_mixture_cdf(spec, static_cast<std::uint64_t>(a));
    }
  }

  // Out-of-distribution authors: seeded shuffle, floor(n/2) to validation,
  // the rest to test.
  std::vector<int> ood_roles(static_cast<std::size_t>(std::max(0, spec.n_ood_authors)), 0);
  {
    std::vector<int> order(ood_roles.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    Rng rng = Rng::stream(spec.seed, 0x6f6f64ULL);
    rng.shuffle(order);
    for (std::size_t i = 0; i < order.size(); ++i) {
      ood_roles[static_cast<std::size_t>(order[i])] = i < order.size() / 2 ? 1 : 2;
    }
  }

  std::filesystem::create_directories(out_dir / "books");
  std::string manifest = "author,title,path,role\n";
  char namebuf[64];
  for (int a = 0; a < total_authors; ++a) {
    bool known = a < spec.n_authors;
    if (known) {
      std::snprintf(namebuf, sizeof(namebuf), "author_%02d", a);
    } else {
      std::snprintf(namebuf, sizeof(namebuf), "ood_%02d", a - spec.n_authors);
    }
    std::string author_name = namebuf;
    const char* role = known ? "known"
                             : (ood_roles[static_cast<std::size_t>(a - spec.n_authors)] == 1
                                    ? "ood_validation"
                                    : "ood_test");
    int books = known ? spec.books_per_author : spec.ood_books_per_author;
    const std::vector<double>& cdf = cdfs[static_cast<std::size_t>(a)];
    for (int b = 0; b < books; ++b) {
      Rng rng = Rng::stream(spec.seed,
                            0x626f6f6bULL + static_cast<std::uint64_t>(a) * 4096 +
                                static_cast<std::uint64_t>(b));
      std::string text;
      for (int s = 0; s < spec.sentences_per_book; ++s) {
        int len = rng.uniform_int(spec.sentence_words_min, spec.sentence_words_max);
        for (int w = 0; w < len; ++w) {
          std::string word = pool[static_cast<std::size_t>(detail::sample_from_cdf(cdf, rng))];
          if (w == 0) word[0] = static_cast<char>(word[0] - 0x20);
          if (w > 0) text.push_back(' ');
          text += word;
        }
        text += ".\n";
      }
      std::snprintf(namebuf, sizeof(namebuf), "%s_book_%02d", author_name.c_str(), b);
      std::string file_name = std::string(namebuf) + ".txt";
      write_file(out_dir / "books" / file_name, text);
      manifest += author_name + ",book_" + (b < 10 ? "0" : "") + std::to_string(b) + ",books/" +
                  file_name + "," + role + "\n";
    }
  }
  std::filesystem::path manifest_path = out_dir / "manifest.csv";
  write_file(manifest_path, manifest);
  return manifest_path;
}

}  // namespace openattr
