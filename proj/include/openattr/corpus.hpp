#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "openattr/error.hpp"
#include "openattr/io.hpp"
#include "openattr/parallel.hpp"
#include "openattr/rng.hpp"

namespace openattr {

enum class BookRole { Known, OodValidation, OodTest };

struct Author {
  int id = -1;
  std::string name;
  bool known = false;
};

struct BookRef {
  int id = -1;      // dense manifest row index
  int author = -1;  // dense author id
  std::string title;
  std::string path;  // resolved, readable at load time
  BookRole role = BookRole::Known;
};

struct Corpus {
  std::vector<Author> authors;
  std::vector<BookRef> books;
};

// Per-token casing tallies gathered while tokenizing; the vocabulary's
// name filter consumes these, so the raw text never has to be re-read.
struct TokenCaseStats {
  std::uint32_t total = 0;
  std::uint32_t non_initial = 0;
  std::uint32_t non_initial_capitalized = 0;
};

using CaseStatsMap = std::unordered_map<std::string, TokenCaseStats>;

struct TokenizedText {
  std::vector<std::vector<std::string>> sentences;
  CaseStatsMap case_stats;

  std::size_t token_count() const {
    std::size_t n = 0;
    for (const auto& s : sentences) n += s.size();
    return n;
  }
};

struct TokenizedBook {
  BookRef book;
  TokenizedText text;
};

// ---------------------------------------------------------------------------
// Tokenization.
//
// Word grammar: maximal runs of alphabetic characters plus internal
// apostrophes and hyphens; digits and all other characters separate tokens.
// Tokens are lowercased (ASCII + Latin-1 fold; U+2019 normalizes to ').
// Sentences split on . ! ? … followed by whitespace and an uppercase letter
// (optionally behind quotes) or by end of text; a fixed abbreviation list
// suppresses splits after a lone period.
// ---------------------------------------------------------------------------

namespace detail {

struct Codepoint {
  std::uint32_t value = 0;
  int width = 1;
};

inline Codepoint decode_utf8(std::string_view s, std::size_t i) {
  auto byte = [&](std::size_t k) { return static_cast<unsigned char>(s[k]); };
  unsigned char c = byte(i);
  if (c < 0x80) return {c, 1};
  auto cont = [&](std::size_t k) { return k < s.size() && (byte(k) & 0xC0) == 0x80; };
  if ((c & 0xE0) == 0xC0 && cont(i + 1)) {
    return {static_cast<std::uint32_t>((c & 0x1Fu) << 6 | (byte(i + 1) & 0x3Fu)), 2};
  }
  if ((c & 0xF0) == 0xE0 && cont(i + 1) && cont(i + 2)) {
    return {static_cast<std::uint32_t>((c & 0x0Fu) << 12 | (byte(i + 1) & 0x3Fu) << 6 |
                                       (byte(i + 2) & 0x3Fu)),
            3};
  }
  if ((c & 0xF8) == 0xF0 && cont(i + 1) && cont(i + 2) && cont(i + 3)) {
    return {static_cast<std::uint32_t>((c & 0x07u) << 18 | (byte(i + 1) & 0x3Fu) << 12 |
                                       (byte(i + 2) & 0x3Fu) << 6 | (byte(i + 3) & 0x3Fu)),
            4};
  }
  return {0xFFFD, 1};  // invalid byte: treated as a separator
}

inline void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

// ASCII plus Latin-1/Extended-A/B letters; enough for 19th-century English
// e-texts with accented names. Anything else separates tokens.
inline bool is_alpha_cp(std::uint32_t cp) {
  if ((cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z')) return true;
  if (cp >= 0xC0 && cp <= 0x24F) return cp != 0xD7 && cp != 0xF7;
  return false;
}

inline bool is_upper_cp(std::uint32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return true;
  return cp >= 0xC0 && cp <= 0xDE && cp != 0xD7;
}

inline std::uint32_t fold_lower_cp(std::uint32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;
  return cp;
}

inline std::uint32_t fold_upper_cp(std::uint32_t cp) {
  if (cp >= 'a' && cp <= 'z') return cp - 0x20;
  if (cp >= 0xE0 && cp <= 0xFE && cp != 0xF7) return cp - 0x20;
  return cp;
}

inline bool is_apostrophe_cp(std::uint32_t cp) { return cp == '\'' || cp == 0x2019; }

// ASCII hyphen and the Unicode hyphens join compounds; en/em dashes separate.
inline bool is_hyphen_cp(std::uint32_t cp) {
  return cp == '-' || cp == 0x2010 || cp == 0x2011;
}

inline bool is_terminator_cp(std::uint32_t cp) {
  return cp == '.' || cp == '!' || cp == '?' || cp == 0x2026;
}

inline bool is_quote_cp(std::uint32_t cp) {
  switch (cp) {
    case '"':
    case '\'':
    case 0x2018:
    case 0x2019:
    case 0x201C:
    case 0x201D:
    case 0xAB:
    case 0xBB:
      return true;
    default:
      return false;
  }
}

inline bool is_space_cp(std::uint32_t cp) {
  switch (cp) {
    case ' ':
    case '\t':
    case '\n':
    case '\r':
    case '\f':
    case '\v':
    case 0xA0:
      return true;
    default:
      return false;
  }
}

inline const std::unordered_set<std::string>& abbreviations() {
  static const std::unordered_set<std::string> set = {"mr", "mrs", "dr", "st",
                                                      "etc", "vol", "no", "ch"};
  return set;
}

// True when a sentence boundary follows the terminator run ending at `pos`:
// optional closing quotes, then end of text, or whitespace followed by an
// (optionally quoted) uppercase letter.
inline bool boundary_follows(std::string_view text, std::size_t pos) {
  std::size_t i = pos;
  while (i < text.size()) {
    Codepoint c = decode_utf8(text, i);
    if (!is_quote_cp(c.value)) break;
    i += c.width;
  }
  if (i >= text.size()) return true;
  Codepoint c = decode_utf8(text, i);
  if (!is_space_cp(c.value)) return false;
  while (i < text.size()) {
    c = decode_utf8(text, i);
    if (!is_space_cp(c.value)) break;
    i += c.width;
  }
  while (i < text.size()) {
    c = decode_utf8(text, i);
    if (!is_quote_cp(c.value)) break;
    i += c.width;
  }
  if (i >= text.size()) return true;
  c = decode_utf8(text, i);
  return is_upper_cp(c.value);
}

}  // namespace detail

inline TokenizedText tokenize(std::string_view text) {
  TokenizedText out;
  std::vector<std::string> sentence;
  std::string token;
  bool token_capitalized = false;
  bool prev_was_token_char = false;  // the codepoint just consumed extended `token`

  auto close_token = [&]() -> std::string {
    if (token.empty()) return {};
    // Apostrophes/hyphens are internal only: trim the ends.
    std::size_t begin = 0, end = token.size();
    while (begin < end && (token[begin] == '\'' || token[begin] == '-')) ++begin;
    while (end > begin && (token[end - 1] == '\'' || token[end - 1] == '-')) --end;
    std::string word = token.substr(begin, end - begin);
    token.clear();
    if (word.empty()) return {};
    TokenCaseStats& st = out.case_stats[word];
    st.total++;
    if (!sentence.empty()) {
      st.non_initial++;
      if (token_capitalized) st.non_initial_capitalized++;
    }
    sentence.push_back(word);
    return word;
  };

  auto close_sentence = [&]() {
    if (!sentence.empty()) {
      out.sentences.push_back(std::move(sentence));
      sentence.clear();
    }
  };

  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    detail::Codepoint c = detail::decode_utf8(text, i);
    if (detail::is_alpha_cp(c.value)) {
      if (token.empty()) token_capitalized = detail::is_upper_cp(c.value);
      detail::append_utf8(token, detail::fold_lower_cp(c.value));
      i += c.width;
      prev_was_token_char = true;
      continue;
    }
    if (!token.empty() &&
        (detail::is_apostrophe_cp(c.value) || detail::is_hyphen_cp(c.value))) {
      token.push_back(detail::is_apostrophe_cp(c.value) ? '\'' : '-');
      i += c.width;
      prev_was_token_char = true;
      continue;
    }
    if (detail::is_terminator_cp(c.value)) {
      bool adjacent = prev_was_token_char;
      std::string closed = close_token();
      // Consume the whole terminator run ( "..." , "?!" ).
      std::size_t run = 0;
      std::uint32_t first_cp = c.value;
      while (i < n) {
        detail::Codepoint t = detail::decode_utf8(text, i);
        if (!detail::is_terminator_cp(t.value)) break;
        i += t.width;
        run++;
      }
      prev_was_token_char = false;
      if (run == 1 && first_cp == '.' && adjacent && !closed.empty() &&
          detail::abbreviations().count(closed) > 0) {
        continue;  // abbreviation: no boundary
      }
      if (detail::boundary_follows(text, i)) close_sentence();
      continue;
    }
    // Separator (space, digit, punctuation, anything else).
    close_token();
    i += c.width;
    prev_was_token_char = false;
  }
  close_token();
  close_sentence();
  return out;
}

// Canonical textual form of tokenized sentences: first letter capitalized,
// tokens space-joined, sentences closed with a period. tokenize() of this
// reproduces the input exactly, except for sentences whose final token is
// on the abbreviation list.
inline std::string canonical_join(const std::vector<std::vector<std::string>>& sentences) {
  std::string out;
  for (std::size_t s = 0; s < sentences.size(); ++s) {
    if (s > 0) out.push_back(' ');
    const auto& sent = sentences[s];
    for (std::size_t t = 0; t < sent.size(); ++t) {
      if (t > 0) out.push_back(' ');
      if (t == 0) {
        detail::Codepoint c = detail::decode_utf8(sent[t], 0);
        std::string head;
        detail::append_utf8(head, detail::fold_upper_cp(c.value));
        out += head;
        out.append(sent[t], static_cast<std::size_t>(c.width),
                   sent[t].size() - static_cast<std::size_t>(c.width));
      } else {
        out += sent[t];
      }
    }
    out.push_back('.');
  }
  return out;
}

// ---------------------------------------------------------------------------
// Manifest.
//
// UTF-8 delimiter-separated file, header `author,title,path,role`,
// role in {known, ood_validation, ood_test}. Fields may be double-quoted
// ("" escapes a quote). Book paths resolve relative to the manifest.
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<std::string> parse_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  std::size_t i = 0;
  while (i < line.size()) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          i += 2;
        } else {
          quoted = false;
          ++i;
        }
      } else {
        field.push_back(c);
        ++i;
      }
    } else if (c == '"' && field.empty()) {
      quoted = true;
      ++i;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      ++i;
    } else {
      field.push_back(c);
      ++i;
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

inline std::string trim(std::string s) {
  auto issp = [](unsigned char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  std::size_t b = 0, e = s.size();
  while (b < e && issp(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && issp(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

inline BookRole parse_role(const std::string& s, int line_no) {
  if (s == "known") return BookRole::Known;
  if (s == "ood_validation") return BookRole::OodValidation;
  if (s == "ood_test") return BookRole::OodTest;
  fail("manifest", "line " + std::to_string(line_no) + ": unknown role '" + s +
                       "' (expected known|ood_validation|ood_test)");
}

}  // namespace detail

inline const char* role_name(BookRole r) {
  switch (r) {
    case BookRole::Known:
      return "known";
    case BookRole::OodValidation:
      return "ood_validation";
    default:
      return "ood_test";
  }
}

inline Corpus load_manifest(const std::filesystem::path& manifest_path) {
  std::string raw = read_file(manifest_path);
  strip_bom(raw);
  const std::filesystem::path base = manifest_path.has_parent_path()
                                         ? manifest_path.parent_path()
                                         : std::filesystem::path(".");
  Corpus corpus;
  std::unordered_map<std::string, int> author_ids;
  std::unordered_set<std::string> seen_books;

  std::size_t pos = 0;
  int line_no = 0;
  bool header_seen = false;
  while (pos <= raw.size()) {
    std::size_t nl = raw.find('\n', pos);
    std::string line = raw.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
    pos = nl == std::string::npos ? raw.size() + 1 : nl + 1;
    ++line_no;
    line = detail::trim(line);
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != "author,title,path,role") {
        fail("manifest", "expected header 'author,title,path,role', got '" + line + "'");
      }
      header_seen = true;
      continue;
    }
    std::vector<std::string> fields = detail::parse_csv_line(line);
    if (fields.size() != 4) {
      fail("manifest", "line " + std::to_string(line_no) + ": expected 4 fields, got " +
                           std::to_string(fields.size()));
    }
    const std::string author_name = detail::trim(fields[0]);
    const std::string title = detail::trim(fields[1]);
    const std::string rel_path = detail::trim(fields[2]);
    const BookRole role = detail::parse_role(detail::trim(fields[3]), line_no);
    if (author_name.empty() || title.empty() || rel_path.empty()) {
      fail("manifest", "line " + std::to_string(line_no) + ": empty field");
    }

    auto [it, inserted] = author_ids.emplace(author_name, static_cast<int>(corpus.authors.size()));
    if (inserted) {
      corpus.authors.push_back(Author{it->second, author_name, false});
    }
    Author& author = corpus.authors[static_cast<std::size_t>(it->second)];
    if (role == BookRole::Known) author.known = true;

    if (!seen_books.insert(author_name + "\x1f" + title).second) {
      fail("manifest", "duplicate book (" + author_name + ", " + title + ")");
    }

    std::filesystem::path resolved = std::filesystem::path(rel_path).is_absolute()
                                         ? std::filesystem::path(rel_path)
                                         : base / rel_path;
    {
      std::ifstream probe(resolved, std::ios::binary);
      if (!probe) {
        fail("manifest", "line " + std::to_string(line_no) + ": unreadable book path '" +
                             resolved.string() + "'");
      }
    }

    BookRef ref;
    ref.id = static_cast<int>(corpus.books.size());
    ref.author = it->second;
    ref.title = title;
    ref.path = resolved.string();
    ref.role = role;
    corpus.books.push_back(std::move(ref));
  }
  if (!header_seen || corpus.books.empty()) fail("manifest", "empty corpus");

  // An author may not mix known and out-of-distribution books.
  std::vector<bool> has_ood(corpus.authors.size(), false);
  for (const BookRef& b : corpus.books) {
    if (b.role != BookRole::Known) has_ood[static_cast<std::size_t>(b.author)] = true;
  }
  for (const Author& a : corpus.authors) {
    if (a.known && has_ood[static_cast<std::size_t>(a.id)]) {
      fail("manifest", "author '" + a.name + "' has both known and ood books");
    }
  }
  return corpus;
}

inline std::string read_book_text(const BookRef& book) {
  std::string text = read_file(book.path);
  strip_bom(text);
  return text;
}

inline std::vector<TokenizedBook> tokenize_corpus(const Corpus& corpus, int threads = 1) {
  std::vector<TokenizedBook> books(corpus.books.size());
  parallel_for(corpus.books.size(), threads, [&](std::size_t i) {
    books[i].book = corpus.books[i];
    books[i].text = tokenize(read_book_text(corpus.books[i]));
  });
  return books;
}

// ---------------------------------------------------------------------------
// Splits.
// ---------------------------------------------------------------------------

enum class Split { Train, Validation, Test };

struct SplitAssignment {
  std::vector<Split> by_book;  // indexed by BookRef.id

  std::vector<int> books_in(Split s) const {
    std::vector<int> out;
    for (std::size_t i = 0; i < by_book.size(); ++i) {
      if (by_book[i] == s) out.push_back(static_cast<int>(i));
    }
    return out;
  }
};

// Book-disjoint 64/16/20 split. Known authors need at least 3 books; each
// then lands at least one book in every split. Greedy over sentence counts
// (proportional to document counts at any chunk size): seeded shuffle,
// stable sort by weight descending, assign to the split with the largest
// relative remaining deficit.
inline SplitAssignment make_splits(const std::vector<TokenizedBook>& books, std::uint64_t seed) {
  constexpr double kTargets[3] = {0.64, 0.16, 0.20};  // train, validation, test

  int max_author = -1;
  for (std::size_t i = 0; i < books.size(); ++i) {
    if (books[i].book.id != static_cast<int>(i)) {
      fail("splits", "book ids must be dense and in order");
    }
    max_author = std::max(max_author, books[i].book.author);
  }
  SplitAssignment out;
  out.by_book.assign(books.size(), Split::Train);

  std::vector<std::vector<int>> known_books(static_cast<std::size_t>(max_author + 1));
  for (const TokenizedBook& tb : books) {
    switch (tb.book.role) {
      case BookRole::OodValidation:
        out.by_book[static_cast<std::size_t>(tb.book.id)] = Split::Validation;
        break;
      case BookRole::OodTest:
        out.by_book[static_cast<std::size_t>(tb.book.id)] = Split::Test;
        break;
      case BookRole::Known:
        known_books[static_cast<std::size_t>(tb.book.author)].push_back(tb.book.id);
        break;
    }
  }

  for (std::size_t author = 0; author < known_books.size(); ++author) {
    std::vector<int>& ids = known_books[author];
    if (ids.empty()) continue;
    if (ids.size() < 3) {
      fail("splits", "known author id " + std::to_string(author) + " has " +
                         std::to_string(ids.size()) + " books; at least 3 required");
    }
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(author));
    rng.shuffle(ids);
    auto weight = [&](int id) {
      return std::max<std::size_t>(1, books[static_cast<std::size_t>(id)].text.sentences.size());
    };
    std::stable_sort(ids.begin(), ids.end(),
                     [&](int a, int b) { return weight(a) > weight(b); });

    double total = 0;
    for (int id : ids) total += static_cast<double>(weight(id));
    double current[3] = {0, 0, 0};
    for (int id : ids) {
      int best = 0;
      double best_deficit = -1e300;
      for (int s = 0; s < 3; ++s) {
        double deficit = (kTargets[s] * total - current[s]) / kTargets[s];
        if (deficit > best_deficit + 1e-12 ||
            (deficit > best_deficit - 1e-12 && kTargets[s] > kTargets[best])) {
          best = s;
          best_deficit = std::max(best_deficit, deficit);
        }
      }
      current[best] += static_cast<double>(weight(id));
      out.by_book[static_cast<std::size_t>(id)] = static_cast<Split>(best);
    }
  }
  return out;
}

}  // namespace openattr
