#pragma once

#include <algorithm>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "openattr/error.hpp"
#include "openattr/openset.hpp"

namespace openattr {

inline double f1_score(double precision, double recall) {
  double denom = precision + recall;
  return denom == 0.0 ? 0.0 : 2.0 * precision * recall / denom;
}

struct PerAuthorMetrics {
  int author = -1;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  int support = 0;
  int tp = 0, fp = 0, fn = 0;
};

struct DetectionMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  int support = 0;  // number of true out-of-distribution documents
  int tp = 0, fp = 0, fn = 0;
};

struct EvalReport {
  std::vector<PerAuthorMetrics> per_author;  // ascending author id
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;  // unweighted mean over authors with support > 0
  // Present only when the test set contains out-of-distribution documents;
  // UNKNOWN is the positive detection class.
  std::optional<DetectionMetrics> detection;
  int total = 0;
  int correct = 0;
  int rejected = 0;  // predictions labeled UNKNOWN
};

// Per-author precision/recall/F1 plus detection metrics from a list of
// (true label, prediction). True labels are known author ids or
// kUnknownLabel. Authors with zero support are reported but excluded from
// the macro means. Pass `universe` to force rows for authors absent from
// the data (e.g. every author a model knows).
inline EvalReport evaluate(const std::vector<std::pair<int, Prediction>>& labeled,
                           const std::vector<int>& universe = {}) {
  if (labeled.empty()) fail("metrics", "evaluate: empty input");

  std::map<std::pair<int, int>, int> confusion;  // (truth, predicted) -> count
  std::set<int> authors(universe.begin(), universe.end());
  EvalReport report;
  report.total = static_cast<int>(labeled.size());
  for (const auto& [truth, pred] : labeled) {
    confusion[{truth, pred.label}]++;
    if (truth != kUnknownLabel) authors.insert(truth);
    if (pred.label != kUnknownLabel) authors.insert(pred.label);
    if (truth == pred.label) report.correct++;
    if (pred.label == kUnknownLabel) report.rejected++;
  }

  int with_support = 0;
  bool has_ood = false;
  for (const auto& [key, n] : confusion) {
    if (key.first == kUnknownLabel && n > 0) has_ood = true;
  }

  for (int a : authors) {
    PerAuthorMetrics pm;
    pm.author = a;
    for (const auto& [key, n] : confusion) {
      const auto& [truth, pred] = key;
      if (truth == a && pred == a) pm.tp += n;
      if (truth != a && pred == a) pm.fp += n;
      if (truth == a && pred != a) pm.fn += n;
    }
    pm.support = pm.tp + pm.fn;
    pm.precision = pm.tp + pm.fp == 0 ? 0.0
                                      : static_cast<double>(pm.tp) /
                                            static_cast<double>(pm.tp + pm.fp);
    pm.recall = pm.support == 0 ? 0.0
                                : static_cast<double>(pm.tp) / static_cast<double>(pm.support);
    pm.f1 = f1_score(pm.precision, pm.recall);
    if (pm.support > 0) {
      report.macro_precision += pm.precision;
      report.macro_recall += pm.recall;
      report.macro_f1 += pm.f1;
      ++with_support;
    }
    report.per_author.push_back(pm);
  }
  if (with_support > 0) {
    report.macro_precision /= with_support;
    report.macro_recall /= with_support;
    report.macro_f1 /= with_support;
  }

  if (has_ood) {
    DetectionMetrics dm;
    for (const auto& [key, n] : confusion) {
      const auto& [truth, pred] = key;
      if (truth == kUnknownLabel && pred == kUnknownLabel) dm.tp += n;
      if (truth != kUnknownLabel && pred == kUnknownLabel) dm.fp += n;
      if (truth == kUnknownLabel && pred != kUnknownLabel) dm.fn += n;
    }
    dm.support = dm.tp + dm.fn;
    dm.precision = dm.tp + dm.fp == 0
                       ? 0.0
                       : static_cast<double>(dm.tp) / static_cast<double>(dm.tp + dm.fp);
    dm.recall = dm.support == 0 ? 0.0
                                : static_cast<double>(dm.tp) / static_cast<double>(dm.support);
    dm.f1 = f1_score(dm.precision, dm.recall);
    report.detection = dm;
  }
  return report;
}

// Majority vote over chunk labels (UNKNOWN votes count). Vote ties break on
// the summed maximum decision value of each tied label's chunks; UNKNOWN
// voters contribute their (non-positive) maximum, so an author beats
// UNKNOWN on residual ties, which then go to the lowest author id.
inline int book_level_vote(const std::vector<Prediction>& chunks) {
  if (chunks.empty()) fail("metrics", "book_level_vote: no chunk predictions");
  std::map<int, int> votes;
  std::map<int, double> score_sum;
  for (const Prediction& p : chunks) {
    votes[p.label]++;
    double top = p.scores.empty() ? 0.0 : *std::max_element(p.scores.begin(), p.scores.end());
    score_sum[p.label] += top;
  }
  int best_label = chunks.front().label;
  bool first = true;
  for (const auto& [label, n] : votes) {
    if (first) {
      best_label = label;
      first = false;
      continue;
    }
    int bn = votes[best_label];
    if (n > bn) {
      best_label = label;
    } else if (n == bn) {
      double s = score_sum[label], bs = score_sum[best_label];
      if (s > bs) {
        best_label = label;
      } else if (s == bs) {
        // lowest author id wins; any author beats UNKNOWN
        if (best_label == kUnknownLabel || (label != kUnknownLabel && label < best_label)) {
          best_label = label;
        }
      }
    }
  }
  return best_label;
}

// --- report rendering ---

inline nlohmann::ordered_json report_to_json(const EvalReport& r,
                                             const std::vector<std::string>& names = {}) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json per = nlohmann::ordered_json::array();
  for (const PerAuthorMetrics& pm : r.per_author) {
    nlohmann::ordered_json a;
    a["author"] = pm.author;
    if (static_cast<std::size_t>(pm.author) < names.size()) {
      a["name"] = names[static_cast<std::size_t>(pm.author)];
    }
    a["precision"] = pm.precision;
    a["recall"] = pm.recall;
    a["f1"] = pm.f1;
    a["support"] = pm.support;
    per.push_back(std::move(a));
  }
  j["per_author"] = std::move(per);
  j["macro_precision"] = r.macro_precision;
  j["macro_recall"] = r.macro_recall;
  j["macro_f1"] = r.macro_f1;
  if (r.detection) {
    j["detection"] = {{"precision", r.detection->precision},
                      {"recall", r.detection->recall},
                      {"f1", r.detection->f1},
                      {"support", r.detection->support}};
  } else {
    j["detection"] = nullptr;
  }
  j["total"] = r.total;
  j["correct"] = r.correct;
  j["rejected"] = r.rejected;
  return j;
}

inline std::string format_report(const EvalReport& r, const std::vector<std::string>& names = {}) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-24s %9s %9s %9s %9s\n", "author", "precision", "recall",
                "f1", "support");
  out << line;
  for (const PerAuthorMetrics& pm : r.per_author) {
    std::string name = static_cast<std::size_t>(pm.author) < names.size()
                           ? names[static_cast<std::size_t>(pm.author)]
                           : "author " + std::to_string(pm.author);
    std::snprintf(line, sizeof(line), "%-24s %9.3f %9.3f %9.3f %9d\n", name.c_str(), pm.precision,
                  pm.recall, pm.f1, pm.support);
    out << line;
  }
  std::snprintf(line, sizeof(line), "%-24s %9.3f %9.3f %9.3f %9d\n", "macro (support>0)",
                r.macro_precision, r.macro_recall, r.macro_f1, r.total);
  out << line;
  if (r.detection) {
    std::snprintf(line, sizeof(line), "%-24s %9.3f %9.3f %9.3f %9d\n", "detection (unknown)",
                  r.detection->precision, r.detection->recall, r.detection->f1,
                  r.detection->support);
    out << line;
  } else {
    out << "detection (unknown)            n/a (no out-of-distribution documents)\n";
  }
  return std::move(out).str();
}

}  // namespace openattr
