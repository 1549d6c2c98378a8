#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "openattr/error.hpp"
#include "openattr/features.hpp"
#include "openattr/rng.hpp"
#include "openattr/vocab.hpp"

namespace openattr {

enum class Regularization { L2, L1 };
enum class ClassWeighting { Balanced, None };

inline const char* regularization_name(Regularization r) {
  return r == Regularization::L2 ? "l2" : "l1";
}

inline Regularization regularization_from_name(const std::string& s) {
  if (s == "l2") return Regularization::L2;
  if (s == "l1") return Regularization::L1;
  fail("svm", "unknown regularization '" + s + "' (expected l2|l1)");
}

struct TrainConfig {
  std::vector<double> alpha_grid = {1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1e0, 1e1};
  int epochs = 20;
  double eta0 = 0.0;  // <= 0: pick by the line probe below
  std::uint64_t seed = 42;
  ClassWeighting class_weighting = ClassWeighting::Balanced;
};

struct LinearModel {
  std::vector<double> weights;
  double bias = 0.0;
  Regularization reg = Regularization::L2;
  double alpha = 0.0;
  std::uint64_t seed = 42;

  std::size_t nnz() const {
    std::size_t n = 0;
    for (double w : weights) {
      if (w != 0.0) ++n;
    }
    return n;
  }
};

struct TrainTrace {
  double eta0 = 0.0;
  std::vector<double> epoch_objective;  // full-batch objective after each epoch
};

inline double hinge_loss(double margin) { return margin < 1.0 ? 1.0 - margin : 0.0; }

struct ClassWeights {
  double positive = 1.0;
  double negative = 1.0;
};

// N / (2 * N_y): each class contributes equally to the weighted loss.
inline ClassWeights balanced_class_weights(std::size_t n_pos, std::size_t n_neg) {
  double n = static_cast<double>(n_pos + n_neg);
  return {n / (2.0 * static_cast<double>(n_pos)), n / (2.0 * static_cast<double>(n_neg))};
}

inline double sparse_dot(const std::vector<double>& w, const FeatureVector& x) {
  double acc = 0.0;
  for (std::size_t i = 0; i < x.indices.size(); ++i) acc += w[x.indices[i]] * x.values[i];
  return acc;
}

// (1/N) * sum_i c_{y_i} * hinge(y_i (w.x_i + b)) + alpha * R(w)
// with R = 0.5||w||^2 (L2) or ||w||_1 (L1). The bias is unregularized.
inline double svm_objective(const std::vector<double>& weights, double bias,
                            const std::vector<FeatureVector>& rows,
                            const std::vector<int>& labels, const ClassWeights& cw,
                            Regularization reg, double alpha) {
  double loss = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    double y = labels[i] > 0 ? 1.0 : -1.0;
    double c = labels[i] > 0 ? cw.positive : cw.negative;
    loss += c * hinge_loss(y * (sparse_dot(weights, rows[i]) + bias));
  }
  loss /= static_cast<double>(rows.size());
  double reg_term = 0.0;
  if (reg == Regularization::L2) {
    for (double w : weights) reg_term += 0.5 * w * w;
  } else {
    for (double w : weights) reg_term += std::abs(w);
  }
  return loss + alpha * reg_term;
}

namespace detail {

// Stochastic subgradient state. L2 uses the scaled-vector trick so each
// step touches only the sample's nonzeros; L1 uses cumulative-penalty
// clipping, which drives weights to exact zeros.
struct SgdState {
  Regularization reg;
  double alpha;
  ClassWeights cw;
  double scale = 1.0;  // L2 only: weights = scale * v
  std::vector<double> v;
  double bias = 0.0;
  double penalty_total = 0.0;       // L1: cumulative eta*alpha
  std::vector<double> penalty_applied;  // L1: per-coordinate applied penalty
  std::uint64_t t = 1;

  SgdState(std::uint32_t dim, Regularization r, double a, ClassWeights w)
      : reg(r), alpha(a), cw(w), v(dim, 0.0) {
    if (reg == Regularization::L1) penalty_applied.assign(dim, 0.0);
  }

  void clip(std::uint32_t j) {
    double& w = v[j];
    double z = w;
    double& q = penalty_applied[j];
    if (w > 0.0) {
      w = std::max(0.0, w - (penalty_total + q));
    } else if (w < 0.0) {
      w = std::min(0.0, w + (penalty_total - q));
    }
    q += w - z;
  }

  void step(const FeatureVector& x, int label, double eta) {
    double y = label > 0 ? 1.0 : -1.0;
    double c = label > 0 ? cw.positive : cw.negative;
    double decision = scale * sparse_dot(v, x) + bias;
    bool active = y * decision < 1.0;

    if (reg == Regularization::L2) {
      scale *= 1.0 - eta * alpha;  // eta*alpha < 1 under the 1/(1+eta0*alpha*t) schedule
      if (active) {
        double g = eta * c * y / scale;
        for (std::size_t i = 0; i < x.indices.size(); ++i) v[x.indices[i]] += g * x.values[i];
        bias += eta * c * y;
      }
      if (scale < 1e-9) {
        for (double& w : v) w *= scale;
        scale = 1.0;
      }
    } else {
      penalty_total += eta * alpha;
      if (active) {
        double g = eta * c * y;
        for (std::size_t i = 0; i < x.indices.size(); ++i) v[x.indices[i]] += g * x.values[i];
        bias += eta * c * y;
      }
      for (std::uint32_t j : x.indices) clip(j);
    }
    ++t;
  }

  std::pair<std::vector<double>, double> finalize() {
    std::vector<double> w = v;
    if (reg == Regularization::L2) {
      for (double& x : w) x *= scale;
    } else {
      // Flush pending penalty so untouched coordinates end truncated too.
      for (std::uint32_t j = 0; j < w.size(); ++j) {
        double z = w[j];
        double q = penalty_applied[j];
        if (z > 0.0) {
          w[j] = std::max(0.0, z - (penalty_total + q));
        } else if (z < 0.0) {
          w[j] = std::min(0.0, z + (penalty_total - q));
        }
      }
    }
    return {std::move(w), bias};
  }

  std::vector<double> snapshot_weights() const {
    SgdState copy = *this;
    return copy.finalize().first;
  }
};

inline void run_epoch(SgdState& state, const std::vector<FeatureVector>& rows,
                      const std::vector<int>& labels, const std::vector<std::size_t>& order,
                      double eta0, double alpha) {
  for (std::size_t idx : order) {
    double eta = eta0 / (1.0 + eta0 * alpha * static_cast<double>(state.t));
    state.step(rows[idx], labels[idx], eta);
  }
}

// Line probe: one epoch over a small seeded sample per candidate step size,
// keep the candidate with the lowest resulting objective on that sample.
inline double probe_eta0(const std::vector<FeatureVector>& rows, const std::vector<int>& labels,
                         const ClassWeights& cw, Regularization reg, double alpha,
                         std::uint32_t dim, std::uint64_t seed) {
  static constexpr double kCandidates[] = {1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0};
  std::vector<std::size_t> order(rows.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng = Rng::stream(seed, 0x70726f6265ULL);  // probe stream
  rng.shuffle(order);
  if (order.size() > 256) order.resize(256);

  std::vector<FeatureVector> sample_rows;
  std::vector<int> sample_labels;
  sample_rows.reserve(order.size());
  for (std::size_t idx : order) {
    sample_rows.push_back(rows[idx]);
    sample_labels.push_back(labels[idx]);
  }
  std::vector<std::size_t> sample_order(sample_rows.size());
  std::iota(sample_order.begin(), sample_order.end(), 0);

  double best = kCandidates[0];
  double best_obj = std::numeric_limits<double>::infinity();
  for (double candidate : kCandidates) {
    SgdState state(dim, reg, alpha, cw);
    run_epoch(state, sample_rows, sample_labels, sample_order, candidate, alpha);
    auto [w, b] = state.finalize();
    double obj = svm_objective(w, b, sample_rows, sample_labels, cw, reg, alpha);
    if (std::isfinite(obj) && obj < best_obj) {
      best_obj = obj;
      best = candidate;
    }
  }
  return best;
}

}  // namespace detail

// Epoch-wise shuffled SGD on the weighted hinge objective with learning
// rate eta_t = eta0 / (1 + eta0 * alpha * t). Deterministic given the seed.
inline LinearModel train_binary(const std::vector<FeatureVector>& rows,
                                const std::vector<int>& labels, const TrainConfig& cfg,
                                Regularization reg, double alpha, TrainTrace* trace = nullptr) {
  if (rows.size() != labels.size()) fail("svm", "rows/labels size mismatch");
  if (rows.empty()) fail("svm", "no training rows");
  if (cfg.epochs < 1) fail("svm", "epochs must be >= 1");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) fail("svm", "alpha must be positive and finite");

  const std::uint32_t dim = rows.front().dim;
  std::size_t n_pos = 0, n_neg = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].dim != dim) fail("svm", "inconsistent feature dimensions");
    for (double v : rows[i].values) {
      if (!std::isfinite(v)) fail("svm", "non-finite feature value");
    }
    if (labels[i] > 0) {
      ++n_pos;
    } else {
      ++n_neg;
    }
  }
  if (n_pos == 0 || n_neg == 0) fail("svm", "training data contains a single class");

  ClassWeights cw = cfg.class_weighting == ClassWeighting::Balanced
                        ? balanced_class_weights(n_pos, n_neg)
                        : ClassWeights{};
  double eta0 = cfg.eta0 > 0.0
                    ? cfg.eta0
                    : detail::probe_eta0(rows, labels, cw, reg, alpha, dim, cfg.seed);
  if (trace) {
    trace->eta0 = eta0;
    trace->epoch_objective.clear();
  }

  detail::SgdState state(dim, reg, alpha, cw);
  std::vector<std::size_t> order(rows.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng = Rng::stream(cfg.seed, 0x73676400ULL);  // shuffle stream
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    detail::run_epoch(state, rows, labels, order, eta0, alpha);
    if (trace) {
      std::vector<double> w = state.snapshot_weights();
      trace->epoch_objective.push_back(
          svm_objective(w, state.bias, rows, labels, cw, reg, alpha));
    }
  }

  LinearModel model;
  auto [w, b] = state.finalize();
  model.weights = std::move(w);
  model.bias = b;
  model.reg = reg;
  model.alpha = alpha;
  model.seed = cfg.seed;
  return model;
}

// w.x + b; classification is positive iff the value is > 0.
inline double decision(const LinearModel& m, const FeatureVector& fv) {
  if (fv.dim != m.weights.size()) fail("svm", "decision: dimension mismatch");
  return sparse_dot(m.weights, fv) + m.bias;
}

// F1 of the positive class for sign predictions (0 when degenerate).
inline double binary_f1(const std::vector<double>& decisions, const std::vector<int>& labels) {
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < decisions.size(); ++i) {
    bool predicted = decisions[i] > 0.0;
    bool actual = labels[i] > 0;
    if (predicted && actual) ++tp;
    if (predicted && !actual) ++fp;
    if (!predicted && actual) ++fn;
  }
  double denom = static_cast<double>(2 * tp + fp + fn);
  return denom == 0.0 ? 0.0 : 2.0 * static_cast<double>(tp) / denom;
}

struct TuneTrace {
  std::vector<std::pair<double, double>> grid_f1;  // (alpha, validation F1)
  double best_f1 = 0.0;
};

// Grid search over alpha maximizing validation F1 of the positive class;
// ties go to the larger alpha.
inline LinearModel tune_alpha(const std::vector<FeatureVector>& train_rows,
                              const std::vector<int>& train_labels,
                              const std::vector<FeatureVector>& val_rows,
                              const std::vector<int>& val_labels, const TrainConfig& cfg,
                              Regularization reg, TuneTrace* trace = nullptr) {
  if (cfg.alpha_grid.empty()) fail("svm", "alpha grid is empty");
  bool val_pos = false, val_neg = false;
  for (int y : val_labels) (y > 0 ? val_pos : val_neg) = true;
  if (!val_pos || !val_neg) fail("svm", "validation set must contain both classes");

  std::vector<double> grid = cfg.alpha_grid;
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  LinearModel best;
  double best_f1 = -1.0;
  for (double alpha : grid) {
    LinearModel candidate = train_binary(train_rows, train_labels, cfg, reg, alpha);
    std::vector<double> decisions;
    decisions.reserve(val_rows.size());
    for (const FeatureVector& fv : val_rows) decisions.push_back(decision(candidate, fv));
    double f1 = binary_f1(decisions, val_labels);
    if (trace) trace->grid_f1.emplace_back(alpha, f1);
    if (f1 >= best_f1) {  // ascending grid: >= keeps the largest tied alpha
      best_f1 = f1;
      best = std::move(candidate);
    }
  }
  if (trace) trace->best_f1 = best_f1;
  return best;
}

// Up to n non-zero coefficients by descending |value|, paired with their
// vocabulary words. Ties break toward the lower index.
inline std::vector<std::pair<std::string, double>> top_coefficients(const LinearModel& m, int n,
                                                                    const Vocabulary& v) {
  if (n < 1) fail("svm", "top_coefficients: n must be >= 1");
  if (static_cast<std::size_t>(v.k()) != m.weights.size()) {
    fail("svm", "top_coefficients: vocabulary size does not match model");
  }
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < m.weights.size(); ++i) {
    if (m.weights[i] != 0.0) idx.push_back(i);
  }
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    double ma = std::abs(m.weights[a]), mb = std::abs(m.weights[b]);
    if (ma != mb) return ma > mb;
    return a < b;
  });
  if (idx.size() > static_cast<std::size_t>(n)) idx.resize(static_cast<std::size_t>(n));
  std::vector<std::pair<std::string, double>> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.emplace_back(v.words[i], m.weights[i]);
  return out;
}

// --- serialization: {version, reg, alpha, seed, bias, dense or sparse weights} ---

inline constexpr int kModelFormatVersion = 1;

inline nlohmann::ordered_json linear_model_to_json(const LinearModel& m) {
  nlohmann::ordered_json j;
  j["version"] = kModelFormatVersion;
  j["reg"] = regularization_name(m.reg);
  j["alpha"] = m.alpha;
  j["seed"] = m.seed;
  j["bias"] = m.bias;
  j["dim"] = m.weights.size();
  std::size_t nnz = m.nnz();
  if (nnz * 2 < m.weights.size()) {
    nlohmann::ordered_json sparse;
    std::vector<std::size_t> indices;
    std::vector<double> values;
    for (std::size_t i = 0; i < m.weights.size(); ++i) {
      if (m.weights[i] != 0.0) {
        indices.push_back(i);
        values.push_back(m.weights[i]);
      }
    }
    sparse["indices"] = indices;
    sparse["values"] = values;
    j["weights"] = sparse;
  } else {
    j["weights"] = m.weights;
  }
  return j;
}

inline LinearModel linear_model_from_json(const nlohmann::json& j) {
  if (!j.contains("version") || j.at("version").get<int>() != kModelFormatVersion) {
    fail("svm", "unsupported model format version");
  }
  LinearModel m;
  m.reg = regularization_from_name(j.at("reg").get<std::string>());
  m.alpha = j.at("alpha").get<double>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.bias = j.at("bias").get<double>();
  std::size_t dim = j.at("dim").get<std::size_t>();
  const auto& w = j.at("weights");
  if (w.is_array()) {
    m.weights = w.get<std::vector<double>>();
    if (m.weights.size() != dim) fail("svm", "model weight count does not match dim");
  } else {
    m.weights.assign(dim, 0.0);
    auto indices = w.at("indices").get<std::vector<std::size_t>>();
    auto values = w.at("values").get<std::vector<double>>();
    if (indices.size() != values.size()) fail("svm", "model sparse weight arrays differ");
    for (std::size_t i = 0; i < indices.size(); ++i) {
      if (indices[i] >= dim) fail("svm", "model sparse index out of range");
      m.weights[indices[i]] = values[i];
    }
  }
  return m;
}

}  // namespace openattr
