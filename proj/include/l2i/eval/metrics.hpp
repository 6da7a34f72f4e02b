#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "l2i/core/error.hpp"

namespace l2i {

// Fraction of samples where argmax of the classifier output appears in the
// interpreter's top-k classes. Interpreter ties break by ascending class index.
inline double topk_fidelity(const std::vector<std::vector<double>>& classifier_preds,
                            const std::vector<std::vector<double>>& interp_probs, int k) {
  require(classifier_preds.size() == interp_probs.size() && !classifier_preds.empty(),
          "prediction list mismatch");
  require(k >= 1, "k must be >= 1");
  int hits = 0;
  for (std::size_t i = 0; i < classifier_preds.size(); ++i) {
    const auto& f = classifier_preds[i];
    const auto& g = interp_probs[i];
    require(f.size() == g.size(), "class count mismatch");
    const int target =
        static_cast<int>(std::max_element(f.begin(), f.end()) - f.begin());
    std::vector<int> order(g.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return g[a] > g[b]; });
    const int depth = std::min<int>(k, static_cast<int>(order.size()));
    for (int j = 0; j < depth; ++j)
      if (order[j] == target) {
        ++hits;
        break;
      }
  }
  return static_cast<double>(hits) / static_cast<double>(classifier_preds.size());
}

// Step-wise average precision: sum over descending unique score thresholds of
// (R_n - R_{n-1}) * P_n. Returns -1 when there are no positives.
inline double average_precision(const std::vector<double>& scores,
                                const std::vector<bool>& truth) {
  require(scores.size() == truth.size() && !scores.empty(), "score/truth length mismatch");
  const int total_pos = static_cast<int>(std::count(truth.begin(), truth.end(), true));
  if (total_pos == 0) return -1.0;
  std::vector<int> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return scores[a] > scores[b]; });
  double ap = 0.0, prev_recall = 0.0;
  int tp = 0, seen = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    ++seen;
    if (truth[order[i]]) ++tp;
    const bool threshold_edge =
        i + 1 == order.size() || scores[order[i + 1]] < scores[order[i]];
    if (!threshold_edge) continue;
    const double recall = static_cast<double>(tp) / total_pos;
    const double precision = static_cast<double>(tp) / seen;
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
  }
  return ap;
}

// Macro AUPRC over classes; classes with no positives (or excluded) are
// skipped. scores[sample][class], truth[sample][class].
inline double macro_auprc(const std::vector<std::vector<double>>& scores,
                          const std::vector<std::vector<bool>>& truth,
                          const std::vector<int>& excluded_classes = {}) {
  require(scores.size() == truth.size() && !scores.empty(), "score/truth size mismatch");
  const int c = static_cast<int>(scores[0].size());
  double sum = 0.0;
  int used = 0;
  for (int j = 0; j < c; ++j) {
    if (std::find(excluded_classes.begin(), excluded_classes.end(), j) != excluded_classes.end())
      continue;
    std::vector<double> s;
    std::vector<bool> t;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      s.push_back(scores[i][j]);
      t.push_back(truth[i][j]);
    }
    const double ap = average_precision(s, t);
    if (ap < 0.0) continue;
    sum += ap;
    ++used;
  }
  require(used > 0, "no class with positive labels");
  return sum / used;
}

// Micro AUPRC: one flattened ranking over every (sample, class) pair.
inline double micro_auprc(const std::vector<std::vector<double>>& scores,
                          const std::vector<std::vector<bool>>& truth,
                          const std::vector<int>& excluded_classes = {}) {
  std::vector<double> s;
  std::vector<bool> t;
  for (std::size_t i = 0; i < scores.size(); ++i)
    for (std::size_t j = 0; j < scores[i].size(); ++j) {
      if (std::find(excluded_classes.begin(), excluded_classes.end(), static_cast<int>(j)) !=
          excluded_classes.end())
        continue;
      s.push_back(scores[i][j]);
      t.push_back(truth[i][j]);
    }
  return average_precision(s, t);
}

namespace detail {

inline double f1_score(int tp, int fp, int fn) {
  const double denom = 2.0 * tp + fp + fn;
  return denom == 0.0 ? 0.0 : 2.0 * tp / denom;
}

}  // namespace detail

// Per class: F1 on the positive labels and F1 on the complemented labels,
// weighted by the positive/negative supports; mean over classes.
inline double weighted_f1(const std::vector<std::vector<double>>& scores,
                          const std::vector<std::vector<bool>>& truth, double threshold = 0.5) {
  require(scores.size() == truth.size() && !scores.empty(), "score/truth size mismatch");
  const int c = static_cast<int>(scores[0].size());
  const int n = static_cast<int>(scores.size());
  double sum = 0.0;
  for (int j = 0; j < c; ++j) {
    int tp = 0, fp = 0, fn = 0, tn = 0;
    for (int i = 0; i < n; ++i) {
      const bool pred = scores[i][j] >= threshold;
      const bool pos = truth[i][j];
      if (pred && pos) ++tp;
      else if (pred && !pos) ++fp;
      else if (!pred && pos) ++fn;
      else ++tn;
    }
    const int pos_support = tp + fn;
    const int neg_support = fp + tn;
    const double f1_pos = detail::f1_score(tp, fp, fn);
    // F1 on the complemented problem: negatives become the positive class.
    const double f1_neg = detail::f1_score(tn, fn, fp);
    const double w = pos_support + neg_support;
    sum += w == 0.0 ? 0.0 : (pos_support * f1_pos + neg_support * f1_neg) / w;
  }
  return sum / c;
}

inline double median(std::vector<double> v) {
  require(!v.empty(), "median of empty list");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace l2i
