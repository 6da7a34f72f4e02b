#pragma once

#include <vector>

#include "l2i/ad/ops.hpp"
#include "l2i/core/error.hpp"
#include "l2i/data/manifest.hpp"

namespace l2i {

struct LossWeights {
  double alpha = 10.0;  // L_NMF weight
  double beta = 0.8;    // sparsity weight
  double gamma = 1.0;   // L_FID weight in the by-design objective
};

// Generalized cross-entropy of the interpreter output against soft targets.
// Targets enter as constants; gradients flow into probs only. Multi-class:
// -sum_c t_c log p_c. Multi-label: -sum_c [t_c log p_c + (1-t_c) log(1-p_c)].
template <typename T>
ad::TensorPtr<T> fidelity_loss(const ad::TensorPtr<T>& probs, const std::vector<double>& targets,
                               TaskKind task_kind) {
  require(probs->numel() == targets.size(), "probability/target length mismatch");
  const int c = static_cast<int>(targets.size());
  std::vector<T> t(c), one_minus_t(c);
  for (int i = 0; i < c; ++i) {
    t[i] = static_cast<T>(targets[i]);
    one_minus_t[i] = static_cast<T>(1.0 - targets[i]);
  }
  auto tc = ad::constant<T>({c}, t);
  auto pos = ad::sum(ad::mul(tc, ad::log_op(probs)));
  if (task_kind == TaskKind::MultiClass) return ad::scale(pos, T(-1));
  std::vector<T> ones(c, T(1));
  auto omp = ad::sub(ad::constant<T>({c}, ones), probs);
  auto neg = ad::sum(ad::mul(ad::constant<T>({c}, one_minus_t), ad::log_op(omp)));
  return ad::scale(ad::add(pos, neg), T(-1));
}

// Classification loss against ground-truth labels: cross-entropy with a
// one-hot target, or BCE with a multi-hot target. Same algebra as above.
template <typename T>
ad::TensorPtr<T> classification_loss(const ad::TensorPtr<T>& probs,
                                     const std::vector<double>& label_vec, TaskKind task_kind) {
  return fidelity_loss(probs, label_vec, task_kind);
}

// Mean over F*T of (X - W H)^2; X and W enter as constants.
template <typename T>
ad::TensorPtr<T> nmf_loss(const ad::TensorPtr<T>& x_const, const ad::TensorPtr<T>& w_const,
                          const ad::TensorPtr<T>& h) {
  require(w_const->shape.size() == 2 && h->shape.size() == 2 && x_const->shape.size() == 2,
          "nmf_loss expects matrices");
  require(w_const->shape[1] == h->shape[0], "dictionary K " + std::to_string(w_const->shape[1]) +
                                                " does not match activation K " +
                                                std::to_string(h->shape[0]));
  require(x_const->shape[0] == w_const->shape[0] && x_const->shape[1] == h->shape[1],
          "spectrogram shape does not match W H");
  auto diff = ad::sub(ad::matmul(w_const, h), x_const);
  return ad::mean(ad::mul(diff, diff));
}

// Mean absolute entry of H (equals the scaled l1 norm; H >= 0 in practice).
template <typename T>
ad::TensorPtr<T> sparsity_loss(const ad::TensorPtr<T>& h) {
  return ad::scale(ad::l1_norm(h), static_cast<T>(1.0 / static_cast<double>(h->numel())));
}

}  // namespace l2i
