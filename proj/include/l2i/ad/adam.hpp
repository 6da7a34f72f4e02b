#pragma once

#include <cmath>
#include <vector>

#include "l2i/ad/tensor.hpp"

namespace l2i::ad {

// Bias-corrected Adam over a fixed parameter list. State buffers are keyed by
// position, so the list must not change between steps.
template <typename T>
class Adam {
public:
  Adam(std::vector<TensorPtr<T>> params, double lr, double beta1 = 0.9, double beta2 = 0.999,
       double eps = 1e-8)
      : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
    m_.resize(params_.size());
    v_.resize(params_.size());
    for (std::size_t i = 0; i < params_.size(); ++i) {
      m_[i].assign(params_[i]->numel(), 0.0);
      v_[i].assign(params_[i]->numel(), 0.0);
    }
  }

  void zero_grad() {
    for (auto& p : params_) p->zero_grad();
  }

  void step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, t_);
    const double bc2 = 1.0 - std::pow(beta2_, t_);
    for (std::size_t i = 0; i < params_.size(); ++i) {
      auto& p = *params_[i];
      p.ensure_grad();
      for (std::size_t j = 0; j < p.numel(); ++j) {
        const double g = static_cast<double>(p.grad[j]);
        m_[i][j] = beta1_ * m_[i][j] + (1.0 - beta1_) * g;
        v_[i][j] = beta2_ * v_[i][j] + (1.0 - beta2_) * g * g;
        const double mhat = m_[i][j] / bc1;
        const double vhat = v_[i][j] / bc2;
        p.value[j] -= static_cast<T>(lr_ * mhat / (std::sqrt(vhat) + eps_));
      }
    }
  }

  // Global-norm gradient clipping, applied before step().
  void clip_grad_norm(double max_norm) {
    double sq = 0.0;
    for (auto& p : params_) {
      p->ensure_grad();
      for (T g : p->grad) sq += static_cast<double>(g) * static_cast<double>(g);
    }
    const double norm = std::sqrt(sq);
    if (norm <= max_norm || norm == 0.0) return;
    const double s = max_norm / norm;
    for (auto& p : params_)
      for (T& g : p->grad) g = static_cast<T>(g * s);
  }

  int timestep() const { return t_; }
  const std::vector<TensorPtr<T>>& params() const { return params_; }

private:
  std::vector<TensorPtr<T>> params_;
  double lr_, beta1_, beta2_, eps_;
  int t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

}  // namespace l2i::ad
