#pragma once

#include <functional>
#include <vector>

#include "l2i/ad/tensor.hpp"

namespace l2i::ad {

// Central finite-difference check of the analytic gradients of a scalar loss
// with respect to the given parameters.
//
// forward_analytic builds the graph from the current parameter values and
// returns the scalar loss; forward_shadow evaluates the same function in
// double from an explicit parameter snapshot (one vector per parameter).
// Returns max over coordinates of |analytic - fd| / max(1e-8, |fd| + |analytic|).
template <typename T>
double grad_check(const std::vector<TensorPtr<T>>& params,
                  const std::function<TensorPtr<T>()>& forward_analytic,
                  const std::function<double(const std::vector<std::vector<double>>&)>& forward_shadow,
                  double h = 1e-3) {
  for (auto& p : params) p->zero_grad();
  auto loss = forward_analytic();
  backward(loss);

  std::vector<std::vector<double>> snapshot(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    snapshot[i].assign(params[i]->value.begin(), params[i]->value.end());
  }

  double worst = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    params[i]->ensure_grad();
    for (std::size_t j = 0; j < params[i]->numel(); ++j) {
      const double keep = snapshot[i][j];
      snapshot[i][j] = keep + h;
      const double up = forward_shadow(snapshot);
      snapshot[i][j] = keep - h;
      const double down = forward_shadow(snapshot);
      snapshot[i][j] = keep;
      const double fd = (up - down) / (2.0 * h);
      const double an = static_cast<double>(params[i]->grad[j]);
      const double err = std::abs(an - fd) / std::max(1e-8, std::abs(fd) + std::abs(an));
      worst = std::max(worst, err);
    }
  }
  return worst;
}

}  // namespace l2i::ad
