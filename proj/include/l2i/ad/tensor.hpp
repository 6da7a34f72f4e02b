#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <numeric>
#include <string>
#include <unordered_set>
#include <vector>

#include "l2i/core/error.hpp"
#include "l2i/core/rng.hpp"

namespace l2i::ad {

// Dense row-major tensor node of a dynamically built reverse-mode graph.
// Templated on the scalar so tests can run an identical graph in double.
template <typename T>
struct Tensor {
  std::vector<int> shape;
  std::vector<T> value;
  std::vector<T> grad;  // allocated lazily, same length as value
  bool requires_grad = false;  // trainable leaf
  bool needs_grad = false;     // gradient reaches a trainable leaf through here

  std::vector<std::shared_ptr<Tensor<T>>> parents;
  std::function<void(Tensor<T>&)> backward_fn;

  std::size_t numel() const { return value.size(); }

  void ensure_grad() {
    if (grad.size() != value.size()) grad.assign(value.size(), T(0));
  }

  void zero_grad() { grad.assign(value.size(), T(0)); }
};

template <typename T>
using TensorPtr = std::shared_ptr<Tensor<T>>;

template <typename T>
std::size_t shape_numel(const std::vector<int>& shape) {
  std::size_t n = 1;
  for (int d : shape) n *= static_cast<std::size_t>(d);
  return n;
}

template <typename T>
TensorPtr<T> make_tensor(std::vector<int> shape, bool requires_grad = false) {
  auto t = std::make_shared<Tensor<T>>();
  t->shape = std::move(shape);
  t->value.assign(shape_numel<T>(t->shape), T(0));
  t->requires_grad = requires_grad;
  t->needs_grad = requires_grad;
  return t;
}

template <typename T>
TensorPtr<T> constant(std::vector<int> shape, const std::vector<T>& data) {
  auto t = make_tensor<T>(std::move(shape));
  require(data.size() == t->numel(), "constant data length does not match shape");
  t->value = data;
  return t;
}

template <typename T>
TensorPtr<T> scalar_const(T v) {
  return constant<T>({1}, {v});
}

// Trainable leaf with uniform(-bound, bound) init.
template <typename T>
TensorPtr<T> param_uniform(std::vector<int> shape, double bound, Rng& rng) {
  auto t = make_tensor<T>(std::move(shape), true);
  for (auto& v : t->value) v = static_cast<T>(rng.uniform(-bound, bound));
  return t;
}

// Interior-node helper: shape, parents and a pull-style backward rule.
template <typename T>
TensorPtr<T> make_op(std::vector<int> shape, std::vector<TensorPtr<T>> parents,
                     std::function<void(Tensor<T>&)> backward_fn) {
  auto t = make_tensor<T>(std::move(shape));
  for (const auto& p : parents) t->needs_grad = t->needs_grad || p->needs_grad;
  t->parents = std::move(parents);
  if (t->needs_grad) t->backward_fn = std::move(backward_fn);
  return t;
}

// Reverse-mode sweep from a scalar loss. Visits each node exactly once in
// reverse topological order; gradients accumulate only into nodes on a path
// to a trainable leaf.
template <typename T>
void backward(const TensorPtr<T>& loss) {
  require(loss->numel() == 1, "backward requires a scalar loss");
  std::vector<Tensor<T>*> order;
  std::unordered_set<Tensor<T>*> seen;
  std::vector<std::pair<Tensor<T>*, std::size_t>> stack{{loss.get(), 0}};
  seen.insert(loss.get());
  while (!stack.empty()) {
    auto& [node, idx] = stack.back();
    if (idx < node->parents.size()) {
      Tensor<T>* p = node->parents[idx++].get();
      if (p->needs_grad && seen.insert(p).second) stack.push_back({p, 0});
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  for (Tensor<T>* n : order) n->ensure_grad();
  loss->grad[0] = T(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if ((*it)->backward_fn) (*it)->backward_fn(**it);
  }
}

}  // namespace l2i::ad
