#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "l2i/ad/tensor.hpp"

namespace l2i::ad {

namespace detail {

inline std::string shape_str(const std::vector<int>& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "x" : "") + std::to_string(s[i]);
  return out + "]";
}

template <typename T>
void check_same_shape(const char* op, const TensorPtr<T>& a, const TensorPtr<T>& b) {
  require(a->shape == b->shape, std::string(op) + ": shape mismatch " + shape_str(a->shape) +
                                    " vs " + shape_str(b->shape));
}

}  // namespace detail

template <typename T>
TensorPtr<T> add(const TensorPtr<T>& a, const TensorPtr<T>& b) {
  detail::check_same_shape("add", a, b);
  auto out = make_op<T>(a->shape, {a, b}, [a, b](Tensor<T>& self) {
    for (std::size_t i = 0; i < self.numel(); ++i) {
      if (a->needs_grad) a->grad[i] += self.grad[i];
      if (b->needs_grad) b->grad[i] += self.grad[i];
    }
  });
  for (std::size_t i = 0; i < out->numel(); ++i) out->value[i] = a->value[i] + b->value[i];
  return out;
}

template <typename T>
TensorPtr<T> mul(const TensorPtr<T>& a, const TensorPtr<T>& b) {
  detail::check_same_shape("mul", a, b);
  auto out = make_op<T>(a->shape, {a, b}, [a, b](Tensor<T>& self) {
    for (std::size_t i = 0; i < self.numel(); ++i) {
      if (a->needs_grad) a->grad[i] += self.grad[i] * b->value[i];
      if (b->needs_grad) b->grad[i] += self.grad[i] * a->value[i];
    }
  });
  for (std::size_t i = 0; i < out->numel(); ++i) out->value[i] = a->value[i] * b->value[i];
  return out;
}

template <typename T>
TensorPtr<T> scale(const TensorPtr<T>& a, double c) {
  auto out = make_op<T>(a->shape, {a}, [a, c](Tensor<T>& self) {
    if (!a->needs_grad) return;
    for (std::size_t i = 0; i < self.numel(); ++i) a->grad[i] += self.grad[i] * static_cast<T>(c);
  });
  for (std::size_t i = 0; i < out->numel(); ++i)
    out->value[i] = a->value[i] * static_cast<T>(c);
  return out;
}

template <typename T>
TensorPtr<T> sub(const TensorPtr<T>& a, const TensorPtr<T>& b) {
  return add(a, scale(b, -1.0));
}

template <typename T>
TensorPtr<T> add_scalar(const TensorPtr<T>& a, double c) {
  auto out = make_op<T>(a->shape, {a}, [a](Tensor<T>& self) {
    if (!a->needs_grad) return;
    for (std::size_t i = 0; i < self.numel(); ++i) a->grad[i] += self.grad[i];
  });
  for (std::size_t i = 0; i < out->numel(); ++i)
    out->value[i] = a->value[i] + static_cast<T>(c);
  return out;
}

template <typename T>
TensorPtr<T> relu(const TensorPtr<T>& a) {
  auto out = make_op<T>(a->shape, {a}, [a](Tensor<T>& self) {
    if (!a->needs_grad) return;
    for (std::size_t i = 0; i < self.numel(); ++i)
      if (a->value[i] > T(0)) a->grad[i] += self.grad[i];
  });
  for (std::size_t i = 0; i < out->numel(); ++i) out->value[i] = std::max(a->value[i], T(0));
  return out;
}

template <typename T>
TensorPtr<T> tanh_op(const TensorPtr<T>& a) {
  auto out = make_op<T>(a->shape, {a}, [a](Tensor<T>& self) {
    if (!a->needs_grad) return;
    for (std::size_t i = 0; i < self.numel(); ++i)
      a->grad[i] += self.grad[i] * (T(1) - self.value[i] * self.value[i]);
  });
  for (std::size_t i = 0; i < out->numel(); ++i) out->value[i] = std::tanh(a->value[i]);
  return out;
}

template <typename T>
TensorPtr<T> sigmoid(const TensorPtr<T>& a) {
  auto out = make_op<T>(a->shape, {a}, [a](Tensor<T>& self) {
    if (!a->needs_grad) return;
    for (std::size_t i = 0; i < self.numel(); ++i)
      a->grad[i] += self.grad[i] * self.value[i] * (T(1) - self.value[i]);
  });
  for (std::size_t i = 0; i < out->numel(); ++i)
    out->value[i] = T(1) / (T(1) + std::exp(-a->value[i]));
  return out;
}

template <typename T>
TensorPtr<T> exp_op(const TensorPtr<T>& a) {
  auto out = make_op<T>(a->shape, {a}, [a](Tensor<T>& self) {
    if (!a->needs_grad) return;
    for (std::size_t i = 0; i < self.numel(); ++i) a->grad[i] += self.grad[i] * self.value[i];
  });
  for (std::size_t i = 0; i < out->numel(); ++i) out->value[i] = std::exp(a->value[i]);
  return out;
}

// log with the argument clamped at 1e-12 so losses stay finite.
template <typename T>
TensorPtr<T> log_op(const TensorPtr<T>& a) {
  constexpr double kClamp = 1e-12;
  auto out = make_op<T>(a->shape, {a}, [a](Tensor<T>& self) {
    if (!a->needs_grad) return;
    for (std::size_t i = 0; i < self.numel(); ++i)
      a->grad[i] += self.grad[i] / std::max(a->value[i], static_cast<T>(kClamp));
  });
  for (std::size_t i = 0; i < out->numel(); ++i)
    out->value[i] = std::log(std::max(a->value[i], static_cast<T>(kClamp)));
  return out;
}

template <typename T>
TensorPtr<T> sum(const TensorPtr<T>& a) {
  auto out = make_op<T>({1}, {a}, [a](Tensor<T>& self) {
    if (!a->needs_grad) return;
    for (std::size_t i = 0; i < a->numel(); ++i) a->grad[i] += self.grad[0];
  });
  double acc = 0.0;
  for (std::size_t i = 0; i < a->numel(); ++i) acc += static_cast<double>(a->value[i]);
  out->value[0] = static_cast<T>(acc);
  return out;
}

template <typename T>
TensorPtr<T> mean(const TensorPtr<T>& a) {
  return scale(sum(a), 1.0 / static_cast<double>(a->numel()));
}

template <typename T>
TensorPtr<T> l1_norm(const TensorPtr<T>& a) {
  auto out = make_op<T>({1}, {a}, [a](Tensor<T>& self) {
    if (!a->needs_grad) return;
    for (std::size_t i = 0; i < a->numel(); ++i) {
      const T s = a->value[i] > T(0) ? T(1) : (a->value[i] < T(0) ? T(-1) : T(0));
      a->grad[i] += self.grad[0] * s;
    }
  });
  double acc = 0.0;
  for (std::size_t i = 0; i < a->numel(); ++i) acc += std::abs(static_cast<double>(a->value[i]));
  out->value[0] = static_cast<T>(acc);
  return out;
}

// 2D matrix product with double accumulation.
template <typename T>
TensorPtr<T> matmul(const TensorPtr<T>& a, const TensorPtr<T>& b) {
  require(a->shape.size() == 2 && b->shape.size() == 2 && a->shape[1] == b->shape[0],
          "matmul: incompatible shapes " + detail::shape_str(a->shape) + " vs " +
              detail::shape_str(b->shape));
  const int m = a->shape[0], k = a->shape[1], n = b->shape[1];
  auto out = make_op<T>({m, n}, {a, b}, [a, b, m, k, n](Tensor<T>& self) {
    if (a->needs_grad) {
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < k; ++j) {
          double acc = 0.0;
          for (int c = 0; c < n; ++c)
            acc += static_cast<double>(self.grad[i * n + c]) * b->value[j * n + c];
          a->grad[i * k + j] += static_cast<T>(acc);
        }
    }
    if (b->needs_grad) {
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < n; ++j) {
          double acc = 0.0;
          for (int r = 0; r < m; ++r)
            acc += static_cast<double>(a->value[r * k + i]) * self.grad[r * n + j];
          b->grad[i * n + j] += static_cast<T>(acc);
        }
    }
  });
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int c = 0; c < k; ++c)
        acc += static_cast<double>(a->value[i * k + c]) * b->value[c * n + j];
      out->value[i * n + j] = static_cast<T>(acc);
    }
  return out;
}

// y = W x + b. x may be a vector [in] or a matrix [in, cols] with the bias
// broadcast over columns.
template <typename T>
TensorPtr<T> linear(const TensorPtr<T>& W, const TensorPtr<T>& bias, const TensorPtr<T>& x) {
  const bool vec = x->shape.size() == 1;
  auto xm = x;
  if (vec) {
    xm = make_op<T>({x->shape[0], 1}, {x}, [x](Tensor<T>& self) {
      if (!x->needs_grad) return;
      for (std::size_t i = 0; i < x->numel(); ++i) x->grad[i] += self.grad[i];
    });
    xm->value = x->value;
  }
  auto y = matmul(W, xm);
  require(bias->shape.size() == 1 && bias->shape[0] == W->shape[0],
          "linear: bias length must equal output rows");
  const int rows = y->shape[0], cols = y->shape[1];
  auto out = make_op<T>(y->shape, {y, bias}, [y, bias, rows, cols](Tensor<T>& self) {
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) {
        if (y->needs_grad) y->grad[i * cols + j] += self.grad[i * cols + j];
        if (bias->needs_grad) bias->grad[i] += self.grad[i * cols + j];
      }
  });
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      out->value[i * cols + j] = y->value[i * cols + j] + bias->value[i];
  if (!vec) return out;
  auto flat = make_op<T>({rows}, {out}, [out](Tensor<T>& self) {
    if (!out->needs_grad) return;
    for (std::size_t i = 0; i < out->numel(); ++i) out->grad[i] += self.grad[i];
  });
  flat->value = out->value;
  return flat;
}

// Softmax along one axis of a 1D or 2D tensor.
template <typename T>
TensorPtr<T> softmax(const TensorPtr<T>& a, int axis) {
  require(a->shape.size() <= 2, "softmax: rank must be 1 or 2");
  const int rows = a->shape.size() == 2 ? a->shape[0] : 1;
  const int cols = a->shape.size() == 2 ? a->shape[1] : a->shape[0];
  if (a->shape.size() == 1) axis = 1;  // the only axis
  require(axis == 0 || axis == 1, "softmax: bad axis");

  const int groups = axis == 1 ? rows : cols;
  const int len = axis == 1 ? cols : rows;
  auto at = [axis, cols](int g, int i) { return axis == 1 ? g * cols + i : i * cols + g; };

  auto out = make_op<T>(a->shape, {a}, [a, groups, len, at](Tensor<T>& self) {
    if (!a->needs_grad) return;
    for (int g = 0; g < groups; ++g) {
      double dot = 0.0;
      for (int i = 0; i < len; ++i)
        dot += static_cast<double>(self.grad[at(g, i)]) * self.value[at(g, i)];
      for (int i = 0; i < len; ++i)
        a->grad[at(g, i)] += self.value[at(g, i)] * (self.grad[at(g, i)] - static_cast<T>(dot));
    }
  });
  for (int g = 0; g < groups; ++g) {
    T mx = a->value[at(g, 0)];
    for (int i = 1; i < len; ++i) mx = std::max(mx, a->value[at(g, i)]);
    double denom = 0.0;
    for (int i = 0; i < len; ++i) denom += std::exp(static_cast<double>(a->value[at(g, i)] - mx));
    for (int i = 0; i < len; ++i)
      out->value[at(g, i)] =
          static_cast<T>(std::exp(static_cast<double>(a->value[at(g, i)] - mx)) / denom);
  }
  return out;
}

enum class Padding { Same, Valid };

// 2D convolution over a [C,H,W] input with a [Cout,Cin,kh,kw] kernel.
template <typename T>
TensorPtr<T> conv2d(const TensorPtr<T>& x, const TensorPtr<T>& w, const TensorPtr<T>& bias,
                    int stride_h, int stride_w, Padding pad) {
  require(x->shape.size() == 3 && w->shape.size() == 4,
          "conv2d: want input [C,H,W] and kernel [Cout,Cin,kh,kw], got " +
              detail::shape_str(x->shape) + " and " + detail::shape_str(w->shape));
  const int cin = x->shape[0], H = x->shape[1], W = x->shape[2];
  const int cout = w->shape[0], kh = w->shape[2], kw = w->shape[3];
  require(w->shape[1] == cin, "conv2d: kernel input channels " + std::to_string(w->shape[1]) +
                                  " do not match input channels " + std::to_string(cin));
  int out_h, out_w, pad_top, pad_left;
  if (pad == Padding::Same) {
    out_h = (H + stride_h - 1) / stride_h;
    out_w = (W + stride_w - 1) / stride_w;
    pad_top = std::max(0, ((out_h - 1) * stride_h + kh - H)) / 2;
    pad_left = std::max(0, ((out_w - 1) * stride_w + kw - W)) / 2;
  } else {
    require(H >= kh && W >= kw, "conv2d: input smaller than kernel");
    out_h = (H - kh) / stride_h + 1;
    out_w = (W - kw) / stride_w + 1;
    pad_top = pad_left = 0;
  }

  std::vector<TensorPtr<T>> parents = {x, w};
  if (bias) parents.push_back(bias);
  auto out = make_op<T>(
      {cout, out_h, out_w}, std::move(parents),
      [x, w, bias, cin, H, W, cout, kh, kw, stride_h, stride_w, pad_top, pad_left, out_h,
       out_w](Tensor<T>& self) {
        for (int oc = 0; oc < cout; ++oc)
          for (int oh = 0; oh < out_h; ++oh)
            for (int ow = 0; ow < out_w; ++ow) {
              const T g = self.grad[(oc * out_h + oh) * out_w + ow];
              if (g == T(0)) continue;
              if (bias && bias->needs_grad) bias->grad[oc] += g;
              for (int ic = 0; ic < cin; ++ic)
                for (int i = 0; i < kh; ++i) {
                  const int ih = oh * stride_h + i - pad_top;
                  if (ih < 0 || ih >= H) continue;
                  for (int j = 0; j < kw; ++j) {
                    const int iw = ow * stride_w + j - pad_left;
                    if (iw < 0 || iw >= W) continue;
                    const std::size_t xi = (static_cast<std::size_t>(ic) * H + ih) * W + iw;
                    const std::size_t wi =
                        ((static_cast<std::size_t>(oc) * cin + ic) * kh + i) * kw + j;
                    if (x->needs_grad) x->grad[xi] += g * w->value[wi];
                    if (w->needs_grad) w->grad[wi] += g * x->value[xi];
                  }
                }
            }
      });
  for (int oc = 0; oc < cout; ++oc)
    for (int oh = 0; oh < out_h; ++oh)
      for (int ow = 0; ow < out_w; ++ow) {
        double acc = bias ? static_cast<double>(bias->value[oc]) : 0.0;
        for (int ic = 0; ic < cin; ++ic)
          for (int i = 0; i < kh; ++i) {
            const int ih = oh * stride_h + i - pad_top;
            if (ih < 0 || ih >= H) continue;
            for (int j = 0; j < kw; ++j) {
              const int iw = ow * stride_w + j - pad_left;
              if (iw < 0 || iw >= W) continue;
              acc += static_cast<double>(x->value[(static_cast<std::size_t>(ic) * H + ih) * W + iw]) *
                     w->value[((static_cast<std::size_t>(oc) * cin + ic) * kh + i) * kw + j];
            }
          }
        out->value[(oc * out_h + oh) * out_w + ow] = static_cast<T>(acc);
      }
  return out;
}

// Non-overlapping max pooling on [C,H,W]; ragged edge columns/rows dropped.
template <typename T>
TensorPtr<T> max_pool2d(const TensorPtr<T>& x, int kh, int kw) {
  require(x->shape.size() == 3, "max_pool2d: want [C,H,W]");
  const int C = x->shape[0], H = x->shape[1], W = x->shape[2];
  require(H >= kh && W >= kw, "max_pool2d: input smaller than pooling window");
  const int out_h = H / kh, out_w = W / kw;

  auto argmax = std::make_shared<std::vector<std::size_t>>(
      static_cast<std::size_t>(C) * out_h * out_w);
  auto out = make_op<T>({C, out_h, out_w}, {x}, [x, argmax](Tensor<T>& self) {
    if (!x->needs_grad) return;
    for (std::size_t i = 0; i < self.numel(); ++i) x->grad[(*argmax)[i]] += self.grad[i];
  });
  for (int c = 0; c < C; ++c)
    for (int oh = 0; oh < out_h; ++oh)
      for (int ow = 0; ow < out_w; ++ow) {
        std::size_t best = (static_cast<std::size_t>(c) * H + oh * kh) * W + ow * kw;
        T best_v = x->value[best];
        for (int i = 0; i < kh; ++i)
          for (int j = 0; j < kw; ++j) {
            const std::size_t idx =
                (static_cast<std::size_t>(c) * H + oh * kh + i) * W + ow * kw + j;
            if (x->value[idx] > best_v) {
              best_v = x->value[idx];
              best = idx;
            }
          }
        const std::size_t oi = (static_cast<std::size_t>(c) * out_h + oh) * out_w + ow;
        out->value[oi] = best_v;
        (*argmax)[oi] = best;
      }
  return out;
}

// Global average over the spatial axes: [C,H,W] -> [C].
template <typename T>
TensorPtr<T> mean_pool(const TensorPtr<T>& x) {
  require(x->shape.size() == 3, "mean_pool: want [C,H,W]");
  const int C = x->shape[0];
  const std::size_t hw = static_cast<std::size_t>(x->shape[1]) * x->shape[2];
  auto out = make_op<T>({C}, {x}, [x, C, hw](Tensor<T>& self) {
    if (!x->needs_grad) return;
    for (int c = 0; c < C; ++c) {
      const T g = self.grad[c] / static_cast<T>(hw);
      for (std::size_t i = 0; i < hw; ++i) x->grad[c * hw + i] += g;
    }
  });
  for (int c = 0; c < C; ++c) {
    double acc = 0.0;
    for (std::size_t i = 0; i < hw; ++i) acc += static_cast<double>(x->value[c * hw + i]);
    out->value[c] = static_cast<T>(acc / static_cast<double>(hw));
  }
  return out;
}

// Per-row max over the last axis: [K,T] -> [K].
template <typename T>
TensorPtr<T> row_max(const TensorPtr<T>& x) {
  require(x->shape.size() == 2, "row_max: want [K,T]");
  const int K = x->shape[0], Tn = x->shape[1];
  auto argmax = std::make_shared<std::vector<int>>(K);
  auto out = make_op<T>({K}, {x}, [x, argmax, Tn](Tensor<T>& self) {
    if (!x->needs_grad) return;
    for (std::size_t k = 0; k < self.numel(); ++k)
      x->grad[k * Tn + (*argmax)[k]] += self.grad[k];
  });
  for (int k = 0; k < K; ++k) {
    int best = 0;
    for (int t = 1; t < Tn; ++t)
      if (x->value[k * Tn + t] > x->value[k * Tn + best]) best = t;
    (*argmax)[k] = best;
    out->value[k] = x->value[k * Tn + best];
  }
  return out;
}

// Linear resampling of the last axis of a [K,T] tensor to target_t frames
// (endpoints aligned). Backward is the transposed scatter.
template <typename T>
TensorPtr<T> interpolate_time(const TensorPtr<T>& x, int target_t) {
  require(x->shape.size() == 2, "interpolate_time: want [K,T]");
  require(target_t >= 1, "interpolate_time: target must be >= 1");
  const int K = x->shape[0], Tin = x->shape[1];

  std::vector<int> i0(target_t), i1(target_t);
  std::vector<double> w1(target_t);
  for (int t = 0; t < target_t; ++t) {
    const double pos = target_t == 1 ? 0.0
                                     : static_cast<double>(t) * (Tin - 1) / (target_t - 1);
    i0[t] = std::min(static_cast<int>(pos), Tin - 1);
    i1[t] = std::min(i0[t] + 1, Tin - 1);
    w1[t] = pos - i0[t];
  }
  auto out = make_op<T>({K, target_t}, {x}, [x, K, Tin, target_t, i0, i1, w1](Tensor<T>& self) {
    if (!x->needs_grad) return;
    for (int k = 0; k < K; ++k)
      for (int t = 0; t < target_t; ++t) {
        const T g = self.grad[k * target_t + t];
        x->grad[k * Tin + i0[t]] += g * static_cast<T>(1.0 - w1[t]);
        x->grad[k * Tin + i1[t]] += g * static_cast<T>(w1[t]);
      }
  });
  for (int k = 0; k < K; ++k)
    for (int t = 0; t < target_t; ++t)
      out->value[k * target_t + t] =
          static_cast<T>((1.0 - w1[t]) * x->value[k * Tin + i0[t]] +
                         w1[t] * x->value[k * Tin + i1[t]]);
  return out;
}

// Concatenation along axis 0; remaining dimensions must agree.
template <typename T>
TensorPtr<T> concat(const std::vector<TensorPtr<T>>& xs, int axis) {
  require(!xs.empty(), "concat: empty input list");
  require(axis == 0, "concat: only axis 0 is supported");
  const auto& first = xs.front()->shape;
  int total0 = 0;
  for (const auto& x : xs) {
    require(x->shape.size() == first.size(), "concat: rank mismatch");
    for (std::size_t d = 1; d < first.size(); ++d)
      require(x->shape[d] == first[d], "concat: trailing dimension mismatch");
    total0 += x->shape[0];
  }
  std::vector<int> shape = first;
  shape[0] = total0;

  auto parts = xs;
  auto out = make_op<T>(shape, parts, [parts](Tensor<T>& self) {
    std::size_t off = 0;
    for (const auto& x : parts) {
      if (x->needs_grad)
        for (std::size_t i = 0; i < x->numel(); ++i) x->grad[i] += self.grad[off + i];
      off += x->numel();
    }
  });
  std::size_t off = 0;
  for (const auto& x : xs) {
    std::copy(x->value.begin(), x->value.end(), out->value.begin() + off);
    off += x->numel();
  }
  return out;
}

// [K,T] view of a [K,1,T] map (and back); used at the 2D/1D boundary.
template <typename T>
TensorPtr<T> reshape(const TensorPtr<T>& x, std::vector<int> shape) {
  require(shape_numel<T>(shape) == x->numel(), "reshape: element count mismatch");
  auto out = make_op<T>(std::move(shape), {x}, [x](Tensor<T>& self) {
    if (!x->needs_grad) return;
    for (std::size_t i = 0; i < x->numel(); ++i) x->grad[i] += self.grad[i];
  });
  out->value = x->value;
  return out;
}

}  // namespace l2i::ad
