#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "l2i/ad/ops.hpp"
#include "l2i/ad/tensor.hpp"
#include "l2i/audio/mel.hpp"
#include "l2i/core/error.hpp"
#include "l2i/core/rng.hpp"
#include "l2i/data/manifest.hpp"

namespace l2i {

using ad::Padding;
using ad::TensorPtr;

struct ClassifierConfig {
  int mel_bands = 128;
  std::vector<int> channels = {16, 32, 64};  // one conv block per entry
  int num_classes = 0;
  TaskKind task_kind = TaskKind::MultiClass;
  std::vector<int> tap_indices = {0, 1, 2};  // block outputs exported to the interpreter
};

struct PsiConfig {
  int components = 0;        // K, must match the dictionary
  int adapter_channels = 16;  // common channel count after the 1x1 adapters
  int fusion_channels = 32;
};

struct ThetaConfig {
  int components = 0;
  int num_classes = 0;
  int attention_hidden = 16;
  bool max_pooling = false;  // replaces attention with per-component max over time
  TaskKind task_kind = TaskKind::MultiClass;
};

namespace detail {

template <typename T>
TensorPtr<T> conv_param(int cout, int cin, int kh, int kw, Rng& rng) {
  const double bound = std::sqrt(1.0 / (static_cast<double>(cin) * kh * kw));
  return ad::param_uniform<T>({cout, cin, kh, kw}, bound, rng);
}

template <typename T>
TensorPtr<T> linear_param(int out, int in, Rng& rng) {
  return ad::param_uniform<T>({out, in}, std::sqrt(1.0 / in), rng);
}

}  // namespace detail

// Desk-scale tapped classifier f: conv blocks
// (conv3x3-relu-conv3x3-relu-maxpool2x2) followed by global mean pooling and
// a linear head. Block outputs listed in tap_indices are exported.
template <typename T>
struct TappedClassifier {
  struct Block {
    TensorPtr<T> w1, b1, w2, b2;
  };
  ClassifierConfig cfg;
  std::vector<Block> blocks;
  TensorPtr<T> head_w, head_b;

  static TappedClassifier init(const ClassifierConfig& cfg, Rng& rng) {
    require(cfg.num_classes >= 2, "classifier needs >= 2 classes");
    require(!cfg.tap_indices.empty() && cfg.tap_indices.size() <= 3,
            "tap_indices must name 1..3 blocks");
    for (int t : cfg.tap_indices)
      require(t >= 0 && t < static_cast<int>(cfg.channels.size()), "tap index out of range");
    TappedClassifier m;
    m.cfg = cfg;
    int cin = 1;
    for (int ch : cfg.channels) {
      Block b;
      b.w1 = detail::conv_param<T>(ch, cin, 3, 3, rng);
      b.b1 = ad::make_tensor<T>({ch}, true);
      b.w2 = detail::conv_param<T>(ch, ch, 3, 3, rng);
      b.b2 = ad::make_tensor<T>({ch}, true);
      m.blocks.push_back(b);
      cin = ch;
    }
    m.head_w = detail::linear_param<T>(cfg.num_classes, cin, rng);
    m.head_b = ad::make_tensor<T>({cfg.num_classes}, true);
    return m;
  }

  std::vector<TensorPtr<T>> params() const {
    std::vector<TensorPtr<T>> out;
    for (const auto& b : blocks) out.insert(out.end(), {b.w1, b.b1, b.w2, b.b2});
    out.push_back(head_w);
    out.push_back(head_b);
    return out;
  }

  void set_trainable(bool trainable) {
    for (auto& p : params()) {
      p->requires_grad = trainable;
      p->needs_grad = trainable;
    }
  }

  struct Out {
    TensorPtr<T> probs;   // length C
    TensorPtr<T> logits;  // pre-softmax / pre-sigmoid
    std::vector<TensorPtr<T>> taps;  // ascending block order
  };

  // mel: [1, M, T]
  Out forward(const TensorPtr<T>& mel) const {
    require(mel->shape.size() == 3 && mel->shape[0] == 1 && mel->shape[1] == cfg.mel_bands,
            "classifier input must be [1, mel_bands, T]");
    Out out;
    TensorPtr<T> x = mel;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      x = ad::relu(ad::conv2d(x, blocks[i].w1, blocks[i].b1, 1, 1, Padding::Same));
      x = ad::relu(ad::conv2d(x, blocks[i].w2, blocks[i].b2, 1, 1, Padding::Same));
      x = ad::max_pool2d(x, 2, 2);
      if (std::find(cfg.tap_indices.begin(), cfg.tap_indices.end(), static_cast<int>(i)) !=
          cfg.tap_indices.end())
        out.taps.push_back(x);
    }
    out.logits = ad::linear(head_w, head_b, ad::mean_pool(x));
    out.probs = cfg.task_kind == TaskKind::MultiClass ? ad::softmax(out.logits, 1)
                                                      : ad::sigmoid(out.logits);
    return out;
  }
};

// Interpreter Psi: per-tap 1x1 adapters to a common channel count, strided
// convs collapsing the frequency axis to 1, linear temporal upsampling to T
// and a fused 1D conv stack ending in a bias-free 1x1 conv + relu, so
// all-zero taps map to an all-zero activation.
template <typename T>
struct InterpreterPsi {
  PsiConfig cfg;
  std::vector<TensorPtr<T>> adapters;                 // per tap, [Cc, Cin, 1, 1]
  std::vector<std::vector<TensorPtr<T>>> reducers;    // per tap, chain of [Cc, Cc, 3, 3]
  TensorPtr<T> fuse_w;   // [fusion, taps*Cc, 1, 3]
  TensorPtr<T> out_w;    // [K, fusion, 1, 1]

  // tap_channels/tap_freqs describe the classifier taps this interpreter reads.
  static InterpreterPsi init(const PsiConfig& cfg, const std::vector<int>& tap_channels,
                             const std::vector<int>& tap_freqs, Rng& rng) {
    require(cfg.components >= 1, "interpreter needs K >= 1");
    require(tap_channels.size() == tap_freqs.size() && !tap_channels.empty(),
            "tap description mismatch");
    InterpreterPsi m;
    m.cfg = cfg;
    for (std::size_t i = 0; i < tap_channels.size(); ++i) {
      m.adapters.push_back(detail::conv_param<T>(cfg.adapter_channels, tap_channels[i], 1, 1, rng));
      std::vector<TensorPtr<T>> chain;
      for (int f = tap_freqs[i]; f > 1; f = (f + 1) / 2)
        chain.push_back(detail::conv_param<T>(cfg.adapter_channels, cfg.adapter_channels, 3, 3, rng));
      m.reducers.push_back(std::move(chain));
    }
    const int fused_in = static_cast<int>(tap_channels.size()) * cfg.adapter_channels;
    m.fuse_w = detail::conv_param<T>(cfg.fusion_channels, fused_in, 1, 3, rng);
    m.out_w = detail::conv_param<T>(cfg.components, cfg.fusion_channels, 1, 1, rng);
    return m;
  }

  std::vector<TensorPtr<T>> params() const {
    std::vector<TensorPtr<T>> out = adapters;
    for (const auto& chain : reducers) out.insert(out.end(), chain.begin(), chain.end());
    out.push_back(fuse_w);
    out.push_back(out_w);
    return out;
  }

  // taps: classifier feature maps; target_t: spectrogram frame count.
  // Returns the K x T activation H_I(x), nonnegative by construction.
  TensorPtr<T> forward(const std::vector<TensorPtr<T>>& taps, int target_t) const {
    require(taps.size() == adapters.size(), "tap count does not match interpreter adapters");
    std::vector<TensorPtr<T>> lanes;
    for (std::size_t i = 0; i < taps.size(); ++i) {
      TensorPtr<T> x = ad::relu(ad::conv2d(taps[i], adapters[i], TensorPtr<T>{}, 1, 1, Padding::Same));
      for (const auto& w : reducers[i])
        x = ad::relu(ad::conv2d(x, w, TensorPtr<T>{}, 2, 1, Padding::Same));
      require(x->shape[1] == 1, "frequency axis not fully collapsed");
      auto flat = ad::reshape(x, {x->shape[0], x->shape[2]});
      lanes.push_back(ad::interpolate_time(flat, target_t));
    }
    auto fused = ad::concat(lanes, 0);
    auto fused3 = ad::reshape(fused, {fused->shape[0], 1, fused->shape[1]});
    auto h = ad::relu(ad::conv2d(fused3, fuse_w, TensorPtr<T>{}, 1, 1, Padding::Same));
    auto out = ad::relu(ad::conv2d(h, out_w, TensorPtr<T>{}, 1, 1, Padding::Same));
    return ad::reshape(out, {cfg.components, target_t});
  }
};

// Head Theta: attention pooling over time (linear-tanh-linear-softmax)
// followed by a linear class layer; optionally 1D max pooling instead of
// attention.
template <typename T>
struct HeadTheta {
  ThetaConfig cfg;
  TensorPtr<T> att_w1, att_b1, att_w2, att_b2;  // unused when max_pooling
  TensorPtr<T> class_w, class_b;

  static HeadTheta init(const ThetaConfig& cfg, Rng& rng) {
    require(cfg.components >= 1 && cfg.num_classes >= 2, "bad head configuration");
    HeadTheta m;
    m.cfg = cfg;
    if (!cfg.max_pooling) {
      m.att_w1 = detail::linear_param<T>(cfg.attention_hidden, cfg.components, rng);
      m.att_b1 = ad::make_tensor<T>({cfg.attention_hidden}, true);
      m.att_w2 = detail::linear_param<T>(1, cfg.attention_hidden, rng);
      m.att_b2 = ad::make_tensor<T>({1}, true);
    }
    m.class_w = detail::linear_param<T>(cfg.num_classes, cfg.components, rng);
    m.class_b = ad::make_tensor<T>({cfg.num_classes}, true);
    return m;
  }

  std::vector<TensorPtr<T>> params() const {
    std::vector<TensorPtr<T>> out;
    if (!cfg.max_pooling) out = {att_w1, att_b1, att_w2, att_b2};
    out.push_back(class_w);
    out.push_back(class_b);
    return out;
  }

  struct Out {
    TensorPtr<T> probs;      // length C
    TensorPtr<T> logits;     // pre-activation, used for relevance
    TensorPtr<T> pooled;     // z, length K
    TensorPtr<T> attention;  // [1, T] weights, null for max pooling
  };

  // activation: [K, T]
  Out forward(const TensorPtr<T>& activation) const {
    require(activation->shape.size() == 2 && activation->shape[0] == cfg.components,
            "activation must be [K, T] with K matching the head");
    Out out;
    if (cfg.max_pooling) {
      out.pooled = ad::row_max(activation);
    } else {
      auto hidden = ad::tanh_op(ad::linear(att_w1, att_b1, activation));  // [d, T]
      auto scores = ad::linear(att_w2, att_b2, hidden);                   // [1, T]
      out.attention = ad::softmax(scores, 1);
      auto zt = ad::matmul(activation, ad::reshape(out.attention, {activation->shape[1], 1}));
      out.pooled = ad::reshape(zt, {cfg.components});
    }
    out.logits = ad::linear(class_w, class_b, out.pooled);
    out.probs = cfg.task_kind == TaskKind::MultiClass ? ad::softmax(out.logits, 1)
                                                      : ad::sigmoid(out.logits);
    return out;
  }
};

// The full interpreter stack around a classifier; also the by-design model
// g(x) = Theta . Psi . f_I(x).
template <typename T>
struct InterpreterModel {
  TappedClassifier<T> classifier;
  InterpreterPsi<T> psi;
  HeadTheta<T> theta;

  struct Out {
    typename TappedClassifier<T>::Out f;
    TensorPtr<T> activation;  // H_I(x), K x T
    typename HeadTheta<T>::Out g;
  };

  Out forward(const TensorPtr<T>& mel, int target_t) const {
    Out out;
    out.f = classifier.forward(mel);
    out.activation = psi.forward(out.f.taps, target_t);
    out.g = theta.forward(out.activation);
    return out;
  }

  std::vector<TensorPtr<T>> interpreter_params() const {
    auto out = psi.params();
    const auto tp = theta.params();
    out.insert(out.end(), tp.begin(), tp.end());
    return out;
  }

  std::vector<TensorPtr<T>> all_params() const {
    auto out = classifier.params();
    const auto ip = interpreter_params();
    out.insert(out.end(), ip.begin(), ip.end());
    return out;
  }
};

// Tap channel counts / frequency extents for a classifier config, used to
// shape the interpreter.
inline std::vector<int> tap_channels(const ClassifierConfig& cfg) {
  std::vector<int> out;
  for (int t : cfg.tap_indices) out.push_back(cfg.channels[t]);
  return out;
}

inline std::vector<int> tap_freqs(const ClassifierConfig& cfg) {
  std::vector<int> out;
  for (int t : cfg.tap_indices) {
    int f = cfg.mel_bands;
    for (int b = 0; b <= t; ++b) f /= 2;
    out.push_back(f);
  }
  return out;
}

template <typename T>
InterpreterModel<T> init_interpreter_model(const ClassifierConfig& ccfg, const PsiConfig& pcfg,
                                           const ThetaConfig& tcfg, Rng& rng) {
  InterpreterModel<T> m;
  m.classifier = TappedClassifier<T>::init(ccfg, rng);
  m.psi = InterpreterPsi<T>::init(pcfg, tap_channels(ccfg), tap_freqs(ccfg), rng);
  m.theta = HeadTheta<T>::init(tcfg, rng);
  return m;
}

}  // namespace l2i
