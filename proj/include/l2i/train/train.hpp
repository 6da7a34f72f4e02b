#pragma once

#include <cstdint>
#include <numeric>
#include <vector>

#include "l2i/ad/adam.hpp"
#include "l2i/audio/mel.hpp"
#include "l2i/audio/stft.hpp"
#include "l2i/audio/wav.hpp"
#include "l2i/core/rng.hpp"
#include "l2i/model/models.hpp"
#include "l2i/nmf/nmf.hpp"
#include "l2i/train/losses.hpp"

namespace l2i {

enum class TrainVariant { Posthoc, Bydesign, BydesignNopred };

struct TrainConfig {
  int epochs = 30;
  int batch_size = 8;
  double lr = 2e-4;
  std::uint64_t seed = 0;
  TaskKind task_kind = TaskKind::MultiClass;
  TrainVariant variant = TrainVariant::Posthoc;
  double clip_norm = 5.0;
};

struct EpochReport {
  int epoch = 0;
  double l_fid = 0.0;
  double l_nmf = 0.0;
  double l_sparse = 0.0;
  double l_f = 0.0;
  double total = 0.0;
};

struct FeaturePipeline {
  FrameParams frame_params;
  int mel_bands = 128;
};

// Precomputed per-clip features: constants shared across epochs.
template <typename T>
struct TrainSample {
  ad::TensorPtr<T> mel;     // [1, M, T]
  ad::TensorPtr<T> x_log;   // [F, T] log-mag spectrogram
  std::vector<double> label;
  int frames = 0;
};

template <typename T>
ad::TensorPtr<T> mel_tensor(const MelSpectrogram& m) {
  const int rows = static_cast<int>(m.values.rows()), cols = static_cast<int>(m.values.cols());
  std::vector<T> data(static_cast<std::size_t>(rows) * cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) data[static_cast<std::size_t>(r) * cols + c] = static_cast<T>(m.values(r, c));
  return ad::constant<T>({1, rows, cols}, data);
}

template <typename T>
ad::TensorPtr<T> matrix_tensor(const Eigen::MatrixXf& m) {
  const int rows = static_cast<int>(m.rows()), cols = static_cast<int>(m.cols());
  std::vector<T> data(static_cast<std::size_t>(rows) * cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) data[static_cast<std::size_t>(r) * cols + c] = static_cast<T>(m(r, c));
  return ad::constant<T>({rows, cols}, data);
}

template <typename T>
std::vector<TrainSample<T>> build_samples(const Manifest& manifest, Split split,
                                          const FeaturePipeline& pipeline) {
  std::vector<TrainSample<T>> out;
  for (const auto* e : manifest.split_entries(split)) {
    const Spectrogram spec = stft(load_wav(e->path), pipeline.frame_params);
    TrainSample<T> s;
    s.mel = mel_tensor<T>(log_mel(spec, pipeline.mel_bands));
    s.x_log = matrix_tensor<T>(spec.log_mag);
    const auto lv = label_vector(*e, manifest);
    s.label.assign(lv.begin(), lv.end());
    s.frames = spec.frames();
    out.push_back(std::move(s));
  }
  require(!out.empty(), "split has no samples");
  return out;
}

namespace detail {

template <typename T>
std::vector<double> values_of(const ad::TensorPtr<T>& t) {
  return std::vector<double>(t->value.begin(), t->value.end());
}

inline double scalar_total(const EpochReport& r, const LossWeights& w, bool with_lf) {
  return r.l_fid + w.alpha * r.l_nmf + w.beta * r.l_sparse + (with_lf ? r.l_f : 0.0);
}

}  // namespace detail

// Post-hoc interpreter training (classifier and dictionary frozen). Returns
// one report per epoch; loss parts are per-sample means, total recomputable
// as L_FID + alpha L_NMF + beta L_sparse.
template <typename T>
std::vector<EpochReport> train_posthoc(InterpreterModel<T>& model, const Dictionary& dict,
                                       const std::vector<TrainSample<T>>& samples,
                                       const LossWeights& weights, const TrainConfig& cfg) {
  require(cfg.epochs >= 1, "epochs must be >= 1");
  require(cfg.lr > 0.0, "learning rate must be > 0");
  require(dict.components() == model.psi.cfg.components,
          "dictionary K " + std::to_string(dict.components()) + " does not match model K " +
              std::to_string(model.psi.cfg.components));
  model.classifier.set_trainable(false);
  auto params = model.interpreter_params();
  ad::Adam<T> opt(params, cfg.lr);
  auto w_const = matrix_tensor<T>(dict.atoms);

  Rng rng(cfg.seed);
  std::vector<int> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<EpochReport> reports;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle(order.begin(), order.end(), rng);
    EpochReport rep;
    rep.epoch = epoch;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      opt.zero_grad();
      for (std::size_t i = start; i < stop; ++i) {
        const auto& s = samples[order[i]];
        auto out = model.forward(s.mel, s.frames);
        auto lfid = fidelity_loss(out.g.probs, detail::values_of(out.f.probs), cfg.task_kind);
        auto lnmf = nmf_loss(s.x_log, w_const, out.activation);
        auto lsp = sparsity_loss(out.activation);
        auto loss = ad::add(lfid, ad::add(ad::scale(lnmf, static_cast<T>(weights.alpha)),
                                          ad::scale(lsp, static_cast<T>(weights.beta))));
        ad::backward(ad::scale(loss, static_cast<T>(1.0 / (stop - start))));
        rep.l_fid += lfid->value[0];
        rep.l_nmf += lnmf->value[0];
        rep.l_sparse += lsp->value[0];
      }
      opt.clip_grad_norm(cfg.clip_norm);
      opt.step();
    }
    const double n = static_cast<double>(samples.size());
    rep.l_fid /= n;
    rep.l_nmf /= n;
    rep.l_sparse /= n;
    rep.total = detail::scalar_total(rep, weights, false);
    reports.push_back(rep);
  }
  return reports;
}

// Supervised training of the tapped classifier alone.
template <typename T>
std::vector<EpochReport> train_classifier(TappedClassifier<T>& classifier,
                                          const std::vector<TrainSample<T>>& samples,
                                          const TrainConfig& cfg) {
  require(cfg.epochs >= 1, "epochs must be >= 1");
  classifier.set_trainable(true);
  ad::Adam<T> opt(classifier.params(), cfg.lr);
  Rng rng(cfg.seed);
  std::vector<int> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<EpochReport> reports;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle(order.begin(), order.end(), rng);
    EpochReport rep;
    rep.epoch = epoch;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      opt.zero_grad();
      for (std::size_t i = start; i < stop; ++i) {
        const auto& s = samples[order[i]];
        auto out = classifier.forward(s.mel);
        auto lf = classification_loss(out.probs, s.label, cfg.task_kind);
        ad::backward(ad::scale(lf, static_cast<T>(1.0 / (stop - start))));
        rep.l_f += lf->value[0];
      }
      opt.clip_grad_norm(cfg.clip_norm);
      opt.step();
    }
    rep.l_f /= static_cast<double>(samples.size());
    rep.total = rep.l_f;
    reports.push_back(rep);
  }
  return reports;
}

// Joint by-design training: L_f + gamma L_FID + alpha L_NMF + beta L_sparse
// over all parameters. The NoPred variant applies the classification loss to
// g(x) instead and drops L_f.
template <typename T>
std::vector<EpochReport> train_bydesign(InterpreterModel<T>& model, const Dictionary& dict,
                                        const std::vector<TrainSample<T>>& samples,
                                        const LossWeights& weights, const TrainConfig& cfg) {
  require(cfg.epochs >= 1, "epochs must be >= 1");
  require(cfg.variant != TrainVariant::Posthoc, "use train_posthoc for the post-hoc regime");
  require(dict.components() == model.psi.cfg.components,
          "dictionary K " + std::to_string(dict.components()) + " does not match model K " +
              std::to_string(model.psi.cfg.components));
  const bool nopred = cfg.variant == TrainVariant::BydesignNopred;
  model.classifier.set_trainable(true);
  ad::Adam<T> opt(model.all_params(), cfg.lr);
  auto w_const = matrix_tensor<T>(dict.atoms);

  Rng rng(cfg.seed);
  std::vector<int> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<EpochReport> reports;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle(order.begin(), order.end(), rng);
    EpochReport rep;
    rep.epoch = epoch;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      opt.zero_grad();
      for (std::size_t i = start; i < stop; ++i) {
        const auto& s = samples[order[i]];
        auto out = model.forward(s.mel, s.frames);
        auto lfid = fidelity_loss(out.g.probs, detail::values_of(out.f.probs), cfg.task_kind);
        auto lnmf = nmf_loss(s.x_log, w_const, out.activation);
        auto lsp = sparsity_loss(out.activation);
        auto lf = nopred ? classification_loss(out.g.probs, s.label, cfg.task_kind)
                         : classification_loss(out.f.probs, s.label, cfg.task_kind);
        auto loss = ad::add(lf, ad::add(ad::scale(lfid, static_cast<T>(weights.gamma)),
                                        ad::add(ad::scale(lnmf, static_cast<T>(weights.alpha)),
                                                ad::scale(lsp, static_cast<T>(weights.beta)))));
        ad::backward(ad::scale(loss, static_cast<T>(1.0 / (stop - start))));
        rep.l_fid += weights.gamma * lfid->value[0];
        rep.l_nmf += lnmf->value[0];
        rep.l_sparse += lsp->value[0];
        rep.l_f += lf->value[0];
      }
      opt.clip_grad_norm(cfg.clip_norm);
      opt.step();
    }
    const double n = static_cast<double>(samples.size());
    rep.l_fid /= n;
    rep.l_nmf /= n;
    rep.l_sparse /= n;
    rep.l_f /= n;
    rep.total = detail::scalar_total(rep, weights, true);
    reports.push_back(rep);
  }
  return reports;
}

}  // namespace l2i
