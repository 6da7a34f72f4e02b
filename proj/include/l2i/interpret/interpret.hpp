#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "l2i/audio/mask.hpp"
#include "l2i/audio/stft.hpp"
#include "l2i/audio/wav.hpp"
#include "l2i/model/models.hpp"
#include "l2i/nmf/nmf.hpp"
#include "l2i/train/train.hpp"

namespace l2i {

struct RelevanceVector {
  std::vector<double> values;  // length K, max |value| = 1 unless all-zero
  int class_index = -1;
  std::string sample_id;
};

struct InterpretationBundle {
  RelevanceVector relevance;
  double tau = 0.1;
  std::vector<int> selected;  // L_{c,x}, ascending
  std::map<int, Waveform> per_component_audio;
  Waveform x_int;
};

// r_k = z_k theta_k / max_l |z_l theta_l|; all-zero products give all zeros.
inline RelevanceVector relevance(const std::vector<double>& z, const std::vector<double>& theta_row) {
  require(z.size() == theta_row.size(), "relevance length mismatch");
  RelevanceVector out;
  out.values.resize(z.size());
  double peak = 0.0;
  for (std::size_t k = 0; k < z.size(); ++k) {
    out.values[k] = z[k] * theta_row[k];
    peak = std::max(peak, std::abs(out.values[k]));
  }
  if (peak > 0.0)
    for (auto& v : out.values) v /= peak;
  return out;
}

// L = {k : r_k > tau}, strict inequality.
inline std::vector<int> select_components(const RelevanceVector& r, double tau) {
  require(tau > 0.0 && tau < 1.0, "tau must lie in (0, 1)");
  std::vector<int> out;
  for (std::size_t k = 0; k < r.values.size(); ++k)
    if (r.values[k] > tau) out.push_back(static_cast<int>(k));
  return out;
}

namespace detail {

// z and the class row of theta's linear layer, both read at the pre-activation
// (logit) level of the head.
template <typename T>
void pooled_and_theta_row(const InterpreterModel<T>& model, const typename HeadTheta<T>::Out& g,
                          int class_index, std::vector<double>& z, std::vector<double>& theta_row) {
  const int k = model.theta.cfg.components;
  z.assign(g.pooled->value.begin(), g.pooled->value.end());
  theta_row.resize(k);
  for (int i = 0; i < k; ++i)
    theta_row[i] = static_cast<double>(model.theta.class_w->value[static_cast<std::size_t>(class_index) * k + i]);
}

inline Eigen::MatrixXf activation_matrix(const std::vector<float>& value, int k, int t) {
  Eigen::MatrixXf h(k, t);
  for (int r = 0; r < k; ++r)
    for (int c = 0; c < t; ++c) h(r, c) = value[static_cast<std::size_t>(r) * t + c];
  return h;
}

}  // namespace detail

// Full interpretation of one clip for one class: relevance, selection, soft
// masking and inversion to audio. Pure; persistence is the caller's job.
template <typename T>
InterpretationBundle interpret_sample(const InterpreterModel<T>& model, const Dictionary& dict,
                                      const Waveform& wave, const FeaturePipeline& pipeline,
                                      int class_index, double tau) {
  require(dict.components() == model.psi.cfg.components,
          "dictionary K " + std::to_string(dict.components()) + " does not match model K " +
              std::to_string(model.psi.cfg.components));
  require(class_index >= 0 && class_index < model.theta.cfg.num_classes, "class index out of range");
  const Spectrogram spec = stft(wave, pipeline.frame_params);
  auto mel = mel_tensor<T>(log_mel(spec, pipeline.mel_bands));
  auto out = model.forward(mel, spec.frames());

  InterpretationBundle bundle;
  bundle.tau = tau;
  std::vector<double> z, theta_row;
  detail::pooled_and_theta_row(model, out.g, class_index, z, theta_row);
  bundle.relevance = relevance(z, theta_row);
  bundle.relevance.class_index = class_index;
  bundle.selected = select_components(bundle.relevance, tau);

  const Eigen::MatrixXf h =
      detail::activation_matrix(std::vector<float>(out.activation->value.begin(), out.activation->value.end()),
                                dict.components(), spec.frames());
  const InterpretationAudio audio =
      generate_interpretation_audio(spec, dict.atoms, h, bundle.selected);
  bundle.per_component_audio = audio.per_component_audio;
  bundle.x_int = audio.x_int;
  return bundle;
}

// x2 = INV(X - sum_{l in L} X_l, P_x): the removal counterpart used by the
// faithfulness metric.
inline Waveform removal_signal(const Spectrogram& spec, const Eigen::MatrixXf& atoms,
                               const Eigen::MatrixXf& h, const std::vector<int>& selected) {
  const MaskedComponents mc = soft_mask_components(spec, atoms, h, selected);
  Spectrogram rem = spec;
  rem.log_mag = (spec.log_mag - mc.combined).cwiseMax(0.0f);
  return istft(rem);
}

}  // namespace l2i
