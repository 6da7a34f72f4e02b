#pragma once

#include <Eigen/Dense>
#include <map>
#include <vector>

#include "l2i/audio/stft.hpp"
#include "l2i/core/error.hpp"

namespace l2i {

constexpr double kMaskEps = 1e-8;

struct MaskedComponents {
  std::map<int, Eigen::MatrixXf> per_component;  // k -> F x T
  Eigen::MatrixXf combined;                      // F x T
};

// Wiener-style soft masking: mask_k = w_k h_k^T / (sum_l w_l h_l^T + eps)
// applied to the log-magnitude spectrogram. Bins whose denominator falls
// below eps get mask 0.
inline MaskedComponents soft_mask_components(const Spectrogram& spec,
                                             const Eigen::MatrixXf& W,
                                             const Eigen::MatrixXf& H,
                                             const std::vector<int>& selected) {
  const int F = spec.bins();
  const int T = spec.frames();
  const int K = static_cast<int>(W.cols());
  require(W.rows() == F, "dictionary rows do not match spectrogram bins");
  require(H.rows() == K && H.cols() == T, "activation shape does not match dictionary/spectrogram");
  for (int k : selected) require(k >= 0 && k < K, "component index out of range");

  const Eigen::MatrixXd Wd = W.cast<double>();
  const Eigen::MatrixXd Hd = H.cast<double>();
  const Eigen::MatrixXd denom = (Wd * Hd).array() + kMaskEps;

  MaskedComponents out;
  out.combined = Eigen::MatrixXf::Zero(F, T);
  for (int k : selected) {
    const Eigen::MatrixXd num = Wd.col(k) * Hd.row(k);
    Eigen::MatrixXd mask = num.cwiseQuotient(denom);
    mask = (denom.array() < 2.0 * kMaskEps).select(Eigen::MatrixXd::Zero(F, T), mask);
    const Eigen::MatrixXf comp =
        (mask.array() * spec.log_mag.cast<double>().array()).matrix().cast<float>();
    out.combined += comp;
    out.per_component.emplace(k, comp);
  }
  return out;
}

struct InterpretationAudio {
  std::map<int, Waveform> per_component_audio;
  Waveform x_int;
};

// Algorithm: soft-mask the selected components, reattach the input phase and
// invert each masked spectrogram back to the time domain.
inline InterpretationAudio generate_interpretation_audio(const Spectrogram& spec,
                                                         const Eigen::MatrixXf& W,
                                                         const Eigen::MatrixXf& H,
                                                         const std::vector<int>& selected) {
  const MaskedComponents masked = soft_mask_components(spec, W, H, selected);
  InterpretationAudio out;
  Spectrogram part = spec;
  for (const auto& [k, comp] : masked.per_component) {
    part.log_mag = comp;
    out.per_component_audio.emplace(k, istft(part));
  }
  part.log_mag = masked.combined;
  out.x_int = istft(part);
  return out;
}

}  // namespace l2i
