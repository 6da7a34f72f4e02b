#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "l2i/audio/stft.hpp"
#include "l2i/core/error.hpp"

namespace l2i {

struct MelSpectrogram {
  Eigen::MatrixXf values;  // M x T
  int mel_bands = 0;
};

inline double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

// Triangular filterbank, M x F, spanning 0..Nyquist.
inline Eigen::MatrixXd mel_filterbank(int bands, int bins, int sample_rate) {
  require(bands >= 1, "mel band count must be >= 1");
  require(bands <= bins, "more mel bands than frequency bins");
  const double nyquist = sample_rate / 2.0;
  const double mel_max = hz_to_mel(nyquist);

  std::vector<double> centers(bands + 2);
  for (int i = 0; i < bands + 2; ++i) centers[i] = mel_to_hz(mel_max * i / (bands + 1));

  Eigen::MatrixXd fb = Eigen::MatrixXd::Zero(bands, bins);
  for (int m = 0; m < bands; ++m) {
    const double lo = centers[m], mid = centers[m + 1], hi = centers[m + 2];
    for (int f = 0; f < bins; ++f) {
      const double hz = nyquist * f / (bins - 1);
      double w = 0.0;
      if (hz > lo && hz < mid) w = (hz - lo) / (mid - lo);
      else if (hz >= mid && hz < hi) w = (hi - hz) / (hi - mid);
      fb(m, f) = w;
    }
  }
  return fb;
}

// log(1 + Mel * (exp(X) - 1)): the filterbank acts on linear magnitudes.
inline MelSpectrogram log_mel(const Spectrogram& spec, int bands) {
  const Eigen::MatrixXd fb = mel_filterbank(bands, spec.bins(), spec.sample_rate);
  const Eigen::MatrixXd lin =
      (spec.log_mag.cast<double>().array().exp() - 1.0).max(0.0).matrix();
  const Eigen::MatrixXd mel = (fb * lin).array().log1p().matrix();
  MelSpectrogram out;
  out.values = mel.cast<float>();
  out.mel_bands = bands;
  return out;
}

}  // namespace l2i
