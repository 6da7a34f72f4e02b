#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <vector>

#include "l2i/audio/fft.hpp"
#include "l2i/audio/wav.hpp"
#include "l2i/core/error.hpp"

namespace l2i {

struct FrameParams {
  int fft_size = 1024;
  int hop = 512;
};

// Log-magnitude spectrogram log(1 + |S|) plus the phase needed to get back to
// the time domain. F = fft_size/2 + 1 rows, one column per frame.
struct Spectrogram {
  Eigen::MatrixXf log_mag;  // F x T, nonnegative
  Eigen::MatrixXf phase;    // F x T, radians
  FrameParams frame_params;
  int num_samples = 0;  // original waveform length, used by istft
  int sample_rate = 44100;

  int bins() const { return static_cast<int>(log_mag.rows()); }
  int frames() const { return static_cast<int>(log_mag.cols()); }
};

namespace detail {

// Periodic Hann.
inline std::vector<double> hann_window(int n) {
  std::vector<double> w(n);
  const double two_pi = 6.283185307179586476925286766559;
  for (int i = 0; i < n; ++i) w[i] = 0.5 - 0.5 * std::cos(two_pi * i / n);
  return w;
}

inline void check_cola(const std::vector<double>& window, int hop) {
  // Overlap-added window must be constant; checked numerically over one
  // period of the interior.
  const int n = static_cast<int>(window.size());
  std::vector<double> acc(2 * n, 0.0);
  for (int start = 0; start + n <= 2 * n; start += hop) {
    for (int i = 0; i < n; ++i) acc[start + i] += window[i];
  }
  double ref = acc[n - 1];
  require(ref > 1e-12, "window/hop pair sums to zero");
  for (int i = n - hop; i < n; ++i) {
    require(std::abs(acc[i] - ref) <= 1e-6 * ref,
            "window/hop pair does not satisfy constant overlap-add");
  }
}

}  // namespace detail

inline Spectrogram stft(const Waveform& w, const FrameParams& cfg) {
  const int n = cfg.fft_size;
  require(n > 0 && (n & (n - 1)) == 0, "fft_size must be a power of two");
  require(cfg.hop > 0 && cfg.hop <= n, "hop must be in (0, fft_size]");
  const int len = static_cast<int>(w.samples.size());
  require(len >= n, "waveform shorter than one frame");

  const std::vector<double> window = detail::hann_window(n);
  const int pad = n / 2;
  const int frames = 1 + len / cfg.hop;  // centered, all samples covered
  const int bins = n / 2 + 1;

  Spectrogram spec;
  spec.log_mag.resize(bins, frames);
  spec.phase.resize(bins, frames);
  spec.frame_params = cfg;
  spec.num_samples = len;
  spec.sample_rate = w.sample_rate;

  std::vector<std::complex<double>> buf(n);
  for (int t = 0; t < frames; ++t) {
    const int start = t * cfg.hop - pad;
    for (int i = 0; i < n; ++i) {
      const int src = start + i;
      const double x = (src >= 0 && src < len) ? w.samples[src] : 0.0;
      buf[i] = std::complex<double>(x * window[i], 0.0);
    }
    fft_inplace(buf, false);
    for (int f = 0; f < bins; ++f) {
      spec.log_mag(f, t) = static_cast<float>(std::log1p(std::abs(buf[f])));
      spec.phase(f, t) = static_cast<float>(std::arg(buf[f]));
    }
  }
  return spec;
}

// INV(X, P): magnitude expm1(X), phase reattached, inverse FFT and
// constant-overlap-add synthesis.
inline Waveform istft(const Spectrogram& spec) {
  const int n = spec.frame_params.fft_size;
  const int hop = spec.frame_params.hop;
  require(spec.log_mag.rows() == n / 2 + 1, "spectrogram bins inconsistent with fft_size");
  require(spec.log_mag.rows() == spec.phase.rows() && spec.log_mag.cols() == spec.phase.cols(),
          "log_mag/phase dimension mismatch");
  require(spec.log_mag.minCoeff() >= 0.0f, "log_mag must be nonnegative");

  const std::vector<double> window = detail::hann_window(n);
  detail::check_cola(window, hop);

  const int frames = spec.frames();
  const int bins = spec.bins();
  const int pad = n / 2;
  const int padded_len = (frames - 1) * hop + n;

  std::vector<double> ola(padded_len, 0.0);
  std::vector<double> wsum(padded_len, 0.0);
  std::vector<std::complex<double>> buf(n);
  for (int t = 0; t < frames; ++t) {
    for (int f = 0; f < bins; ++f) {
      const double m = std::max(0.0, std::expm1(static_cast<double>(spec.log_mag(f, t))));
      const double p = spec.phase(f, t);
      buf[f] = std::polar(m, p);
    }
    for (int f = bins; f < n; ++f) buf[f] = std::conj(buf[n - f]);
    fft_inplace(buf, true);
    const int start = t * hop;
    for (int i = 0; i < n; ++i) {
      ola[start + i] += buf[i].real() * window[i];
      wsum[start + i] += window[i] * window[i];
    }
  }

  Waveform out;
  out.sample_rate = spec.sample_rate;
  const int len = spec.num_samples > 0 ? spec.num_samples : padded_len - 2 * pad;
  out.samples.resize(len);
  for (int i = 0; i < len; ++i) {
    const double denom = std::max(wsum[i + pad], 1e-12);
    out.samples[i] = static_cast<float>(ola[i + pad] / denom);
  }
  return out;
}

}  // namespace l2i
