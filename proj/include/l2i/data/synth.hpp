#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "l2i/audio/fft.hpp"
#include "l2i/audio/wav.hpp"
#include "l2i/core/error.hpp"
#include "l2i/core/rng.hpp"
#include "l2i/data/manifest.hpp"

namespace l2i {

// Source recipes. Narrowband vs broadband classes are deliberate: they line
// up with distinct NMF atoms, which keeps band-energy checks meaningful.
struct ToneRecipe {
  double freq_hz;
};
struct ChirpRecipe {
  double f0_hz, f1_hz;
};
struct NoiseBurstRecipe {
  double lo_hz, hi_hz;
};
struct AmToneRecipe {
  double freq_hz, rate_hz;
};
using SourceRecipe = std::variant<ToneRecipe, ChirpRecipe, NoiseBurstRecipe, AmToneRecipe>;

struct SynthClass {
  std::string name;
  SourceRecipe recipe;
};

struct SynthSpec {
  std::vector<SynthClass> classes;
  int per_class = 20;
  double duration_s = 1.0;
  int sample_rate = 44100;
  double snr_db = std::numeric_limits<double>::infinity();  // inf = noiseless
  double test_fraction = 0.33;
  bool multilabel = false;
  std::uint64_t seed = 0;
};

// Three-class tone/chirp/noise default used by the end-to-end runs.
inline SynthSpec default_synth_spec() {
  SynthSpec s;
  s.classes = {{"tone", ToneRecipe{440.0}},
               {"chirp", ChirpRecipe{200.0, 1200.0}},
               {"noise", NoiseBurstRecipe{1800.0, 3200.0}}};
  return s;
}

namespace detail {

// White-noise bandpass by zeroing DFT bins outside [lo, hi].
inline std::vector<double> bandpass(const std::vector<double>& x, int rate, double lo, double hi) {
  std::size_t n = 1;
  while (n < x.size()) n <<= 1;
  std::vector<std::complex<double>> buf(n, {0.0, 0.0});
  for (std::size_t i = 0; i < x.size(); ++i) buf[i] = x[i];
  fft_inplace(buf, false);
  for (std::size_t k = 0; k <= n / 2; ++k) {
    const double f = static_cast<double>(k) * rate / static_cast<double>(n);
    if (f < lo || f > hi) {
      buf[k] = 0.0;
      if (k > 0 && k < n / 2) buf[n - k] = 0.0;
    }
  }
  fft_inplace(buf, true);
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = buf[i].real();
  return out;
}

inline std::vector<double> render_source(const SourceRecipe& recipe, int n, int rate, Rng& rng) {
  std::vector<double> x(n, 0.0);
  const double two_pi = 6.283185307179586476925286766559;
  if (const auto* t = std::get_if<ToneRecipe>(&recipe)) {
    const double phase = rng.uniform() * two_pi;
    for (int i = 0; i < n; ++i) x[i] = std::sin(two_pi * t->freq_hz * i / rate + phase);
  } else if (const auto* c = std::get_if<ChirpRecipe>(&recipe)) {
    const double phase = rng.uniform() * two_pi;
    for (int i = 0; i < n; ++i) {
      const double u = static_cast<double>(i) / n;
      const double f = c->f0_hz + (c->f1_hz - c->f0_hz) * u * 0.5;  // linear sweep
      x[i] = std::sin(two_pi * f * i / rate + phase);
    }
  } else if (const auto* b = std::get_if<NoiseBurstRecipe>(&recipe)) {
    for (int i = 0; i < n; ++i) x[i] = rng.normal();
    x = bandpass(x, rate, b->lo_hz, b->hi_hz);
  } else if (const auto* a = std::get_if<AmToneRecipe>(&recipe)) {
    const double phase = rng.uniform() * two_pi;
    for (int i = 0; i < n; ++i) {
      const double env = 0.5 * (1.0 + std::sin(two_pi * a->rate_hz * i / rate));
      x[i] = env * std::sin(two_pi * a->freq_hz * i / rate + phase);
    }
  }
  double rms = 0.0;
  for (double v : x) rms += v * v;
  rms = std::sqrt(rms / n);
  if (rms > 1e-12)
    for (double& v : x) v *= 0.2 / rms;
  return x;
}

}  // namespace detail

// Renders the dataset to out_dir as float32 WAVs plus manifest.csv. Fully
// determined by spec.seed.
inline Manifest generate(const SynthSpec& spec, const std::string& out_dir) {
  require(spec.classes.size() >= 2, "need at least 2 classes");
  require(spec.duration_s >= 0.5, "duration must be >= 0.5 s");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  require(std::filesystem::is_directory(out_dir), "cannot create output dir: " + out_dir);

  Rng rng(spec.seed);
  const int n = static_cast<int>(std::lround(spec.duration_s * spec.sample_rate));
  const int num_classes = static_cast<int>(spec.classes.size());
  const int per_class_test =
      std::max(1, static_cast<int>(std::lround(spec.per_class * spec.test_fraction)));

  std::ofstream csv(std::filesystem::path(out_dir) / "manifest.csv");
  require(csv.good(), "cannot write manifest in " + out_dir);
  csv << "path,split,labels\n";

  int clip_id = 0;
  for (int c = 0; c < num_classes; ++c) {
    for (int i = 0; i < spec.per_class; ++i) {
      std::vector<int> labels = {c};
      std::vector<double> mix =
          detail::render_source(spec.classes[c].recipe, n, spec.sample_rate, rng);
      if (spec.multilabel) {
        // up to 2 extra sources, each mixed in with probability 1/2
        for (int extra = 0; extra < 2; ++extra) {
          if (rng.uniform() < 0.5) {
            const int other = static_cast<int>(rng.below(num_classes));
            if (std::find(labels.begin(), labels.end(), other) == labels.end()) {
              const auto src =
                  detail::render_source(spec.classes[other].recipe, n, spec.sample_rate, rng);
              for (int s = 0; s < n; ++s) mix[s] += src[s];
              labels.push_back(other);
            }
          }
        }
      }
      if (std::isfinite(spec.snr_db)) {
        double sig_pow = 0.0;
        for (double v : mix) sig_pow += v * v;
        sig_pow /= n;
        const double sigma = std::sqrt(sig_pow / std::pow(10.0, spec.snr_db / 10.0));
        for (double& v : mix) v += sigma * rng.normal();
      }

      Waveform w;
      w.sample_rate = spec.sample_rate;
      w.samples.resize(n);
      for (int s = 0; s < n; ++s) w.samples[s] = static_cast<float>(mix[s]);

      char name[64];
      std::snprintf(name, sizeof(name), "clip_%04d.wav", clip_id++);
      save_wav(w, (std::filesystem::path(out_dir) / name).string());

      const bool is_test = i >= spec.per_class - per_class_test;
      csv << name << ',' << (is_test ? "test" : "train") << ',';
      std::sort(labels.begin(), labels.end());
      for (std::size_t li = 0; li < labels.size(); ++li) {
        if (li) csv << ';';
        csv << spec.classes[labels[li]].name;
      }
      csv << '\n';
    }
  }
  csv.close();
  return load_manifest((std::filesystem::path(out_dir) / "manifest.csv").string());
}

}  // namespace l2i
