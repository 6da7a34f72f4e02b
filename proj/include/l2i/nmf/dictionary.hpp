#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "l2i/audio/stft.hpp"
#include "l2i/core/rng.hpp"
#include "l2i/data/manifest.hpp"
#include "l2i/nmf/nmf.hpp"

namespace l2i {

inline std::vector<Eigen::MatrixXf> train_log_mags(const Manifest& manifest,
                                                   const FrameParams& fp) {
  std::vector<Eigen::MatrixXf> mats;
  for (const auto* e : manifest.split_entries(Split::Train)) {
    mats.push_back(stft(load_wav(e->path), fp).log_mag);
  }
  require(!mats.empty(), "manifest has no training samples");
  return mats;
}

// Single joint factorization over the chunk-averaged concatenation of all
// training spectrograms; atoms stay unlabeled.
inline Dictionary learn_dictionary_flat(const Manifest& manifest, const FrameParams& fp,
                                        int chunk, const NmfConfig& cfg) {
  const Eigen::MatrixXf X = build_training_matrix(train_log_mags(manifest, fp), chunk);
  require(cfg.k <= static_cast<int>(X.cols()), "k exceeds chunked training column count");
  return sparse_nmf_fit(X, cfg).dict;
}

// Two-stage class-wise strategy for noisy multi-label data: noise atoms are
// learnt from all-negative samples, then per class fresh atoms are fit with
// the noise atoms frozen. Only the class atoms enter the final dictionary.
inline Dictionary learn_dictionary_class_noise(const Manifest& manifest, const FrameParams& fp,
                                               int chunk, int noise_k, int per_class_k,
                                               int per_class_sample_cap, const NmfConfig& cfg) {
  require(manifest.task_kind == TaskKind::MultiLabel,
          "class-noise strategy needs a multi-label dataset");
  require(per_class_k >= 1, "per-class component count must be >= 1");
  require(noise_k >= 1, "noise component count must be >= 1");

  std::vector<Eigen::MatrixXf> negatives;
  for (const auto* e : manifest.split_entries(Split::Train)) {
    if (e->labels.empty()) negatives.push_back(stft(load_wav(e->path), fp).log_mag);
  }
  require(!negatives.empty(), "class-noise strategy needs all-negative training samples");

  NmfConfig noise_cfg = cfg;
  noise_cfg.k = noise_k;
  const Dictionary noise_dict =
      sparse_nmf_fit(build_training_matrix(negatives, chunk), noise_cfg).dict;

  Dictionary out;
  out.atoms.resize(noise_dict.bins(), per_class_k * manifest.num_classes());
  for (int c = 0; c < manifest.num_classes(); ++c) {
    std::vector<const ManifestEntry*> positives;
    for (const auto* e : manifest.split_entries(Split::Train)) {
      if (std::find(e->labels.begin(), e->labels.end(), c) != e->labels.end())
        positives.push_back(e);
    }
    require(!positives.empty(),
            "class '" + manifest.class_names[c] + "' has no positive training samples");
    Rng pick(cfg.seed ^ (0x9e3779b97f4a7c15ull * (c + 1)));
    shuffle(positives.begin(), positives.end(), pick);
    if (static_cast<int>(positives.size()) > per_class_sample_cap)
      positives.resize(per_class_sample_cap);

    std::vector<Eigen::MatrixXf> mats;
    for (const auto* e : positives) mats.push_back(stft(load_wav(e->path), fp).log_mag);
    const Eigen::MatrixXf X = build_training_matrix(mats, chunk);

    Dictionary init = noise_dict;
    init.frozen.assign(noise_k, true);
    NmfConfig stage_cfg = cfg;
    stage_cfg.k = noise_k + per_class_k;
    stage_cfg.seed = cfg.seed ^ (0xda942042e4dd58b5ull * (c + 1));
    const Dictionary fitted = sparse_nmf_fit(X, stage_cfg, init).dict;

    out.atoms.middleCols(c * per_class_k, per_class_k) =
        fitted.atoms.middleCols(noise_k, per_class_k);
    for (int k = 0; k < per_class_k; ++k) out.labels.push_back(manifest.class_names[c]);
  }
  out.frozen.assign(out.components(), false);
  return out;
}

}  // namespace l2i
