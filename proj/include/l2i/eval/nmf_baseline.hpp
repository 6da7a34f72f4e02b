#pragma once

#include <vector>

#include "l2i/ad/adam.hpp"
#include "l2i/ad/ops.hpp"
#include "l2i/data/manifest.hpp"
#include "l2i/eval/metrics.hpp"
#include "l2i/nmf/dictionary.hpp"
#include "l2i/train/losses.hpp"

namespace l2i {

struct NmfBaselineReport {
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
  std::vector<std::vector<double>> test_scores;  // per sample, per class
};

namespace detail {

inline std::vector<std::vector<double>> activation_features(const Manifest& manifest, Split split,
                                                            const Dictionary& dict,
                                                            const FrameParams& fp,
                                                            const NmfConfig& cfg) {
  std::vector<std::vector<double>> feats;
  for (const auto* e : manifest.split_entries(split)) {
    const Eigen::MatrixXf h = infer_activations(stft(load_wav(e->path), fp).log_mag, dict, cfg);
    std::vector<double> f(dict.components());
    for (int k = 0; k < dict.components(); ++k)
      f[k] = h.row(k).cast<double>().mean();
    feats.push_back(std::move(f));
  }
  return feats;
}

inline double accuracy(const std::vector<std::vector<double>>& scores,
                       const std::vector<int>& labels) {
  int hits = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const int pred = static_cast<int>(
        std::max_element(scores[i].begin(), scores[i].end()) - scores[i].begin());
    if (pred == labels[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(scores.size());
}

}  // namespace detail

// Unsupervised-NMF baseline: mean time activation per component as the
// feature, multinomial logistic regression trained with the autodiff core.
inline NmfBaselineReport nmf_baseline_classify(const Manifest& manifest, const Dictionary& dict,
                                               const FrameParams& fp, const NmfConfig& infer_cfg,
                                               int epochs = 200, double lr = 0.05,
                                               std::uint64_t seed = 0) {
  require(manifest.task_kind == TaskKind::MultiClass,
          "nmf baseline implemented for multi-class tasks");
  const auto train_x = detail::activation_features(manifest, Split::Train, dict, fp, infer_cfg);
  const auto test_x = detail::activation_features(manifest, Split::Test, dict, fp, infer_cfg);
  require(!train_x.empty() && !test_x.empty(), "both splits must be non-empty");

  auto label_of = [&](Split split) {
    std::vector<int> out;
    for (const auto* e : manifest.split_entries(split)) out.push_back(e->labels.at(0));
    return out;
  };
  const std::vector<int> train_y = label_of(Split::Train);
  const std::vector<int> test_y = label_of(Split::Test);

  const int k = dict.components();
  const int c = manifest.num_classes();
  Rng rng(seed);
  auto w = ad::param_uniform<float>({c, k}, 0.1, rng);
  auto b = ad::make_tensor<float>({c}, true);
  ad::Adam<float> opt({w, b}, lr);

  auto forward = [&](const std::vector<double>& x) {
    std::vector<float> xf(x.begin(), x.end());
    auto xc = ad::constant<float>({k}, xf);
    return ad::softmax(ad::linear(w, b, xc), 1);
  };

  for (int epoch = 0; epoch < epochs; ++epoch) {
    opt.zero_grad();
    for (std::size_t i = 0; i < train_x.size(); ++i) {
      auto probs = forward(train_x[i]);
      std::vector<double> target(c, 0.0);
      target[train_y[i]] = 1.0;
      auto loss = fidelity_loss(probs, target, TaskKind::MultiClass);
      ad::backward(ad::scale(loss, static_cast<float>(1.0 / train_x.size())));
    }
    opt.step();
  }

  auto score_all = [&](const std::vector<std::vector<double>>& xs) {
    std::vector<std::vector<double>> out;
    for (const auto& x : xs) {
      auto probs = forward(x);
      out.emplace_back(probs->value.begin(), probs->value.end());
    }
    return out;
  };
  NmfBaselineReport report;
  report.test_scores = score_all(test_x);
  report.train_accuracy = detail::accuracy(score_all(train_x), train_y);
  report.test_accuracy = detail::accuracy(report.test_scores, test_y);
  return report;
}

}  // namespace l2i
