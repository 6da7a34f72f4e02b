#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "l2i/eval/metrics.hpp"
#include "l2i/interpret/interpret.hpp"

namespace l2i {

struct FaithfulnessRecord {
  std::string sample_id;
  int class_index = -1;
  double ff = 0.0;       // FF_x = f(x)_c - f(x2)_c
  int n_removed = 0;
};

struct FaithfulnessReport {
  std::vector<FaithfulnessRecord> records;
  double ff_median = 0.0;
};

namespace detail {

// Cached per-sample interpretation state for the faithfulness metrics.
struct EvalState {
  Spectrogram spec;
  Eigen::MatrixXf h;             // K x T
  std::vector<double> f_probs;
  int pred_class = 0;
  std::vector<int> selected;
  std::string sample_id;
};

template <typename T>
std::vector<EvalState> build_eval_states(const InterpreterModel<T>& model, const Dictionary& dict,
                                         const Manifest& manifest, Split split,
                                         const FeaturePipeline& pipeline, double tau) {
  std::vector<EvalState> states;
  for (const auto* e : manifest.split_entries(split)) {
    EvalState st;
    st.sample_id = e->path;
    st.spec = stft(load_wav(e->path), pipeline.frame_params);
    auto out = model.forward(mel_tensor<T>(log_mel(st.spec, pipeline.mel_bands)), st.spec.frames());
    st.f_probs.assign(out.f.probs->value.begin(), out.f.probs->value.end());
    st.pred_class = static_cast<int>(
        std::max_element(st.f_probs.begin(), st.f_probs.end()) - st.f_probs.begin());
    std::vector<double> z, theta_row;
    pooled_and_theta_row(model, out.g, st.pred_class, z, theta_row);
    st.selected = select_components(relevance(z, theta_row), tau);
    st.h = activation_matrix(
        std::vector<float>(out.activation->value.begin(), out.activation->value.end()),
        dict.components(), st.spec.frames());
    states.push_back(std::move(st));
  }
  require(!states.empty(), "no samples to evaluate");
  return states;
}

template <typename T>
double ff_for_removal(const InterpreterModel<T>& model, const Dictionary& dict,
                      const EvalState& st, const std::vector<int>& removed,
                      const FeaturePipeline& pipeline) {
  const Waveform x2 = removal_signal(st.spec, dict.atoms, st.h, removed);
  const Spectrogram spec2 = stft(x2, pipeline.frame_params);
  auto out2 = model.classifier.forward(mel_tensor<T>(log_mel(spec2, pipeline.mel_bands)));
  return st.f_probs[st.pred_class] -
         static_cast<double>(out2.probs->value[st.pred_class]);
}

}  // namespace detail

// Median faithfulness over a split: per sample, remove the components the
// interpreter selected for the predicted class and measure the drop in that
// class's classifier probability.
template <typename T>
FaithfulnessReport faithfulness(const InterpreterModel<T>& model, const Dictionary& dict,
                                const Manifest& manifest, Split split,
                                const FeaturePipeline& pipeline, double tau) {
  const auto states = detail::build_eval_states(model, dict, manifest, split, pipeline, tau);
  FaithfulnessReport report;
  std::vector<double> ffs;
  for (const auto& st : states) {
    FaithfulnessRecord rec;
    rec.sample_id = st.sample_id;
    rec.class_index = st.pred_class;
    rec.n_removed = static_cast<int>(st.selected.size());
    rec.ff = detail::ff_for_removal(model, dict, st, st.selected, pipeline);
    ffs.push_back(rec.ff);
    report.records.push_back(std::move(rec));
  }
  report.ff_median = median(ffs);
  return report;
}

// Random Baseline: removes n = round(mean |L|) components drawn uniformly
// from the complement of each sample's selected set.
template <typename T>
FaithfulnessReport random_baseline_faithfulness(const InterpreterModel<T>& model,
                                                const Dictionary& dict, const Manifest& manifest,
                                                Split split, const FeaturePipeline& pipeline,
                                                double tau, std::uint64_t seed) {
  const auto states = detail::build_eval_states(model, dict, manifest, split, pipeline, tau);
  double mean_l = 0.0;
  for (const auto& st : states) mean_l += static_cast<double>(st.selected.size());
  mean_l /= static_cast<double>(states.size());
  const int n = std::max(0, static_cast<int>(std::llround(mean_l)));

  Rng rng(seed);
  FaithfulnessReport report;
  std::vector<double> ffs;
  for (const auto& st : states) {
    std::vector<int> complement;
    for (int k = 0; k < dict.components(); ++k)
      if (std::find(st.selected.begin(), st.selected.end(), k) == st.selected.end())
        complement.push_back(k);
    shuffle(complement.begin(), complement.end(), rng);
    if (static_cast<int>(complement.size()) > n) complement.resize(n);
    std::sort(complement.begin(), complement.end());

    FaithfulnessRecord rec;
    rec.sample_id = st.sample_id;
    rec.class_index = st.pred_class;
    rec.n_removed = static_cast<int>(complement.size());
    rec.ff = detail::ff_for_removal(model, dict, st, complement, pipeline);
    ffs.push_back(rec.ff);
    report.records.push_back(std::move(rec));
  }
  report.ff_median = median(ffs);
  return report;
}

}  // namespace l2i
