// l2i: NMF-based interpretation of audio classifiers, end to end.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "l2i/ad/gradcheck.hpp"
#include "l2i/data/synth.hpp"
#include "l2i/eval/faithfulness.hpp"
#include "l2i/eval/metrics.hpp"
#include "l2i/eval/nmf_baseline.hpp"
#include "l2i/interpret/interpret.hpp"
#include "l2i/io/container.hpp"
#include "l2i/nmf/dictionary.hpp"
#include "l2i/train/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace l2i;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  require(static_cast<bool>(os), "cannot write '" + path.string() + "'");
  os << text;
}

// Every run echoes its resolved flag set; directory outputs get
// DIR/config.json, file outputs get <out>.config.json next to the artifact.
void echo_config(const std::string& out, bool is_dir, const json& cfg) {
  const fs::path p = is_dir ? fs::path(out) / "config.json" : fs::path(out + ".config.json");
  write_text(p, cfg.dump(2) + "\n");
}

std::vector<SynthClass> recipe_set(int n) {
  require(n >= 2, "need at least 2 classes");
  std::vector<SynthClass> all = {
      {"tone440", ToneRecipe{440.0}},
      {"chirp", ChirpRecipe{200.0, 1200.0}},
      {"noiseburst", NoiseBurstRecipe{1800.0, 3200.0}},
      {"amtone", AmToneRecipe{600.0, 8.0}},
  };
  std::vector<SynthClass> out;
  for (int i = 0; i < n; ++i) {
    if (i < static_cast<int>(all.size())) {
      out.push_back(all[i]);
    } else {
      const double freq = 300.0 + 250.0 * (i - static_cast<int>(all.size()) + 1);
      out.push_back({"tone" + std::to_string(static_cast<int>(freq)), ToneRecipe{freq}});
    }
  }
  return out;
}

void write_training_log(const std::string& path, const std::vector<EpochReport>& reports) {
  std::string lines;
  for (const auto& r : reports) {
    json j = {{"epoch", r.epoch}, {"L_FID", r.l_fid},   {"L_NMF", r.l_nmf},
              {"L_sparse", r.l_sparse}, {"L_f", r.l_f}, {"total", r.total}};
    lines += j.dump() + "\n";
  }
  write_text(path, lines);
}

int sample_rate_of_first(const Manifest& man) {
  require(!man.entries.empty(), "manifest is empty");
  return load_wav(man.entries.front().path).sample_rate;
}

void check_k(int dict_k, int model_k) {
  require(dict_k == model_k, "dictionary K " + std::to_string(dict_k) +
                                 " does not match model K " + std::to_string(model_k));
}

TaskKind task_of(const Manifest& man) { return man.task_kind; }

json evaluate_report(LoadedInterpreter& li, const LoadedDictionary& ld, const Manifest& man,
                     const std::vector<std::string>& metrics, double tau,
                     const std::vector<std::string>& exclude, std::uint64_t seed) {
  check_k(ld.dict.components(), li.model.psi.cfg.components);
  auto wants = [&](const std::string& m) {
    return std::find(metrics.begin(), metrics.end(), m) != metrics.end();
  };
  std::vector<int> excluded;
  for (const auto& name : exclude) {
    const auto it = std::find(li.class_names.begin(), li.class_names.end(), name);
    require(it != li.class_names.end(), "unknown class '" + name + "'");
    excluded.push_back(static_cast<int>(it - li.class_names.begin()));
  }

  const auto test = build_samples<float>(man, Split::Test, li.pipeline);
  std::vector<std::vector<double>> f_probs, g_probs;
  std::vector<std::vector<bool>> f_binary;
  for (const auto& s : test) {
    auto out = li.model.forward(s.mel, s.frames);
    f_probs.emplace_back(out.f.probs->value.begin(), out.f.probs->value.end());
    g_probs.emplace_back(out.g.probs->value.begin(), out.g.probs->value.end());
    std::vector<bool> b;
    for (double v : f_probs.back()) b.push_back(v >= 0.5);
    f_binary.push_back(std::move(b));
  }

  json rep;
  rep["tau"] = tau;
  rep["num_test_samples"] = static_cast<int>(test.size());
  if (wants("fidelity")) {
    rep["top1_fidelity"] = topk_fidelity(f_probs, g_probs, 1);
    rep["top2_fidelity"] = topk_fidelity(f_probs, g_probs, 2);
    rep["top3_fidelity"] = topk_fidelity(f_probs, g_probs, 3);
  }
  if (wants("auprc")) {
    rep["macro_auprc_fidelity"] = macro_auprc(g_probs, f_binary, excluded);
    rep["micro_auprc_fidelity"] = micro_auprc(g_probs, f_binary, excluded);
  }
  if (wants("f1")) rep["weighted_f1_fidelity"] = weighted_f1(g_probs, f_binary);
  if (wants("faithfulness")) {
    auto ff = faithfulness(li.model, ld.dict, man, Split::Test, li.pipeline, tau);
    auto rb = random_baseline_faithfulness(li.model, ld.dict, man, Split::Test, li.pipeline, tau, seed);
    rep["ff_median"] = ff.ff_median;
    rep["ff_random_baseline_median"] = rb.ff_median;
    double mean_removed = 0.0;
    for (const auto& r : ff.records) mean_removed += r.n_removed;
    rep["mean_components_removed"] = mean_removed / static_cast<double>(ff.records.size());
  }
  return rep;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"NMF-regularized interpreter for audio classifiers"};
  app.require_subcommand(1);

  // ---- synth-data ----
  auto* synth = app.add_subcommand("synth-data", "generate a deterministic synthetic dataset");
  std::string synth_out;
  int synth_classes = 3, synth_per_class = 20, synth_sr = 44100;
  double synth_duration = 1.0, synth_snr = 1e9;
  bool synth_multilabel = false;
  std::uint64_t synth_seed = 0;
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--classes", synth_classes, "number of classes");
  synth->add_option("--per-class", synth_per_class, "clips per class");
  synth->add_option("--duration", synth_duration, "clip length in seconds");
  synth->add_option("--snr", synth_snr, "background noise SNR in dB (large = clean)");
  synth->add_option("--sample-rate", synth_sr, "sample rate in Hz");
  synth->add_flag("--multilabel", synth_multilabel, "mix 1-3 sources per clip");
  synth->add_option("--seed", synth_seed, "random seed");

  // ---- learn-dict ----
  auto* ld_cmd = app.add_subcommand("learn-dict", "learn a sparse-NMF dictionary");
  std::string ld_manifest, ld_out, ld_strategy = "flat";
  int ld_k = 100, ld_iters = 500, ld_chunk = 5, ld_fft = 1024, ld_hop = 512;
  int ld_noise_k = 10, ld_per_class_k = 10, ld_cap = 700;
  double ld_mu = 0.1;
  std::uint64_t ld_seed = 0;
  ld_cmd->add_option("--manifest", ld_manifest)->required();
  ld_cmd->add_option("--k", ld_k, "component count");
  ld_cmd->add_option("--mu", ld_mu, "l1 sparsity weight");
  ld_cmd->add_option("--iters", ld_iters, "max multiplicative updates");
  ld_cmd->add_option("--chunk", ld_chunk, "frame chunk size for averaging");
  ld_cmd->add_option("--strategy", ld_strategy)->check(CLI::IsMember({"flat", "class-noise"}));
  ld_cmd->add_option("--noise-k", ld_noise_k);
  ld_cmd->add_option("--per-class-k", ld_per_class_k);
  ld_cmd->add_option("--cap", ld_cap, "per-class training sample cap");
  ld_cmd->add_option("--fft", ld_fft);
  ld_cmd->add_option("--hop", ld_hop);
  ld_cmd->add_option("--seed", ld_seed);
  ld_cmd->add_option("--out", ld_out)->required();

  // ---- train-classifier ----
  auto* tc_cmd = app.add_subcommand("train-classifier", "train the tapped classifier f");
  std::string tc_manifest, tc_out, tc_channels = "16,32,64";
  int tc_epochs = 30, tc_batch = 8, tc_fft = 1024, tc_hop = 512, tc_mel = 128;
  double tc_lr = 2e-4;
  std::uint64_t tc_seed = 0;
  tc_cmd->add_option("--manifest", tc_manifest)->required();
  tc_cmd->add_option("--epochs", tc_epochs);
  tc_cmd->add_option("--batch", tc_batch);
  tc_cmd->add_option("--lr", tc_lr);
  tc_cmd->add_option("--fft", tc_fft);
  tc_cmd->add_option("--hop", tc_hop);
  tc_cmd->add_option("--mel-bands", tc_mel);
  tc_cmd->add_option("--channels", tc_channels, "comma-separated conv block widths");
  tc_cmd->add_option("--seed", tc_seed);
  tc_cmd->add_option("--out", tc_out)->required();

  // ---- train-posthoc ----
  auto* ph_cmd = app.add_subcommand("train-posthoc", "train the post-hoc interpreter");
  std::string ph_classifier, ph_dict, ph_manifest, ph_out;
  int ph_epochs = 30, ph_batch = 8, ph_adapter = 16, ph_fusion = 32, ph_att = 16;
  double ph_alpha = 10.0, ph_beta = 0.8, ph_lr = 2e-4;
  bool ph_maxpool = false;
  std::uint64_t ph_seed = 0;
  ph_cmd->add_option("--classifier", ph_classifier)->required();
  ph_cmd->add_option("--dict", ph_dict)->required();
  ph_cmd->add_option("--manifest", ph_manifest)->required();
  ph_cmd->add_option("--alpha", ph_alpha);
  ph_cmd->add_option("--beta", ph_beta);
  ph_cmd->add_option("--lr", ph_lr);
  ph_cmd->add_option("--epochs", ph_epochs);
  ph_cmd->add_option("--batch", ph_batch);
  ph_cmd->add_option("--adapter-channels", ph_adapter);
  ph_cmd->add_option("--fusion-channels", ph_fusion);
  ph_cmd->add_option("--attention-hidden", ph_att);
  ph_cmd->add_flag("--max-pool", ph_maxpool, "max pooling instead of attention");
  ph_cmd->add_option("--seed", ph_seed);
  ph_cmd->add_option("--out", ph_out)->required();

  // ---- train-bydesign ----
  auto* bd_cmd = app.add_subcommand("train-bydesign", "train the by-design model g");
  std::string bd_dict, bd_manifest, bd_out, bd_variant = "full", bd_channels = "16,32,64";
  int bd_epochs = 50, bd_batch = 8, bd_mel = 128, bd_adapter = 16, bd_fusion = 32, bd_att = 16;
  double bd_alpha = 3.0, bd_beta = 0.2, bd_gamma = 1.0, bd_lr = 2e-4;
  std::uint64_t bd_seed = 0;
  bd_cmd->add_option("--dict", bd_dict)->required();
  bd_cmd->add_option("--manifest", bd_manifest)->required();
  bd_cmd->add_option("--alpha", bd_alpha);
  bd_cmd->add_option("--beta", bd_beta);
  bd_cmd->add_option("--gamma", bd_gamma);
  bd_cmd->add_option("--variant", bd_variant)->check(CLI::IsMember({"full", "nopred"}));
  bd_cmd->add_option("--lr", bd_lr);
  bd_cmd->add_option("--epochs", bd_epochs);
  bd_cmd->add_option("--batch", bd_batch);
  bd_cmd->add_option("--mel-bands", bd_mel);
  bd_cmd->add_option("--channels", bd_channels);
  bd_cmd->add_option("--adapter-channels", bd_adapter);
  bd_cmd->add_option("--fusion-channels", bd_fusion);
  bd_cmd->add_option("--attention-hidden", bd_att);
  bd_cmd->add_option("--seed", bd_seed);
  bd_cmd->add_option("--out", bd_out)->required();

  // ---- interpret ----
  auto* in_cmd = app.add_subcommand("interpret", "generate interpretation audio for one clip");
  std::string in_model, in_dict, in_input, in_class, in_out;
  double in_tau = 0.1;
  in_cmd->add_option("--model", in_model)->required();
  in_cmd->add_option("--dict", in_dict)->required();
  in_cmd->add_option("--input", in_input)->required();
  in_cmd->add_option("--class", in_class, "class name (default: predicted)");
  in_cmd->add_option("--tau", in_tau);
  in_cmd->add_option("--out-dir", in_out)->required();

  // ---- evaluate ----
  auto* ev_cmd = app.add_subcommand("evaluate", "compute fidelity/faithfulness metrics");
  std::string ev_model, ev_dict, ev_manifest, ev_out, ev_metrics = "fidelity,faithfulness,auprc,f1";
  std::vector<std::string> ev_exclude;
  double ev_tau = 0.1;
  std::uint64_t ev_seed = 0;
  ev_cmd->add_option("--model", ev_model)->required();
  ev_cmd->add_option("--dict", ev_dict)->required();
  ev_cmd->add_option("--manifest", ev_manifest)->required();
  ev_cmd->add_option("--metrics", ev_metrics, "comma-separated metric list");
  ev_cmd->add_option("--tau", ev_tau);
  ev_cmd->add_option("--exclude-class", ev_exclude, "class name excluded from AUPRC");
  ev_cmd->add_option("--seed", ev_seed);
  ev_cmd->add_option("--out", ev_out)->required();

  // ---- gradcheck ----
  auto* gc_cmd = app.add_subcommand("gradcheck", "finite-difference check of the autodiff core");
  std::uint64_t gc_seed = 0;
  gc_cmd->add_option("--seed", gc_seed);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) {
      SynthSpec spec;
      spec.classes = recipe_set(synth_classes);
      spec.per_class = synth_per_class;
      spec.duration_s = synth_duration;
      spec.sample_rate = synth_sr;
      spec.snr_db = synth_snr;
      spec.multilabel = synth_multilabel;
      spec.seed = synth_seed;
      const Manifest man = generate(spec, synth_out);
      echo_config(synth_out, true,
                  {{"command", "synth-data"}, {"classes", synth_classes},
                   {"per_class", synth_per_class}, {"duration", synth_duration},
                   {"snr", synth_snr}, {"sample_rate", synth_sr},
                   {"multilabel", synth_multilabel}, {"seed", synth_seed}});
      std::cout << "wrote " << man.entries.size() << " clips to " << synth_out << "\n";
    } else if (*ld_cmd) {
      const Manifest man = load_manifest(ld_manifest);
      const FrameParams fp{ld_fft, ld_hop};
      NmfConfig cfg;
      cfg.k = ld_k;
      cfg.mu = ld_mu;
      cfg.max_iters = ld_iters;
      cfg.seed = ld_seed;
      Dictionary dict;
      if (ld_strategy == "flat") {
        dict = learn_dictionary_flat(man, fp, ld_chunk, cfg);
      } else {
        dict = learn_dictionary_class_noise(man, fp, ld_chunk, ld_noise_k, ld_per_class_k, ld_cap, cfg);
      }
      save_dictionary(ld_out, dict, fp, sample_rate_of_first(man),
                      {{"mu", ld_mu}, {"strategy", ld_strategy}});
      echo_config(ld_out, false,
                  {{"command", "learn-dict"}, {"manifest", ld_manifest}, {"k", ld_k},
                   {"mu", ld_mu}, {"iters", ld_iters}, {"chunk", ld_chunk},
                   {"strategy", ld_strategy}, {"noise_k", ld_noise_k},
                   {"per_class_k", ld_per_class_k}, {"cap", ld_cap}, {"fft", ld_fft},
                   {"hop", ld_hop}, {"seed", ld_seed}});
      std::cout << "dictionary " << dict.bins() << "x" << dict.components() << " -> " << ld_out << "\n";
    } else if (*tc_cmd) {
      const Manifest man = load_manifest(tc_manifest);
      FeaturePipeline pipe;
      pipe.frame_params = {tc_fft, tc_hop};
      pipe.mel_bands = tc_mel;
      ClassifierConfig cc;
      cc.mel_bands = tc_mel;
      cc.channels.clear();
      for (const auto& part : CLI::detail::split(tc_channels, ','))
        cc.channels.push_back(std::stoi(part));
      cc.num_classes = man.num_classes();
      cc.task_kind = task_of(man);
      cc.tap_indices.resize(cc.channels.size());
      std::iota(cc.tap_indices.begin(), cc.tap_indices.end(), 0);
      Rng rng(tc_seed);
      auto clf = TappedClassifier<float>::init(cc, rng);
      const auto train = build_samples<float>(man, Split::Train, pipe);
      TrainConfig cfg;
      cfg.epochs = tc_epochs;
      cfg.batch_size = tc_batch;
      cfg.lr = tc_lr;
      cfg.seed = tc_seed;
      cfg.task_kind = cc.task_kind;
      const auto reports = train_classifier(clf, train, cfg);
      save_classifier(tc_out, clf, pipe, sample_rate_of_first(man), man.class_names);
      write_training_log(tc_out + ".log.jsonl", reports);
      echo_config(tc_out, false,
                  {{"command", "train-classifier"}, {"manifest", tc_manifest},
                   {"epochs", tc_epochs}, {"batch", tc_batch}, {"lr", tc_lr}, {"fft", tc_fft},
                   {"hop", tc_hop}, {"mel_bands", tc_mel}, {"channels", tc_channels},
                   {"seed", tc_seed}});
      std::cout << "classifier trained, final loss " << reports.back().l_f << " -> " << tc_out << "\n";
    } else if (*ph_cmd) {
      const Manifest man = load_manifest(ph_manifest);
      LoadedClassifier lc = load_classifier(ph_classifier);
      LoadedDictionary ld = load_dictionary(ph_dict);
      require(ld.frame_params.fft_size == lc.pipeline.frame_params.fft_size &&
                  ld.frame_params.hop == lc.pipeline.frame_params.hop,
              "dictionary and classifier use different frame parameters");
      InterpreterModel<float> model;
      model.classifier = lc.classifier;
      PsiConfig pc;
      pc.components = ld.dict.components();
      pc.adapter_channels = ph_adapter;
      pc.fusion_channels = ph_fusion;
      ThetaConfig tc;
      tc.components = pc.components;
      tc.num_classes = lc.classifier.cfg.num_classes;
      tc.attention_hidden = ph_att;
      tc.max_pooling = ph_maxpool;
      tc.task_kind = lc.classifier.cfg.task_kind;
      Rng rng(ph_seed);
      model.psi = InterpreterPsi<float>::init(pc, tap_channels(lc.classifier.cfg),
                                              tap_freqs(lc.classifier.cfg), rng);
      model.theta = HeadTheta<float>::init(tc, rng);
      const auto train = build_samples<float>(man, Split::Train, lc.pipeline);
      LossWeights w;
      w.alpha = ph_alpha;
      w.beta = ph_beta;
      TrainConfig cfg;
      cfg.epochs = ph_epochs;
      cfg.batch_size = ph_batch;
      cfg.lr = ph_lr;
      cfg.seed = ph_seed;
      cfg.task_kind = tc.task_kind;
      const auto reports = train_posthoc(model, ld.dict, train, w, cfg);
      save_interpreter(ph_out, model, lc.pipeline, lc.sample_rate, lc.class_names, "posthoc");
      write_training_log(ph_out + ".log.jsonl", reports);
      echo_config(ph_out, false,
                  {{"command", "train-posthoc"}, {"classifier", ph_classifier}, {"dict", ph_dict},
                   {"manifest", ph_manifest}, {"alpha", ph_alpha}, {"beta", ph_beta},
                   {"lr", ph_lr}, {"epochs", ph_epochs}, {"batch", ph_batch},
                   {"adapter_channels", ph_adapter}, {"fusion_channels", ph_fusion},
                   {"attention_hidden", ph_att}, {"max_pool", ph_maxpool}, {"seed", ph_seed}});
      std::cout << "post-hoc interpreter trained, final total " << reports.back().total << " -> "
                << ph_out << "\n";
    } else if (*bd_cmd) {
      const Manifest man = load_manifest(bd_manifest);
      LoadedDictionary ld = load_dictionary(bd_dict);
      ClassifierConfig cc;
      cc.mel_bands = bd_mel;
      cc.channels.clear();
      for (const auto& part : CLI::detail::split(bd_channels, ','))
        cc.channels.push_back(std::stoi(part));
      cc.num_classes = man.num_classes();
      cc.task_kind = task_of(man);
      cc.tap_indices.resize(cc.channels.size());
      std::iota(cc.tap_indices.begin(), cc.tap_indices.end(), 0);
      PsiConfig pc;
      pc.components = ld.dict.components();
      pc.adapter_channels = bd_adapter;
      pc.fusion_channels = bd_fusion;
      ThetaConfig tc;
      tc.components = pc.components;
      tc.num_classes = cc.num_classes;
      tc.attention_hidden = bd_att;
      tc.task_kind = cc.task_kind;
      Rng rng(bd_seed);
      auto model = init_interpreter_model<float>(cc, pc, tc, rng);
      FeaturePipeline pipe;
      pipe.frame_params = ld.frame_params;
      pipe.mel_bands = bd_mel;
      const auto train = build_samples<float>(man, Split::Train, pipe);
      LossWeights w;
      w.alpha = bd_alpha;
      w.beta = bd_beta;
      w.gamma = bd_gamma;
      TrainConfig cfg;
      cfg.epochs = bd_epochs;
      cfg.batch_size = bd_batch;
      cfg.lr = bd_lr;
      cfg.seed = bd_seed;
      cfg.task_kind = cc.task_kind;
      cfg.variant = bd_variant == "nopred" ? TrainVariant::BydesignNopred : TrainVariant::Bydesign;
      const auto reports = train_bydesign(model, ld.dict, train, w, cfg);
      save_interpreter(bd_out, model, pipe, ld.sample_rate, man.class_names,
                       bd_variant == "nopred" ? "bydesign_nopred" : "bydesign");
      write_training_log(bd_out + ".log.jsonl", reports);
      echo_config(bd_out, false,
                  {{"command", "train-bydesign"}, {"dict", bd_dict}, {"manifest", bd_manifest},
                   {"alpha", bd_alpha}, {"beta", bd_beta}, {"gamma", bd_gamma},
                   {"variant", bd_variant}, {"lr", bd_lr}, {"epochs", bd_epochs},
                   {"batch", bd_batch}, {"mel_bands", bd_mel}, {"channels", bd_channels},
                   {"adapter_channels", bd_adapter}, {"fusion_channels", bd_fusion},
                   {"attention_hidden", bd_att}, {"seed", bd_seed}});
      std::cout << "by-design model trained, final total " << reports.back().total << " -> "
                << bd_out << "\n";
    } else if (*in_cmd) {
      LoadedInterpreter li = load_interpreter(in_model);
      LoadedDictionary ld = load_dictionary(in_dict);
      check_k(ld.dict.components(), li.model.psi.cfg.components);
      const Waveform wave = load_wav(in_input);
      int class_index;
      if (in_class.empty()) {
        const Spectrogram spec = stft(wave, li.pipeline.frame_params);
        auto out = li.model.classifier.forward(
            mel_tensor<float>(log_mel(spec, li.pipeline.mel_bands)));
        class_index = static_cast<int>(
            std::max_element(out.probs->value.begin(), out.probs->value.end()) -
            out.probs->value.begin());
      } else {
        const auto it = std::find(li.class_names.begin(), li.class_names.end(), in_class);
        require(it != li.class_names.end(), "unknown class '" + in_class + "'");
        class_index = static_cast<int>(it - li.class_names.begin());
      }
      const InterpretationBundle bundle =
          interpret_sample(li.model, ld.dict, wave, li.pipeline, class_index, in_tau);
      fs::create_directories(in_out);
      save_wav(bundle.x_int, (fs::path(in_out) / "x_int.wav").string());
      for (const auto& [k, audio] : bundle.per_component_audio)
        save_wav(audio, (fs::path(in_out) / ("component_" + std::to_string(k) + ".wav")).string());
      std::string csv = "sample_id,class";
      for (std::size_t k = 0; k < bundle.relevance.values.size(); ++k)
        csv += ",r" + std::to_string(k);
      csv += "\n" + fs::path(in_input).filename().string() + "," + li.class_names[class_index];
      for (double r : bundle.relevance.values) csv += "," + std::to_string(r);
      csv += "\n";
      write_text(fs::path(in_out) / "relevance.csv", csv);
      echo_config(in_out, true,
                  {{"command", "interpret"}, {"model", in_model}, {"dict", in_dict},
                   {"input", in_input}, {"class", li.class_names[class_index]}, {"tau", in_tau}});
      std::cout << "interpretation for class '" << li.class_names[class_index] << "': "
                << bundle.selected.size() << " components -> " << in_out << "\n";
    } else if (*ev_cmd) {
      LoadedInterpreter li = load_interpreter(ev_model);
      LoadedDictionary ld = load_dictionary(ev_dict);
      const Manifest man = load_manifest(ev_manifest);
      std::vector<std::string> metric_list;
      for (const auto& part : CLI::detail::split(ev_metrics, ',')) metric_list.push_back(part);
      const json rep = evaluate_report(li, ld, man, metric_list, ev_tau, ev_exclude, ev_seed);
      write_text(ev_out, rep.dump(2) + "\n");
      echo_config(ev_out, false,
                  {{"command", "evaluate"}, {"model", ev_model}, {"dict", ev_dict},
                   {"manifest", ev_manifest}, {"metrics", ev_metrics}, {"tau", ev_tau},
                   {"exclude_class", ev_exclude}, {"seed", ev_seed}});
      std::cout << rep.dump(2) << "\n";
    } else if (*gc_cmd) {
      Rng rng(gc_seed);
      ClassifierConfig cc;
      cc.mel_bands = 8;
      cc.channels = {3, 4};
      cc.num_classes = 3;
      cc.tap_indices = {0, 1};
      PsiConfig pc;
      pc.components = 4;
      pc.adapter_channels = 3;
      pc.fusion_channels = 4;
      ThetaConfig tc;
      tc.components = 4;
      tc.num_classes = 3;
      tc.attention_hidden = 3;
      auto ma = init_interpreter_model<double>(cc, pc, tc, rng);
      Rng rng2(gc_seed);
      auto md = init_interpreter_model<double>(cc, pc, tc, rng2);
      std::vector<float> mel_data(8 * 6);
      for (auto& v : mel_data) v = static_cast<float>(rng.uniform());
      auto params_f = ma.all_params();
      auto params_d = md.all_params();
      // randomize biases too: zero-initialized biases leave activations
      // exactly at relu/pool tie points where the subgradient choice and the
      // finite difference legitimately disagree
      Rng jitter(gc_seed + 2000);
      for (std::size_t i = 0; i < params_f.size(); ++i)
        for (std::size_t j = 0; j < params_f[i]->numel(); ++j) {
          const double v = jitter.uniform(-0.3, 0.3);
          params_f[i]->value[j] = v;
          params_d[i]->value[j] = v;
        }
      auto forward_analytic = [&]() {
        std::vector<double> meld(mel_data.begin(), mel_data.end());
        auto out = ma.forward(ad::constant<double>({1, 8, 6}, meld), 7);
        return ad::sum(ad::mul(out.g.logits, out.g.logits));
      };
      auto forward_shadow = [&](const std::vector<std::vector<double>>& snap) {
        for (std::size_t i = 0; i < params_d.size(); ++i)
          params_d[i]->value.assign(snap[i].begin(), snap[i].end());
        std::vector<double> meld(mel_data.begin(), mel_data.end());
        auto out = md.forward(ad::constant<double>({1, 8, 6}, meld), 7);
        auto loss = ad::sum(ad::mul(out.g.logits, out.g.logits));
        return loss->value[0];
      };
      const double err = ad::grad_check<double>(params_f, forward_analytic, forward_shadow, 1e-5);
      std::cout << "gradcheck max relative error " << err << "\n";
      return err < 1e-3 ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
