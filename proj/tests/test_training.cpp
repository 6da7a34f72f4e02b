#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

#include "l2i/data/synth.hpp"
#include "l2i/nmf/dictionary.hpp"
#include "l2i/train/train.hpp"

using namespace l2i;

namespace {

struct Fixture {
  Manifest manifest;
  FeaturePipeline pipeline;
  Dictionary dict;
  std::vector<TrainSample<float>> train;
};

const Fixture& fixture() {
  static Fixture f = [] {
    Fixture out;
    SynthSpec spec = default_synth_spec();
    spec.per_class = 6;
    spec.duration_s = 0.5;
    spec.sample_rate = 8000;
    spec.seed = 21;
    const auto dir = std::filesystem::temp_directory_path() / "l2i_train_fixture";
    out.manifest = generate(spec, dir.string());
    out.pipeline.frame_params = {256, 128};
    out.pipeline.mel_bands = 32;
    NmfConfig cfg;
    cfg.k = 6;
    cfg.mu = 0.1;
    cfg.max_iters = 80;
    cfg.seed = 1;
    out.dict = learn_dictionary_flat(out.manifest, out.pipeline.frame_params, 5, cfg);
    out.train = build_samples<float>(out.manifest, Split::Train, out.pipeline);
    return out;
  }();
  return f;
}

InterpreterModel<float> fixture_model(std::uint64_t seed) {
  ClassifierConfig cc;
  cc.mel_bands = 32;
  cc.channels = {4, 8, 8};
  cc.num_classes = 3;
  PsiConfig pc;
  pc.components = 6;
  pc.adapter_channels = 6;
  pc.fusion_channels = 8;
  ThetaConfig tc;
  tc.components = 6;
  tc.num_classes = 3;
  tc.attention_hidden = 6;
  Rng rng(seed);
  return init_interpreter_model<float>(cc, pc, tc, rng);
}

}  // namespace

TEST_CASE("fidelity loss analytic values") {
  auto onehot = ad::constant<float>({4}, {1.0f, 0.0f, 0.0f, 0.0f});
  std::vector<double> target = {1.0, 0.0, 0.0, 0.0};
  REQUIRE(fidelity_loss(onehot, target, TaskKind::MultiClass)->value[0] ==
          Catch::Approx(0.0).margin(1e-5));

  auto uniform = ad::constant<float>({4}, {0.25f, 0.25f, 0.25f, 0.25f});
  REQUIRE(fidelity_loss(uniform, target, TaskKind::MultiClass)->value[0] ==
          Catch::Approx(std::log(4.0)).margin(1e-5));

  // multi-label soft targets, scalar BCE oracle per class
  auto probs = ad::constant<float>({2}, {0.8f, 0.3f});
  std::vector<double> soft = {0.8, 0.3};
  auto bce = [](double t, double p) { return -(t * std::log(p) + (1 - t) * std::log(1 - p)); };
  const double expect = bce(0.8, 0.8) + bce(0.3, 0.3);
  REQUIRE(fidelity_loss(probs, soft, TaskKind::MultiLabel)->value[0] ==
          Catch::Approx(expect).margin(1e-5));
  REQUIRE(expect == Catch::Approx(0.5004 + 0.6109).margin(1e-3));
}

TEST_CASE("nmf loss analytic values and cross-module consistency") {
  Rng rng(2);
  Eigen::MatrixXf W(6, 2), H(2, 5);
  for (int i = 0; i < W.size(); ++i) W.data()[i] = static_cast<float>(rng.uniform(0.1, 1.0));
  for (int i = 0; i < H.size(); ++i) H.data()[i] = static_cast<float>(rng.uniform(0.1, 1.0));
  const Eigen::MatrixXf X = W * H;

  auto xc = matrix_tensor<float>(X);
  auto wc = matrix_tensor<float>(W);
  auto h_exact = matrix_tensor<float>(H);
  REQUIRE(nmf_loss(xc, wc, h_exact)->value[0] == Catch::Approx(0.0).margin(1e-8));

  auto h_zero = ad::make_tensor<float>({2, 5});
  REQUIRE(nmf_loss(xc, wc, h_zero)->value[0] ==
          Catch::Approx(X.squaredNorm() / (6.0 * 5.0)).margin(1e-5));

  // residual of an inferred activation matches the loss value
  Dictionary dict;
  dict.atoms = W;
  for (int k = 0; k < 2; ++k) dict.atoms.col(k).normalize();
  NmfConfig cfg;
  cfg.k = 2;
  cfg.mu = 0.05;
  cfg.max_iters = 300;
  cfg.seed = 3;
  const Eigen::MatrixXf h_inf = infer_activations(X, dict, cfg);
  const double direct = (X - dict.atoms * h_inf).squaredNorm() / (6.0 * 5.0);
  auto loss = nmf_loss(xc, matrix_tensor<float>(dict.atoms), matrix_tensor<float>(h_inf));
  REQUIRE(loss->value[0] == Catch::Approx(direct).margin(1e-6));
}

TEST_CASE("nmf loss reports K mismatches with both values") {
  auto xc = ad::make_tensor<float>({4, 3});
  auto wc = ad::make_tensor<float>({4, 2});
  auto h = ad::make_tensor<float>({5, 3});
  try {
    nmf_loss(xc, wc, h);
    FAIL("expected a K mismatch error");
  } catch (const Error& e) {
    const std::string msg = e.what();
    REQUIRE(msg.find('2') != std::string::npos);
    REQUIRE(msg.find('5') != std::string::npos);
  }
}

TEST_CASE("sparsity loss is the mean entry") {
  REQUIRE(sparsity_loss(ad::make_tensor<float>({3, 4}))->value[0] == 0.0f);
  auto ones = ad::constant<float>({2, 3}, std::vector<float>(6, 1.0f));
  REQUIRE(sparsity_loss(ones)->value[0] == Catch::Approx(1.0));
  Rng rng(4);
  std::vector<float> data(12);
  double mean = 0.0;
  for (auto& v : data) {
    v = static_cast<float>(rng.uniform());
    mean += v;
  }
  mean /= 12.0;
  REQUIRE(sparsity_loss(ad::constant<float>({3, 4}, data))->value[0] ==
          Catch::Approx(mean).margin(1e-6));
}

TEST_CASE("post-hoc training leaves the classifier bitwise unchanged") {
  const auto& f = fixture();
  auto model = fixture_model(7);
  std::vector<std::vector<float>> before;
  for (const auto& p : model.classifier.params()) before.push_back(p->value);

  LossWeights w;
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.lr = 1e-3;
  cfg.seed = 5;
  const auto reports = train_posthoc(model, f.dict, f.train, w, cfg);
  REQUIRE(reports.size() == 2);
  const auto params = model.classifier.params();
  for (std::size_t i = 0; i < params.size(); ++i) REQUIRE(params[i]->value == before[i]);
  for (const auto& r : reports) {
    REQUIRE(std::isfinite(r.total));
    REQUIRE(r.total == Catch::Approx(r.l_fid + w.alpha * r.l_nmf + w.beta * r.l_sparse)
                           .margin(1e-6));
  }
}

TEST_CASE("pure distillation reduces the training loss by half") {
  const auto& f = fixture();
  auto model = fixture_model(8);
  TrainConfig ccfg;
  ccfg.epochs = 15;
  ccfg.lr = 3e-3;
  ccfg.seed = 6;
  train_classifier(model.classifier, f.train, ccfg);

  LossWeights w;
  w.alpha = 0.0;
  w.beta = 0.0;
  TrainConfig cfg;
  cfg.epochs = 60;
  cfg.lr = 3e-3;
  cfg.seed = 6;
  const auto reports = train_posthoc(model, f.dict, f.train, w, cfg);
  REQUIRE(reports.back().total <= 0.5 * reports.front().total);
}

TEST_CASE("training is seed deterministic") {
  const auto& f = fixture();
  LossWeights w;
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.lr = 1e-3;
  cfg.seed = 9;
  auto a = fixture_model(10);
  auto b = fixture_model(10);
  const auto ra = train_posthoc(a, f.dict, f.train, w, cfg);
  const auto rb = train_posthoc(b, f.dict, f.train, w, cfg);
  REQUIRE(ra.size() == rb.size());
  for (std::size_t i = 0; i < ra.size(); ++i) {
    REQUIRE(ra[i].total == rb[i].total);
    REQUIRE(ra[i].l_fid == rb[i].l_fid);
  }
}

TEST_CASE("frozen classifier with zero weights gives a constant L_f") {
  const auto& f = fixture();
  auto model = fixture_model(11);
  model.classifier.set_trainable(false);
  std::vector<double> lf_values;
  for (int rep = 0; rep < 3; ++rep) {
    auto out = model.classifier.forward(f.train[0].mel);
    auto lf = classification_loss(out.probs, f.train[0].label, TaskKind::MultiClass);
    lf_values.push_back(lf->value[0]);
    ad::backward(lf);  // no trainable leaf: gradient must not reach parameters
  }
  REQUIRE(lf_values[0] == lf_values[1]);
  REQUIRE(lf_values[1] == lf_values[2]);
  for (const auto& p : model.classifier.params()) {
    for (float g : p->grad) REQUIRE(g == 0.0f);
  }
}

TEST_CASE("by-design training report satisfies the total identity") {
  const auto& f = fixture();
  auto model = fixture_model(12);
  LossWeights w;
  w.alpha = 3.0;
  w.beta = 0.2;
  w.gamma = 1.0;
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.lr = 1e-3;
  cfg.seed = 13;
  cfg.variant = TrainVariant::Bydesign;
  const auto reports = train_bydesign(model, f.dict, f.train, w, cfg);
  for (const auto& r : reports) {
    REQUIRE(std::isfinite(r.total));
    REQUIRE(r.total ==
            Catch::Approx(r.l_f + r.l_fid + w.alpha * r.l_nmf + w.beta * r.l_sparse).margin(1e-6));
  }
}
