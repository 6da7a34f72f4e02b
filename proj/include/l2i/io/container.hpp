#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "l2i/core/error.hpp"
#include "l2i/model/models.hpp"
#include "l2i/nmf/nmf.hpp"
#include "l2i/train/train.hpp"

namespace l2i {

// One checkpoint format for dictionaries, classifiers and full interpreter
// models: "L2I1" magic, u32 version, named float32 tensors, then a JSON
// metadata block describing the architecture and role. Little-endian.
struct NamedTensor {
  std::string name;
  std::vector<int> dims;
  std::vector<float> data;
};

struct Container {
  std::vector<NamedTensor> tensors;
  nlohmann::json metadata;

  const NamedTensor& find(const std::string& name) const {
    for (const auto& t : tensors)
      if (t.name == name) return t;
    throw Error("tensor '" + name + "' missing from container");
  }
};

namespace detail {

inline void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

inline std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  require(static_cast<bool>(is), "container truncated");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace detail

constexpr std::uint32_t kContainerVersion = 1;

inline void save_container(const std::string& path, const Container& c) {
  for (std::size_t i = 0; i < c.tensors.size(); ++i)
    for (std::size_t j = i + 1; j < c.tensors.size(); ++j)
      require(c.tensors[i].name != c.tensors[j].name,
              "duplicate tensor name '" + c.tensors[i].name + "'");
  std::ofstream os(path, std::ios::binary);
  require(static_cast<bool>(os), "cannot open '" + path + "' for writing");
  os.write("L2I1", 4);
  detail::put_u32(os, kContainerVersion);
  detail::put_u32(os, static_cast<std::uint32_t>(c.tensors.size()));
  for (const auto& t : c.tensors) {
    detail::put_u32(os, static_cast<std::uint32_t>(t.name.size()));
    os.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
    detail::put_u32(os, static_cast<std::uint32_t>(t.dims.size()));
    std::size_t n = 1;
    for (int d : t.dims) {
      detail::put_u32(os, static_cast<std::uint32_t>(d));
      n *= static_cast<std::size_t>(d);
    }
    require(n == t.data.size(), "tensor '" + t.name + "' data does not match dims");
    os.write(reinterpret_cast<const char*>(t.data.data()),
             static_cast<std::streamsize>(t.data.size() * sizeof(float)));
  }
  const std::string meta = c.metadata.dump();
  detail::put_u32(os, static_cast<std::uint32_t>(meta.size()));
  os.write(meta.data(), static_cast<std::streamsize>(meta.size()));
  require(static_cast<bool>(os), "write failed for '" + path + "'");
}

inline Container load_container(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  require(static_cast<bool>(is), "cannot open '" + path + "'");
  char magic[4];
  is.read(magic, 4);
  require(static_cast<bool>(is) && std::string(magic, 4) == "L2I1",
          "'" + path + "' is not an L2I container");
  const std::uint32_t version = detail::get_u32(is);
  require(version == kContainerVersion,
          "unsupported container version " + std::to_string(version));
  const std::uint32_t count = detail::get_u32(is);
  Container c;
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedTensor t;
    const std::uint32_t name_len = detail::get_u32(is);
    t.name.resize(name_len);
    is.read(t.name.data(), name_len);
    const std::uint32_t rank = detail::get_u32(is);
    std::size_t n = 1;
    for (std::uint32_t d = 0; d < rank; ++d) {
      t.dims.push_back(static_cast<int>(detail::get_u32(is)));
      n *= static_cast<std::size_t>(t.dims.back());
    }
    t.data.resize(n);
    is.read(reinterpret_cast<char*>(t.data.data()),
            static_cast<std::streamsize>(n * sizeof(float)));
    require(static_cast<bool>(is), "container truncated in tensor '" + t.name + "'");
    c.tensors.push_back(std::move(t));
  }
  const std::uint32_t meta_len = detail::get_u32(is);
  std::string meta(meta_len, '\0');
  is.read(meta.data(), meta_len);
  require(static_cast<bool>(is), "container truncated in metadata");
  c.metadata = nlohmann::json::parse(meta);
  return c;
}

// ---- dictionary ----

inline void save_dictionary(const std::string& path, const Dictionary& dict,
                            const FrameParams& fp, int sample_rate,
                            nlohmann::json extra = nlohmann::json::object()) {
  Container c;
  NamedTensor atoms;
  atoms.name = "atoms";
  atoms.dims = {dict.bins(), dict.components()};
  for (int f = 0; f < dict.bins(); ++f)
    for (int k = 0; k < dict.components(); ++k) atoms.data.push_back(dict.atoms(f, k));
  c.tensors.push_back(std::move(atoms));
  c.metadata = {{"role", "dictionary"},
                {"labels", dict.labels},
                {"fft_size", fp.fft_size},
                {"hop", fp.hop},
                {"sample_rate", sample_rate}};
  for (auto& [k, v] : extra.items()) c.metadata[k] = v;
  save_container(path, c);
}

struct LoadedDictionary {
  Dictionary dict;
  FrameParams frame_params;
  int sample_rate = 0;
  nlohmann::json metadata;
};

inline LoadedDictionary load_dictionary(const std::string& path) {
  const Container c = load_container(path);
  require(c.metadata.value("role", "") == "dictionary",
          "'" + path + "' is not a dictionary checkpoint");
  const NamedTensor& atoms = c.find("atoms");
  require(atoms.dims.size() == 2, "dictionary atoms must be rank 2");
  LoadedDictionary out;
  out.dict.atoms.resize(atoms.dims[0], atoms.dims[1]);
  for (int f = 0; f < atoms.dims[0]; ++f)
    for (int k = 0; k < atoms.dims[1]; ++k)
      out.dict.atoms(f, k) = atoms.data[static_cast<std::size_t>(f) * atoms.dims[1] + k];
  out.dict.frozen.assign(atoms.dims[1], false);
  out.dict.labels = c.metadata.value("labels", std::vector<std::string>{});
  out.frame_params.fft_size = c.metadata.at("fft_size").get<int>();
  out.frame_params.hop = c.metadata.at("hop").get<int>();
  out.sample_rate = c.metadata.value("sample_rate", 0);
  out.metadata = c.metadata;
  return out;
}

// ---- parameter <-> tensor plumbing ----

namespace detail {

inline void push_param(Container& c, const std::string& name, const ad::TensorPtr<float>& p) {
  NamedTensor t;
  t.name = name;
  t.dims = p->shape;
  t.data = p->value;
  c.tensors.push_back(std::move(t));
}

inline void pull_param(const Container& c, const std::string& name, ad::TensorPtr<float>& p) {
  const NamedTensor& t = c.find(name);
  require(t.dims == p->shape, "tensor '" + name + "' has unexpected shape");
  p->value = t.data;
}

template <typename F>
void visit_classifier(TappedClassifier<float>& m, const F& f) {
  for (std::size_t i = 0; i < m.blocks.size(); ++i) {
    const std::string p = "clf.block" + std::to_string(i) + ".";
    f(p + "w1", m.blocks[i].w1);
    f(p + "b1", m.blocks[i].b1);
    f(p + "w2", m.blocks[i].w2);
    f(p + "b2", m.blocks[i].b2);
  }
  f("clf.head_w", m.head_w);
  f("clf.head_b", m.head_b);
}

template <typename F>
void visit_interpreter(InterpreterModel<float>& m, const F& f) {
  visit_classifier(m.classifier, f);
  for (std::size_t i = 0; i < m.psi.adapters.size(); ++i)
    f("psi.adapter" + std::to_string(i), m.psi.adapters[i]);
  for (std::size_t i = 0; i < m.psi.reducers.size(); ++i)
    for (std::size_t j = 0; j < m.psi.reducers[i].size(); ++j)
      f("psi.reduce" + std::to_string(i) + "_" + std::to_string(j), m.psi.reducers[i][j]);
  f("psi.fuse_w", m.psi.fuse_w);
  f("psi.out_w", m.psi.out_w);
  if (!m.theta.cfg.max_pooling) {
    f("theta.att_w1", m.theta.att_w1);
    f("theta.att_b1", m.theta.att_b1);
    f("theta.att_w2", m.theta.att_w2);
    f("theta.att_b2", m.theta.att_b2);
  }
  f("theta.class_w", m.theta.class_w);
  f("theta.class_b", m.theta.class_b);
}

inline nlohmann::json classifier_meta(const ClassifierConfig& cfg) {
  return {{"mel_bands", cfg.mel_bands},
          {"channels", cfg.channels},
          {"num_classes", cfg.num_classes},
          {"task_kind", cfg.task_kind == TaskKind::MultiClass ? "multi-class" : "multi-label"},
          {"tap_indices", cfg.tap_indices}};
}

inline ClassifierConfig classifier_config_from(const nlohmann::json& j) {
  ClassifierConfig cfg;
  cfg.mel_bands = j.at("mel_bands").get<int>();
  cfg.channels = j.at("channels").get<std::vector<int>>();
  cfg.num_classes = j.at("num_classes").get<int>();
  cfg.task_kind =
      j.at("task_kind").get<std::string>() == "multi-label" ? TaskKind::MultiLabel : TaskKind::MultiClass;
  cfg.tap_indices = j.at("tap_indices").get<std::vector<int>>();
  return cfg;
}

inline nlohmann::json pipeline_meta(const FeaturePipeline& p, int sample_rate) {
  return {{"fft_size", p.frame_params.fft_size},
          {"hop", p.frame_params.hop},
          {"mel_bands", p.mel_bands},
          {"sample_rate", sample_rate}};
}

}  // namespace detail

// ---- classifier ----

inline void save_classifier(const std::string& path, TappedClassifier<float>& clf,
                            const FeaturePipeline& pipeline, int sample_rate,
                            const std::vector<std::string>& class_names) {
  Container c;
  detail::visit_classifier(clf, [&](const std::string& n, ad::TensorPtr<float>& p) {
    detail::push_param(c, n, p);
  });
  c.metadata = {{"role", "classifier"},
                {"classifier", detail::classifier_meta(clf.cfg)},
                {"pipeline", detail::pipeline_meta(pipeline, sample_rate)},
                {"class_names", class_names}};
  save_container(path, c);
}

struct LoadedClassifier {
  TappedClassifier<float> classifier;
  FeaturePipeline pipeline;
  int sample_rate = 0;
  std::vector<std::string> class_names;
};

inline FeaturePipeline pipeline_from(const nlohmann::json& j, int& sample_rate) {
  FeaturePipeline p;
  p.frame_params.fft_size = j.at("fft_size").get<int>();
  p.frame_params.hop = j.at("hop").get<int>();
  p.mel_bands = j.at("mel_bands").get<int>();
  sample_rate = j.at("sample_rate").get<int>();
  return p;
}

inline LoadedClassifier load_classifier(const std::string& path) {
  const Container c = load_container(path);
  require(c.metadata.value("role", "") == "classifier",
          "'" + path + "' is not a classifier checkpoint");
  LoadedClassifier out;
  Rng rng(0);
  out.classifier =
      TappedClassifier<float>::init(detail::classifier_config_from(c.metadata.at("classifier")), rng);
  detail::visit_classifier(out.classifier, [&](const std::string& n, ad::TensorPtr<float>& p) {
    detail::pull_param(c, n, p);
  });
  out.pipeline = pipeline_from(c.metadata.at("pipeline"), out.sample_rate);
  out.class_names = c.metadata.at("class_names").get<std::vector<std::string>>();
  return out;
}

// ---- full interpreter model (post-hoc or by-design) ----

inline void save_interpreter(const std::string& path, InterpreterModel<float>& model,
                             const FeaturePipeline& pipeline, int sample_rate,
                             const std::vector<std::string>& class_names,
                             const std::string& regime) {
  Container c;
  detail::visit_interpreter(model, [&](const std::string& n, ad::TensorPtr<float>& p) {
    detail::push_param(c, n, p);
  });
  c.metadata = {{"role", "interpreter"},
                {"regime", regime},
                {"classifier", detail::classifier_meta(model.classifier.cfg)},
                {"psi",
                 {{"components", model.psi.cfg.components},
                  {"adapter_channels", model.psi.cfg.adapter_channels},
                  {"fusion_channels", model.psi.cfg.fusion_channels}}},
                {"theta",
                 {{"attention_hidden", model.theta.cfg.attention_hidden},
                  {"max_pooling", model.theta.cfg.max_pooling}}},
                {"pipeline", detail::pipeline_meta(pipeline, sample_rate)},
                {"class_names", class_names}};
  save_container(path, c);
}

struct LoadedInterpreter {
  InterpreterModel<float> model;
  FeaturePipeline pipeline;
  int sample_rate = 0;
  std::vector<std::string> class_names;
  std::string regime;
};

inline LoadedInterpreter load_interpreter(const std::string& path) {
  const Container c = load_container(path);
  require(c.metadata.value("role", "") == "interpreter",
          "'" + path + "' is not an interpreter checkpoint");
  LoadedInterpreter out;
  const ClassifierConfig ccfg = detail::classifier_config_from(c.metadata.at("classifier"));
  PsiConfig pcfg;
  pcfg.components = c.metadata.at("psi").at("components").get<int>();
  pcfg.adapter_channels = c.metadata.at("psi").at("adapter_channels").get<int>();
  pcfg.fusion_channels = c.metadata.at("psi").at("fusion_channels").get<int>();
  ThetaConfig tcfg;
  tcfg.components = pcfg.components;
  tcfg.num_classes = ccfg.num_classes;
  tcfg.attention_hidden = c.metadata.at("theta").at("attention_hidden").get<int>();
  tcfg.max_pooling = c.metadata.at("theta").at("max_pooling").get<bool>();
  tcfg.task_kind = ccfg.task_kind;
  Rng rng(0);
  out.model = init_interpreter_model<float>(ccfg, pcfg, tcfg, rng);
  detail::visit_interpreter(out.model, [&](const std::string& n, ad::TensorPtr<float>& p) {
    detail::pull_param(c, n, p);
  });
  out.pipeline = pipeline_from(c.metadata.at("pipeline"), out.sample_rate);
  out.class_names = c.metadata.at("class_names").get<std::vector<std::string>>();
  out.regime = c.metadata.value("regime", "");
  return out;
}

}  // namespace l2i
