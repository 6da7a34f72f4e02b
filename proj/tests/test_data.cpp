#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "l2i/audio/fft.hpp"
#include "l2i/data/synth.hpp"

using namespace l2i;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  REQUIRE(is);
  return std::string(std::istreambuf_iterator<char>(is), {});
}

double band_energy_fraction(const Waveform& w, double lo_hz, double hi_hz) {
  std::size_t n = 1;
  while (n < w.samples.size()) n <<= 1;
  std::vector<std::complex<double>> buf(n, 0.0);
  for (std::size_t i = 0; i < w.samples.size(); ++i) buf[i] = w.samples[i];
  fft_inplace(buf, false);
  double total = 0.0, band = 0.0;
  for (std::size_t i = 0; i <= n / 2; ++i) {
    const double hz = static_cast<double>(i) * w.sample_rate / static_cast<double>(n);
    const double e = std::norm(buf[i]);
    total += e;
    if (hz >= lo_hz && hz <= hi_hz) band += e;
  }
  return total > 0.0 ? band / total : 0.0;
}

SynthSpec tiny_spec(std::uint64_t seed) {
  SynthSpec spec = default_synth_spec();
  spec.per_class = 4;
  spec.duration_s = 0.5;
  spec.sample_rate = 8000;
  spec.seed = seed;
  return spec;
}

}  // namespace

TEST_CASE("generate produces the expected counts and a loadable manifest") {
  const auto dir = fs::temp_directory_path() / "l2i_synth_counts";
  fs::remove_all(dir);
  const Manifest man = generate(tiny_spec(1), dir.string());
  REQUIRE(man.entries.size() == 12);
  REQUIRE(man.num_classes() == 3);
  REQUIRE(man.task_kind == TaskKind::MultiClass);
  REQUIRE(!man.split_entries(Split::Train).empty());
  REQUIRE(!man.split_entries(Split::Test).empty());

  const Manifest reloaded = load_manifest((dir / "manifest.csv").string());
  REQUIRE(reloaded.entries.size() == man.entries.size());
  REQUIRE(reloaded.class_names == man.class_names);
  for (std::size_t i = 0; i < man.entries.size(); ++i) {
    REQUIRE(reloaded.entries[i].labels == man.entries[i].labels);
    REQUIRE(reloaded.entries[i].split == man.entries[i].split);
  }
}

TEST_CASE("generation is byte deterministic under a fixed seed") {
  const auto a = fs::temp_directory_path() / "l2i_synth_det_a";
  const auto b = fs::temp_directory_path() / "l2i_synth_det_b";
  fs::remove_all(a);
  fs::remove_all(b);
  generate(tiny_spec(9), a.string());
  generate(tiny_spec(9), b.string());
  for (const auto& entry : fs::directory_iterator(a)) {
    const auto other = b / entry.path().filename();
    REQUIRE(fs::exists(other));
    REQUIRE(slurp(entry.path()) == slurp(other));
  }
}

TEST_CASE("noiseless tone clips concentrate energy in the tone band") {
  const auto dir = fs::temp_directory_path() / "l2i_synth_tone";
  fs::remove_all(dir);
  SynthSpec spec;
  spec.classes = {{"tone", ToneRecipe{440.0}}, {"noise", NoiseBurstRecipe{1800.0, 3200.0}}};
  spec.per_class = 3;
  spec.duration_s = 0.5;
  spec.sample_rate = 8000;
  spec.seed = 2;
  const Manifest man = generate(spec, dir.string());
  for (const auto& e : man.entries) {
    if (man.class_names[e.labels.at(0)] != "tone") continue;
    const Waveform w = load_wav(e.path);
    REQUIRE(band_energy_fraction(w, 400.0, 480.0) >= 0.99);
  }
}

TEST_CASE("multilabel generation is inferred and supports empty label sets") {
  const auto dir = fs::temp_directory_path() / "l2i_synth_ml";
  fs::remove_all(dir);
  SynthSpec spec = tiny_spec(3);
  spec.multilabel = true;
  spec.per_class = 6;
  const Manifest man = generate(spec, dir.string());
  REQUIRE(man.task_kind == TaskKind::MultiLabel);
  const Manifest reloaded = load_manifest((dir / "manifest.csv").string());
  REQUIRE(reloaded.task_kind == TaskKind::MultiLabel);
}

TEST_CASE("label_vector encodes one-hot and multi-hot targets") {
  Manifest man;
  man.class_names = {"a", "b", "c", "d"};
  man.task_kind = TaskKind::MultiClass;
  ManifestEntry single;
  single.labels = {2};
  REQUIRE(label_vector(single, man) == std::vector<float>{0, 0, 1, 0});

  man.task_kind = TaskKind::MultiLabel;
  ManifestEntry multi;
  multi.labels = {0, 3};
  REQUIRE(label_vector(multi, man) == std::vector<float>{1, 0, 0, 1});
  ManifestEntry empty;
  REQUIRE(label_vector(empty, man) == std::vector<float>{0, 0, 0, 0});
}

TEST_CASE("load_manifest validates split tokens and label arity") {
  const auto dir = fs::temp_directory_path() / "l2i_manifest_bad";
  fs::create_directories(dir);
  {
    std::ofstream os(dir / "w.wav", std::ios::binary);
    Waveform w;
    w.sample_rate = 8000;
    w.samples.assign(256, 0.0f);
    save_wav(w, (dir / "w.wav").string());
  }
  {
    std::ofstream os(dir / "bad_split.csv");
    os << "path,split,labels\nw.wav,valid,a\n";
  }
  REQUIRE_THROWS_AS(load_manifest((dir / "bad_split.csv").string()), Error);
  {
    std::ofstream os(dir / "missing.csv");
    os << "path,split,labels\nnope.wav,train,a\n";
  }
  REQUIRE_THROWS_AS(load_manifest((dir / "missing.csv").string()), Error);
  {
    std::ofstream os(dir / "ok.csv");
    os << "path,split,labels\nw.wav,train,a\nw.wav,test,a;b\n";
  }
  const Manifest man = load_manifest((dir / "ok.csv").string());
  REQUIRE(man.task_kind == TaskKind::MultiLabel);  // a;b row forces multi-label
  REQUIRE(man.class_names == std::vector<std::string>{"a", "b"});
}
