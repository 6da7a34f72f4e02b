#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "l2i/core/error.hpp"

namespace l2i {

enum class TaskKind { MultiClass, MultiLabel };

enum class Split { Train, Test };

struct ManifestEntry {
  std::string path;  // absolute, resolved against the manifest directory
  Split split = Split::Train;
  std::vector<int> labels;  // class indices
};

struct Manifest {
  std::vector<ManifestEntry> entries;
  std::vector<std::string> class_names;  // index -> name, first-appearance order
  TaskKind task_kind = TaskKind::MultiClass;

  int num_classes() const { return static_cast<int>(class_names.size()); }

  std::vector<const ManifestEntry*> split_entries(Split s) const {
    std::vector<const ManifestEntry*> out;
    for (const auto& e : entries)
      if (e.split == s) out.push_back(&e);
    return out;
  }
};

// CSV with header "path,split,labels"; labels are semicolon-separated class
// names, empty meaning an all-negative sample. Task kind is inferred: any row
// without exactly one label makes the dataset multi-label.
inline Manifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open manifest: " + path);
  const auto base = std::filesystem::path(path).parent_path();

  Manifest m;
  std::map<std::string, int> class_index;
  std::string line;
  std::getline(in, line);  // header
  bool any_non_single = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::stringstream ss(line);
    std::string file, split_tok, labels_tok;
    std::getline(ss, file, ',');
    std::getline(ss, split_tok, ',');
    std::getline(ss, labels_tok);

    ManifestEntry e;
    std::filesystem::path p(file);
    e.path = p.is_absolute() ? p.string() : (base / p).string();
    require(std::filesystem::exists(e.path), "manifest references missing file: " + e.path);
    if (split_tok == "train") e.split = Split::Train;
    else if (split_tok == "test") e.split = Split::Test;
    else throw Error("unknown split token '" + split_tok + "' in manifest");

    std::stringstream ls(labels_tok);
    std::string name;
    while (std::getline(ls, name, ';')) {
      if (name.empty()) continue;
      auto [it, inserted] = class_index.try_emplace(name, static_cast<int>(m.class_names.size()));
      if (inserted) m.class_names.push_back(name);
      e.labels.push_back(it->second);
    }
    if (e.labels.size() != 1) any_non_single = true;
    m.entries.push_back(std::move(e));
  }
  require(!m.entries.empty(), "manifest is empty");
  m.task_kind = any_non_single ? TaskKind::MultiLabel : TaskKind::MultiClass;
  return m;
}

// One-hot (multi-class) or multi-hot (multi-label) encoding.
inline std::vector<float> label_vector(const ManifestEntry& entry, const Manifest& manifest) {
  std::vector<float> y(manifest.num_classes(), 0.0f);
  if (manifest.task_kind == TaskKind::MultiClass) {
    require(entry.labels.size() == 1, "multi-class entry must have exactly one label");
  }
  for (int c : entry.labels) y[static_cast<std::size_t>(c)] = 1.0f;
  return y;
}

}  // namespace l2i
