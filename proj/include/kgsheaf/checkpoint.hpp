// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 kgsheaf contributors

#pragma once

#include "kgsheaf/kg.hpp"
#include "kgsheaf/model.hpp"

#include <bit>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <vector>

namespace kgsheaf {

namespace fs = std::filesystem;

inline constexpr int kCheckpointFormat = 1;

/// Parameters plus the vocabularies that give their rows meaning.
struct Checkpoint {
  ModelParams params;
  Vocabulary entities;
  Vocabulary relations;
  nlohmann::json meta = nlohmann::json::object();
};

inline void write_table(const fs::path& path, const Table& t) {
  static_assert(std::endian::native == std::endian::little, "checkpoint tensors are little-endian float64");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(t.data()), static_cast<std::streamsize>(t.size() * sizeof(double)));
  if (!out) throw Error("short write to " + path.string());
}

inline Table read_table(const fs::path& path, Index rows, Index cols) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  Table t(rows, cols);
  const auto bytes = static_cast<std::streamsize>(t.size() * sizeof(double));
  in.read(reinterpret_cast<char*>(t.data()), bytes);
  if (in.gcount() != bytes || in.peek() != std::char_traits<char>::eof())
    throw ParseError(path.string() + ": expected " + std::to_string(bytes) + " bytes");
  return t;
}

/// Next unused `vNNN` directory below `root`; existing versions are never
/// touched.
inline fs::path next_version_dir(const fs::path& root) {
  fs::create_directories(root);
  int next = 1;
  for (const auto& entry : fs::directory_iterator(root)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_directory() && name.size() > 1 && name[0] == 'v' &&
        name.find_first_not_of("0123456789", 1) == std::string::npos)
      next = std::max(next, std::stoi(name.substr(1)) + 1);
  }
  for (;; ++next) {
    std::ostringstream name;
    name << 'v' << std::setw(3) << std::setfill('0') << next;
    const fs::path dir = root / name.str();
    if (fs::create_directory(dir)) return dir;
  }
}

/// Most recent `vNNN` directory below `root`, or `root` itself when it
/// already holds a checkpoint.
inline fs::path resolve_checkpoint_dir(const fs::path& root) {
  if (fs::exists(root / "meta.json")) return root;
  if (!fs::is_directory(root)) throw ParseError("no checkpoint at " + root.string());
  fs::path best;
  for (const auto& entry : fs::directory_iterator(root))
    if (entry.is_directory() && fs::exists(entry.path() / "meta.json") &&
        (best.empty() || entry.path().filename() > best.filename()))
      best = entry.path();
  if (best.empty()) throw ParseError("no checkpoint at " + root.string());
  return best;
}

/// Writes a new version directory holding meta.json, one raw float64 file
/// per tensor (row-major), entities.tsv and relations.tsv.
inline fs::path save_checkpoint(const fs::path& root, const Checkpoint& ck) {
  const fs::path dir = next_version_dir(root);
  const auto& p = ck.params;
  nlohmann::json meta = ck.meta;
  meta["format_version"] = kCheckpointFormat;
  meta["family"] = to_string(p.family);
  meta["dim"] = p.dim;
  meta["num_entities"] = p.entities.rows();
  meta["num_relations"] = p.num_relations();
  nlohmann::json tensors = nlohmann::json::array();
  for (const auto& [name, table] : p.tensors()) {
    const std::string file = name + ".f64";
    write_table(dir / file, *table);
    tensors.push_back({{"name", name}, {"file", file}, {"rows", table->rows()}, {"cols", table->cols()}});
  }
  meta["tensors"] = tensors;
  {
    std::ofstream out(dir / "entities.tsv");
    write_vocabulary(out, ck.entities);
  }
  {
    std::ofstream out(dir / "relations.tsv");
    write_vocabulary(out, ck.relations);
  }
  std::ofstream(dir / "meta.json") << meta.dump(2) << '\n';
  return dir;
}

inline Checkpoint load_checkpoint(const fs::path& where) {
  const fs::path dir = resolve_checkpoint_dir(where);
  Checkpoint ck;
  try {
    std::ifstream in(dir / "meta.json");
    ck.meta = nlohmann::json::parse(in);
    if (ck.meta.at("format_version").get<int>() != kCheckpointFormat)
      throw ParseError("unsupported checkpoint format in " + dir.string());
    auto& p = ck.params;
    p.family = parse_model_family(ck.meta.at("family").get<std::string>());
    p.dim = ck.meta.at("dim").get<Index>();
    for (const auto& t : ck.meta.at("tensors")) {
      const auto name = t.at("name").get<std::string>();
      Table* slot = p.tensor(name);
      if (!slot) throw ParseError("unknown tensor '" + name + "' in " + dir.string());
      *slot = read_table(dir / t.at("file").get<std::string>(), t.at("rows").get<Index>(), t.at("cols").get<Index>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(dir.string() + "/meta.json: " + e.what());
  }
  {
    std::ifstream in(dir / "entities.tsv");
    ck.entities = read_vocabulary(in);
  }
  {
    std::ifstream in(dir / "relations.tsv");
    ck.relations = read_vocabulary(in);
  }
  if (ck.entities.size() != ck.params.entities.rows())
    throw ParseError("entity vocabulary and entity table disagree in " + dir.string());
  ck.meta["path"] = dir.string();
  return ck;
}

inline void write_loss_csv(std::ostream& out, const std::vector<double>& epoch_loss) {
  out << "epoch,mean_loss\n";
  out.precision(17);
  for (std::size_t e = 0; e < epoch_loss.size(); ++e) out << e + 1 << ',' << epoch_loss[e] << '\n';
}

}  // namespace kgsheaf
