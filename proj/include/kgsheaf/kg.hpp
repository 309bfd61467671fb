// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 kgsheaf contributors

#pragma once

#include "kgsheaf/common.hpp"

#include <algorithm>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace kgsheaf {

struct Triple {
  Index head = 0;
  Index relation = 0;
  Index tail = 0;

  friend bool operator==(const Triple&, const Triple&) = default;
  friend auto operator<=>(const Triple&, const Triple&) = default;
};

struct TripleHash {
  std::size_t operator()(const Triple& t) const noexcept {
    std::size_t h = std::hash<Index>{}(t.head);
    h ^= std::hash<Index>{}(t.relation) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h ^= std::hash<Index>{}(t.tail) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
  }
};

using TripleSet = std::unordered_set<Triple, TripleHash>;

/// Label <-> dense id bijection; ids follow first-occurrence order.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> labels) {
    for (auto& l : labels) add(l);
  }

  Index add(std::string_view label) {
    auto it = ids_.find(std::string(label));
    if (it != ids_.end()) return it->second;
    const Index id = static_cast<Index>(labels_.size());
    labels_.emplace_back(label);
    ids_.emplace(labels_.back(), id);
    return id;
  }

  std::optional<Index> find(std::string_view label) const {
    auto it = ids_.find(std::string(label));
    if (it == ids_.end()) return std::nullopt;
    return it->second;
  }

  const std::string& label(Index id) const {
    if (id < 0 || id >= size()) throw IndexError("vocabulary id out of range: " + std::to_string(id));
    return labels_[static_cast<std::size_t>(id)];
  }

  Index size() const { return static_cast<Index>(labels_.size()); }
  bool empty() const { return labels_.empty(); }
  const std::vector<std::string>& labels() const { return labels_; }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.labels_ == b.labels_; }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, Index> ids_;
};

/// Directed labeled multigraph with deduplicated triples kept in
/// first-occurrence order.
class KnowledgeGraph {
 public:
  KnowledgeGraph() = default;
  KnowledgeGraph(Vocabulary entities, Vocabulary relations)
      : entities_(std::move(entities)), relations_(std::move(relations)) {}

  /// Returns false when the triple was already present.
  bool add(const Triple& t) {
    if (t.head < 0 || t.head >= entities_.size() || t.tail < 0 || t.tail >= entities_.size())
      throw IndexError("triple entity id out of range");
    if (t.relation < 0 || t.relation >= relations_.size())
      throw IndexError("triple relation id out of range");
    if (!index_.insert(t).second) return false;
    triples_.push_back(t);
    return true;
  }

  bool add(std::string_view h, std::string_view r, std::string_view t) {
    return add(Triple{entities_.add(h), relations_.add(r), entities_.add(t)});
  }

  bool contains(const Triple& t) const { return index_.count(t) != 0; }

  const Vocabulary& entities() const { return entities_; }
  const Vocabulary& relations() const { return relations_; }
  Vocabulary& entities() { return entities_; }
  Vocabulary& relations() { return relations_; }
  const std::vector<Triple>& triples() const { return triples_; }
  Index num_entities() const { return entities_.size(); }
  Index num_relations() const { return relations_.size(); }
  Index num_triples() const { return static_cast<Index>(triples_.size()); }

 private:
  Vocabulary entities_;
  Vocabulary relations_;
  std::vector<Triple> triples_;
  TripleSet index_;
};

struct LoadOptions {
  /// Existing vocabularies to reuse (and extend unless frozen).
  const Vocabulary* entities = nullptr;
  const Vocabulary* relations = nullptr;
  bool freeze_entities = false;
  bool freeze_relations = false;
};

namespace detail {

inline std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find('\t', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

}  // namespace detail

/// Reads `head<TAB>relation<TAB>tail` lines. Blank lines and `#` comments
/// are skipped; a trailing CR is tolerated.
inline KnowledgeGraph load_triples(std::istream& in, const LoadOptions& opts = {}) {
  KnowledgeGraph g(opts.entities ? *opts.entities : Vocabulary{},
                   opts.relations ? *opts.relations : Vocabulary{});
  std::string line;
  std::size_t lineno = 0;
  auto resolve = [&](Vocabulary& v, std::string_view label, bool frozen, const char* kind) {
    if (frozen) {
      auto id = v.find(label);
      if (!id)
        throw UnknownSymbolError("line " + std::to_string(lineno) + ": unknown " + kind + " '" +
                                 std::string(label) + "'");
      return *id;
    }
    return v.add(label);
  };
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view(line);
    if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
    if (view.empty() || view.front() == '#') continue;
    const auto fields = detail::split_tabs(view);
    if (fields.size() != 3)
      throw ParseError("line " + std::to_string(lineno) + ": expected 3 tab-separated fields, got " +
                       std::to_string(fields.size()));
    const Index h = resolve(g.entities(), fields[0], opts.freeze_entities, "entity");
    const Index r = resolve(g.relations(), fields[1], opts.freeze_relations, "relation");
    const Index t = resolve(g.entities(), fields[2], opts.freeze_entities, "entity");
    g.add(Triple{h, r, t});
  }
  return g;
}

inline KnowledgeGraph load_triples_string(const std::string& text, const LoadOptions& opts = {}) {
  std::istringstream in(text);
  return load_triples(in, opts);
}

inline void write_triples(std::ostream& out, const KnowledgeGraph& g) {
  for (const auto& t : g.triples())
    out << g.entities().label(t.head) << '\t' << g.relations().label(t.relation) << '\t'
        << g.entities().label(t.tail) << '\n';
}

inline void write_triples(std::ostream& out, const KnowledgeGraph& g, const std::vector<Triple>& ts) {
  for (const auto& t : ts)
    out << g.entities().label(t.head) << '\t' << g.relations().label(t.relation) << '\t'
        << g.entities().label(t.tail) << '\n';
}

/// Two-column `label<TAB>id` export.
inline void write_vocabulary(std::ostream& out, const Vocabulary& v) {
  for (Index i = 0; i < v.size(); ++i) out << v.label(i) << '\t' << i << '\n';
}

inline Vocabulary read_vocabulary(std::istream& in) {
  std::vector<std::pair<Index, std::string>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = detail::split_tabs(line);
    if (fields.size() != 2) throw ParseError("vocabulary line " + std::to_string(lineno) + ": expected 2 fields");
    try {
      rows.emplace_back(std::stoll(std::string(fields[1])), std::string(fields[0]));
    } catch (const std::exception&) {
      throw ParseError("vocabulary line " + std::to_string(lineno) + ": bad id");
    }
  }
  std::sort(rows.begin(), rows.end());
  Vocabulary v;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].first != static_cast<Index>(i)) throw ParseError("vocabulary ids are not dense");
    v.add(rows[i].second);
  }
  if (v.size() != static_cast<Index>(rows.size())) throw ParseError("vocabulary has duplicate labels");
  return v;
}

enum class SplitMode { semi_inductive, inductive };

inline std::string to_string(SplitMode m) { return m == SplitMode::inductive ? "inductive" : "semi_inductive"; }

inline SplitMode parse_split_mode(std::string_view s) {
  if (s == "semi_inductive" || s == "semi-inductive") return SplitMode::semi_inductive;
  if (s == "inductive") return SplitMode::inductive;
  throw UsageError("unknown extension mode '" + std::string(s) + "'");
}

/// Train graph, observed inference graph and estimation triples together
/// with the boundary/interior partition of the inference entities.
struct SplitBundle {
  KnowledgeGraph train;
  KnowledgeGraph inf_obs;
  std::vector<Triple> inf_est;  // ids in inf_obs vocabulary
  SplitMode mode = SplitMode::semi_inductive;
  std::vector<Index> boundary;  // inf_obs entity ids, ascending
  std::vector<Index> interior;  // inf_obs entity ids, ascending
  /// For each inf_obs entity, its id in the train vocabulary or -1.
  std::vector<Index> train_index;
};

inline SplitBundle build_split_bundle(KnowledgeGraph train, KnowledgeGraph inf_obs, std::vector<Triple> inf_est,
                                      SplitMode mode) {
  const auto& tr = train.relations();
  const auto& ir = inf_obs.relations();
  for (Index r = 0; r < ir.size(); ++r) {
    auto id = tr.find(ir.label(r));
    if (!id || *id != r)
      throw SchemaError("relation '" + ir.label(r) +
                        "' of the inference graph does not match the training schema; load the inference graph "
                        "with the training relation vocabulary");
  }
  for (const auto& t : inf_est) {
    if (t.head < 0 || t.head >= inf_obs.num_entities() || t.tail < 0 || t.tail >= inf_obs.num_entities())
      throw CoverageError("estimation triple references an entity outside the observed inference graph");
    if (t.relation < 0 || t.relation >= tr.size())
      throw SchemaError("estimation triple references an unknown relation");
  }
  SplitBundle b;
  b.mode = mode;
  b.train_index.assign(static_cast<std::size_t>(inf_obs.num_entities()), -1);
  for (Index e = 0; e < inf_obs.num_entities(); ++e) {
    auto id = train.entities().find(inf_obs.entities().label(e));
    if (id) b.train_index[static_cast<std::size_t>(e)] = *id;
    if (mode == SplitMode::semi_inductive && id)
      b.boundary.push_back(e);
    else
      b.interior.push_back(e);
  }
  b.train = std::move(train);
  b.inf_obs = std::move(inf_obs);
  b.inf_est = std::move(inf_est);
  return b;
}

/// Per (head, relation): every known tail, used as the ranking filter.
class TailIndex {
 public:
  void add(const Triple& t) { tails_[key(t.head, t.relation)].insert(t.tail); }
  void add_all(const std::vector<Triple>& ts) {
    for (const auto& t : ts) add(t);
  }
  const std::unordered_set<Index>& tails(Index h, Index r) const {
    static const std::unordered_set<Index> empty;
    auto it = tails_.find(key(h, r));
    return it == tails_.end() ? empty : it->second;
  }

 private:
  struct PairHash {
    std::size_t operator()(const std::pair<Index, Index>& p) const noexcept {
      return std::hash<Index>{}(p.first) * 1000003u ^ std::hash<Index>{}(p.second);
    }
  };
  static std::pair<Index, Index> key(Index h, Index r) { return {h, r}; }
  std::unordered_map<std::pair<Index, Index>, std::unordered_set<Index>, PairHash> tails_;
};

}  // namespace kgsheaf
