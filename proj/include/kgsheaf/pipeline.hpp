// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 kgsheaf contributors

#pragma once

#include "kgsheaf/checkpoint.hpp"
#include "kgsheaf/config.hpp"
#include "kgsheaf/eval.hpp"
#include "kgsheaf/harmonic.hpp"
#include "kgsheaf/queries.hpp"
#include "kgsheaf/train.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <nlohmann/json.hpp>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace kgsheaf {

inline TrainConfig train_config_from(const RunConfig& c) {
  TrainConfig t;
  t.loss = parse_loss_kind(c.get<std::string>("model.loss"));
  t.lr = c.get<double>("model.lr");
  t.epochs = c.get<Index>("model.epochs");
  t.batch_size = c.get<Index>("model.batch");
  t.num_negs_per_pos = c.get<Index>("model.negatives");
  t.margin = c.get<double>("model.margin");
  t.adversarial_temperature = c.get<double>("model.temperature");
  t.seed = c.get<std::uint64_t>("seed");
  t.score_exponent = c.get<int>("model.p");
  t.corruption = parse_corruption_mode(c.get<std::string>("model.corruption"));
  t.validate();
  return t;
}

inline ExtensionOptions extension_options_from(const RunConfig& c) {
  ExtensionOptions o;
  o.alpha = c.get<double>("extension.alpha");
  o.max_iters = c.get<Index>("extension.max_iters");
  o.tol = c.get<double>("extension.tol");
  o.frame = c.get<bool>("extension.normalized") ? Frame::normalized : Frame::raw;
  if (o.max_iters < 0) throw UsageError("extension.max_iters must be >= 0");
  if (!(o.alpha > 0.0 && o.alpha <= 1.0)) throw UsageError("extension.alpha must lie in (0, 1]");
  return o;
}

inline KnowledgeGraph load_graph_file(const std::string& path, const LoadOptions& opts = {}) {
  std::ifstream in(path);
  if (!in) throw FileError("cannot open " + path);
  try {
    return load_triples(in, opts);
  } catch (const Error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

/// Observed inference graph over the checkpoint's relation schema.
inline KnowledgeGraph load_inference_graph(const std::string& path, const Vocabulary& relations) {
  LoadOptions o;
  o.relations = &relations;
  o.freeze_relations = true;
  std::ifstream in(path);
  if (!in) throw FileError("cannot open " + path);
  try {
    return load_triples(in, o);
  } catch (const UnknownSymbolError& e) {
    throw SchemaError(path + ": " + e.what());
  }
}

/// Estimation triples expressed in the ids of an existing graph.
inline std::vector<Triple> load_estimation_triples(const std::string& path, const KnowledgeGraph& over) {
  LoadOptions o;
  o.entities = &over.entities();
  o.relations = &over.relations();
  o.freeze_entities = o.freeze_relations = true;
  std::ifstream in(path);
  if (!in) throw FileError("cannot open " + path);
  try {
    return load_triples(in, o).triples();
  } catch (const UnknownSymbolError& e) {
    throw CoverageError(path + ": " + e.what());
  }
}

/// JSON Lines queries. Anchors, relations and answers may be integer ids
/// or labels resolved against the given vocabularies.
inline std::vector<QueryInstance> load_labeled_queries(const std::string& path, const Vocabulary& entities,
                                                       const Vocabulary& relations) {
  std::ifstream in(path);
  if (!in) throw FileError("cannot open " + path);
  auto resolve = [&](const nlohmann::json& v, const Vocabulary& vocab, const char* kind) -> Index {
    if (v.is_number_integer()) return v.get<Index>();
    auto id = vocab.find(v.get<std::string>());
    if (!id) throw CoverageError(path + ": unknown " + std::string(kind) + " '" + v.get<std::string>() + "'");
    return *id;
  };
  std::vector<QueryInstance> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = nlohmann::json::parse(line);
      for (const char* key : {"anchors", "easy_answers", "hard_answers"})
        if (j.contains(key))
          for (auto& v : j[key]) v = resolve(v, entities, "entity");
      for (auto& v : j.at("relations")) v = resolve(v, relations, "relation");
      out.push_back(parse_query_instance(j));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

inline void write_labeled_queries(std::ostream& out, const std::vector<QueryInstance>& qs, const Vocabulary& entities,
                                  const Vocabulary& relations) {
  auto labels = [](const std::vector<Index>& ids, const Vocabulary& v) {
    std::vector<std::string> l;
    for (Index i : ids) l.push_back(v.label(i));
    return l;
  };
  for (const auto& q : qs)
    out << nlohmann::json{{"shape", to_string(q.graph.shape)},
                          {"anchors", labels(q.graph.anchors, entities)},
                          {"relations", labels(q.graph.relations, relations)},
                          {"easy_answers", labels(q.easy_answers, entities)},
                          {"hard_answers", labels(q.hard_answers, entities)}}
               .dump()
        << '\n';
}

// ---- train -----------------------------------------------------------------

struct TrainOutcome {
  Checkpoint checkpoint;
  std::vector<double> epoch_loss;
  std::filesystem::path dir;
};

inline TrainOutcome train_model(const KnowledgeGraph& g, const RunConfig& c, std::ostream* log = nullptr) {
  const TrainConfig tc = train_config_from(c);
  const auto family = parse_model_family(c.get<std::string>("model.family"));
  const Index every = std::max<Index>(1, tc.epochs / 10);
  auto res = train(g, family, c.get<Index>("model.dim"), tc, [&](Index e, double loss) {
    if (log && (e % every == 0 || e == tc.epochs)) *log << "epoch " << e << " loss " << loss << '\n';
  });
  TrainOutcome out;
  out.checkpoint.params = std::move(res.params);
  out.checkpoint.entities = g.entities();
  out.checkpoint.relations = g.relations();
  out.checkpoint.meta = {{"kind", "model"}, {"config", c.echo()}, {"seed", tc.seed}};
  out.epoch_loss = std::move(res.epoch_loss);
  return out;
}

/// Trains on paths.train and writes `<out>/checkpoints/vNNN` with loss.csv.
inline TrainOutcome run_train(const RunConfig& c, std::ostream* log = nullptr) {
  c.check_paths({"paths.train"});
  const auto g = load_graph_file(c.path("paths.train"));
  auto out = train_model(g, c, log);
  out.dir = save_checkpoint(std::filesystem::path(c.path("paths.out")) / "checkpoints", out.checkpoint);
  std::ofstream csv(out.dir / "loss.csv");
  write_loss_csv(csv, out.epoch_loss);
  return out;
}

// ---- extend ----------------------------------------------------------------

struct ExtendOutcome {
  Checkpoint embeddings;  // entity rows in inference-graph order
  SplitBundle split;
  ExtensionResult result;
  std::filesystem::path dir;
};

/// Harmonic extension of a trained model onto an observed inference graph.
inline ExtendOutcome extend_model(const Checkpoint& model, KnowledgeGraph inf_obs, std::vector<Triple> inf_est,
                                  const RunConfig& c) {
  const auto mode = parse_split_mode(c.get<std::string>("extension.mode"));
  const auto opts = extension_options_from(c);
  const auto method = c.get<std::string>("extension.method");
  if (method != "iterative" && method != "closed_form")
    throw UsageError("extension.method must be iterative or closed_form");
  const auto init = parse_init_distribution(c.get<std::string>("extension.init"));

  ExtendOutcome out;
  out.split = build_split_bundle(KnowledgeGraph(model.entities, model.relations), std::move(inf_obs),
                                 std::move(inf_est), mode);
  const auto& s = out.split;
  const Index d = model.params.dim;
  const RelationSet reps = to_sheaf_form(model.params);
  const SheafSystem sys = build_sheaf_system(s.inf_obs, reps);

  ExtensionProblem prob;
  prob.system = &sys;
  prob.boundary = s.boundary;
  prob.interior = s.interior;
  prob.options = opts;
  prob.x_boundary.resize(static_cast<Index>(s.boundary.size()), d);
  for (std::size_t k = 0; k < s.boundary.size(); ++k)
    prob.x_boundary.row(static_cast<Index>(k)) =
        model.params.entities.row(s.train_index[static_cast<std::size_t>(s.boundary[k])]);
  prob.x_interior_init = init_unknown(static_cast<Index>(s.interior.size()), d, init, c.get<std::uint64_t>("seed"));

  if (method == "closed_form") {
    out.result.x = extend_closed_form(prob);
    out.result.converged = true;
  } else {
    out.result = extend_iterative(prob);
  }
  out.embeddings.params = model.params;
  out.embeddings.params.entities = out.result.x;
  out.embeddings.entities = s.inf_obs.entities();
  out.embeddings.relations = model.relations;
  out.embeddings.meta = {{"kind", "embeddings"},
                         {"source", model.meta.value("path", "")},
                         {"mode", to_string(mode)},
                         {"boundary", s.boundary.size()},
                         {"interior", s.interior.size()},
                         {"iterations", out.result.iterations},
                         {"converged", out.result.converged},
                         {"config", c.echo()}};
  return out;
}

inline ExtendOutcome run_extend(const RunConfig& c, const Checkpoint* model = nullptr) {
  c.check_paths({"paths.inf_obs"});
  Checkpoint loaded;
  if (!model) {
    if (!c.has_path("paths.checkpoint")) throw UsageError("extend needs paths.checkpoint");
    loaded = load_checkpoint(c.path("paths.checkpoint"));
    model = &loaded;
  }
  auto inf_obs = load_inference_graph(c.path("paths.inf_obs"), model->relations);
  auto out = extend_model(*model, std::move(inf_obs), {}, c);
  out.dir = save_checkpoint(std::filesystem::path(c.path("paths.out")) / "embeddings", out.embeddings);
  std::ofstream csv(out.dir / "convergence.csv");
  write_diagnostics_csv(csv, out.result.trace);
  return out;
}

// ---- reports ---------------------------------------------------------------

struct Report {
  nlohmann::json json;
  std::string csv_header;
  std::string csv_row;
};

inline Report make_report(const RunConfig& c, const std::string& split, const Metrics& m, double wall_time,
                          const nlohmann::json& extra = nlohmann::json::object()) {
  Report r;
  r.json = {{"model", c.get<std::string>("model.family")},
            {"split", split},
            {"mode", c.get<std::string>("extension.mode")},
            {"metrics", to_json(m)},
            {"config", c.echo()},
            {"seed", c.get<std::uint64_t>("seed")},
            {"wall_time", wall_time}};
  for (const auto& [k, v] : extra.items()) r.json[k] = v;
  std::ostringstream h, row;
  row.precision(17);
  h << "model,split,mode,seed,count";
  row << r.json["model"].get<std::string>() << ',' << split << ',' << r.json["mode"].get<std::string>() << ','
      << r.json["seed"] << ',' << m.count;
  for (const auto& [k, v] : m.hits) {
    h << ",hits@" << k;
    row << ',' << v;
  }
  h << ",mrr,wall_time";
  row << ',' << m.mrr << ',' << wall_time;
  r.csv_header = h.str();
  r.csv_row = row.str();
  return r;
}

inline std::filesystem::path write_report(const RunConfig& c, const std::string& command, const Report& r) {
  const auto dir = next_version_dir(std::filesystem::path(c.path("paths.out")) / command);
  std::ofstream(dir / "report.json") << r.json.dump(2) << '\n';
  std::ofstream(dir / "report.csv") << r.csv_header << '\n' << r.csv_row << '\n';
  return dir;
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline KgcOptions kgc_options_from(const RunConfig& c) {
  KgcOptions o;
  o.ks = c.get<std::vector<int>>("eval.ks");
  o.head_side = c.get<bool>("eval.head_side");
  o.score_exponent = c.get<int>("model.p");
  return o;
}

// ---- complete --------------------------------------------------------------

/// Embeddings for the configured inference graph: loaded from
/// paths.embeddings, or extended inline from paths.checkpoint.
inline Checkpoint obtain_embeddings(const RunConfig& c, bool extend_inline) {
  if (extend_inline) {
    if (!c.has_path("paths.checkpoint")) throw UsageError("inline extension needs paths.checkpoint");
    const auto model = load_checkpoint(c.path("paths.checkpoint"));
    auto inf_obs = load_inference_graph(c.path("paths.inf_obs"), model.relations);
    return extend_model(model, std::move(inf_obs), {}, c).embeddings;
  }
  if (!c.has_path("paths.embeddings"))
    throw UsageError("needs paths.embeddings (or extend inline from paths.checkpoint)");
  auto e = load_checkpoint(c.path("paths.embeddings"));
  if (e.meta.value("kind", "") != "embeddings")
    throw UsageError(c.path("paths.embeddings") + " holds a trained model, not extended embeddings; run extend first");
  return e;
}

inline Report evaluate_completion(const Checkpoint& emb, const std::vector<Triple>& known,
                                  const std::vector<Triple>& est, const RunConfig& c, const std::string& split,
                                  std::chrono::steady_clock::time_point t0) {
  const auto res = evaluate_kgc(to_sheaf_form(emb.params), emb.params.entities, est, known, kgc_options_from(c));
  return make_report(c, split, res.metrics, seconds_since(t0));
}

inline Report run_complete(const RunConfig& c, bool extend_inline = false) {
  const auto t0 = std::chrono::steady_clock::now();
  c.check_paths({"paths.inf_obs", "paths.inf_est"});
  const auto emb = obtain_embeddings(c, extend_inline);
  KnowledgeGraph obs = load_graph_file(c.path("paths.inf_obs"),
                                       {&emb.entities, &emb.relations, true, true});
  const auto est = load_estimation_triples(c.path("paths.inf_est"), obs);
  return evaluate_completion(emb, obs.triples(), est, c, "test", t0);
}

// ---- query -----------------------------------------------------------------

struct QueryOutcome {
  Report overall;
  std::map<std::string, Metrics> per_shape;
  std::vector<std::vector<RankRecord>> ranks;  // per query, per hard answer
};

inline QueryOutcome evaluate_queries(const Checkpoint& emb, const std::vector<QueryInstance>& qs, const RunConfig& c,
                                     const std::string& split, std::chrono::steady_clock::time_point t0) {
  if (qs.empty()) throw UsageError("no queries to evaluate");
  const RelationSet reps = to_sheaf_form(emb.params);
  const Frame f = c.get<bool>("extension.normalized") ? Frame::normalized : Frame::raw;
  const auto ks = c.get<std::vector<int>>("eval.ks");
  QueryOutcome out;
  std::map<std::string, std::vector<RankRecord>> by_shape;
  std::vector<RankRecord> all;
  for (std::size_t i = 0; i < qs.size(); ++i) {
    auto recs = answer_query(qs[i], reps, emb.params.entities, static_cast<Index>(i), f);
    auto& bucket = by_shape[to_string(qs[i].graph.shape)];
    bucket.insert(bucket.end(), recs.begin(), recs.end());
    all.insert(all.end(), recs.begin(), recs.end());
    out.ranks.push_back(std::move(recs));
  }
  nlohmann::json shapes = nlohmann::json::object();
  for (const auto& [shape, recs] : by_shape) {
    out.per_shape[shape] = metrics(recs, ks);
    shapes[shape] = to_json(out.per_shape[shape]);
  }
  out.overall = make_report(c, split, metrics(all, ks), seconds_since(t0), {{"shapes", shapes}});
  return out;
}

inline QueryOutcome run_query(const RunConfig& c, bool extend_inline = false) {
  const auto t0 = std::chrono::steady_clock::now();
  c.check_paths({"paths.queries"});
  const auto emb = obtain_embeddings(c, extend_inline);
  const auto qs = load_labeled_queries(c.path("paths.queries"), emb.entities, emb.relations);
  return evaluate_queries(emb, qs, c, "test", t0);
}

inline void write_answer_dump(std::ostream& out, const QueryOutcome& q) {
  for (std::size_t i = 0; i < q.ranks.size(); ++i)
    for (const auto& r : q.ranks[i])
      out << nlohmann::json{{"query_index", i}, {"hard_answer", r.entity}, {"filtered_rank", r.rank}}.dump() << '\n';
}

// ---- info ------------------------------------------------------------------

inline nlohmann::json describe_path(const std::string& path) {
  namespace fs = std::filesystem;
  if (!fs::exists(path)) throw FileError("no such file '" + path + "'");
  if (fs::is_directory(path)) {
    const auto ck = load_checkpoint(path);
    nlohmann::json j = {{"path", ck.meta.value("path", path)},
                        {"kind", ck.meta.value("kind", "model")},
                        {"family", to_string(ck.params.family)},
                        {"dim", ck.params.dim},
                        {"entities", ck.entities.size()},
                        {"relations", ck.relations.size()}};
    for (const char* k : {"boundary", "interior", "iterations", "converged", "mode"})
      if (ck.meta.contains(k)) j[k] = ck.meta[k];
    return j;
  }
  const auto g = load_graph_file(path);
  return {{"path", path}, {"entities", g.num_entities()}, {"relations", g.num_relations()}, {"triples", g.num_triples()}};
}

// ---- grid ------------------------------------------------------------------

struct GridTrial {
  RunConfig config;
  Metrics validation;
  std::optional<Metrics> test;
};

struct GridOutcome {
  std::vector<std::string> keys;
  std::vector<GridTrial> trials;
  std::size_t best = 0;
  std::filesystem::path dir;
};

namespace detail {

struct ValidationSplit {
  KnowledgeGraph train;
  KnowledgeGraph obs;
  std::vector<Triple> est;
  std::vector<QueryInstance> queries;
};

/// Validation data from paths.valid_*, or a seeded uniform hold-out of
/// eval.holdout_fraction of the training triples.
inline ValidationSplit validation_split(const RunConfig& c) {
  ValidationSplit v;
  const auto full = load_graph_file(c.path("paths.train"));
  if (c.has_path("paths.valid_obs")) {
    v.train = full;
    v.obs = load_inference_graph(c.path("paths.valid_obs"), full.relations());
    if (c.has_path("paths.valid_est")) v.est = load_estimation_triples(c.path("paths.valid_est"), v.obs);
    return v;
  }
  const double frac = c.get<double>("eval.holdout_fraction");
  if (!(frac > 0.0 && frac < 1.0)) throw UsageError("eval.holdout_fraction must lie in (0, 1)");
  std::vector<Triple> ts = full.triples();
  std::mt19937_64 rng(c.get<std::uint64_t>("seed") ^ 0x9e3779b97f4a7c15ULL);
  std::shuffle(ts.begin(), ts.end(), rng);
  const auto n_hold = static_cast<std::size_t>(std::ceil(frac * static_cast<double>(ts.size())));
  if (n_hold == 0 || n_hold >= ts.size()) throw UsageError("training graph too small for a validation hold-out");
  v.train = KnowledgeGraph(full.entities(), full.relations());
  for (std::size_t i = n_hold; i < ts.size(); ++i) v.train.add(ts[i]);
  v.obs = v.train;
  std::vector<char> seen(static_cast<std::size_t>(full.num_entities()), 0);
  for (const auto& t : v.train.triples()) seen[static_cast<std::size_t>(t.head)] = seen[static_cast<std::size_t>(t.tail)] = 1;
  for (std::size_t i = 0; i < n_hold; ++i)
    if (seen[static_cast<std::size_t>(ts[i].head)] && seen[static_cast<std::size_t>(ts[i].tail)]) v.est.push_back(ts[i]);
  return v;
}

}  // namespace detail

/// Grid over list-valued keys: every combination, or a seeded random subset
/// of `budget` combinations (kept in enumeration order) when budget is
/// positive and smaller. Trials sharing model settings share one trained
/// checkpoint. Selection uses validation hits@10 only; test metrics are
/// reported alongside when a test split is configured.
inline GridOutcome run_grid(const RunConfig& c, std::ostream* log = nullptr, std::size_t budget = 0) {
  c.check_paths({"paths.train"});
  GridOutcome out;
  out.keys = c.grid_keys();
  if (out.keys.empty()) throw UsageError("grid needs at least one list-valued config key");
  auto configs = c.expand_grid();
  if (configs.empty()) throw UsageError("grid has zero trials");
  if (budget > 0 && budget < configs.size()) {
    std::vector<std::size_t> pick(configs.size());
    std::iota(pick.begin(), pick.end(), std::size_t{0});
    std::mt19937_64 rng(c.get<std::uint64_t>("seed"));
    std::shuffle(pick.begin(), pick.end(), rng);
    pick.resize(budget);
    std::sort(pick.begin(), pick.end());
    std::vector<RunConfig> subset;
    for (std::size_t i : pick) subset.push_back(configs[i]);
    configs = std::move(subset);
  }
  for (const auto& tc : configs) {
    const auto ks = tc.get<std::vector<int>>("eval.ks");
    if (std::find(ks.begin(), ks.end(), 10) == ks.end()) throw UsageError("grid selection needs 10 in eval.ks");
  }

  auto valid = detail::validation_split(c);
  const bool use_valid_queries = c.has_path("paths.valid_queries");
  const bool has_test = c.has_path("paths.inf_obs") && c.has_path("paths.inf_est");
  if (!use_valid_queries && valid.est.empty()) throw UsageError("validation split has no estimation triples");

  std::map<std::string, Checkpoint> models;
  const auto t0 = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const RunConfig& tc = configs[i];
    const std::string model_key = tc.document()["model"].dump() + tc.document()["seed"].dump();
    if (!models.count(model_key)) {
      if (log) *log << "trial " << i + 1 << ": training " << tc.document()["model"].dump() << '\n';
      models.emplace(model_key, train_model(valid.train, tc).checkpoint);
    }
    const Checkpoint& model = models.at(model_key);
    auto ext = extend_model(model, valid.obs, valid.est, tc);
    GridTrial trial{tc, {}, std::nullopt};
    if (use_valid_queries) {
      const auto qs = load_labeled_queries(tc.path("paths.valid_queries"), ext.embeddings.entities, model.relations);
      std::vector<RankRecord> all;
      for (const auto& r : evaluate_queries(ext.embeddings, qs, tc, "valid", t0).ranks) all.insert(all.end(), r.begin(), r.end());
      trial.validation = metrics(all, tc.get<std::vector<int>>("eval.ks"));
    } else {
      trial.validation = evaluate_kgc(to_sheaf_form(ext.embeddings.params), ext.embeddings.params.entities,
                                      ext.split.inf_est, ext.split.inf_obs.triples(), kgc_options_from(tc))
                             .metrics;
    }
    if (has_test) {
      auto obs = load_inference_graph(tc.path("paths.inf_obs"), model.relations);
      auto test_ext = extend_model(model, std::move(obs), {}, tc);
      KnowledgeGraph tobs = test_ext.split.inf_obs;
      const auto est = load_estimation_triples(tc.path("paths.inf_est"), tobs);
      trial.test = evaluate_kgc(to_sheaf_form(test_ext.embeddings.params), test_ext.embeddings.params.entities, est,
                                tobs.triples(), kgc_options_from(tc))
                       .metrics;
    }
    if (log) *log << "trial " << i + 1 << "/" << configs.size() << " valid hits@10 " << trial.validation.hits.at(10) << '\n';
    out.trials.push_back(std::move(trial));
  }
  for (std::size_t i = 1; i < out.trials.size(); ++i)
    if (out.trials[i].validation.hits.at(10) > out.trials[out.best].validation.hits.at(10)) out.best = i;
  return out;
}

inline void write_grid_csv(std::ostream& out, const GridOutcome& g) {
  out << "trial";
  for (const auto& k : g.keys) out << ',' << k;
  out << ",valid_hits@1,valid_hits@3,valid_hits@10,valid_mrr,test_hits@10,test_mrr,best\n";
  out.precision(17);
  for (std::size_t i = 0; i < g.trials.size(); ++i) {
    const auto& t = g.trials[i];
    out << i + 1;
    for (const auto& k : g.keys) out << ',' << t.config.at(k).dump();
    auto hit = [](const Metrics& m, int k) { return m.hits.count(k) ? m.hits.at(k) : std::nan(""); };
    out << ',' << hit(t.validation, 1) << ',' << hit(t.validation, 3) << ',' << hit(t.validation, 10) << ','
        << t.validation.mrr;
    if (t.test)
      out << ',' << hit(*t.test, 10) << ',' << t.test->mrr;
    else
      out << ",,";
    out << ',' << (i == g.best ? 1 : 0) << '\n';
  }
}

}  // namespace kgsheaf
