// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 kgsheaf contributors

#include "kgsheaf/kgsheaf.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace kgsheaf;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kNumeric = 3 };

struct Common {
  std::string config;
  std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("-c,--config", c.config, "JSON config file");
  cmd->add_option("--set", c.sets, "Override as section.key=value (repeatable)");
  cmd->allow_extras();
}

RunConfig load_config(const CLI::App* cmd, const Common& c) {
  std::vector<std::string> overrides = c.sets;
  for (const auto& extra : cmd->remaining()) {
    if (extra.rfind("--", 0) != 0 || extra.find('=') == std::string::npos)
      throw UsageError("unexpected argument '" + extra + "'; overrides look like --section.key=value");
    overrides.push_back(extra);
  }
  return RunConfig::load(c.config, overrides);
}

void emit(const Report& r, const fs::path& dir) {
  std::cout << r.json.dump(2) << '\n';
  std::cerr << "report written to " << dir.string() << '\n';
}

int generate_toy(const std::string& out_dir, const ToyOptions& t, Index n_test, Index n_valid, Index per_shape) {
  const auto toy = generate_toy_kg(t);
  const auto test = holdout_split(toy.graph, {n_test, 0.5, t.seed + 1});
  const auto valid = holdout_split(test.train, {n_valid, 0.5, t.seed + 2});
  fs::create_directories(out_dir);
  auto write = [&](const std::string& name, const KnowledgeGraph& g, const std::vector<Triple>* ts) {
    std::ofstream out(fs::path(out_dir) / name);
    if (!out) throw FileError("cannot write " + (fs::path(out_dir) / name).string());
    ts ? write_triples(out, g, *ts) : write_triples(out, g);
  };
  write("full.tsv", toy.graph, nullptr);
  write("train.tsv", valid.train, nullptr);
  write("valid_obs.tsv", valid.inf_obs, nullptr);
  write("valid_est.tsv", valid.inf_obs, &valid.inf_est);
  write("inf_obs.tsv", test.inf_obs, nullptr);
  write("inf_est.tsv", test.inf_obs, &test.inf_est);
  if (per_shape > 0) {
    std::vector<Triple> full = test.inf_obs.triples();
    full.insert(full.end(), test.inf_est.begin(), test.inf_est.end());
    std::vector<QueryInstance> qs;
    for (std::size_t k = 0; k < kAllShapes.size(); ++k) {
      auto part = sample_queries(kAllShapes[k], test.inf_obs.triples(), full, per_shape, t.seed + 10 + k);
      qs.insert(qs.end(), part.begin(), part.end());
    }
    // Ids follow the vocabularies a reader gets from train.tsv and inf_obs.tsv.
    const auto qpath = (fs::path(out_dir) / "queries.jsonl").string();
    {
      std::ofstream out(qpath);
      write_labeled_queries(out, qs, test.inf_obs.entities(), test.inf_obs.relations());
    }
    const auto train = load_graph_file((fs::path(out_dir) / "train.tsv").string());
    const auto inf = load_inference_graph((fs::path(out_dir) / "inf_obs.tsv").string(), train.relations());
    const auto resolved = load_labeled_queries(qpath, inf.entities(), train.relations());
    std::ofstream out(qpath);
    write_queries(out, resolved);
  }
  std::cout << nlohmann::json{{"entities", toy.graph.num_entities()},
                              {"relations", toy.graph.num_relations()},
                              {"triples", toy.graph.num_triples()},
                              {"train_triples", valid.train.num_triples()},
                              {"test_estimation_triples", test.inf_est.size()},
                              {"valid_estimation_triples", valid.inf_est.size()}}
                   .dump(2)
            << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sheaf-based extension of knowledge graph embeddings"};
  app.require_subcommand(1);

  Common c_train, c_extend, c_complete, c_query, c_grid;
  auto* train_cmd = app.add_subcommand("train", "Train a transductive embedding model");
  add_common(train_cmd, c_train);

  auto* extend_cmd = app.add_subcommand("extend", "Extend a trained model onto an inference graph");
  add_common(extend_cmd, c_extend);

  bool inline_complete = false, inline_query = false;
  auto* complete_cmd = app.add_subcommand("complete", "Filtered link prediction on estimation triples");
  add_common(complete_cmd, c_complete);
  complete_cmd->add_flag("--extend-inline", inline_complete, "Extend paths.checkpoint instead of loading embeddings");

  std::string dump_path;
  auto* query_cmd = app.add_subcommand("query", "Answer conjunctive queries");
  add_common(query_cmd, c_query);
  query_cmd->add_flag("--extend-inline", inline_query, "Extend paths.checkpoint instead of loading embeddings");
  query_cmd->add_option("--dump", dump_path, "Write per-answer filtered ranks as JSON Lines");

  std::string info_path;
  auto* info_cmd = app.add_subcommand("info", "Summarise a triple file or checkpoint");
  info_cmd->add_option("path", info_path, "Triple file or checkpoint directory")->required();

  std::size_t budget = 0;
  auto* grid_cmd = app.add_subcommand("grid", "Grid search over list-valued config keys");
  add_common(grid_cmd, c_grid);
  grid_cmd->add_option("--budget", budget, "Evaluate a seeded random subset of this many trials (0 = all)");

  ToyOptions toy;
  std::string toy_out = "toy", toy_family = "TransE";
  Index n_test = 20, n_valid = 30, per_shape = 20;
  auto* toy_cmd = app.add_subcommand("generate-toy", "Write a synthetic dataset with planted parameters");
  toy_cmd->add_option("--out", toy_out, "Output directory")->capture_default_str();
  toy_cmd->add_option("--entities", toy.num_entities, "Number of entities")->capture_default_str();
  toy_cmd->add_option("--relations", toy.num_relations, "Number of relations")->capture_default_str();
  toy_cmd->add_option("--family", toy_family, "Planted model family (SE, TransE, TransR, RotatE)")->capture_default_str();
  toy_cmd->add_option("--dim", toy.dim, "Planted embedding dimension")->capture_default_str();
  toy_cmd->add_option("--noise", toy.noise, "Std. dev. of entity noise around class centroids")->capture_default_str();
  toy_cmd->add_option("--seed", toy.seed, "Generator seed")->capture_default_str();
  toy_cmd->add_option("--test-holdout", n_test, "Entities held out for the test inference graph")->capture_default_str();
  toy_cmd->add_option("--valid-holdout", n_valid, "Entities held out for the validation inference graph")->capture_default_str();
  toy_cmd->add_option("--queries-per-shape", per_shape, "Test queries sampled per shape")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*train_cmd) {
      const auto cfg = load_config(train_cmd, c_train);
      const auto out = run_train(cfg, &std::cerr);
      std::cout << nlohmann::json{{"checkpoint", out.dir.string()},
                                  {"final_loss", out.epoch_loss.empty() ? 0.0 : out.epoch_loss.back()},
                                  {"config", cfg.echo()}}
                       .dump(2)
                << '\n';
    } else if (*extend_cmd) {
      const auto cfg = load_config(extend_cmd, c_extend);
      const auto out = run_extend(cfg);
      std::cout << nlohmann::json{{"embeddings", out.dir.string()},
                                  {"mode", to_string(out.split.mode)},
                                  {"boundary", out.split.boundary.size()},
                                  {"interior", out.split.interior.size()},
                                  {"iterations", out.result.iterations},
                                  {"converged", out.result.converged},
                                  {"config", cfg.echo()}}
                       .dump(2)
                << '\n';
    } else if (*complete_cmd) {
      const auto cfg = load_config(complete_cmd, c_complete);
      const auto r = run_complete(cfg, inline_complete);
      emit(r, write_report(cfg, "complete", r));
    } else if (*query_cmd) {
      const auto cfg = load_config(query_cmd, c_query);
      const auto q = run_query(cfg, inline_query);
      const auto dir = write_report(cfg, "query", q.overall);
      if (!dump_path.empty()) {
        std::ofstream out(dump_path);
        write_answer_dump(out, q);
      }
      emit(q.overall, dir);
    } else if (*info_cmd) {
      const auto j = describe_path(info_path);
      for (const auto& [k, v] : j.items()) std::cout << k << ": " << (v.is_string() ? v.get<std::string>() : v.dump()) << '\n';
    } else if (*grid_cmd) {
      const auto cfg = load_config(grid_cmd, c_grid);
      const auto g = run_grid(cfg, &std::cerr, budget);
      const auto dir = next_version_dir(fs::path(cfg.path("paths.out")) / "grid");
      {
        std::ofstream csv(dir / "trials.csv");
        write_grid_csv(csv, g);
      }
      const auto& best = g.trials[g.best];
      nlohmann::json j = {{"trials", g.trials.size()},
                          {"best_trial", g.best + 1},
                          {"best_validation", to_json(best.validation)},
                          {"best_config", best.config.echo()},
                          {"trial_table", (dir / "trials.csv").string()}};
      if (best.test) j["best_test"] = to_json(*best.test);
      std::ofstream(dir / "best.json") << j.dump(2) << '\n';
      std::cout << j.dump(2) << '\n';
    } else if (*toy_cmd) {
      toy.family = parse_model_family(toy_family);
      return generate_toy(toy_out, toy, n_test, n_valid, per_shape);
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const ContractError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kNumeric;
  } catch (const Error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  }
  return kOk;
}
