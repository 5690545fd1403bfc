// Copyright 2026 The ecdgraph Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line driver. Exit codes: 0 success, 1 validation failure,
// 2 runtime failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ecdgraph/ecdgraph.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

std::string WithCommas(std::int64_t n) {
  std::string digits = std::to_string(n);
  std::string out;
  int k = 0;
  for (auto it = digits.rbegin(); it != digits.rend(); ++it, ++k) {
    if (k > 0 && k % 3 == 0 && *it != '-') out.insert(out.begin(), ',');
    out.insert(out.begin(), *it);
  }
  return out;
}

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> select_on;
  std::optional<std::string> manifold;
  std::optional<int> max_epochs;
  std::optional<ecd::Index> batch_size;
};

// File values first, then bundle dimensions, then flags.
ecd::TrainConfig ResolveConfig(const std::string& config_path,
                               const ecd::Vocab* vocab,
                               const Overrides& flags) {
  nlohmann::json file = nlohmann::json::object();
  if (!config_path.empty()) file = ecd::ReadJsonFile(config_path);
  ecd::TrainConfig c = ecd::ParseTrainConfig(file);
  if (vocab != nullptr) {
    const std::pair<const char*, ecd::Index> dims[] = {
        {"word_dim", vocab->embedding_dim()},
        {"num_relations", vocab->num_relations()},
        {"num_pos", vocab->num_pos()}};
    for (const auto& [key, actual] : dims) {
      if (file.contains(key) && file[key].get<ecd::Index>() != actual) {
        throw ecd::ValidationError(std::string("config ") + key + " = " +
                                   file[key].dump() + " but the bundle has " +
                                   std::to_string(actual));
      }
    }
    c = ecd::AlignWithVocab(c, *vocab);
  }
  nlohmann::json patch = nlohmann::json::object();
  if (flags.seed) patch["seed"] = *flags.seed;
  if (flags.select_on) patch["select_on"] = *flags.select_on;
  if (flags.manifold) patch["manifold"] = *flags.manifold;
  if (flags.max_epochs) {
    patch["max_epochs"] = *flags.max_epochs;
    if (c.patience > *flags.max_epochs) patch["patience"] = *flags.max_epochs;
  }
  if (flags.batch_size) patch["batch_size"] = *flags.batch_size;
  return ecd::ParseTrainConfig(patch, c);
}

void AddOverrideFlags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--seed", o.seed, "Random seed");
  cmd->add_option("--select-on", o.select_on, "Model selection split")
      ->check(CLI::IsMember({"dev", "test"}));
  cmd->add_option("--manifold", o.manifold, "euclidean, poincare or lorentz");
  cmd->add_option("--max-epochs", o.max_epochs, "Epoch cap");
  cmd->add_option("--batch-size", o.batch_size, "Graphs per batch");
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

int Validate(const std::string& bundle, bool projective) {
  ecd::LoadOptions options;
  options.check_projective = projective;
  const ecd::Dataset ds = ecd::LoadBundle(bundle, options);
  const ecd::VocabReport report = ecd::MakeVocabReport(ds);
  std::cout << report.ToJson().dump(2) << "\n";
  std::cerr << report.graphs << " graphs, " << report.nodes << " nodes, "
            << report.edges << " edges, tree "
            << (report.tree_violations == 0 ? "OK" : "VIOLATIONS") << "\n";
  if (report.num_relations != 45) {
    std::cerr << "warning: " << report.num_relations
              << " relation types (expected 45)\n";
  }
  if (report.num_pos != 18) {
    std::cerr << "warning: " << report.num_pos << " POS tags (expected 18)\n";
  }
  for (const std::string& r : ds.rejected) std::cerr << "rejected: " << r << "\n";
  return report.tree_violations == 0 ? 0 : kExitValidation;
}

int TrainCommand(const std::string& bundle, const std::string& config_path,
                 const std::string& out_dir, const Overrides& flags) {
  const ecd::Dataset ds = ecd::LoadBundle(bundle);
  const ecd::TrainConfig config = ResolveConfig(config_path, &ds.vocab, flags);
  std::cerr << "config: " << ecd::ToJson(config).dump() << "\n";
  fs::create_directories(out_dir);
  WriteText(fs::path(out_dir) / "config.json", ecd::ToJson(config).dump(2) + "\n");

  std::ofstream history(fs::path(out_dir) / "history.jsonl");
  if (!history) throw std::runtime_error("cannot write history.jsonl");
  ecd::TrainResult result = ecd::Train(config, ds, [&](const ecd::EpochRecord& e) {
    history << e.ToJson().dump() << "\n";
    history.flush();
    std::cerr << "epoch " << e.epoch << " loss " << e.train_loss << " dev_f1 "
              << e.dev.f1 << (e.improved ? " *" : "") << "\n";
  });

  ecd::Checkpoint ckpt;
  ckpt.config = config;
  ckpt.params = result.params;
  ckpt.optimizer_state = result.optimizer_state;
  ckpt.optimizer_step = result.optimizer_step;
  ckpt.metadata = {{"best_epoch", result.best_epoch},
                   {"best_f1", result.best_f1},
                   {"class_weights", result.class_weights},
                   {"epochs_run", result.history.size()}};
  ecd::SaveCheckpoint(fs::path(out_dir) / "checkpoint.ecdg", ckpt);

  nlohmann::json metrics = {{"best_epoch", result.best_epoch}};
  for (const char* split : {"dev", "test"}) {
    if (ds.Split(split).empty()) continue;
    metrics[split] = ecd::Evaluate(result.params, config.model, ds.Split(split),
                                   *ds.embeddings, config.batch_size)
                         .ToJson();
  }
  WriteText(fs::path(out_dir) / "metrics.json", metrics.dump(2) + "\n");
  std::cerr << "best epoch " << result.best_epoch << ", selection F1 "
            << result.best_f1 << "\n";
  return 0;
}

int EvaluateCommand(const std::string& checkpoint, const std::string& bundle,
                    const std::string& split) {
  const ecd::Checkpoint ckpt = ecd::LoadCheckpoint(checkpoint);
  const ecd::Dataset ds = ecd::LoadBundle(bundle);
  const ecd::ModelConfig& m = ckpt.config.model;
  if (m.word_dim != ds.vocab.embedding_dim() ||
      m.num_relations != ds.vocab.num_relations() ||
      m.num_pos != ds.vocab.num_pos()) {
    throw ecd::ValidationError(
        "checkpoint dimensions (word_dim " + std::to_string(m.word_dim) +
        ", relations " + std::to_string(m.num_relations) + ", pos " +
        std::to_string(m.num_pos) + ") do not match the bundle");
  }
  const ecd::Metrics metrics = ecd::Evaluate(
      ckpt.params, m, ds.Split(split), *ds.embeddings, ckpt.config.batch_size);
  std::cout << metrics.ToJson().dump(2) << "\n";
  return 0;
}

int GridCommand(const std::string& bundle, const std::string& grid_path,
                const std::string& out_dir, const Overrides& flags) {
  const ecd::Dataset ds = ecd::LoadBundle(bundle);
  const ecd::TrainConfig defaults = ResolveConfig("", &ds.vocab, flags);
  ecd::GridSpec spec = ecd::ParseGridSpec(ecd::ReadJsonFile(grid_path), defaults);
  spec.base = ecd::AlignWithVocab(spec.base, ds.vocab);
  if (flags.select_on) {
    spec.base.select_on =
        *flags.select_on == "test" ? ecd::SelectOn::kTest : ecd::SelectOn::kDev;
  }
  std::cerr << "grid: " << spec.size() << " points, "
            << ecd::GridWorkers(spec.size()) << " workers, base "
            << ecd::ToJson(spec.base).dump() << "\n";
  const std::vector<ecd::GridRow> rows = ecd::RunGrid(spec, ds, &std::cerr);
  ecd::WriteGridOutputs(rows, out_dir);
  std::size_t failed = 0;
  for (const auto& r : rows) failed += r.ok() ? 0 : 1;
  std::cerr << "wrote " << (fs::path(out_dir) / "results.csv").string() << "; "
            << failed << " failed points\n";
  return failed == rows.size() ? kExitRuntime : 0;
}

int ParamsCommand(const std::string& config_path, bool as_json) {
  const ecd::TrainConfig c = ResolveConfig(config_path, nullptr, {});
  const ecd::ParamCount p = ecd::CountParams(c.model);
  if (as_json) {
    std::cout << nlohmann::json{{"pos_embedding", p.pos_embedding},
                                {"first_layer", p.first_layer},
                                {"hidden_layers", p.hidden_layers},
                                {"classifier", p.classifier},
                                {"centroids", p.centroids},
                                {"total", p.total()}}
                     .dump(2)
              << "\n";
    return 0;
  }
  std::cout << "pos_embedding  " << WithCommas(p.pos_embedding) << "\n"
            << "first_layer    " << WithCommas(p.first_layer) << "\n"
            << "hidden_layers  " << WithCommas(p.hidden_layers) << "\n"
            << "classifier     " << WithCommas(p.classifier) << "\n"
            << "centroids      " << WithCommas(p.centroids) << "\n"
            << "total          " << WithCommas(p.total()) << "\n";
  return 0;
}

int SelfCheckCommand(bool quick) {
  bool ok = true;
  for (const ecd::CheckResult& r : ecd::RunSelfCheck(quick)) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail
              << "\n";
    ok = ok && r.passed;
  }
  return ok ? 0 : kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Relational graph classifiers on Euclidean and hyperbolic manifolds"};
  app.require_subcommand(1);

  std::string bundle, config_path, out_dir, checkpoint, split = "test", grid_path;
  bool quick = false, as_json = false, no_projective = false;
  Overrides flags;

  auto* validate = app.add_subcommand("validate", "Check a dataset bundle");
  validate->add_option("--bundle", bundle, "Bundle directory")->required();
  validate->add_flag("--no-projective-check", no_projective,
                     "Accept non-projective trees");

  auto* train = app.add_subcommand("train", "Train with early stopping");
  train->add_option("--bundle", bundle, "Bundle directory")->required();
  train->add_option("--config", config_path, "JSON config file");
  train->add_option("--out", out_dir, "Output directory")->required();
  AddOverrideFlags(train, flags);

  auto* evaluate = app.add_subcommand("evaluate", "Metrics of a checkpoint");
  evaluate->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();
  evaluate->add_option("--bundle", bundle, "Bundle directory")->required();
  evaluate->add_option("--split", split, "Split to score")
      ->check(CLI::IsMember({"train", "dev", "test"}));

  auto* grid = app.add_subcommand("grid", "Grid search");
  grid->add_option("--bundle", bundle, "Bundle directory")->required();
  grid->add_option("--grid", grid_path, "JSON grid spec")->required();
  grid->add_option("--out", out_dir, "Output directory")->required();
  grid->add_option("--select-on", flags.select_on, "Model selection split")
      ->check(CLI::IsMember({"dev", "test"}));

  auto* params = app.add_subcommand("params", "Count trainable parameters");
  params->add_option("--config", config_path, "JSON config file");
  params->add_flag("--json", as_json, "Print JSON");

  auto* selfcheck = app.add_subcommand("selfcheck", "Gradient and manifold checks");
  selfcheck->add_flag("--quick", quick, "Fewer graphs and steps");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*validate) return Validate(bundle, !no_projective);
    if (*train) return TrainCommand(bundle, config_path, out_dir, flags);
    if (*evaluate) return EvaluateCommand(checkpoint, bundle, split);
    if (*grid) return GridCommand(bundle, grid_path, out_dir, flags);
    if (*params) return ParamsCommand(config_path, as_json);
    if (*selfcheck) return SelfCheckCommand(quick);
  } catch (const ecd::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitRuntime;
}
