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

#ifndef ECDGRAPH_GRID_HPP
#define ECDGRAPH_GRID_HPP

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "ecdgraph/config.hpp"
#include "ecdgraph/train.hpp"

namespace ecd {

/// Cartesian grid over dropout x pos_dim x class weights x manifold, each
/// point trained from `base` with every listed seed.
struct GridSpec {
  TrainConfig base;
  std::vector<double> dropouts = {0.0, 0.1, 0.2, 0.25, 0.3};
  std::vector<Index> pos_dims = {0, 16, 32, 64, 128};
  std::vector<ClassWeightSpec> weights = {
      ClassWeightSpec::None(), ClassWeightSpec::Inverse(),
      ClassWeightSpec::Fixed(0.8, 1.6), ClassWeightSpec::Fixed(1.0, 1.5)};
  std::vector<ManifoldKind> manifolds = {ManifoldKind::kEuclidean,
                                         ManifoldKind::kPoincare,
                                         ManifoldKind::kLorentz};
  std::vector<std::uint64_t> seeds = {0};

  std::size_t size() const {
    return dropouts.size() * pos_dims.size() * weights.size() *
           manifolds.size() * seeds.size();
  }

  /// Every grid point in a fixed order (manifold, weights, pos_dim,
  /// dropout, seed; last varies fastest).
  std::vector<TrainConfig> Points() const {
    std::vector<TrainConfig> out;
    out.reserve(size());
    for (ManifoldKind kind : manifolds)
      for (const ClassWeightSpec& w : weights)
        for (Index pos : pos_dims)
          for (double d : dropouts)
            for (std::uint64_t seed : seeds) {
              TrainConfig c = base;
              c.model.manifold = kind;
              c.model.class_weights = w;
              c.model.pos_dim = pos;
              c.model.dropout = d;
              c.seed = seed;
              out.push_back(c);
            }
    return out;
  }
};

/// Parses {"base": {...}, "dropout": [...], "pos_dim": [...],
/// "class_weights": [...], "manifold": [...], "seed": [...]}. Missing axes
/// keep their defaults; `base` overlays `defaults`.
inline GridSpec ParseGridSpec(const nlohmann::json& j,
                              const TrainConfig& defaults = {}) {
  if (!j.is_object()) throw ValidationError("grid spec must be a JSON object");
  GridSpec g;
  g.base = defaults;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "base") {
        g.base = ParseTrainConfig(v, defaults);
      } else if (key == "dropout") {
        g.dropouts = v.get<std::vector<double>>();
      } else if (key == "pos_dim") {
        g.pos_dims = v.get<std::vector<Index>>();
      } else if (key == "class_weights") {
        if (!v.is_array()) throw ValidationError("class_weights axis must be a list");
        g.weights.clear();
        for (const auto& w : v) g.weights.push_back(ClassWeightsFromJson(w));
      } else if (key == "manifold") {
        g.manifolds.clear();
        for (const auto& s : v.get<std::vector<std::string>>()) {
          auto kind = ParseManifoldKind(s);
          if (!kind) throw ValidationError("unknown manifold '" + s + "'");
          g.manifolds.push_back(*kind);
        }
      } else if (key == "seed") {
        g.seeds = v.get<std::vector<std::uint64_t>>();
      } else {
        throw ValidationError("unknown grid key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("grid spec: ") + e.what());
  }
  if (g.size() == 0) throw ValidationError("grid spec has an empty axis");
  for (const TrainConfig& c : g.Points()) c.Validate();
  return g;
}

/// Display name: GNN, P-HGNN or L-HGNN, with "Balanced-" when class weights
/// are set and "-POS" when POS embeddings are used.
inline std::string ModelName(const ModelConfig& c) {
  std::string name;
  switch (c.manifold) {
    case ManifoldKind::kEuclidean: name = "GNN"; break;
    case ManifoldKind::kPoincare: name = "P-HGNN"; break;
    case ManifoldKind::kLorentz: name = "L-HGNN"; break;
  }
  if (c.class_weights.mode != ClassWeightSpec::Mode::kNone) name = "Balanced-" + name;
  if (c.pos_dim > 0) name += "-POS";
  return name;
}

inline std::string WeightsLabel(const ClassWeightSpec& w) {
  switch (w.mode) {
    case ClassWeightSpec::Mode::kNone: return "none";
    case ClassWeightSpec::Mode::kInverseFrequency: return "inverse";
    case ClassWeightSpec::Mode::kFixed: {
      std::ostringstream s;
      s << '[' << w.fixed[0] << ';' << w.fixed[1] << ']';
      return s.str();
    }
  }
  return "none";
}

struct GridRow {
  TrainConfig config;
  std::string model;
  Metrics dev;
  Metrics test;
  int best_epoch = 0;
  std::int64_t params = 0;
  std::array<double, 2> resolved_weights = {1.0, 1.0};
  std::vector<EpochRecord> history;
  /// Non-empty when the point failed; the metrics are then meaningless.
  std::string error;

  bool ok() const { return error.empty(); }
  const Metrics& Selection() const {
    return config.select_on == SelectOn::kTest ? test : dev;
  }
};

/// Trains and evaluates one grid point. Failures are captured in the row.
inline GridRow RunGridPoint(const TrainConfig& config, const Dataset& data) {
  GridRow row;
  row.config = config;
  row.model = ModelName(config.model);
  row.params = CountParams(config.model).total();
  try {
    TrainResult r = Train(config, data);
    row.best_epoch = r.best_epoch;
    row.resolved_weights = r.class_weights;
    row.history = r.history;
    row.dev = Evaluate(r.params, config.model, data.Split("dev"),
                       *data.embeddings, config.batch_size);
    row.test = Evaluate(r.params, config.model, data.Split("test"),
                        *data.embeddings, config.batch_size);
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  return row;
}

/// Worker count: ECD_THREADS if set and positive, else the hardware count.
inline unsigned GridWorkers(std::size_t points) {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("ECD_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) n = static_cast<unsigned>(v);
  }
  return static_cast<unsigned>(
      std::min<std::size_t>(n, std::max<std::size_t>(points, 1)));
}

/// Runs every grid point; rows come back in grid order regardless of the
/// worker count. Progress goes to `log` when given.
inline std::vector<GridRow> RunGrid(const GridSpec& spec, const Dataset& data,
                                    std::ostream* log = nullptr) {
  const std::vector<TrainConfig> points = spec.Points();
  std::vector<GridRow> rows(points.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      rows[i] = RunGridPoint(points[i], data);
      if (log) {
        std::lock_guard<std::mutex> lock(log_mutex);
        const GridRow& r = rows[i];
        *log << "[grid " << (i + 1) << "/" << points.size() << "] " << r.model
             << " " << ToString(r.config.model.manifold)
             << " dropout=" << r.config.model.dropout
             << " pos_dim=" << r.config.model.pos_dim
             << " weights=" << WeightsLabel(r.config.model.class_weights);
        if (r.ok()) {
          *log << " dev_f1=" << r.dev.f1 << " test_f1=" << r.test.f1
               << " epoch=" << r.best_epoch << "\n";
        } else {
          *log << " FAILED: " << r.error << "\n";
        }
      }
    }
  };
  const unsigned n = GridWorkers(points.size());
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return rows;
}

namespace detail {

inline std::string Fixed4(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(4) << v;
  return s.str();
}

inline std::string Pct1(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(1) << 100.0 * v;
  return s.str();
}

inline std::string CsvRow(const GridRow& r, const std::string& split,
                          const Metrics* m) {
  std::ostringstream s;
  s << r.model << ',' << ToString(r.config.model.manifold) << ','
    << r.config.model.dropout << ',' << r.config.model.pos_dim << ','
    << WeightsLabel(r.config.model.class_weights) << ',' << split << ',';
  if (m) {
    s << Fixed4(m->precision) << ',' << Fixed4(m->recall) << ','
      << Fixed4(m->f1) << ',' << Fixed4(m->accuracy) << ','
      << Fixed4(m->auc_roc) << ',' << r.best_epoch;
  } else {
    s << ",,,,,";
  }
  s << ',' << r.config.seed << ',' << r.params;
  return s.str();
}

}  // namespace detail

/// results.csv: a dev and a test row per successful point, one "error" row
/// per failed point.
inline std::string GridCsv(const std::vector<GridRow>& rows) {
  std::ostringstream out;
  out << "model,manifold,dropout,pos_dim,weights,split,pr,rc,f1,acc,auc,epoch,"
         "seed,params\n";
  for (const GridRow& r : rows) {
    if (r.ok()) {
      out << detail::CsvRow(r, "dev", &r.dev) << '\n';
      out << detail::CsvRow(r, "test", &r.test) << '\n';
    } else {
      out << detail::CsvRow(r, "error", nullptr) << '\n';
    }
  }
  return out.str();
}

/// Indices of successful rows sorted by selection F1, best first. Ties keep
/// grid order.
inline std::vector<std::size_t> RankRows(const std::vector<GridRow>& rows) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (rows[i].ok()) idx.push_back(i);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return rows[a].Selection().f1 > rows[b].Selection().f1;
  });
  return idx;
}

/// Best row per model name by selection F1, in order of first appearance in
/// the ranking.
inline std::vector<std::size_t> BestPerModel(const std::vector<GridRow>& rows) {
  std::vector<std::size_t> out;
  std::vector<std::string> seen;
  for (std::size_t i : RankRows(rows)) {
    if (std::find(seen.begin(), seen.end(), rows[i].model) != seen.end()) continue;
    seen.push_back(rows[i].model);
    out.push_back(i);
  }
  return out;
}

/// Markdown table of `idx` rows with dev and test metrics in percent; the
/// best value of each metric column is bold.
inline std::string MetricsTable(const std::vector<GridRow>& rows,
                                const std::vector<std::size_t>& idx) {
  using Getter = double (*)(const Metrics&);
  static const Getter getters[] = {
      [](const Metrics& m) { return m.precision; },
      [](const Metrics& m) { return m.recall; },
      [](const Metrics& m) { return m.f1; },
      [](const Metrics& m) { return m.accuracy; },
      [](const Metrics& m) { return m.auc_roc; }};
  double best[2][5];
  for (auto& split : best)
    for (double& b : split) b = -1.0;
  for (std::size_t i : idx) {
    for (int g = 0; g < 5; ++g) {
      best[0][g] = std::max(best[0][g], getters[g](rows[i].dev));
      best[1][g] = std::max(best[1][g], getters[g](rows[i].test));
    }
  }
  std::ostringstream out;
  out << "| Model | Dropout | POS | Weights | Dev Pr | Dev Rc | Dev F1 | Dev Acc "
         "| Dev AUC | Test Pr | Test Rc | Test F1 | Test Acc | Test AUC | Epoch "
         "|\n";
  out << "|---|---|---|---|---|---|---|---|---|---|---|---|---|---|---|\n";
  for (std::size_t i : idx) {
    const GridRow& r = rows[i];
    out << "| " << r.model << " | " << r.config.model.dropout << " | "
        << (r.config.model.pos_dim > 0 ? std::to_string(r.config.model.pos_dim)
                                       : "--")
        << " | " << WeightsLabel(r.config.model.class_weights) << " |";
    for (int s = 0; s < 2; ++s) {
      const Metrics& m = s == 0 ? r.dev : r.test;
      for (int g = 0; g < 5; ++g) {
        const std::string v = detail::Pct1(getters[g](m));
        const bool bold = detail::Pct1(best[s][g]) == v;
        out << ' ' << (bold ? "**" + v + "**" : v) << " |";
      }
    }
    out << ' ' << r.best_epoch << " |\n";
  }
  return out.str();
}

/// results.md: the full table ranked by selection F1, the best-per-model
/// table and a list of failed points.
inline std::string GridMarkdown(const std::vector<GridRow>& rows) {
  std::ostringstream out;
  const bool on_test =
      !rows.empty() && rows.front().config.select_on == SelectOn::kTest;
  out << "# Grid results\n\n";
  out << "Model selection: best " << (on_test ? "test" : "dev")
      << " F1 epoch; rows sorted by " << (on_test ? "test" : "dev")
      << " F1. Metrics in percent.\n\n";
  out << "## Best per model\n\n" << MetricsTable(rows, BestPerModel(rows));
  out << "\n## All points\n\n" << MetricsTable(rows, RankRows(rows));
  bool any_failed = false;
  for (const GridRow& r : rows) any_failed = any_failed || !r.ok();
  if (any_failed) {
    out << "\n## Failed points\n\n";
    for (const GridRow& r : rows) {
      if (r.ok()) continue;
      out << "- " << r.model << " dropout=" << r.config.model.dropout
          << " pos_dim=" << r.config.model.pos_dim
          << " weights=" << WeightsLabel(r.config.model.class_weights) << ": "
          << r.error << "\n";
    }
  }
  return out.str();
}

/// Writes results.csv, results.md and history/point-NNN.jsonl (one line per
/// epoch, preceded by the resolved config) under `dir`.
inline void WriteGridOutputs(const std::vector<GridRow>& rows,
                             const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "history");
  auto write = [](const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << text;
  };
  write(dir / "results.csv", GridCsv(rows));
  write(dir / "results.md", GridMarkdown(rows));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "point-%03zu.jsonl", i);
    std::ostringstream s;
    nlohmann::json head = {{"config", ToJson(rows[i].config)},
                           {"model", rows[i].model}};
    if (!rows[i].ok()) head["error"] = rows[i].error;
    s << head.dump() << '\n';
    for (const EpochRecord& e : rows[i].history) s << e.ToJson().dump() << '\n';
    write(dir / "history" / name, s.str());
  }
}

}  // namespace ecd

#endif  // ECDGRAPH_GRID_HPP
