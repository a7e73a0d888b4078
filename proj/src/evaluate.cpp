//
// Copyright 2026 The caseembed Authors
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
//

#include "caseembed/evaluate.hpp"

#include <algorithm>
#include <numeric>
#include <tuple>

#include <json.hpp>

#include "caseembed/digest.hpp"
#include "caseembed/error.hpp"
#include "caseembed/parallel.hpp"
#include "caseembed/rng.hpp"
#include "csv.hpp"

namespace caseembed {

namespace {

std::string countmat_key(const std::string& panel_digest, std::size_t lookback,
                         std::size_t k, const Metric& metric) {
  return sha256_hex(panel_digest + "|countmat|n=" + std::to_string(lookback) +
                    "|k=" + std::to_string(k) + "|metric=" + to_string(metric));
}

std::string embedding_key(const std::string& counts_key, const FactorizeConfig& cfg) {
  return sha256_hex(counts_key + "|embed|d=" + std::to_string(cfg.d) +
                    "|lambda=" + detail::format_double(cfg.lambda) +
                    "|lr=" + detail::format_double(cfg.learning_rate) +
                    "|epochs=" + std::to_string(cfg.epochs) +
                    "|tol=" + detail::format_double(cfg.tolerance) +
                    "|seed=" + std::to_string(cfg.seed));
}

double safe_ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

// Sort key reproducing the reference table layout.
std::tuple<int, int, int, int, std::size_t> table_order(const ExperimentConfig& c) {
  const int rep = static_cast<int>(c.representation);
  const int metric = c.representation == Representation::Embedding
                         ? static_cast<int>(c.countmat_metric.kind)
                         : static_cast<int>(c.knn_metric);
  const int knn = c.representation == Representation::Embedding
                      ? static_cast<int>(c.knn_metric)
                      : 0;
  return {rep, metric, knn, static_cast<int>(c.granularity), c.lookback};
}

nlohmann::json to_json(const ClassMetrics& m) {
  return {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1},
          {"support", m.support}};
}

nlohmann::json to_json(const Scores& s) {
  nlohmann::json per_class = nlohmann::json::object();
  for (const auto& [label, m] : s.per_class) per_class[label] = to_json(m);
  return {{"per_class", per_class}, {"weighted", to_json(s.weighted)}};
}

}  // namespace

std::string ExperimentConfig::label() const {
  std::string out = to_string(representation);
  if (representation == Representation::Embedding) {
    out += "+";
    out += short_name(countmat_metric.kind);
  }
  out += "/";
  out += short_name(knn_metric);
  out += "/";
  out += to_string(granularity);
  if (representation == Representation::Embedding) out += "/" + std::to_string(lookback);
  return out;
}

std::vector<ExperimentConfig> reference_grid(const ExperimentConfig& base) {
  static constexpr Granularity kGrans[] = {Granularity::Daily, Granularity::Weekly,
                                           Granularity::Monthly};
  std::vector<ExperimentConfig> grid;
  auto baseline = [&](Representation r, KnnMetric m) {
    for (Granularity g : kGrans) {
      ExperimentConfig c = base;
      c.representation = r;
      c.knn_metric = m;
      c.granularity = g;
      c.lookback = 0;
      grid.push_back(c);
    }
  };
  baseline(Representation::Summary, KnnMetric::EuclideanDist);
  baseline(Representation::Raw, KnnMetric::EuclideanDist);
  baseline(Representation::Raw, KnnMetric::PearsonCorr);

  const std::pair<Granularity, std::size_t> lookbacks[] = {
      {Granularity::Daily, 5},    {Granularity::Daily, 22},    {Granularity::Weekly, 4},
      {Granularity::Weekly, 52},  {Granularity::Monthly, 12},  {Granularity::Monthly, 24}};
  for (MetricKind mk : {MetricKind::Euclidean, MetricKind::Pearson, MetricKind::Hybrid}) {
    for (const auto& [g, n] : lookbacks) {
      ExperimentConfig c = base;
      c.representation = Representation::Embedding;
      c.countmat_metric = Metric{mk, base.countmat_metric.hybrid_weight};
      c.knn_metric = KnnMetric::EuclideanDist;
      c.granularity = g;
      c.lookback = n;
      grid.push_back(c);
    }
  }
  return grid;
}

std::vector<Fold> kfold_split(std::span<const std::string> labels, std::size_t folds,
                              std::uint64_t seed, bool stratified,
                              std::vector<std::string>* warnings) {
  require(folds >= 2, "at least 2 folds are required");
  require(labels.size() >= folds, "fewer cases than folds");
  Rng rng(seed);

  std::vector<std::vector<std::size_t>> strata;
  if (stratified) {
    std::map<std::string, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
    for (auto& [label, members] : by_class) {
      if (members.size() < folds && warnings) {
        warnings->push_back("class '" + label + "' has " + std::to_string(members.size()) +
                            " members for " + std::to_string(folds) +
                            " folds; it cannot appear in every fold");
      }
      strata.push_back(std::move(members));
    }
  } else {
    std::vector<std::size_t> all(labels.size());
    std::iota(all.begin(), all.end(), 0);
    strata.push_back(std::move(all));
  }

  std::vector<Fold> out(folds);
  std::size_t dealer = 0;
  for (auto& members : strata) {
    rng.shuffle(members);
    for (std::size_t m : members) {
      out[dealer % folds].test.push_back(m);
      ++dealer;
    }
  }
  for (std::size_t f = 0; f < folds; ++f) {
    std::sort(out[f].test.begin(), out[f].test.end());
    for (std::size_t g = 0; g < folds; ++g) {
      if (g != f) {
        for (std::size_t m : out[g].test) out[f].train.push_back(m);
      }
    }
  }
  for (auto& f : out) {
    // test lists were sorted above; train may still be out of order
    std::sort(f.train.begin(), f.train.end());
  }
  return out;
}

Scores score_report(std::span<const std::string> truth,
                    std::span<const std::string> predicted,
                    std::span<const std::string> classes) {
  require(!truth.empty(), "no predictions to score");
  if (truth.size() != predicted.size()) {
    fail(ErrorCode::DimensionMismatch, "truth and prediction lists differ in length");
  }
  Scores s;
  std::map<std::string, std::size_t> tp, pred_count;
  for (const auto& c : classes) s.per_class[c];
  for (std::size_t i = 0; i < truth.size(); ++i) {
    require(s.per_class.count(truth[i]) == 1, "true label '" + truth[i] + "' not in class set");
    require(s.per_class.count(predicted[i]) == 1,
            "predicted label '" + predicted[i] + "' not in class set");
    ++s.per_class[truth[i]].support;
    ++pred_count[predicted[i]];
    if (truth[i] == predicted[i]) ++tp[truth[i]];
  }
  double wp = 0.0, wr = 0.0, wf = 0.0;
  for (auto& [label, m] : s.per_class) {
    const double hits = static_cast<double>(tp[label]);
    m.precision = safe_ratio(hits, static_cast<double>(pred_count[label]));
    m.recall = safe_ratio(hits, static_cast<double>(m.support));
    m.f1 = safe_ratio(2.0 * m.precision * m.recall, m.precision + m.recall);
    const double w = static_cast<double>(m.support);
    wp += w * m.precision;
    wr += w * m.recall;
    wf += w * m.f1;
  }
  const double total = static_cast<double>(truth.size());
  s.weighted = {wp / total, wr / total, wf / total, truth.size()};
  return s;
}

ArtifactCache::ArtifactCache(std::filesystem::path directory) : dir_(std::move(directory)) {
  std::filesystem::create_directories(*dir_);
}

const CountMatrix& ArtifactCache::counts(const ReturnsPanel& panel, std::size_t lookback,
                                         std::size_t k, const Metric& metric,
                                         unsigned threads) {
  const std::string key = countmat_key(panel_digest(panel), lookback, k, metric);
  if (auto it = counts_.find(key); it != counts_.end()) return it->second;
  if (dir_) {
    const auto file = *dir_ / (key + ".countmat");
    if (std::filesystem::exists(file)) return counts_[key] = read_countmat(file);
  }
  CountOptions opts;
  opts.threads = threads;
  CountMatrix cm = accumulate_counts(panel, lookback, k, metric, opts);
  ++countmat_computations_;
  if (dir_) write_countmat(cm, *dir_ / (key + ".countmat"));
  return counts_[key] = std::move(cm);
}

const EmbeddingMatrix& ArtifactCache::embeddings(const ReturnsPanel& panel,
                                                 std::size_t lookback, std::size_t k,
                                                 const Metric& metric,
                                                 const FactorizeConfig& cfg,
                                                 unsigned threads) {
  const std::string ckey = countmat_key(panel_digest(panel), lookback, k, metric);
  const std::string key = embedding_key(ckey, cfg);
  if (auto it = embeddings_.find(key); it != embeddings_.end()) return it->second;
  if (dir_) {
    const auto csv = *dir_ / (key + ".emb.csv");
    const auto meta = *dir_ / (key + ".emb.meta");
    if (std::filesystem::exists(csv) && std::filesystem::exists(meta)) {
      std::vector<std::string> tickers;
      EmbeddingMatrix e = read_embeddings(csv, tickers, meta);
      bool aligned = tickers.size() == panel.num_assets();
      for (std::size_t i = 0; aligned && i < tickers.size(); ++i) {
        aligned = tickers[i] == panel.asset(i).ticker;
      }
      if (aligned) return embeddings_[key] = std::move(e);
    }
  }
  const CountMatrix& cm = counts(panel, lookback, k, metric, threads);
  EmbeddingMatrix e = factorize(clip_transform_scale(cm), cfg);
  ++factorizations_;
  if (dir_) {
    std::vector<std::string> tickers;
    for (const auto& a : panel.assets()) tickers.push_back(a.ticker);
    write_embeddings(e, tickers, *dir_ / (key + ".emb.csv"), *dir_ / (key + ".emb.meta"));
  }
  return embeddings_[key] = std::move(e);
}

ClassificationReport run_experiment(const ReturnsPanel& panel, const ExperimentConfig& cfg,
                                    ArtifactCache& cache, unsigned threads) {
  const bool embedding = cfg.representation == Representation::Embedding;
  if (embedding) {
    require(cfg.lookback >= 2, "the Embedding representation needs a lookback >= 2");
  } else {
    require(cfg.lookback == 0, "lookback applies only to the Embedding representation");
  }

  std::optional<ReturnsPanel> aggregated;
  if (cfg.granularity != panel.granularity()) {
    aggregated.emplace(aggregate(panel, cfg.granularity));
  }
  const ReturnsPanel& data = aggregated ? *aggregated : panel;

  const EmbeddingMatrix* emb = nullptr;
  if (embedding) {
    FactorizeConfig fc = cfg.factorize;
    fc.seed = cfg.seed;
    emb = &cache.embeddings(data, cfg.lookback, cfg.k_count, cfg.countmat_metric, fc, threads);
  }
  const CaseBase base = build_case_base(data, cfg.representation, emb, cfg.knn_metric);

  ClassificationReport report;
  report.config = cfg;
  report.warnings = base.warnings;
  const auto folds = kfold_split(base.labels, cfg.folds, cfg.seed, cfg.stratified,
                                 &report.warnings);

  std::vector<std::string> predicted(base.size());
  for (const Fold& fold : folds) {
    parallel_blocks(fold.test.size(), resolve_threads(threads),
                    [&](unsigned, std::size_t begin, std::size_t end) {
                      for (std::size_t q = begin; q < end; ++q) {
                        const std::size_t row = fold.test[q];
                        predicted[row] = knn_query(base, row, fold.train, cfg.knn_k).predicted;
                      }
                    });
    std::vector<std::string> t, p;
    for (std::size_t row : fold.test) {
      t.push_back(base.labels[row]);
      p.push_back(predicted[row]);
    }
    report.folds.push_back(score_report(t, p, data.classes()));
  }
  report.overall = score_report(base.labels, predicted, data.classes());
  return report;
}

GridResult run_grid(const ReturnsPanel& panel, std::span<const ExperimentConfig> grid,
                    ArtifactCache& cache, unsigned threads) {
  GridResult result;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    try {
      result.rows.push_back({i, run_experiment(panel, grid[i], cache, threads)});
    } catch (const std::exception& e) {
      result.errors.push_back({i, grid[i], e.what()});
    }
  }
  std::stable_sort(result.rows.begin(), result.rows.end(),
                   [](const GridRow& a, const GridRow& b) {
                     return table_order(a.report.config) < table_order(b.report.config);
                   });
  return result;
}

void write_results_table(std::span<const GridRow> rows, const std::filesystem::path& path) {
  auto out = detail::open_out(path.string());
  out << "representation,countmat_metric,knn_metric,granularity,lookback,precision,recall,f1\n";
  char buf[96];
  for (const auto& row : rows) {
    const auto& c = row.report.config;
    const bool emb = c.representation == Representation::Embedding;
    const auto& w = row.report.overall.weighted;
    std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.6f", w.precision, w.recall, w.f1);
    out << to_string(c.representation) << ','
        << (emb ? short_name(c.countmat_metric.kind) : "-") << ',' << short_name(c.knn_metric)
        << ',' << to_string(c.granularity) << ','
        << (emb ? std::to_string(c.lookback) : std::string("-")) << ',' << buf << '\n';
  }
  if (!out) fail(ErrorCode::Io, "write failed for '" + path.string() + "'");
}

void write_grid_errors(std::span<const GridError> errors, const std::filesystem::path& path) {
  auto out = detail::open_out(path.string());
  out << "index,config,error\n";
  for (const auto& e : errors) {
    out << e.index << ',' << detail::csv_field(e.config.label()) << ','
        << detail::csv_field(e.message) << '\n';
  }
  if (!out) fail(ErrorCode::Io, "write failed for '" + path.string() + "'");
}

void write_report_json(const ClassificationReport& report, const std::filesystem::path& path) {
  const auto& c = report.config;
  nlohmann::json j;
  j["config"] = {{"label", c.label()},
                 {"representation", to_string(c.representation)},
                 {"countmat_metric", to_string(c.countmat_metric)},
                 {"knn_metric", to_string(c.knn_metric)},
                 {"granularity", to_string(c.granularity)},
                 {"lookback", c.lookback},
                 {"k_count", c.k_count},
                 {"knn_k", c.knn_k},
                 {"folds", c.folds},
                 {"seed", c.seed},
                 {"stratified", c.stratified},
                 {"d", c.factorize.d},
                 {"lambda", c.factorize.lambda},
                 {"learning_rate", c.factorize.learning_rate},
                 {"epochs", c.factorize.epochs},
                 {"tolerance", c.factorize.tolerance}};
  j["tie_break"] =
      "neighbours: score desc then asset index asc; votes: nearest neighbour's class, "
      "then lexicographic label";
  j["overall"] = to_json(report.overall);
  j["folds"] = nlohmann::json::array();
  for (const auto& f : report.folds) j["folds"].push_back(to_json(f));
  j["warnings"] = report.warnings;
  auto out = detail::open_out(path.string());
  out << j.dump(2) << '\n';
  if (!out) fail(ErrorCode::Io, "write failed for '" + path.string() + "'");
}

}  // namespace caseembed
