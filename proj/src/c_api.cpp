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

#include "caseembed/caseembed.h"

#include <cstring>
#include <sstream>
#include <string>
#include <unordered_map>

#include "caseembed/classify.hpp"
#include "caseembed/countmat.hpp"
#include "caseembed/digest.hpp"
#include "caseembed/error.hpp"
#include "caseembed/evaluate.hpp"
#include "caseembed/factorize.hpp"
#include "caseembed/graphout.hpp"
#include "caseembed/panel.hpp"

using namespace caseembed;

struct ce_panel {
  ReturnsPanel panel;
};

struct ce_countmat {
  CountMatrix cm;
};

struct ce_embedding {
  EmbeddingMatrix e;
};

namespace {

thread_local std::string g_last_error;

ce_status to_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return CE_ERR_INVALID_ARGUMENT;
    case ErrorCode::Io: return CE_ERR_IO;
    case ErrorCode::Parse: return CE_ERR_PARSE;
    case ErrorCode::MissingSector: return CE_ERR_MISSING_SECTOR;
    case ErrorCode::RaggedSeries: return CE_ERR_RAGGED_SERIES;
    case ErrorCode::DuplicateRow: return CE_ERR_DUPLICATE_ROW;
    case ErrorCode::InsufficientHistory: return CE_ERR_INSUFFICIENT_HISTORY;
    case ErrorCode::WindowLongerThanSeries: return CE_ERR_WINDOW_LONGER_THAN_SERIES;
    case ErrorCode::DegenerateScaling: return CE_ERR_DEGENERATE_SCALING;
    case ErrorCode::Diverged: return CE_ERR_DIVERGED;
    case ErrorCode::DimensionMismatch: return CE_ERR_DIMENSION_MISMATCH;
  }
  return CE_ERR_INTERNAL;
}

// Runs fn and converts any exception into a status plus error text.
template <typename Fn>
ce_status guarded(Fn&& fn) {
  try {
    fn();
    return CE_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return CE_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return CE_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) fail(ErrorCode::InvalidArgument, std::string(what) + " is NULL");
}

template <typename E>
E checked_enum(int v, int hi, const char* what) {
  if (v < 0 || v > hi) fail(ErrorCode::InvalidArgument, std::string("invalid ") + what);
  return static_cast<E>(v);
}

Metric from_c(ce_metric m) {
  Metric out{checked_enum<MetricKind>(m.kind, 2, "metric kind"), m.hybrid_weight};
  if (out.kind == MetricKind::Hybrid) {
    require(m.hybrid_weight >= 0.0 && m.hybrid_weight <= 1.0, "hybrid weight must lie in [0, 1]");
  }
  return out;
}

ce_metric to_c(const Metric& m) { return {static_cast<int>(m.kind), m.hybrid_weight}; }

FactorizeConfig from_c(const ce_factorize_config& c) {
  FactorizeConfig f;
  f.d = c.d;
  f.lambda = c.lambda;
  f.learning_rate = c.learning_rate;
  f.epochs = c.epochs;
  f.seed = c.seed;
  f.tolerance = c.tolerance;
  return f;
}

ce_factorize_config to_c(const FactorizeConfig& f) {
  return {static_cast<uint32_t>(f.d), f.lambda, f.learning_rate,
          static_cast<uint32_t>(f.epochs), f.seed, f.tolerance};
}

ExperimentConfig from_c(const ce_experiment_config& c) {
  ExperimentConfig e;
  e.representation = checked_enum<Representation>(c.representation, 2, "representation");
  e.countmat_metric = from_c(c.countmat_metric);
  e.knn_metric = checked_enum<KnnMetric>(c.knn_metric, 1, "kNN metric");
  e.granularity = checked_enum<Granularity>(c.granularity, 2, "granularity");
  e.lookback = c.lookback;
  e.k_count = c.k_count;
  e.knn_k = c.knn_k;
  e.folds = c.folds;
  e.seed = c.seed;
  e.stratified = c.stratified != 0;
  e.factorize = from_c(c.factorize);
  return e;
}

ce_experiment_config to_c(const ExperimentConfig& e) {
  ce_experiment_config c{};
  c.representation = static_cast<int>(e.representation);
  c.countmat_metric = to_c(e.countmat_metric);
  c.knn_metric = static_cast<int>(e.knn_metric);
  c.granularity = static_cast<int>(e.granularity);
  c.lookback = static_cast<uint32_t>(e.lookback);
  c.k_count = static_cast<uint32_t>(e.k_count);
  c.knn_k = static_cast<uint32_t>(e.knn_k);
  c.folds = static_cast<uint32_t>(e.folds);
  c.seed = e.seed;
  c.stratified = e.stratified ? 1 : 0;
  c.factorize = to_c(e.factorize);
  return c;
}

void copy_hex(const std::string& hex, char out[65]) {
  std::memcpy(out, hex.c_str(), 64);
  out[64] = '\0';
}

CaseBase case_base(const ce_panel* panel, int representation, const ce_embedding* emb,
                   int knn_metric) {
  need(panel, "panel");
  return build_case_base(panel->panel,
                         checked_enum<Representation>(representation, 2, "representation"),
                         emb ? &emb->e : nullptr,
                         checked_enum<KnnMetric>(knn_metric, 1, "kNN metric"));
}

std::vector<std::size_t> query_rows(const ReturnsPanel& panel, const char* const* queries,
                                    size_t n_queries) {
  std::vector<std::size_t> rows;
  if (n_queries == 0) {
    for (std::size_t i = 0; i < panel.num_assets(); ++i) rows.push_back(i);
    return rows;
  }
  need(queries, "queries");
  for (size_t q = 0; q < n_queries; ++q) {
    need(queries[q], "query ticker");
    rows.push_back(panel.find(queries[q]).index);
  }
  return rows;
}

}  // namespace

extern "C" {

const char* ce_version(void) { return "0.1.0"; }

const char* ce_last_error(void) { return g_last_error.c_str(); }

const char* ce_status_name(ce_status status) {
  switch (status) {
    case CE_OK: return "ok";
    case CE_ERR_INVALID_ARGUMENT: return "invalid argument";
    case CE_ERR_IO: return "i/o error";
    case CE_ERR_PARSE: return "parse error";
    case CE_ERR_MISSING_SECTOR: return "missing sector";
    case CE_ERR_RAGGED_SERIES: return "ragged series";
    case CE_ERR_DUPLICATE_ROW: return "duplicate row";
    case CE_ERR_INSUFFICIENT_HISTORY: return "insufficient history";
    case CE_ERR_WINDOW_LONGER_THAN_SERIES: return "window longer than series";
    case CE_ERR_DEGENERATE_SCALING: return "degenerate scaling";
    case CE_ERR_DIVERGED: return "diverged";
    case CE_ERR_DIMENSION_MISMATCH: return "dimension mismatch";
    case CE_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

ce_status ce_metric_parse(const char* text, ce_metric* out) {
  return guarded([&] {
    need(text, "text");
    need(out, "out");
    *out = to_c(parse_metric(text));
  });
}

ce_status ce_granularity_parse(const char* text, int* out) {
  return guarded([&] {
    need(text, "text");
    need(out, "out");
    *out = static_cast<int>(parse_granularity(text));
  });
}

ce_status ce_representation_parse(const char* text, int* out) {
  return guarded([&] {
    need(text, "text");
    need(out, "out");
    *out = static_cast<int>(parse_representation(text));
  });
}

ce_status ce_knn_metric_parse(const char* text, int* out) {
  return guarded([&] {
    need(text, "text");
    need(out, "out");
    *out = static_cast<int>(parse_knn_metric(text));
  });
}

ce_status ce_panel_load(const char* returns_csv, const char* meta_csv, int granularity,
                        ce_panel** out) {
  return guarded([&] {
    need(returns_csv, "returns_csv");
    need(meta_csv, "meta_csv");
    need(out, "out");
    *out = new ce_panel{load_panel(returns_csv, meta_csv,
                                   checked_enum<Granularity>(granularity, 2, "granularity"))};
  });
}

ce_status ce_panel_aggregate(const ce_panel* panel, int target, int mode, ce_panel** out) {
  return guarded([&] {
    need(panel, "panel");
    need(out, "out");
    *out = new ce_panel{aggregate(panel->panel,
                                  checked_enum<Granularity>(target, 2, "granularity"),
                                  checked_enum<AggregationMode>(mode, 1, "aggregation mode"))};
  });
}

ce_status ce_panel_write(const ce_panel* panel, const char* returns_csv, const char* meta_csv) {
  return guarded([&] {
    need(panel, "panel");
    need(returns_csv, "returns_csv");
    write_panel(panel->panel, returns_csv);
    if (meta_csv) write_meta(panel->panel, meta_csv);
  });
}

size_t ce_panel_num_assets(const ce_panel* panel) { return panel ? panel->panel.num_assets() : 0; }
size_t ce_panel_num_periods(const ce_panel* panel) {
  return panel ? panel->panel.num_periods() : 0;
}
size_t ce_panel_num_classes(const ce_panel* panel) {
  return panel ? panel->panel.classes().size() : 0;
}
int ce_panel_granularity(const ce_panel* panel) {
  return panel ? static_cast<int>(panel->panel.granularity()) : -1;
}
const char* ce_panel_ticker(const ce_panel* panel, size_t index) {
  if (!panel || index >= panel->panel.num_assets()) return nullptr;
  return panel->panel.asset(index).ticker.c_str();
}
const char* ce_panel_sector(const ce_panel* panel, size_t index) {
  if (!panel || index >= panel->panel.num_assets()) return nullptr;
  return panel->panel.sector(index).c_str();
}
double ce_panel_return(const ce_panel* panel, size_t asset, size_t t) {
  if (!panel || asset >= panel->panel.num_assets() || t >= panel->panel.num_periods()) {
    return 0.0;
  }
  return panel->panel.returns()(asset, t);
}

ce_status ce_panel_digest(const ce_panel* panel, char out[65]) {
  return guarded([&] {
    need(panel, "panel");
    need(out, "out");
    copy_hex(panel_digest(panel->panel), out);
  });
}

void ce_panel_free(ce_panel* panel) { delete panel; }

ce_status ce_countmat_compute(const ce_panel* panel, size_t lookback, size_t k, ce_metric metric,
                              unsigned threads, ce_countmat** out, size_t* zero_variance) {
  return guarded([&] {
    need(panel, "panel");
    need(out, "out");
    SimDiagnostics diag;
    CountOptions opts;
    opts.threads = threads;
    opts.diagnostics = &diag;
    *out = new ce_countmat{accumulate_counts(panel->panel, lookback, k, from_c(metric), opts)};
    if (zero_variance) *zero_variance = diag.zero_variance.load();
  });
}

ce_status ce_countmat_read(const char* path, ce_countmat** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new ce_countmat{read_countmat(path)};
  });
}

ce_status ce_countmat_write(const ce_countmat* cm, const char* path) {
  return guarded([&] {
    need(cm, "count matrix");
    need(path, "path");
    write_countmat(cm->cm, path);
  });
}

size_t ce_countmat_size(const ce_countmat* cm) { return cm ? cm->cm.size() : 0; }
size_t ce_countmat_k(const ce_countmat* cm) { return cm ? cm->cm.k : 0; }
size_t ce_countmat_lookback(const ce_countmat* cm) { return cm ? cm->cm.lookback : 0; }
size_t ce_countmat_tvalid(const ce_countmat* cm) { return cm ? cm->cm.t_valid : 0; }
int ce_countmat_granularity(const ce_countmat* cm) {
  return cm ? static_cast<int>(cm->cm.granularity) : -1;
}
ce_metric ce_countmat_metric(const ce_countmat* cm) {
  return cm ? to_c(cm->cm.metric) : ce_metric{-1, 0.0};
}
uint32_t ce_countmat_get(const ce_countmat* cm, size_t i, size_t j) {
  if (!cm || i >= cm->cm.size() || j >= cm->cm.size()) return 0;
  return cm->cm.counts(i, j);
}
void ce_countmat_free(ce_countmat* cm) { delete cm; }

ce_factorize_config ce_factorize_default_config(void) { return to_c(FactorizeConfig{}); }

ce_status ce_embed_train(const ce_countmat* cm, const ce_factorize_config* cfg,
                         ce_embedding** out) {
  return guarded([&] {
    need(cm, "count matrix");
    need(cfg, "config");
    need(out, "out");
    *out = new ce_embedding{factorize(clip_transform_scale(cm->cm), from_c(*cfg))};
  });
}

ce_status ce_embedding_write(const ce_embedding* e, const ce_panel* panel, const char* csv_path,
                             const char* meta_path) {
  return guarded([&] {
    need(e, "embedding");
    need(panel, "panel");
    need(csv_path, "csv_path");
    std::vector<std::string> tickers;
    for (const auto& a : panel->panel.assets()) tickers.push_back(a.ticker);
    write_embeddings(e->e, tickers, csv_path,
                     meta_path ? std::filesystem::path(meta_path) : std::filesystem::path());
  });
}

ce_status ce_embedding_read(const char* csv_path, const char* meta_path, const ce_panel* panel,
                            ce_embedding** out) {
  return guarded([&] {
    need(csv_path, "csv_path");
    need(panel, "panel");
    need(out, "out");
    std::vector<std::string> tickers;
    EmbeddingMatrix raw = read_embeddings(
        csv_path, tickers, meta_path ? std::filesystem::path(meta_path) : std::filesystem::path());
    std::unordered_map<std::string, std::size_t> row_of;
    for (std::size_t r = 0; r < tickers.size(); ++r) {
      if (!row_of.emplace(tickers[r], r).second) {
        fail(ErrorCode::Parse, "duplicate ticker '" + tickers[r] + "' in embedding file");
      }
    }
    const auto& p = panel->panel;
    EmbeddingMatrix e;
    e.meta = raw.meta;
    e.vectors = Matrix<double>(p.num_assets(), raw.dim());
    for (std::size_t i = 0; i < p.num_assets(); ++i) {
      auto it = row_of.find(p.asset(i).ticker);
      if (it == row_of.end()) {
        fail(ErrorCode::DimensionMismatch,
             "embedding file has no row for '" + p.asset(i).ticker + "'");
      }
      auto src = raw.vectors.row(it->second);
      std::copy(src.begin(), src.end(), e.vectors.row(i).begin());
    }
    *out = new ce_embedding{std::move(e)};
  });
}

size_t ce_embedding_size(const ce_embedding* e) { return e ? e->e.size() : 0; }
size_t ce_embedding_dim(const ce_embedding* e) { return e ? e->e.dim() : 0; }
double ce_embedding_get(const ce_embedding* e, size_t i, size_t k) {
  if (!e || i >= e->e.size() || k >= e->e.dim()) return 0.0;
  return e->e.vectors(i, k);
}
double ce_embedding_final_loss(const ce_embedding* e) { return e ? e->e.meta.final_loss : 0.0; }
size_t ce_embedding_epochs_run(const ce_embedding* e) { return e ? e->e.meta.epochs_run : 0; }
void ce_embedding_free(ce_embedding* e) { delete e; }

ce_status ce_classify(const ce_panel* panel, int representation, const ce_embedding* embeddings,
                      int knn_metric, size_t knn_k, const char* const* queries, size_t n_queries,
                      const char* csv_path, double* accuracy) {
  return guarded([&] {
    const CaseBase base = case_base(panel, representation, embeddings, knn_metric);
    std::vector<Prediction> predictions;
    std::size_t hits = 0;
    for (std::size_t row : query_rows(panel->panel, queries, n_queries)) {
      predictions.push_back(knn_predict(base, row, knn_k));
      if (predictions.back().predicted == base.labels[row]) ++hits;
    }
    if (csv_path) write_explanations(base, predictions, csv_path);
    if (accuracy) {
      *accuracy = static_cast<double>(hits) / static_cast<double>(predictions.size());
    }
  });
}

ce_status ce_explain(const ce_panel* panel, int representation, const ce_embedding* embeddings,
                     int knn_metric, size_t knn_k, const char* const* queries, size_t n_queries,
                     char** text) {
  return guarded([&] {
    need(text, "text");
    const CaseBase base = case_base(panel, representation, embeddings, knn_metric);
    const auto& p = panel->panel;
    auto describe = [&](std::size_t row) {
      std::string s = p.asset(row).ticker + " - " + p.sector(row);
      if (!p.industry(row).empty()) s += " - " + p.industry(row);
      return s;
    };
    std::ostringstream out;
    for (std::size_t row : query_rows(p, queries, n_queries)) {
      const Prediction pred = knn_predict(base, row, knn_k);
      out << describe(row) << "  (predicted: " << pred.predicted << ")\n";
      for (const auto& nb : pred.neighbors) {
        char score[32];
        std::snprintf(score, sizeof score, "%.4f", nb.score);
        out << "    " << describe(nb.row) << "  " << score << '\n';
      }
    }
    const std::string s = out.str();
    *text = new char[s.size() + 1];
    std::memcpy(*text, s.c_str(), s.size() + 1);
  });
}

void ce_string_free(char* text) { delete[] text; }

ce_experiment_config ce_experiment_default_config(void) { return to_c(ExperimentConfig{}); }

size_t ce_reference_grid(const ce_experiment_config* base, ce_experiment_config* out, size_t cap) {
  try {
    const auto grid = reference_grid(base ? from_c(*base) : ExperimentConfig{});
    if (out) {
      for (std::size_t i = 0; i < grid.size() && i < cap; ++i) out[i] = to_c(grid[i]);
    }
    return grid.size();
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return 0;
  }
}

ce_status ce_evaluate(const ce_panel* panel, const ce_experiment_config* cfg,
                      const char* cache_dir, unsigned threads, const char* report_json,
                      const char* results_csv, double weighted_prf[3]) {
  return guarded([&] {
    need(panel, "panel");
    need(cfg, "config");
    ArtifactCache cache = cache_dir ? ArtifactCache(cache_dir) : ArtifactCache();
    GridRow row{0, run_experiment(panel->panel, from_c(*cfg), cache, threads)};
    if (report_json) write_report_json(row.report, report_json);
    if (results_csv) write_results_table(std::span<const GridRow>(&row, 1), results_csv);
    if (weighted_prf) {
      weighted_prf[0] = row.report.overall.weighted.precision;
      weighted_prf[1] = row.report.overall.weighted.recall;
      weighted_prf[2] = row.report.overall.weighted.f1;
    }
  });
}

ce_status ce_grid(const ce_panel* panel, const ce_experiment_config* configs, size_t n_configs,
                  const char* cache_dir, unsigned threads, const char* results_csv,
                  const char* errors_csv, size_t* n_rows, size_t* n_errors) {
  return guarded([&] {
    need(panel, "panel");
    if (n_configs > 0) need(configs, "configs");
    std::vector<ExperimentConfig> grid;
    std::vector<GridError> bad;
    for (size_t i = 0; i < n_configs; ++i) {
      try {
        grid.push_back(from_c(configs[i]));
      } catch (const std::exception& e) {
        bad.push_back({i, ExperimentConfig{}, e.what()});
      }
    }
    ArtifactCache cache = cache_dir ? ArtifactCache(cache_dir) : ArtifactCache();
    GridResult result = run_grid(panel->panel, grid, cache, threads);
    result.errors.insert(result.errors.end(), bad.begin(), bad.end());
    if (results_csv) write_results_table(result.rows, results_csv);
    if (errors_csv) write_grid_errors(result.errors, errors_csv);
    if (n_rows) *n_rows = result.rows.size();
    if (n_errors) *n_errors = result.errors.size();
  });
}

ce_status ce_export_graph(const ce_embedding* e, const ce_panel* panel, double threshold,
                          const char* edges_csv, const char* nodes_csv, const char* gexf_path,
                          const char* outliers_csv, size_t* n_edges, double* overall_purity) {
  return guarded([&] {
    need(e, "embedding");
    need(panel, "panel");
    const SimilarityGraph g = build_graph(e->e, panel->panel, threshold);
    const PurityTable purity = cluster_purity(g);
    if (edges_csv) write_edge_csv(g, edges_csv);
    if (nodes_csv) write_node_csv(g, purity, nodes_csv);
    if (gexf_path) write_gexf(g, gexf_path);
    if (outliers_csv) write_outlier_csv(g, purity, outliers_csv);
    if (n_edges) *n_edges = g.edges.size();
    if (overall_purity) *overall_purity = purity.overall;
  });
}

ce_status ce_file_sha256(const char* path, char out[65]) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    copy_hex(sha256_file(path), out);
  });
}

ce_status ce_sha256(const void* data, size_t len, char out[65]) {
  return guarded([&] {
    if (len > 0) need(data, "data");
    need(out, "out");
    copy_hex(sha256_hex(std::string_view(static_cast<const char*>(data), len)), out);
  });
}

}  // extern "C"
