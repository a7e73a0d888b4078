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

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "caseembed/classify.hpp"
#include "caseembed/countmat.hpp"
#include "caseembed/factorize.hpp"
#include "caseembed/panel.hpp"

namespace caseembed {

struct ExperimentConfig {
  Representation representation = Representation::Embedding;
  Metric countmat_metric{MetricKind::Hybrid, 0.5};  // Embedding only
  KnnMetric knn_metric = KnnMetric::EuclideanDist;
  Granularity granularity = Granularity::Daily;
  std::size_t lookback = 5;  // Embedding only; 0 otherwise
  std::size_t k_count = 50;
  std::size_t knn_k = 5;
  std::size_t folds = 5;
  std::uint64_t seed = 0;
  bool stratified = true;
  FactorizeConfig factorize;  // d, lambda, optimiser; seed comes from `seed`

  // One-line description, e.g. "Embedding+H/E/daily/5".
  std::string label() const;
};

// The 27 configurations of the reference results table, in table order.
std::vector<ExperimentConfig> reference_grid(const ExperimentConfig& base = {});

struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Stratified by default: members of each class are shuffled and dealt
// round-robin, continuing the dealer position across classes, so per-class
// and overall fold sizes each differ by at most one.
std::vector<Fold> kfold_split(std::span<const std::string> labels, std::size_t folds,
                              std::uint64_t seed, bool stratified = true,
                              std::vector<std::string>* warnings = nullptr);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

struct Scores {
  std::map<std::string, ClassMetrics> per_class;
  ClassMetrics weighted;  // support = number of evaluated cases
};

struct ClassificationReport {
  Scores overall;
  std::vector<Scores> folds;
  ExperimentConfig config;
  std::vector<std::string> warnings;
};

// One-vs-rest per-class metrics with support weighting. An empty
// denominator yields 0 for that metric.
Scores score_report(std::span<const std::string> truth,
                    std::span<const std::string> predicted,
                    std::span<const std::string> classes);

// Count matrices and embeddings keyed by panel content and stage config.
// In-memory always; mirrored to `directory` when one is given. Not
// thread-safe.
class ArtifactCache {
 public:
  ArtifactCache() = default;
  explicit ArtifactCache(std::filesystem::path directory);

  const CountMatrix& counts(const ReturnsPanel& panel, std::size_t lookback, std::size_t k,
                            const Metric& metric, unsigned threads);
  const EmbeddingMatrix& embeddings(const ReturnsPanel& panel, std::size_t lookback,
                                    std::size_t k, const Metric& metric,
                                    const FactorizeConfig& cfg, unsigned threads);

  std::size_t countmat_computations() const { return countmat_computations_; }
  std::size_t factorizations() const { return factorizations_; }

 private:
  std::optional<std::filesystem::path> dir_;
  std::map<std::string, CountMatrix> counts_;
  std::map<std::string, EmbeddingMatrix> embeddings_;
  std::size_t countmat_computations_ = 0;
  std::size_t factorizations_ = 0;
};

// Embeddings (when needed) are learned once from the full panel; folds
// partition only the classification case base.
ClassificationReport run_experiment(const ReturnsPanel& panel, const ExperimentConfig& cfg,
                                    ArtifactCache& cache, unsigned threads = 0);

struct GridRow {
  std::size_t index = 0;  // position in the submitted grid
  ClassificationReport report;
};

struct GridError {
  std::size_t index = 0;
  ExperimentConfig config;
  std::string message;
};

struct GridResult {
  std::vector<GridRow> rows;  // table order
  std::vector<GridError> errors;
};

// A failing configuration is recorded and the rest of the grid still runs.
GridResult run_grid(const ReturnsPanel& panel, std::span<const ExperimentConfig> grid,
                    ArtifactCache& cache, unsigned threads = 0);

// `representation,countmat_metric,knn_metric,granularity,lookback,precision,recall,f1`
void write_results_table(std::span<const GridRow> rows, const std::filesystem::path& path);
void write_grid_errors(std::span<const GridError> errors, const std::filesystem::path& path);
void write_report_json(const ClassificationReport& report, const std::filesystem::path& path);

}  // namespace caseembed
