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

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "caseembed/factorize.hpp"
#include "caseembed/matrix.hpp"
#include "caseembed/panel.hpp"

namespace caseembed {

enum class Representation { Summary = 0, Raw = 1, Embedding = 2 };
enum class KnnMetric { EuclideanDist = 0, PearsonCorr = 1 };

const char* to_string(Representation r);
Representation parse_representation(const std::string& s);
const char* to_string(KnnMetric m);
const char* short_name(KnnMetric m);
KnnMetric parse_knn_metric(const std::string& s);

inline constexpr std::size_t kSummaryFeatures = 7;

// mean, min, max, volatility (sample std), 25th percentile, median, 75th percentile.
std::array<double, kSummaryFeatures> summary_features(const ReturnsPanel& panel,
                                                      std::size_t asset);

struct CaseBase {
  Representation representation = Representation::Raw;
  KnnMetric knn_metric = KnnMetric::EuclideanDist;
  Matrix<double> vectors;           // one row per case
  std::vector<std::string> labels;  // sector per row
  std::vector<std::size_t> asset_index;  // identity used for tie-breaks
  std::vector<std::string> tickers;
  std::vector<std::string> warnings;

  std::size_t size() const { return vectors.rows(); }
};

// Rows follow panel order. `embeddings` is required for the Embedding
// representation and must have one row per panel asset. Pairings outside
// {Summary, Raw, Embedding} + Euclidean and Raw + Pearson are allowed but
// recorded in `warnings`.
CaseBase build_case_base(const ReturnsPanel& panel, Representation representation,
                         const EmbeddingMatrix* embeddings, KnnMetric knn_metric);

struct Neighbor {
  std::size_t row = 0;
  double score = 0.0;  // higher = closer (negated distance for Euclidean)
};

struct Prediction {
  std::size_t query = 0;
  std::string predicted;
  std::vector<Neighbor> neighbors;  // nearest first
  std::map<std::string, std::size_t> vote_counts;
};

// Classifies row `query` against `candidates` (the query itself is skipped if
// present). Neighbors rank by score, then by ascending asset index. A vote tie
// goes to the nearest neighbour's class when it is among the tied classes,
// otherwise to the lexicographically smallest tied label.
Prediction knn_query(const CaseBase& base, std::size_t query,
                     std::span<const std::size_t> candidates, std::size_t k);

// Leave-one-out against the whole case base.
Prediction knn_predict(const CaseBase& base, std::size_t query, std::size_t k);

// `query,predicted,true,neighbor1,neighbor1_sector,neighbor1_score,...`
void write_explanations(const CaseBase& base, std::span<const Prediction> predictions,
                        const std::filesystem::path& path);

}  // namespace caseembed
