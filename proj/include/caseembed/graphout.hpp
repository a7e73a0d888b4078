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
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "caseembed/factorize.hpp"
#include "caseembed/panel.hpp"

namespace caseembed {

struct GraphNode {
  std::string ticker;
  std::string sector;
};

struct GraphEdge {
  std::size_t source = 0;  // source < target
  std::size_t target = 0;
  double similarity = 0.0;
};

// Undirected graph joining embedding rows whose cosine similarity reaches
// the threshold. Zero-norm rows stay isolated (see `zero_norm_nodes`).
struct SimilarityGraph {
  std::vector<GraphNode> nodes;
  std::vector<GraphEdge> edges;  // sorted by (source, target)
  double threshold = 0.0;
  std::vector<std::size_t> zero_norm_nodes;
};

double cosine_similarity(std::span<const double> a, std::span<const double> b);

// threshold must lie in (-1, 1].
SimilarityGraph build_graph(const EmbeddingMatrix& embeddings, const ReturnsPanel& panel,
                            double threshold);

struct NodePurity {
  std::size_t degree = 0;
  double purity = 0.0;  // meaningful only when degree > 0
  std::string dominant_neighbor_sector;  // most frequent; ties lexicographic
};

struct PurityTable {
  std::vector<NodePurity> nodes;
  std::map<std::string, double> sector_mean;     // over non-isolated nodes
  std::map<std::string, std::size_t> sector_isolated;
  double overall = 0.0;
  std::size_t isolated = 0;
  // Non-isolated nodes whose purity falls below the outlier cutoff, most
  // extreme first.
  std::vector<std::size_t> outliers;
};

PurityTable cluster_purity(const SimilarityGraph& graph, double outlier_cutoff = 0.5);

// `source_ticker,target_ticker,similarity`
void write_edge_csv(const SimilarityGraph& g, const std::filesystem::path& path);
// `ticker,sector,degree,purity` (purity empty for isolated nodes)
void write_node_csv(const SimilarityGraph& g, const PurityTable& p,
                    const std::filesystem::path& path);
// `ticker,sector,degree,purity,dominant_neighbor_sector`, one row per outlier.
void write_outlier_csv(const SimilarityGraph& g, const PurityTable& p,
                       const std::filesystem::path& path);
// GEXF 1.2 with `sector` as a node attribute and similarity as edge weight.
void write_gexf(const SimilarityGraph& g, const std::filesystem::path& path);

}  // namespace caseembed
