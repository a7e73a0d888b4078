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

#include "caseembed/classify.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

#include "caseembed/error.hpp"
#include "caseembed/simmetric.hpp"
#include "caseembed/stats.hpp"
#include "csv.hpp"

namespace caseembed {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

double knn_score(const CaseBase& base, std::size_t a, std::size_t b) {
  switch (base.knn_metric) {
    case KnnMetric::EuclideanDist: return euclidean_sim(base.vectors.row(a), base.vectors.row(b));
    case KnnMetric::PearsonCorr: return pearson_sim(base.vectors.row(a), base.vectors.row(b));
  }
  return 0.0;
}

}  // namespace

const char* to_string(Representation r) {
  switch (r) {
    case Representation::Summary: return "Summary";
    case Representation::Raw: return "Raw";
    case Representation::Embedding: return "Embedding";
  }
  return "?";
}

Representation parse_representation(const std::string& s) {
  const std::string l = lower(s);
  if (l == "summary") return Representation::Summary;
  if (l == "raw") return Representation::Raw;
  if (l == "embedding" || l == "embeddings") return Representation::Embedding;
  fail(ErrorCode::InvalidArgument, "unknown representation '" + s + "'");
}

const char* to_string(KnnMetric m) {
  return m == KnnMetric::EuclideanDist ? "euclidean" : "pearson";
}

const char* short_name(KnnMetric m) { return m == KnnMetric::EuclideanDist ? "E" : "P"; }

KnnMetric parse_knn_metric(const std::string& s) {
  const std::string l = lower(s);
  if (l == "euclidean" || l == "e") return KnnMetric::EuclideanDist;
  if (l == "pearson" || l == "p" || l == "correlation") return KnnMetric::PearsonCorr;
  fail(ErrorCode::InvalidArgument, "unknown kNN metric '" + s + "'");
}

std::array<double, kSummaryFeatures> summary_features(const ReturnsPanel& panel,
                                                      std::size_t asset) {
  require(asset < panel.num_assets(), "asset index out of range");
  const auto s = panel.series(asset);
  require(s.size() >= 2, "summary features need at least 2 observations");
  const std::vector<double> v(s.begin(), s.end());
  const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
  return {mean(s), *mn, *mx, sample_stddev(s), percentile(v, 25.0), percentile(v, 50.0),
          percentile(v, 75.0)};
}

CaseBase build_case_base(const ReturnsPanel& panel, Representation representation,
                         const EmbeddingMatrix* embeddings, KnnMetric knn_metric) {
  const std::size_t n = panel.num_assets();
  CaseBase base;
  base.representation = representation;
  base.knn_metric = knn_metric;
  base.labels = panel.sectors();
  base.asset_index.resize(n);
  std::iota(base.asset_index.begin(), base.asset_index.end(), 0);
  for (const auto& a : panel.assets()) base.tickers.push_back(a.ticker);

  if (representation == Representation::Embedding) {
    require(embeddings != nullptr, "the Embedding representation needs embeddings");
  } else {
    require(embeddings == nullptr, "embeddings given for a non-Embedding representation");
  }

  switch (representation) {
    case Representation::Summary:
      base.vectors = Matrix<double>(n, kSummaryFeatures);
      for (std::size_t i = 0; i < n; ++i) {
        const auto f = summary_features(panel, i);
        std::copy(f.begin(), f.end(), base.vectors.row(i).begin());
      }
      break;
    case Representation::Raw:
      base.vectors = panel.returns();
      break;
    case Representation::Embedding:
      if (embeddings->size() != n) {
        fail(ErrorCode::DimensionMismatch,
             "embedding rows (" + std::to_string(embeddings->size()) +
                 ") differ from panel assets (" + std::to_string(n) + ")");
      }
      base.vectors = embeddings->vectors;
      break;
  }

  if (knn_metric == KnnMetric::PearsonCorr && representation != Representation::Raw) {
    base.warnings.push_back(std::string(to_string(representation)) +
                            " + pearson is outside the evaluated configuration grid");
  }
  return base;
}

Prediction knn_query(const CaseBase& base, std::size_t query,
                     std::span<const std::size_t> candidates, std::size_t k) {
  require(query < base.size(), "query row out of range");
  std::vector<Neighbor> pool;
  pool.reserve(candidates.size());
  for (std::size_t c : candidates) {
    require(c < base.size(), "candidate row out of range");
    if (c == query) continue;
    pool.push_back({c, knn_score(base, query, c)});
  }
  if (k < 1 || k > pool.size()) {
    fail(ErrorCode::InvalidArgument, "kNN k=" + std::to_string(k) +
                                         " out of range [1, " + std::to_string(pool.size()) +
                                         "]");
  }

  auto closer = [&](const Neighbor& a, const Neighbor& b) {
    if (a.score != b.score) return a.score > b.score;
    return base.asset_index[a.row] < base.asset_index[b.row];
  };
  std::partial_sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k), pool.end(),
                    closer);
  pool.resize(k);

  Prediction p;
  p.query = query;
  p.neighbors = std::move(pool);
  for (const auto& nb : p.neighbors) ++p.vote_counts[base.labels[nb.row]];

  std::size_t best = 0;
  for (const auto& [label, count] : p.vote_counts) best = std::max(best, count);
  const std::string& nearest = base.labels[p.neighbors.front().row];
  if (p.vote_counts[nearest] == best) {
    p.predicted = nearest;
  } else {
    // map iteration is lexicographic
    for (const auto& [label, count] : p.vote_counts) {
      if (count == best) {
        p.predicted = label;
        break;
      }
    }
  }
  return p;
}

Prediction knn_predict(const CaseBase& base, std::size_t query, std::size_t k) {
  std::vector<std::size_t> all(base.size());
  std::iota(all.begin(), all.end(), 0);
  return knn_query(base, query, all, k);
}

void write_explanations(const CaseBase& base, std::span<const Prediction> predictions,
                        const std::filesystem::path& path) {
  auto out = detail::open_out(path.string());
  std::size_t width = 0;
  for (const auto& p : predictions) width = std::max(width, p.neighbors.size());
  out << "query,predicted,true";
  for (std::size_t r = 1; r <= width; ++r) {
    out << ",neighbor" << r << ",neighbor" << r << "_sector,neighbor" << r << "_score";
  }
  out << '\n';
  for (const auto& p : predictions) {
    out << detail::csv_field(base.tickers[p.query]) << ',' << detail::csv_field(p.predicted)
        << ',' << detail::csv_field(base.labels[p.query]);
    for (std::size_t r = 0; r < width; ++r) {
      if (r < p.neighbors.size()) {
        const auto& nb = p.neighbors[r];
        out << ',' << detail::csv_field(base.tickers[nb.row]) << ','
            << detail::csv_field(base.labels[nb.row]) << ','
            << detail::format_double(nb.score);
      } else {
        out << ",,,";
      }
    }
    out << '\n';
  }
  if (!out) fail(ErrorCode::Io, "write failed for '" + path.string() + "'");
}

}  // namespace caseembed
