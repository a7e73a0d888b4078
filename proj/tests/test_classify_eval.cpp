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

#include <doctest.h>

#include <random>
#include <set>

#include "caseembed/classify.hpp"
#include "caseembed/error.hpp"
#include "caseembed/evaluate.hpp"
#include "caseembed/graphout.hpp"
#include "support.hpp"

using namespace caseembed;
using Strings = std::vector<std::string>;

namespace {

CaseBase line_base(const std::vector<double>& xs, const Strings& labels) {
  CaseBase b;
  b.vectors = Matrix<double>(xs.size(), 2, 0.0);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    b.vectors(i, 0) = xs[i];
    b.asset_index.push_back(i);
    b.tickers.push_back(testing::ticker_name(i));
  }
  b.labels = labels;
  return b;
}

EmbeddingMatrix embedding_of(const Matrix<double>& v) {
  EmbeddingMatrix e;
  e.vectors = v;
  return e;
}

}  // namespace

TEST_CASE("summary features") {
  Matrix<double> r(2, 5);
  for (int i = 0; i < 5; ++i) {
    r(0, i) = i + 1;
    r(1, i) = 0.25;
  }
  const auto p = testing::make_panel(r);
  const auto f = summary_features(p, 0);
  CHECK(f[0] == 3.0);
  CHECK(f[1] == 1.0);
  CHECK(f[2] == 5.0);
  CHECK(f[3] == doctest::Approx(std::sqrt(2.5)).epsilon(1e-15));
  CHECK(f[4] == 2.0);
  CHECK(f[5] == 3.0);
  CHECK(f[6] == 4.0);
  const auto c = summary_features(p, 1);
  CHECK(c == std::array<double, 7>{0.25, 0.25, 0.25, 0.0, 0.25, 0.25, 0.25});

  Matrix<double> s(1, 3);
  s(0, 0) = -0.3;
  s(0, 1) = 0.0;
  s(0, 2) = 0.3;
  const auto sym = summary_features(testing::make_panel(s), 0);
  CHECK(sym[0] == doctest::Approx(0.0));
  CHECK(sym[5] == 0.0);
}

TEST_CASE("case base shapes") {
  std::mt19937_64 g(1);
  const auto p = testing::make_panel(testing::random_returns(g, 4, 12, false));
  CHECK(build_case_base(p, Representation::Summary, nullptr, KnnMetric::EuclideanDist).vectors.cols() == 7);
  CHECK(build_case_base(p, Representation::Raw, nullptr, KnnMetric::PearsonCorr).vectors.cols() == 12);
  const auto e = embedding_of(Matrix<double>(4, 15, 0.5));
  const auto b = build_case_base(p, Representation::Embedding, &e, KnnMetric::EuclideanDist);
  CHECK(b.vectors.cols() == 15);
  CHECK(b.warnings.empty());
  CHECK_FALSE(build_case_base(p, Representation::Summary, nullptr, KnnMetric::PearsonCorr).warnings.empty());
  CHECK_THROWS_AS(build_case_base(p, Representation::Embedding, nullptr, KnnMetric::EuclideanDist), Error);
  const auto wrong = embedding_of(Matrix<double>(3, 2, 0.5));
  CHECK_THROWS_AS(build_case_base(p, Representation::Embedding, &wrong, KnnMetric::EuclideanDist), Error);
}

TEST_CASE("kNN voting") {
  // query sits at 0
  const auto majority = line_base({0, 1, 2, 3, 4, 5}, {"Q", "Finance", "Energy", "Finance", "Finance", "Energy"});
  CHECK(knn_predict(majority, 0, 5).predicted == "Finance");

  const auto tie = line_base({0, 1, 2, 3, 4, 10}, {"Q", "Energy", "Finance", "Finance", "Energy", "Tech"});
  const auto p = knn_predict(tie, 0, 4);
  CHECK(p.predicted == "Energy");
  CHECK(p.vote_counts.at("Energy") == 2);
  REQUIRE(p.neighbors.size() == 4);
  CHECK(p.neighbors[0].row == 1);
  CHECK(p.neighbors[0].score == -1.0);

  const auto outside = line_base({0, 1, 2, 3, 4, 5}, {"Q", "Tech", "B", "B", "A", "A"});
  CHECK(knn_predict(outside, 0, 5).predicted == "A");

  const auto dup = line_base({7, 7, 1, 2}, {"Q", "L", "M", "M"});
  CHECK(knn_predict(dup, 0, 1).predicted == "L");

  // equidistant neighbours resolved by asset index
  const auto eq = line_base({0, -1, 1}, {"Q", "X", "Y"});
  const auto e = knn_predict(eq, 0, 1);
  CHECK(e.neighbors[0].row == 1);
  CHECK(e.predicted == "X");
}

TEST_CASE("kNN Pearson scores") {
  CaseBase b;
  b.knn_metric = KnnMetric::PearsonCorr;
  b.vectors = Matrix<double>(3, 3);
  const double rows[3][3] = {{1, 2, 3}, {3, 2, 1}, {2, 4, 7}};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) b.vectors(i, j) = rows[i][j];
    b.asset_index.push_back(i);
    b.tickers.push_back(testing::ticker_name(i));
  }
  b.labels = {"A", "B", "A"};
  const auto p = knn_predict(b, 0, 1);
  CHECK(p.neighbors[0].row == 2);
  CHECK(p.predicted == "A");
}

TEST_CASE("stratified folds") {
  Strings labels;
  for (int i = 0; i < 10; ++i) labels.push_back(i % 2 ? "B" : "A");
  const auto folds = kfold_split(labels, 5, 42);
  REQUIRE(folds.size() == 5);
  std::multiset<std::size_t> seen;
  for (const auto& f : folds) {
    REQUIRE(f.test.size() == 2);
    CHECK(labels[f.test[0]] != labels[f.test[1]]);
    CHECK(f.train.size() == 8);
    seen.insert(f.test.begin(), f.test.end());
    for (auto i : f.test) CHECK(std::find(f.train.begin(), f.train.end(), i) == f.train.end());
  }
  CHECK(seen.size() == 10);
  CHECK(std::set<std::size_t>(seen.begin(), seen.end()).size() == 10);

  const auto again = kfold_split(labels, 5, 42);
  for (std::size_t i = 0; i < 5; ++i) CHECK(again[i].test == folds[i].test);

  Strings rare = labels;
  rare[0] = "C";
  std::vector<std::string> warnings;
  kfold_split(rare, 5, 1, true, &warnings);
  CHECK_FALSE(warnings.empty());
  CHECK_THROWS_AS(kfold_split(labels, 11, 1), Error);
}

TEST_CASE("classification report") {
  const Strings classes{"A", "B"};
  const auto s = score_report(Strings{"A", "A", "B", "B"}, Strings{"A", "B", "B", "B"}, classes);
  CHECK(s.per_class.at("A").precision == 1.0);
  CHECK(s.per_class.at("A").recall == 0.5);
  CHECK(s.per_class.at("A").f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(s.per_class.at("B").precision == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(s.per_class.at("B").recall == 1.0);
  CHECK(s.per_class.at("B").f1 == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(std::fabs(s.weighted.f1 - 11.0 / 15.0) < 1e-12);

  const auto perfect = score_report(Strings{"A", "B", "B"}, Strings{"A", "B", "B"}, classes);
  CHECK(perfect.weighted.precision == 1.0);
  CHECK(perfect.weighted.recall == 1.0);
  CHECK(perfect.weighted.f1 == 1.0);

  const auto lazy = score_report(Strings{"A", "A", "B", "B"}, Strings{"A", "A", "A", "A"}, classes);
  CHECK(lazy.weighted.recall == 0.5);
  CHECK(lazy.per_class.at("B").precision == 0.0);

  std::mt19937_64 g(7);
  const Strings pool{"a", "b", "c", "d"};
  for (int trial = 0; trial < 200; ++trial) {
    Strings t, p;
    const std::size_t n = 1 + g() % 30;
    for (std::size_t i = 0; i < n; ++i) {
      t.push_back(pool[g() % 4]);
      p.push_back(pool[g() % 4]);
    }
    const auto got = score_report(t, p, pool);
    const auto want = testing::brute_report(t, p, pool);
    CHECK(std::fabs(got.weighted.f1 - want.wf) < 1e-12);
    CHECK(std::fabs(got.weighted.precision - want.wp) < 1e-12);
    for (const auto& c : pool) CHECK(std::fabs(got.per_class.at(c).recall - want.recall.at(c)) < 1e-12);
  }
}

TEST_CASE("reference grid layout") {
  const auto grid = reference_grid();
  REQUIRE(grid.size() == 27);
  CHECK(grid[0].representation == Representation::Summary);
  CHECK(grid[26].representation == Representation::Embedding);
  std::set<std::string> labels;
  for (const auto& c : grid) labels.insert(c.label());
  CHECK(labels.size() == 27);
}

TEST_CASE("experiments on planted clusters") {
  const ReturnsPanel panel = testing::planted_clusters(5, 8, 3, 160, 0.7);
  ArtifactCache cache;
  ExperimentConfig cfg;
  cfg.countmat_metric = Metric{MetricKind::Pearson};
  cfg.k_count = 5;
  cfg.knn_k = 3;
  cfg.folds = 4;
  cfg.factorize.d = 4;
  const auto report = run_experiment(panel, cfg, cache, 1);
  CHECK(report.folds.size() == 4);
  CHECK(report.overall.weighted.support == 24);
  CHECK(report.overall.weighted.f1 >= 0.9);
  CHECK(cache.factorizations() == 1);

  cfg.knn_k = 5;
  run_experiment(panel, cfg, cache, 1);
  CHECK(cache.factorizations() == 1);
  CHECK(cache.countmat_computations() == 1);

  ExperimentConfig bad = cfg;
  bad.lookback = 500;
  std::vector<ExperimentConfig> grid{cfg, bad};
  ExperimentConfig raw = cfg;
  raw.representation = Representation::Raw;
  raw.lookback = 0;
  grid.push_back(raw);
  const auto result = run_grid(panel, grid, cache, 1);
  CHECK(result.rows.size() == 2);
  REQUIRE(result.errors.size() == 1);
  CHECK(result.errors[0].index == 1);
  CHECK(result.errors[0].message.find("WindowLongerThanSeries") != std::string::npos);
  CHECK(run_grid(panel, {}, cache, 1).rows.empty());
}

TEST_CASE("disk cache reuses artifacts across instances") {
  testing::TempDir dir("cache");
  const ReturnsPanel panel = testing::planted_clusters(6, 4, 2, 80, 0.6);
  FactorizeConfig fc;
  fc.d = 3;
  fc.epochs = 100;
  const Metric m{MetricKind::Hybrid};
  ArtifactCache first(dir.path);
  const EmbeddingMatrix a = first.embeddings(panel, 5, 3, m, fc, 1);
  CHECK(first.factorizations() == 1);
  ArtifactCache second(dir.path);
  const EmbeddingMatrix b = second.embeddings(panel, 5, 3, m, fc, 1);
  CHECK(second.factorizations() == 0);
  CHECK(second.countmat_computations() == 0);
  CHECK(a.vectors == b.vectors);
}

TEST_CASE("similarity graph") {
  Matrix<double> v(4, 2);
  const double rows[4][2] = {{1, 0}, {1, 0}, {0, 1}, {0.6, 0.8}};
  for (int i = 0; i < 4; ++i) {
    v(i, 0) = rows[i][0];
    v(i, 1) = rows[i][1];
  }
  const auto p = testing::make_panel(Matrix<double>(4, 3, 0.0), {"X", "X", "Y", "Y"});
  const auto g = build_graph(embedding_of(v), p, 1.0);
  REQUIRE(g.edges.size() == 1);
  CHECK(g.edges[0].source == 0);
  CHECK(g.edges[0].target == 1);
  CHECK(g.edges[0].similarity == 1.0);
  CHECK_THROWS_AS(build_graph(embedding_of(v), p, 1.5), Error);
  CHECK(cosine_similarity(std::vector<double>{1, 0}, std::vector<double>{0.6, 0.8}) ==
        doctest::Approx(0.6));

  const auto pure = cluster_purity(build_graph(embedding_of(v), p, 0.99));
  CHECK(pure.nodes[0].purity == 1.0);
  CHECK(pure.isolated == 2);

  const std::size_t n = 10;
  Strings mixed;
  for (std::size_t i = 0; i < n; ++i) mixed.push_back(i % 2 ? "B" : "A");
  const auto cp = testing::make_panel(Matrix<double>(n, 3, 0.0), mixed);
  const auto complete = cluster_purity(build_graph(embedding_of(Matrix<double>(n, 3, 1.0)), cp, 0.5));
  CHECK(complete.overall == doctest::Approx((n / 2.0 - 1.0) / (n - 1.0)).epsilon(1e-14));
  CHECK(complete.outliers.size() == n);
}

TEST_CASE("low-purity outlier report") {
  // node 0 is a Utilities name embedded among Energy names
  Matrix<double> v(5, 2);
  const double rows[5][2] = {{1, 0.05}, {1, 0}, {1, 0.1}, {0.95, 0}, {0, 1}};
  for (int i = 0; i < 5; ++i) {
    v(i, 0) = rows[i][0];
    v(i, 1) = rows[i][1];
  }
  const auto p = testing::make_panel(Matrix<double>(5, 3, 0.0),
                                     {"Utilities", "Energy", "Energy", "Energy", "Utilities"});
  const auto g = build_graph(embedding_of(v), p, 0.9);
  const auto table = cluster_purity(g);
  REQUIRE(!table.outliers.empty());
  CHECK(table.outliers[0] == 0);
  CHECK(table.nodes[0].dominant_neighbor_sector == "Energy");

  testing::TempDir dir("graph");
  write_edge_csv(g, dir / "e.csv");
  write_node_csv(g, table, dir / "n.csv");
  write_outlier_csv(g, table, dir / "o.csv");
  write_gexf(g, dir / "g.gexf");
  CHECK(testing::slurp(dir / "o.csv").find("T000,Utilities,3,0,Energy") != std::string::npos);
  const std::string gexf = testing::slurp(dir / "g.gexf");
  CHECK(gexf.find("<gexf") != std::string::npos);
  CHECK(gexf.find("version=\"1.2\"") != std::string::npos);
}
