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

#include "caseembed/error.hpp"
#include "caseembed/factorize.hpp"
#include "support.hpp"

using namespace caseembed;

namespace {

CountMatrix count_matrix(const Matrix<std::uint32_t>& c) {
  CountMatrix cm;
  cm.counts = c;
  cm.k = 1;
  cm.lookback = 2;
  cm.t_valid = 1000;
  return cm;
}

Matrix<double> random_matrix(std::mt19937_64& g, std::size_t r, std::size_t c, double lo,
                             double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix<double> m(r, c);
  for (auto& v : m.data()) v = u(g);
  return m;
}

}  // namespace

TEST_CASE("log transform fixed points") {
  CHECK(log_transform(0.0) == 0.0);
  CHECK(log_transform(std::exp(2.0) - 1.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("clip, transform, scale on a hand-stepped example") {
  Matrix<std::uint32_t> c(4, 4, 0);
  std::uint32_t v = 1;
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      if (i != j) c(i, j) = v++;
    }
  }
  c(3, 2) = 1000;  // the last off-diagonal slot, replacing 12
  const TargetMatrix t = clip_transform_scale(count_matrix(c));
  // sorted off-diagonals 1..11, 1000; rank 0.999 * 11 = 10.989
  const double bound = 11.0 + 0.989 * (1000.0 - 11.0);
  CHECK(t.clip_bound == doctest::Approx(bound).epsilon(1e-12));
  auto f = [](double x) { return std::pow(0.5 * std::log1p(x), 2.0); };
  const double lo = f(1.0), hi = f(bound);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      if (i == j) continue;
      const double x = std::min<double>(c(i, j), bound);
      CHECK(t.values(i, j) == doctest::Approx((f(x) - lo) / (hi - lo)).epsilon(1e-12));
    }
  }
  CHECK(t.values(3, 2) == 1.0);
  CHECK(t.values(0, 1) == 0.0);
}

TEST_CASE("constant off-diagonal counts cannot be scaled") {
  Matrix<std::uint32_t> c(3, 3, 4);
  try {
    clip_transform_scale(count_matrix(c));
    FAIL("expected DegenerateScaling");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateScaling);
  }
}

TEST_CASE("loss special cases and naive oracle") {
  std::mt19937_64 g(1);
  const Matrix<double> M = random_matrix(g, 5, 5, 0, 1);
  const Matrix<double> zero(5, 3, 0.0);
  double sq = 0.0;
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 5; ++j) {
      if (i != j) sq += M(i, j) * M(i, j);
    }
  }
  CHECK(loss(zero, M, 0.0) == doctest::Approx(sq).epsilon(1e-14));

  Matrix<double> basis(3, 3, 0.0);
  for (std::size_t i = 0; i < 3; ++i) basis(i, i) = 1.0 + static_cast<double>(i);
  CHECK(loss(basis, Matrix<double>(3, 3, 0.0), 0.0) == 0.0);

  for (int trial = 0; trial < 20; ++trial) {
    const Matrix<double> E = random_matrix(g, 5, 4, -1, 1);
    const Matrix<double> T = random_matrix(g, 5, 5, 0, 1);
    const double want = testing::naive_loss(E, T, 0.1);
    CHECK(std::fabs(loss(E, T, 0.1) - want) <= 1e-10 * std::fabs(want));
  }
}

TEST_CASE("gradient") {
  std::mt19937_64 g(2);
  const Matrix<double> M = random_matrix(g, 6, 6, 0, 1);
  CHECK(loss_gradient(Matrix<double>(6, 3, 0.0), M, 0.1) == Matrix<double>(6, 3, 0.0));

  for (int trial = 0; trial < 10; ++trial) {
    const Matrix<double> E = random_matrix(g, 6, 3, -1, 1);
    const auto fd = testing::finite_difference(
        E, [&](const Matrix<double>& x) { return testing::naive_loss(x, M, 0.1); }, 1e-5);
    CHECK(testing::max_relative_error(loss_gradient(E, M, 0.1), fd) < 1e-5);
  }

  // Residuals vanish when M is built from E itself.
  const Matrix<double> E = random_matrix(g, 6, 3, -1, 1);
  Matrix<double> fit(6, 6, 0.0);
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = 0; j < 6; ++j) {
      for (std::size_t a = 0; a < 3; ++a) fit(i, j) += E(i, a) * E(j, a);
    }
  }
  const Matrix<double> grad = loss_gradient(E, fit, 0.1);
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t a = 0; a < 3; ++a) {
      CHECK(grad(i, a) == doctest::Approx(4.0 * 5.0 * 0.1 * E(i, a)).epsilon(1e-10));
    }
  }
}

TEST_CASE("initial embeddings are seeded and bounded") {
  const auto a = initial_embeddings(10, 4, 7);
  CHECK(a == initial_embeddings(10, 4, 7));
  CHECK(a != initial_embeddings(10, 4, 8));
  for (double v : a.data()) CHECK(std::fabs(v) <= 0.1);
}

TEST_CASE("factorize descends and is deterministic") {
  std::mt19937_64 g(3);
  TargetMatrix t;
  t.values = random_matrix(g, 8, 8, 0, 1);
  FactorizeConfig cfg;
  cfg.d = 3;
  cfg.epochs = 0;
  cfg.seed = 4;
  const auto base = factorize(t, cfg);
  CHECK(base.meta.epochs_run == 0);
  CHECK(base.vectors == initial_embeddings(8, 3, 4));

  cfg.epochs = 1;
  cfg.learning_rate = 1e-3;
  const auto one = factorize(t, cfg);
  REQUIRE(one.meta.loss_history.size() == 2);
  CHECK(one.meta.loss_history[1] < one.meta.loss_history[0]);

  cfg.epochs = 300;
  cfg.learning_rate = 0.05;
  const auto a = factorize(t, cfg), b = factorize(t, cfg);
  CHECK(a.vectors == b.vectors);
  for (std::size_t i = 1; i < a.meta.loss_history.size(); ++i) {
    CHECK(a.meta.loss_history[i] <= a.meta.loss_history[i - 1]);
  }
  CHECK(a.meta.final_loss == a.meta.loss_history.back());
}

TEST_CASE("factorize rejects bad configs") {
  TargetMatrix t;
  t.values = Matrix<double>(4, 4, 0.5);
  FactorizeConfig cfg;
  cfg.d = 0;
  CHECK_THROWS_AS(factorize(t, cfg), Error);
  cfg = {};
  cfg.learning_rate = -1;
  CHECK_THROWS_AS(factorize(t, cfg), Error);
}

TEST_CASE("embedding files round-trip") {
  testing::TempDir dir("emb");
  std::mt19937_64 g(9);
  TargetMatrix t;
  t.values = random_matrix(g, 5, 5, 0, 1);
  FactorizeConfig cfg;
  cfg.d = 2;
  cfg.epochs = 50;
  const auto e = factorize(t, cfg);
  const std::vector<std::string> tickers{"A", "B", "C", "D", "E"};
  write_embeddings(e, tickers, dir / "e.csv", dir / "e.meta");
  std::vector<std::string> back_tickers;
  const auto back = read_embeddings(dir / "e.csv", back_tickers, dir / "e.meta");
  CHECK(back_tickers == tickers);
  CHECK(back.vectors == e.vectors);
  CHECK(back.meta.final_loss == e.meta.final_loss);
  CHECK(back.meta.epochs_run == e.meta.epochs_run);
  write_embeddings(back, tickers, dir / "f.csv", dir / "f.meta");
  CHECK(testing::slurp(dir / "e.csv") == testing::slurp(dir / "f.csv"));
}
