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
#include <string>
#include <vector>

#include "caseembed/countmat.hpp"
#include "caseembed/matrix.hpp"
#include "caseembed/stats.hpp"

namespace caseembed {

// Clipped, log-transformed, min-max scaled count matrix. Off-diagonal entries
// span exactly [0, 1]; the diagonal is stored as 0 and never read by the
// loss or gradient.
struct TargetMatrix {
  Matrix<double> values;
  double clip_bound = 0.0;
  CountMatrix source;  // header fields only; counts left empty

  std::size_t size() const { return values.rows(); }
};

struct FactorizeConfig {
  std::size_t d = 15;
  double lambda = 0.1;
  double learning_rate = 0.05;
  std::size_t epochs = 2000;
  std::uint64_t seed = 0;
  double tolerance = 1e-7;
};

struct TrainingMeta {
  std::uint64_t seed = 0;
  std::size_t epochs = 0;         // configured maximum
  std::size_t epochs_run = 0;     // accepted steps actually taken
  double learning_rate = 0.0;     // configured
  double final_learning_rate = 0.0;
  double final_loss = 0.0;
  double lambda = 0.0;
  double tolerance = 0.0;
  std::vector<double> loss_history;  // loss before training, then after each epoch
};

struct EmbeddingMatrix {
  Matrix<double> vectors;  // N x d
  TrainingMeta meta;

  std::size_t size() const { return vectors.rows(); }
  std::size_t dim() const { return vectors.cols(); }
};

// (0.5 * log(1 + x))^2
double log_transform(double x);

TargetMatrix clip_transform_scale(const CountMatrix& counts, double clip_percentile = 99.9);

// Sum over ordered pairs i != j of (M_ij - E_i.E_j)^2 + lambda (|E_i|^2 + |E_j|^2).
double loss(const Matrix<double>& embeddings, const Matrix<double>& target, double lambda);

Matrix<double> loss_gradient(const Matrix<double>& embeddings, const Matrix<double>& target,
                             double lambda);

// Seeded uniform [-0.1, 0.1] initialisation.
Matrix<double> initial_embeddings(std::size_t n, std::size_t d, std::uint64_t seed);

EmbeddingMatrix factorize(const TargetMatrix& target, const FactorizeConfig& cfg);
// Same, but starting from the supplied matrix instead of the seeded draw.
EmbeddingMatrix factorize_from(const TargetMatrix& target, const FactorizeConfig& cfg,
                               Matrix<double> start);

// `ticker,e0,...` CSV with 17 significant digits, plus key=value sidecar.
void write_embeddings(const EmbeddingMatrix& e, const std::vector<std::string>& tickers,
                      const std::filesystem::path& csv_path,
                      const std::filesystem::path& meta_path);
// Returns tickers in file order alongside the vectors. The sidecar is read
// when `meta_path` is non-empty.
EmbeddingMatrix read_embeddings(const std::filesystem::path& csv_path,
                                std::vector<std::string>& tickers,
                                const std::filesystem::path& meta_path = {});

}  // namespace caseembed
