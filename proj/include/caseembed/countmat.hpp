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
#include <span>
#include <vector>

#include "caseembed/matrix.hpp"
#include "caseembed/panel.hpp"
#include "caseembed/simmetric.hpp"

namespace caseembed {

// counts(i, j): number of time points at which asset j ranked among the k
// most similar assets to asset i. Zero diagonal, entries in [0, t_valid],
// rows sum to k * t_valid. Not symmetric in general.
struct CountMatrix {
  Matrix<std::uint32_t> counts;
  std::size_t k = 0;
  std::size_t lookback = 0;
  Granularity granularity = Granularity::Daily;
  Metric metric;
  std::size_t t_valid = 0;

  std::size_t size() const { return counts.rows(); }

  friend bool operator==(const CountMatrix&, const CountMatrix&) = default;
};

// Indices of the k largest entries of `sim_row` in ascending index order.
// Ranking is by similarity descending, then index ascending; `self_index` is
// never selected.
std::vector<std::size_t> topk_indices(std::span<const double> sim_row, std::size_t k,
                                      std::size_t self_index);

struct CountOptions {
  unsigned threads = 0;  // 0 = auto
  SimDiagnostics* diagnostics = nullptr;
};

// Accumulates counts over every t in valid_times(panel, lookback). The result
// is identical for any thread count.
CountMatrix accumulate_counts(const ReturnsPanel& panel, std::size_t lookback,
                              std::size_t k, const Metric& metric,
                              const CountOptions& options = {});

// `#countmat v1 N=.. k=.. n=.. gran=.. metric=.. tvalid=..` then N rows.
void write_countmat(const CountMatrix& cm, const std::filesystem::path& path);
CountMatrix read_countmat(const std::filesystem::path& path);

}  // namespace caseembed
