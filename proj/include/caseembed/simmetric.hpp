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

#include <atomic>
#include <cstddef>
#include <limits>
#include <span>
#include <string>

#include "caseembed/matrix.hpp"
#include "caseembed/panel.hpp"

namespace caseembed {

enum class MetricKind { Euclidean = 0, Pearson = 1, Hybrid = 2 };

struct Metric {
  MetricKind kind = MetricKind::Pearson;
  double hybrid_weight = 0.5;  // ignored unless kind == Hybrid

  friend bool operator==(const Metric&, const Metric&) = default;
};

// "euclidean", "pearson", "hybrid" (or "hybrid@<w>" for a non-default weight).
std::string to_string(const Metric& m);
// Accepts the long names above and the single letters E/P/H.
Metric parse_metric(const std::string& s);
// Single-letter label used in result tables.
const char* short_name(MetricKind k);

// Counts Pearson evaluations that hit a constant window.
struct SimDiagnostics {
  std::atomic<std::size_t> zero_variance{0};
};

inline constexpr double kSelfSentinel = -std::numeric_limits<double>::infinity();

// -||x - y||_2; 0 iff x == y.
double euclidean_sim(std::span<const double> x, std::span<const double> y);

// Sample correlation. A constant argument yields 0 and bumps the diagnostics
// counter instead of throwing.
double pearson_sim(std::span<const double> x, std::span<const double> y,
                   SimDiagnostics* diag = nullptr);

// Compound growth of a return sequence: prod(1 + v_i) - 1.
double cumulative_return(std::span<const double> v);

// w * pearson + (1 - w) * -|cumret(x) - cumret(y)|.
double hybrid_sim(std::span<const double> x, std::span<const double> y, double w,
                  SimDiagnostics* diag = nullptr);

double similarity(std::span<const double> x, std::span<const double> y,
                  const Metric& metric, SimDiagnostics* diag = nullptr);

// All pairwise window similarities at time t. The diagonal holds
// kSelfSentinel so an asset is never ranked against itself.
Matrix<double> pairwise_sim(const ReturnsPanel& panel, std::size_t t,
                            std::size_t lookback, const Metric& metric,
                            SimDiagnostics* diag = nullptr);

}  // namespace caseembed
