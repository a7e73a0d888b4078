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

#include "caseembed/simmetric.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "caseembed/error.hpp"
#include "caseembed/stats.hpp"
#include "csv.hpp"

namespace caseembed {

namespace {

void check_lengths(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    fail(ErrorCode::DimensionMismatch, "similarity arguments differ in length (" +
                                           std::to_string(x.size()) + " vs " +
                                           std::to_string(y.size()) + ")");
  }
  require(x.size() >= 2, "similarity needs windows of length >= 2");
}

bool is_constant(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [&](double a) { return a == v.front(); });
}

}  // namespace

std::string to_string(const Metric& m) {
  switch (m.kind) {
    case MetricKind::Euclidean: return "euclidean";
    case MetricKind::Pearson: return "pearson";
    case MetricKind::Hybrid:
      if (m.hybrid_weight == 0.5) return "hybrid";
      return "hybrid@" + detail::format_double(m.hybrid_weight);
  }
  return "?";
}

const char* short_name(MetricKind k) {
  switch (k) {
    case MetricKind::Euclidean: return "E";
    case MetricKind::Pearson: return "P";
    case MetricKind::Hybrid: return "H";
  }
  return "?";
}

Metric parse_metric(const std::string& s) {
  std::string name = s;
  std::string weight;
  if (auto at = s.find('@'); at != std::string::npos) {
    name = s.substr(0, at);
    weight = s.substr(at + 1);
  }
  std::transform(name.begin(), name.end(), name.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  Metric m;
  if (name == "euclidean" || name == "e") {
    m.kind = MetricKind::Euclidean;
  } else if (name == "pearson" || name == "p" || name == "correlation") {
    m.kind = MetricKind::Pearson;
  } else if (name == "hybrid" || name == "h") {
    m.kind = MetricKind::Hybrid;
  } else {
    fail(ErrorCode::InvalidArgument, "unknown metric '" + s + "'");
  }
  if (!weight.empty()) {
    require(m.kind == MetricKind::Hybrid, "only the hybrid metric takes a weight");
    m.hybrid_weight = detail::parse_double(weight, "in metric '" + s + "'");
    require(m.hybrid_weight >= 0.0 && m.hybrid_weight <= 1.0,
            "hybrid weight must lie in [0, 1]");
  }
  return m;
}

double euclidean_sim(std::span<const double> x, std::span<const double> y) {
  check_lengths(x, y);
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    s += d * d;
  }
  return -std::sqrt(s);
}

double pearson_sim(std::span<const double> x, std::span<const double> y,
                   SimDiagnostics* diag) {
  check_lengths(x, y);
  if (is_constant(x) || is_constant(y)) {
    if (diag) diag->zero_variance.fetch_add(1, std::memory_order_relaxed);
    return 0.0;
  }
  const long double mx = mean(x);
  const long double my = mean(y);
  long double sxy = 0.0L, sxx = 0.0L, syy = 0.0L;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const long double dx = x[i] - mx;
    const long double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0L || syy <= 0.0L) {
    if (diag) diag->zero_variance.fetch_add(1, std::memory_order_relaxed);
    return 0.0;
  }
  const double r = static_cast<double>(sxy / (std::sqrt(sxx) * std::sqrt(syy)));
  return std::clamp(r, -1.0, 1.0);
}

double cumulative_return(std::span<const double> v) {
  double acc = 1.0;
  for (double a : v) acc *= 1.0 + a;
  return acc - 1.0;
}

double hybrid_sim(std::span<const double> x, std::span<const double> y, double w,
                  SimDiagnostics* diag) {
  require(w >= 0.0 && w <= 1.0, "hybrid weight must lie in [0, 1]");
  const double corr = pearson_sim(x, y, diag);
  const double gap = std::abs(cumulative_return(x) - cumulative_return(y));
  return w * corr + (1.0 - w) * -gap;
}

double similarity(std::span<const double> x, std::span<const double> y,
                  const Metric& metric, SimDiagnostics* diag) {
  switch (metric.kind) {
    case MetricKind::Euclidean: return euclidean_sim(x, y);
    case MetricKind::Pearson: return pearson_sim(x, y, diag);
    case MetricKind::Hybrid: return hybrid_sim(x, y, metric.hybrid_weight, diag);
  }
  return 0.0;
}

Matrix<double> pairwise_sim(const ReturnsPanel& panel, std::size_t t,
                            std::size_t lookback, const Metric& metric,
                            SimDiagnostics* diag) {
  const std::size_t n = panel.num_assets();
  Matrix<double> s(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto wi = window(panel, i, t, lookback).values;
    s(i, i) = kSelfSentinel;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = similarity(wi, window(panel, j, t, lookback).values, metric, diag);
      s(i, j) = v;
      s(j, i) = v;
    }
  }
  return s;
}

}  // namespace caseembed
