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

#include "caseembed/countmat.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include "caseembed/error.hpp"
#include "caseembed/parallel.hpp"
#include "csv.hpp"

namespace caseembed {

namespace {

// Moves the top-k of `row` into the first k slots of `idx`, which holds every
// candidate except self. Order: similarity desc, then index asc.
void select_topk(std::span<const double> row, std::size_t k,
                 std::vector<std::uint32_t>& idx) {
  auto better = [&](std::uint32_t a, std::uint32_t b) {
    if (row[a] != row[b]) return row[a] > row[b];
    return a < b;
  };
  std::nth_element(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k - 1),
                   idx.end(), better);
}

void check_k(std::size_t k, std::size_t n) {
  if (k < 1 || k + 1 > n) {
    fail(ErrorCode::InvalidArgument, "k=" + std::to_string(k) +
                                         " out of range [1, N-1] with N=" +
                                         std::to_string(n));
  }
}

}  // namespace

std::vector<std::size_t> topk_indices(std::span<const double> sim_row, std::size_t k,
                                      std::size_t self_index) {
  const std::size_t n = sim_row.size();
  require(self_index < n, "self index out of range");
  check_k(k, n);
  std::vector<std::uint32_t> idx;
  idx.reserve(n - 1);
  for (std::size_t j = 0; j < n; ++j) {
    if (j != self_index) idx.push_back(static_cast<std::uint32_t>(j));
  }
  select_topk(sim_row, k, idx);
  std::vector<std::size_t> out(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k));
  std::sort(out.begin(), out.end());
  return out;
}

CountMatrix accumulate_counts(const ReturnsPanel& panel, std::size_t lookback,
                              std::size_t k, const Metric& metric,
                              const CountOptions& options) {
  const std::size_t n = panel.num_assets();
  const TimeRange times = valid_times(panel, lookback);
  check_k(k, n);
  if (metric.kind == MetricKind::Hybrid) {
    require(metric.hybrid_weight >= 0.0 && metric.hybrid_weight <= 1.0,
            "hybrid weight must lie in [0, 1]");
  }

  const unsigned workers = resolve_threads(options.threads);
  std::vector<Matrix<std::uint32_t>> partial(
      std::min<std::size_t>(workers, times.size()));

  parallel_blocks(times.size(), workers, [&](unsigned w, std::size_t begin, std::size_t end) {
    Matrix<std::uint32_t> local(n, n, 0);
    Matrix<double> sim(n, n, 0.0);
    std::vector<std::span<const double>> windows(n);
    std::vector<std::uint32_t> idx(n - 1);

    for (std::size_t step = begin; step < end; ++step) {
      const std::size_t t = times.first + step;
      for (std::size_t i = 0; i < n; ++i) {
        windows[i] = panel.series(i).subspan(t + 1 - lookback, lookback);
      }
      for (std::size_t i = 0; i < n; ++i) {
        sim(i, i) = kSelfSentinel;
        for (std::size_t j = i + 1; j < n; ++j) {
          const double v = similarity(windows[i], windows[j], metric, options.diagnostics);
          sim(i, j) = v;
          sim(j, i) = v;
        }
      }
      for (std::size_t i = 0; i < n; ++i) {
        std::size_t pos = 0;
        for (std::size_t j = 0; j < n; ++j) {
          if (j != i) idx[pos++] = static_cast<std::uint32_t>(j);
        }
        select_topk(sim.row(i), k, idx);
        auto counts = local.row(i);
        for (std::size_t r = 0; r < k; ++r) ++counts[idx[r]];
      }
    }
    partial[w] = std::move(local);
  });

  CountMatrix cm;
  cm.counts = Matrix<std::uint32_t>(n, n, 0);
  for (const auto& p : partial) {
    if (p.empty()) continue;
    for (std::size_t e = 0; e < p.data().size(); ++e) cm.counts.data()[e] += p.data()[e];
  }
  cm.k = k;
  cm.lookback = lookback;
  cm.granularity = panel.granularity();
  cm.metric = metric;
  cm.t_valid = times.size();
  return cm;
}

void write_countmat(const CountMatrix& cm, const std::filesystem::path& path) {
  auto out = detail::open_out(path.string());
  const std::size_t n = cm.size();
  out << "#countmat v1 N=" << n << " k=" << cm.k << " n=" << cm.lookback
      << " gran=" << to_string(cm.granularity) << " metric=" << to_string(cm.metric)
      << " tvalid=" << cm.t_valid << '\n';
  for (std::size_t i = 0; i < n; ++i) {
    auto row = cm.counts.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      if (j) out << ' ';
      out << row[j];
    }
    out << '\n';
  }
  if (!out) fail(ErrorCode::Io, "write failed for '" + path.string() + "'");
}

CountMatrix read_countmat(const std::filesystem::path& path) {
  auto in = detail::open_in(path.string());
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::Parse, "empty count-matrix file");
  std::istringstream header(line);
  std::string tag, version;
  header >> tag >> version;
  if (tag != "#countmat" || version != "v1") {
    fail(ErrorCode::Parse, "not a v1 count-matrix file: '" + path.string() + "'");
  }
  CountMatrix cm;
  std::size_t n = 0;
  bool seen[6] = {};
  std::string kv;
  while (header >> kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) fail(ErrorCode::Parse, "bad header field '" + kv + "'");
    const std::string key = kv.substr(0, eq);
    const std::string value = kv.substr(eq + 1);
    const std::string ctx = "in count-matrix header";
    if (key == "N") {
      n = detail::parse_int<std::size_t>(value, ctx);
      seen[0] = true;
    } else if (key == "k") {
      cm.k = detail::parse_int<std::size_t>(value, ctx);
      seen[1] = true;
    } else if (key == "n") {
      cm.lookback = detail::parse_int<std::size_t>(value, ctx);
      seen[2] = true;
    } else if (key == "gran") {
      cm.granularity = parse_granularity(value);
      seen[3] = true;
    } else if (key == "metric") {
      cm.metric = parse_metric(value);
      seen[4] = true;
    } else if (key == "tvalid") {
      cm.t_valid = detail::parse_int<std::size_t>(value, ctx);
      seen[5] = true;
    } else {
      fail(ErrorCode::Parse, "unknown header field '" + key + "'");
    }
  }
  if (!std::all_of(std::begin(seen), std::end(seen), [](bool b) { return b; })) {
    fail(ErrorCode::Parse, "count-matrix header is missing fields");
  }
  cm.counts = Matrix<std::uint32_t>(n, n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::getline(in, line)) {
      fail(ErrorCode::Parse, "count matrix truncated at row " + std::to_string(i));
    }
    std::istringstream row(line);
    std::string tok;
    std::size_t j = 0;
    while (row >> tok) {
      if (j >= n) fail(ErrorCode::Parse, "row " + std::to_string(i) + " is too long");
      cm.counts(i, j++) = detail::parse_int<std::uint32_t>(tok, "in count-matrix row");
    }
    if (j != n) fail(ErrorCode::Parse, "row " + std::to_string(i) + " is too short");
  }
  while (std::getline(in, line)) {
    if (!detail::trim(line).empty()) fail(ErrorCode::Parse, "trailing data after count matrix");
  }
  return cm;
}

}  // namespace caseembed
