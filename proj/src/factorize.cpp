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

#include "caseembed/factorize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "caseembed/error.hpp"
#include "caseembed/rng.hpp"
#include "csv.hpp"

namespace caseembed {

namespace {

void check_shapes(const Matrix<double>& e, const Matrix<double>& m) {
  if (m.rows() != m.cols() || e.rows() != m.rows()) {
    fail(ErrorCode::DimensionMismatch,
         "embedding rows (" + std::to_string(e.rows()) + ") and target size (" +
             std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + ") disagree");
  }
  require(e.cols() >= 1, "embedding dimension must be at least 1");
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

// Loss plus the off-diagonal residual matrix R = M - E E^T (diagonal 0).
double residual_loss(const Matrix<double>& e, const Matrix<double>& m, double lambda,
                     Matrix<double>& r) {
  const std::size_t n = e.rows();
  r = Matrix<double>(n, n, 0.0);
  double fit = 0.0;
  double norms = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto ei = e.row(i);
    norms += dot(ei, ei);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double res = m(i, j) - dot(ei, e.row(j));
      r(i, j) = res;
      fit += res * res;
    }
  }
  const double pairs = n > 1 ? 2.0 * static_cast<double>(n - 1) : 0.0;
  return fit + lambda * pairs * norms;
}

Matrix<double> gradient_from_residual(const Matrix<double>& e, const Matrix<double>& r,
                                      double lambda) {
  const std::size_t n = e.rows();
  const std::size_t d = e.cols();
  Matrix<double> g(n, d, 0.0);
  const double reg = n > 1 ? 4.0 * static_cast<double>(n - 1) * lambda : 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    auto gi = g.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double c = -2.0 * (r(i, j) + r(j, i));
      const auto ej = e.row(j);
      for (std::size_t k = 0; k < d; ++k) gi[k] += c * ej[k];
    }
    const auto ei = e.row(i);
    for (std::size_t k = 0; k < d; ++k) gi[k] += reg * ei[k];
  }
  return g;
}

}  // namespace

double log_transform(double x) {
  const double h = 0.5 * std::log1p(x);
  return h * h;
}

TargetMatrix clip_transform_scale(const CountMatrix& counts, double clip_percentile) {
  const std::size_t n = counts.size();
  require(n >= 2, "count matrix must be at least 2x2");

  std::vector<double> off;
  off.reserve(n * (n - 1));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) off.push_back(static_cast<double>(counts.counts(i, j)));
    }
  }

  TargetMatrix out;
  out.clip_bound = percentile(off, clip_percentile);
  out.values = Matrix<double>(n, n, 0.0);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double v = log_transform(
          std::min(static_cast<double>(counts.counts(i, j)), out.clip_bound));
      out.values(i, j) = v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (!(hi > lo)) {
    fail(ErrorCode::DegenerateScaling,
         "DegenerateScaling: off-diagonal values are constant after clipping");
  }
  const double span = hi - lo;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) out.values(i, j) = (out.values(i, j) - lo) / span;
    }
  }
  out.source.k = counts.k;
  out.source.lookback = counts.lookback;
  out.source.granularity = counts.granularity;
  out.source.metric = counts.metric;
  out.source.t_valid = counts.t_valid;
  return out;
}

double loss(const Matrix<double>& embeddings, const Matrix<double>& target, double lambda) {
  check_shapes(embeddings, target);
  Matrix<double> r;
  return residual_loss(embeddings, target, lambda, r);
}

Matrix<double> loss_gradient(const Matrix<double>& embeddings, const Matrix<double>& target,
                             double lambda) {
  check_shapes(embeddings, target);
  Matrix<double> r;
  residual_loss(embeddings, target, lambda, r);
  return gradient_from_residual(embeddings, r, lambda);
}

Matrix<double> initial_embeddings(std::size_t n, std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  Matrix<double> e(n, d);
  for (auto& v : e.data()) v = rng.uniform(-0.1, 0.1);
  return e;
}

EmbeddingMatrix factorize(const TargetMatrix& target, const FactorizeConfig& cfg) {
  require(cfg.d >= 1, "embedding dimension d must be at least 1");
  return factorize_from(target, cfg, initial_embeddings(target.size(), cfg.d, cfg.seed));
}

EmbeddingMatrix factorize_from(const TargetMatrix& target, const FactorizeConfig& cfg,
                               Matrix<double> start) {
  require(cfg.d >= 1, "embedding dimension d must be at least 1");
  require(cfg.lambda >= 0.0, "lambda must be non-negative");
  require(cfg.learning_rate > 0.0, "learning rate must be positive");
  require(cfg.tolerance >= 0.0, "tolerance must be non-negative");
  require(start.cols() == cfg.d, "start matrix width differs from d");
  check_shapes(start, target.values);

  EmbeddingMatrix out;
  out.meta.seed = cfg.seed;
  out.meta.epochs = cfg.epochs;
  out.meta.learning_rate = cfg.learning_rate;
  out.meta.lambda = cfg.lambda;
  out.meta.tolerance = cfg.tolerance;

  Matrix<double> e = std::move(start);
  Matrix<double> r;
  double current = residual_loss(e, target.values, cfg.lambda, r);
  if (!std::isfinite(current)) {
    fail(ErrorCode::Diverged, "DivergedAtEpoch(0): initial loss is not finite");
  }
  out.meta.loss_history.push_back(current);

  // Full-batch descent; a step that would raise the loss is retried at half the rate.
  double rate = cfg.learning_rate;
  constexpr int kMaxHalvings = 60;
  Matrix<double> trial(e.rows(), e.cols());
  Matrix<double> trial_r;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const Matrix<double> g = gradient_from_residual(e, r, cfg.lambda);
    bool accepted = false;
    double next = current;
    for (int h = 0; h <= kMaxHalvings; ++h) {
      for (std::size_t x = 0; x < e.data().size(); ++x) {
        trial.data()[x] = e.data()[x] - rate * g.data()[x];
      }
      next = residual_loss(trial, target.values, cfg.lambda, trial_r);
      if (!std::isfinite(next)) {
        fail(ErrorCode::Diverged, "DivergedAtEpoch(" + std::to_string(epoch) +
                                      "): last finite loss " +
                                      detail::format_double(current));
      }
      if (next <= current) {
        accepted = true;
        break;
      }
      rate *= 0.5;
    }
    if (!accepted) break;  // no descent direction left at machine precision

    std::swap(e, trial);
    std::swap(r, trial_r);
    const double improvement = (current - next) / std::max(std::abs(current), 1e-300);
    current = next;
    out.meta.loss_history.push_back(current);
    out.meta.epochs_run = epoch;
    if (improvement < cfg.tolerance) break;
  }

  out.meta.final_loss = current;
  out.meta.final_learning_rate = rate;
  out.vectors = std::move(e);
  return out;
}

void write_embeddings(const EmbeddingMatrix& e, const std::vector<std::string>& tickers,
                      const std::filesystem::path& csv_path,
                      const std::filesystem::path& meta_path) {
  if (tickers.size() != e.size()) {
    fail(ErrorCode::DimensionMismatch, "ticker count differs from embedding rows");
  }
  {
    auto out = detail::open_out(csv_path.string());
    out << "ticker";
    for (std::size_t k = 0; k < e.dim(); ++k) out << ",e" << k;
    out << '\n';
    for (std::size_t i = 0; i < e.size(); ++i) {
      out << detail::csv_field(tickers[i]);
      for (double v : e.vectors.row(i)) out << ',' << detail::format_double(v);
      out << '\n';
    }
    if (!out) fail(ErrorCode::Io, "write failed for '" + csv_path.string() + "'");
  }
  if (meta_path.empty()) return;
  auto out = detail::open_out(meta_path.string());
  const auto& m = e.meta;
  out << "d=" << e.dim() << '\n'
      << "seed=" << m.seed << '\n'
      << "epochs=" << m.epochs << '\n'
      << "epochs_run=" << m.epochs_run << '\n'
      << "learning_rate=" << detail::format_double(m.learning_rate) << '\n'
      << "final_learning_rate=" << detail::format_double(m.final_learning_rate) << '\n'
      << "lambda=" << detail::format_double(m.lambda) << '\n'
      << "tolerance=" << detail::format_double(m.tolerance) << '\n'
      << "final_loss=" << detail::format_double(m.final_loss) << '\n';
  if (!out) fail(ErrorCode::Io, "write failed for '" + meta_path.string() + "'");
}

EmbeddingMatrix read_embeddings(const std::filesystem::path& csv_path,
                                std::vector<std::string>& tickers,
                                const std::filesystem::path& meta_path) {
  auto in = detail::open_in(csv_path.string());
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::Parse, "empty embedding file");
  const auto header = detail::split_csv(detail::trim(line));
  if (header.size() < 2 || header[0] != "ticker") {
    fail(ErrorCode::Parse, "embedding header must be 'ticker,e0,...'");
  }
  for (std::size_t k = 1; k < header.size(); ++k) {
    if (header[k] != "e" + std::to_string(k - 1)) {
      fail(ErrorCode::Parse, "unexpected embedding column '" + header[k] + "'");
    }
  }
  const std::size_t d = header.size() - 1;
  tickers.clear();
  std::vector<double> values;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    const auto f = detail::split_csv(detail::trim(line));
    const std::string ctx = "at embedding line " + std::to_string(lineno);
    if (f.size() != d + 1) fail(ErrorCode::Parse, "wrong field count " + ctx);
    tickers.push_back(f[0]);
    for (std::size_t k = 1; k <= d; ++k) {
      const double v = detail::parse_double(f[k], ctx);
      if (!std::isfinite(v)) fail(ErrorCode::Parse, "non-finite embedding value " + ctx);
      values.push_back(v);
    }
  }
  EmbeddingMatrix e;
  e.vectors = Matrix<double>(tickers.size(), d);
  e.vectors.data() = std::move(values);

  if (!meta_path.empty()) {
    auto min = detail::open_in(meta_path.string());
    std::map<std::string, std::string> kv;
    while (std::getline(min, line)) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      kv[line.substr(0, eq)] = std::string(detail::trim(line.substr(eq + 1)));
    }
    auto get = [&](const char* key) -> std::string {
      auto it = kv.find(key);
      return it == kv.end() ? std::string() : it->second;
    };
    const std::string ctx = "in embedding metadata";
    if (auto v = get("seed"); !v.empty()) e.meta.seed = detail::parse_int<std::uint64_t>(v, ctx);
    if (auto v = get("epochs"); !v.empty()) e.meta.epochs = detail::parse_int<std::size_t>(v, ctx);
    if (auto v = get("epochs_run"); !v.empty())
      e.meta.epochs_run = detail::parse_int<std::size_t>(v, ctx);
    if (auto v = get("learning_rate"); !v.empty())
      e.meta.learning_rate = detail::parse_double(v, ctx);
    if (auto v = get("final_learning_rate"); !v.empty())
      e.meta.final_learning_rate = detail::parse_double(v, ctx);
    if (auto v = get("lambda"); !v.empty()) e.meta.lambda = detail::parse_double(v, ctx);
    if (auto v = get("tolerance"); !v.empty()) e.meta.tolerance = detail::parse_double(v, ctx);
    if (auto v = get("final_loss"); !v.empty()) e.meta.final_loss = detail::parse_double(v, ctx);
  }
  return e;
}

}  // namespace caseembed
