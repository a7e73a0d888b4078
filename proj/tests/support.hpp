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

// Synthetic panels and brute-force reference implementations used by the unit
// tests and the acceptance runner. Nothing here calls into the library's
// numeric code.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "caseembed/countmat.hpp"
#include "caseembed/matrix.hpp"
#include "caseembed/panel.hpp"

namespace testing {

using caseembed::Date;
using caseembed::Granularity;
using caseembed::Matrix;
using caseembed::MetricKind;
using caseembed::ReturnsPanel;

inline std::vector<Date> weekdays(Date start, std::size_t n) {
  std::vector<Date> out;
  for (Date d = start; out.size() < n; d.days += 1) {
    if (d.iso_weekday() < 5) out.push_back(d);
  }
  return out;
}

inline std::string ticker_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "T%03zu", i);
  return buf;
}

inline ReturnsPanel make_panel(const Matrix<double>& r, std::vector<std::string> sectors = {}) {
  const std::size_t n = r.rows();
  std::vector<std::string> tickers;
  for (std::size_t i = 0; i < n; ++i) tickers.push_back(ticker_name(i));
  if (sectors.empty()) sectors.assign(n, "S");
  return ReturnsPanel(tickers, weekdays(Date::from_ymd(2021, 1, 4), r.cols()), r,
                      Granularity::Daily, sectors);
}

// Integer-valued panels are full of exact ties.
inline Matrix<double> random_returns(std::mt19937_64& g, std::size_t n, std::size_t t,
                                     bool integer_valued) {
  Matrix<double> r(n, t);
  std::normal_distribution<double> nd(0.0, 0.02);
  std::uniform_int_distribution<int> id(-2, 2);
  for (auto& v : r.data()) v = integer_valued ? id(g) : nd(g);
  return r;
}

// Sector-factor model: r = sqrt(rho) * f_sector + sqrt(1 - rho) * e.
inline ReturnsPanel planted_clusters(std::uint64_t seed, std::size_t per_sector,
                                     std::size_t sectors, std::size_t t, double rho,
                                     double vol = 0.01) {
  std::mt19937_64 g(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  const std::size_t n = per_sector * sectors;
  Matrix<double> f(sectors, t);
  for (auto& v : f.data()) v = nd(g);
  Matrix<double> r(n, t);
  std::vector<std::string> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t s = i % sectors;
    labels[i] = "Sector" + std::to_string(s);
    for (std::size_t j = 0; j < t; ++j) {
      r(i, j) = vol * (std::sqrt(rho) * f(s, j) + std::sqrt(1.0 - rho) * nd(g));
    }
  }
  return make_panel(r, labels);
}

// ---- similarity oracle ----

inline double ref_sim(const std::vector<double>& x, const std::vector<double>& y,
                      MetricKind kind, double w = 0.5) {
  const std::size_t n = x.size();
  auto pearson = [&] {
    bool cx = true, cy = true;
    for (std::size_t i = 1; i < n; ++i) {
      cx = cx && x[i] == x[0];
      cy = cy && y[i] == y[0];
    }
    if (cx || cy) return 0.0;
    long double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
      mx += x[i];
      my += y[i];
    }
    mx /= n;
    my /= n;
    long double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const long double dx = x[i] - mx, dy = y[i] - my;
      sxy += dx * dy;
      sxx += dx * dx;
      syy += dy * dy;
    }
    return static_cast<double>(sxy / std::sqrt(sxx * syy));
  };
  auto cum = [](const std::vector<double>& v) {
    double p = 1.0;
    for (double a : v) p *= 1.0 + a;
    return p - 1.0;
  };
  switch (kind) {
    case MetricKind::Euclidean: {
      double s = 0;
      for (std::size_t i = 0; i < n; ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
      return -std::sqrt(s);
    }
    case MetricKind::Pearson: return pearson();
    case MetricKind::Hybrid: return w * pearson() - (1 - w) * std::fabs(cum(x) - cum(y));
  }
  return 0.0;
}

// Materialises every similarity matrix and ranks each row by a full sort.
inline Matrix<std::uint32_t> brute_counts(const Matrix<double>& r, std::size_t n, std::size_t k,
                                          MetricKind kind, double w = 0.5) {
  const std::size_t N = r.rows(), T = r.cols();
  Matrix<std::uint32_t> c(N, N, 0);
  for (std::size_t t = n - 1; t < T; ++t) {
    std::vector<std::vector<double>> win(N);
    for (std::size_t i = 0; i < N; ++i) {
      for (std::size_t s = t + 1 - n; s <= t; ++s) win[i].push_back(r(i, s));
    }
    std::vector<std::vector<double>> S(N, std::vector<double>(N));
    for (std::size_t i = 0; i < N; ++i) {
      for (std::size_t j = 0; j < N; ++j) S[i][j] = ref_sim(win[i], win[j], kind, w);
    }
    for (std::size_t i = 0; i < N; ++i) {
      std::vector<std::size_t> order;
      for (std::size_t j = 0; j < N; ++j) {
        if (j != i) order.push_back(j);
      }
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return S[i][a] > S[i][b]; });
      for (std::size_t q = 0; q < k; ++q) c(i, order[q]) += 1;
    }
  }
  return c;
}

// ---- factorisation oracles ----

inline double naive_loss(const Matrix<double>& E, const Matrix<double>& M, double lambda) {
  const std::size_t N = E.rows(), d = E.cols();
  double fit = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t j = 0; j < N; ++j) {
      if (i == j) continue;
      double dot = 0.0;
      for (std::size_t a = 0; a < d; ++a) dot += E(i, a) * E(j, a);
      fit += (M(i, j) - dot) * (M(i, j) - dot);
    }
  }
  double reg = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t a = 0; a < d; ++a) reg += E(i, a) * E(i, a);
  }
  return fit + lambda * 2.0 * static_cast<double>(N - 1) * reg;
}

template <typename LossFn>
Matrix<double> finite_difference(const Matrix<double>& E, LossFn&& f, double h) {
  Matrix<double> g(E.rows(), E.cols());
  Matrix<double> probe = E;
  for (std::size_t i = 0; i < E.rows(); ++i) {
    for (std::size_t a = 0; a < E.cols(); ++a) {
      const double keep = probe(i, a);
      probe(i, a) = keep + h;
      const double up = f(probe);
      probe(i, a) = keep - h;
      const double down = f(probe);
      probe(i, a) = keep;
      g(i, a) = (up - down) / (2.0 * h);
    }
  }
  return g;
}

inline double max_relative_error(const Matrix<double>& a, const Matrix<double>& b) {
  double scale = 0.0, diff = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    scale = std::max({scale, std::fabs(a.data()[i]), std::fabs(b.data()[i])});
    diff = std::max(diff, std::fabs(a.data()[i] - b.data()[i]));
  }
  return scale == 0.0 ? diff : diff / scale;
}

// ---- classification-report oracle ----

struct RefScores {
  std::map<std::string, double> precision, recall, f1;
  double wp = 0, wr = 0, wf = 0;
};

inline RefScores brute_report(const std::vector<std::string>& truth,
                              const std::vector<std::string>& pred,
                              const std::vector<std::string>& classes) {
  std::map<std::string, std::map<std::string, double>> cm;
  for (std::size_t i = 0; i < truth.size(); ++i) cm[truth[i]][pred[i]] += 1;
  RefScores r;
  double total = 0;
  for (const auto& c : classes) {
    double tp = cm[c][c], col = 0, row = 0;
    for (const auto& o : classes) {
      col += cm[o][c];
      row += cm[c][o];
    }
    const double p = col > 0 ? tp / col : 0.0;
    const double q = row > 0 ? tp / row : 0.0;
    const double f = p + q > 0 ? 2 * p * q / (p + q) : 0.0;
    r.precision[c] = p;
    r.recall[c] = q;
    r.f1[c] = f;
    r.wp += row * p;
    r.wr += row * q;
    r.wf += row * f;
    total += row;
  }
  if (total > 0) {
    r.wp /= total;
    r.wr /= total;
    r.wf /= total;
  }
  return r;
}

// ---- files ----

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path = std::filesystem::temp_directory_path() /
           ("caseembed-" + tag + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::filesystem::path operator/(const std::string& name) const { return path / name; }
};

}  // namespace testing
