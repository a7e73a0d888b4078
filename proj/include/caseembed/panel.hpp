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
#include <string>
#include <vector>

#include "caseembed/matrix.hpp"

namespace caseembed {

enum class Granularity { Daily = 0, Weekly = 1, Monthly = 2 };

const char* to_string(Granularity g);
Granularity parse_granularity(const std::string& s);

enum class AggregationMode { Compound = 0, Sum = 1 };

// Calendar date as days since 1970-01-01 (proleptic Gregorian).
struct Date {
  std::int32_t days = 0;

  static Date parse(std::string_view iso);  // YYYY-MM-DD
  static Date from_ymd(int y, unsigned m, unsigned d);
  std::string iso() const;
  int year() const;
  unsigned month() const;
  // 0 = Monday ... 6 = Sunday
  unsigned iso_weekday() const;

  friend auto operator<=>(const Date&, const Date&) = default;
};

struct AssetId {
  std::string ticker;
  std::size_t index = 0;

  friend bool operator==(const AssetId&, const AssetId&) = default;
};

struct ReturnWindow {
  AssetId asset;
  std::size_t end_time = 0;
  std::size_t lookback = 0;
  std::span<const double> values;
};

// Inclusive range of time indices at which a full window exists.
struct TimeRange {
  std::size_t first = 0;
  std::size_t last = 0;  // inclusive

  std::size_t size() const { return last - first + 1; }
};

// Aligned N x T returns matrix with asset identities and sector labels.
// Assets are sorted by ticker. Immutable after construction.
class ReturnsPanel {
 public:
  // Validates every invariant; `tickers` need not be sorted.
  ReturnsPanel(std::vector<std::string> tickers, std::vector<Date> timestamps,
               Matrix<double> returns, Granularity granularity,
               std::vector<std::string> sectors,
               std::vector<std::string> industries = {});

  std::size_t num_assets() const { return assets_.size(); }
  std::size_t num_periods() const { return timestamps_.size(); }
  Granularity granularity() const { return granularity_; }

  const std::vector<AssetId>& assets() const { return assets_; }
  const AssetId& asset(std::size_t i) const { return assets_.at(i); }
  // Throws InvalidArgument when absent.
  const AssetId& find(const std::string& ticker) const;

  const std::vector<Date>& timestamps() const { return timestamps_; }
  const Matrix<double>& returns() const { return returns_; }
  std::span<const double> series(std::size_t i) const { return returns_.row(i); }

  const std::string& sector(std::size_t i) const { return sectors_.at(i); }
  const std::vector<std::string>& sectors() const { return sectors_; }
  // Empty string when the meta file carried no industry.
  const std::string& industry(std::size_t i) const { return industries_.at(i); }
  const std::vector<std::string>& industries() const { return industries_; }
  // Sorted distinct sector labels.
  const std::vector<std::string>& classes() const { return classes_; }

  friend bool operator==(const ReturnsPanel&, const ReturnsPanel&) = default;

 private:
  std::vector<AssetId> assets_;
  std::vector<Date> timestamps_;
  Matrix<double> returns_;
  Granularity granularity_;
  std::vector<std::string> sectors_;
  std::vector<std::string> industries_;
  std::vector<std::string> classes_;
};

ReturnsPanel load_panel(const std::filesystem::path& returns_path,
                        const std::filesystem::path& meta_path,
                        Granularity granularity);

// Writes the long `date,ticker,return` CSV (17 significant digits).
void write_panel(const ReturnsPanel& panel, const std::filesystem::path& path);
// Writes `ticker,sector,industry`.
void write_meta(const ReturnsPanel& panel, const std::filesystem::path& path);

// Groups daily returns by ISO week or calendar month. A group at either edge
// is dropped when a weekday of its calendar period lies outside the data.
ReturnsPanel aggregate(const ReturnsPanel& panel, Granularity target,
                       AggregationMode mode = AggregationMode::Compound);

ReturnWindow window(const ReturnsPanel& panel, std::size_t asset, std::size_t t,
                    std::size_t lookback);

TimeRange valid_times(const ReturnsPanel& panel, std::size_t lookback);

}  // namespace caseembed
