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

#include "caseembed/panel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <unordered_map>

#include "caseembed/error.hpp"
#include "csv.hpp"

namespace caseembed {

namespace {

// Civil-date conversions (H. Hinnant's algorithms).
std::int32_t days_from_civil(int y, unsigned m, unsigned d) {
  y -= m <= 2;
  const int era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<int>(doe) - 719468;
}

struct Ymd {
  int y;
  unsigned m;
  unsigned d;
};

Ymd civil_from_days(std::int32_t z) {
  z += 719468;
  const int era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const int y = static_cast<int>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp < 10 ? mp + 3 : mp - 9;
  return {y + (m <= 2), m, d};
}

bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

unsigned days_in_month(int y, unsigned m) {
  static constexpr unsigned kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  return m == 2 && is_leap(y) ? 29 : kDays[m - 1];
}

// First and last calendar day of the period containing `d`.
std::pair<Date, Date> period_bounds(Date d, Granularity g) {
  switch (g) {
    case Granularity::Daily:
      return {d, d};
    case Granularity::Weekly: {
      const Date monday{d.days - static_cast<std::int32_t>(d.iso_weekday())};
      return {monday, Date{monday.days + 6}};
    }
    case Granularity::Monthly: {
      const Ymd ymd = civil_from_days(d.days);
      return {Date::from_ymd(ymd.y, ymd.m, 1),
              Date::from_ymd(ymd.y, ymd.m, days_in_month(ymd.y, ymd.m))};
    }
  }
  return {d, d};
}

std::int32_t period_key(Date d, Granularity g) {
  return period_bounds(d, g).first.days;
}

bool has_weekday(Date from, Date to) {  // inclusive range
  for (std::int32_t x = from.days; x <= to.days; ++x) {
    if (Date{x}.iso_weekday() < 5) return true;
  }
  return false;
}

}  // namespace

const char* to_string(Granularity g) {
  switch (g) {
    case Granularity::Daily: return "daily";
    case Granularity::Weekly: return "weekly";
    case Granularity::Monthly: return "monthly";
  }
  return "?";
}

Granularity parse_granularity(const std::string& s) {
  std::string lower = s;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "daily" || lower == "d") return Granularity::Daily;
  if (lower == "weekly" || lower == "w") return Granularity::Weekly;
  if (lower == "monthly" || lower == "m") return Granularity::Monthly;
  fail(ErrorCode::InvalidArgument, "unknown granularity '" + s + "'");
}

Date Date::parse(std::string_view iso) {
  iso = detail::trim(iso);
  if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') {
    fail(ErrorCode::Parse, "bad ISO-8601 date '" + std::string(iso) + "'");
  }
  const std::string ctx = "in date '" + std::string(iso) + "'";
  const int y = detail::parse_int<int>(iso.substr(0, 4), ctx);
  const unsigned m = detail::parse_int<unsigned>(iso.substr(5, 2), ctx);
  const unsigned d = detail::parse_int<unsigned>(iso.substr(8, 2), ctx);
  if (m < 1 || m > 12 || d < 1 || d > days_in_month(y, m)) {
    fail(ErrorCode::Parse, "invalid calendar date '" + std::string(iso) + "'");
  }
  return from_ymd(y, m, d);
}

Date Date::from_ymd(int y, unsigned m, unsigned d) {
  return Date{days_from_civil(y, m, d)};
}

std::string Date::iso() const {
  const Ymd ymd = civil_from_days(days);
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", ymd.y, ymd.m, ymd.d);
  return buf;
}

int Date::year() const { return civil_from_days(days).y; }
unsigned Date::month() const { return civil_from_days(days).m; }

unsigned Date::iso_weekday() const {
  // 1970-01-01 was a Thursday (3 when Monday = 0).
  const int w = (days % 7 + 7 + 3) % 7;
  return static_cast<unsigned>(w);
}

ReturnsPanel::ReturnsPanel(std::vector<std::string> tickers,
                           std::vector<Date> timestamps, Matrix<double> returns,
                           Granularity granularity,
                           std::vector<std::string> sectors,
                           std::vector<std::string> industries)
    : granularity_(granularity) {
  const std::size_t n = tickers.size();
  const std::size_t t = timestamps.size();
  require(n > 0, "panel has no assets");
  require(t > 0, "panel has no time points");
  if (returns.rows() != n || returns.cols() != t) {
    fail(ErrorCode::DimensionMismatch, "returns matrix is not N x T");
  }
  if (sectors.size() != n) {
    fail(ErrorCode::DimensionMismatch, "sector list does not match asset count");
  }
  if (industries.empty()) industries.assign(n, "");
  if (industries.size() != n) {
    fail(ErrorCode::DimensionMismatch, "industry list does not match asset count");
  }
  for (std::size_t i = 1; i < t; ++i) {
    if (!(timestamps[i - 1] < timestamps[i])) {
      fail(ErrorCode::InvalidArgument,
           "timestamps not strictly increasing at " + timestamps[i].iso());
    }
    if (period_key(timestamps[i - 1], granularity) ==
        period_key(timestamps[i], granularity)) {
      fail(ErrorCode::InvalidArgument,
           "two observations in one " + std::string(to_string(granularity)) +
               " period at " + timestamps[i].iso());
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return tickers[a] < tickers[b]; });

  returns_ = Matrix<double>(n, t);
  assets_.reserve(n);
  sectors_.reserve(n);
  industries_.reserve(n);
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t src = order[r];
    const std::string& ticker = tickers[src];
    require(!ticker.empty(), "empty ticker");
    if (r > 0 && assets_.back().ticker == ticker) {
      fail(ErrorCode::InvalidArgument, "duplicate ticker '" + ticker + "'");
    }
    if (sectors[src].empty()) {
      fail(ErrorCode::MissingSector, "MissingSector(\"" + ticker + "\")");
    }
    assets_.push_back({ticker, r});
    sectors_.push_back(std::move(sectors[src]));
    industries_.push_back(std::move(industries[src]));
    auto from = returns.row(src);
    auto to = returns_.row(r);
    for (std::size_t c = 0; c < t; ++c) {
      if (!std::isfinite(from[c])) {
        fail(ErrorCode::InvalidArgument,
             "non-finite return for '" + ticker + "' at " + timestamps[c].iso());
      }
      to[c] = from[c];
    }
  }
  timestamps_ = std::move(timestamps);

  std::set<std::string> distinct(sectors_.begin(), sectors_.end());
  classes_.assign(distinct.begin(), distinct.end());
}

const AssetId& ReturnsPanel::find(const std::string& ticker) const {
  auto it = std::lower_bound(
      assets_.begin(), assets_.end(), ticker,
      [](const AssetId& a, const std::string& t) { return a.ticker < t; });
  if (it == assets_.end() || it->ticker != ticker) {
    fail(ErrorCode::InvalidArgument, "unknown ticker '" + ticker + "'");
  }
  return *it;
}

ReturnsPanel load_panel(const std::filesystem::path& returns_path,
                        const std::filesystem::path& meta_path,
                        Granularity granularity) {
  struct Sector {
    std::string sector;
    std::string industry;
  };
  std::unordered_map<std::string, Sector> meta;
  {
    auto in = detail::open_in(meta_path.string());
    std::string line;
    if (!std::getline(in, line)) fail(ErrorCode::Parse, "empty meta file");
    auto header = detail::split_csv(detail::trim(line));
    if (header.size() < 2 || detail::trim(header[0]) != "ticker" ||
        detail::trim(header[1]) != "sector") {
      fail(ErrorCode::Parse, "meta header must start with 'ticker,sector'");
    }
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
      ++lineno;
      if (detail::trim(line).empty()) continue;
      auto f = detail::split_csv(detail::trim(line));
      if (f.size() < 2) {
        fail(ErrorCode::Parse, "meta line " + std::to_string(lineno) + ": too few fields");
      }
      Sector s{std::string(detail::trim(f[1])),
               f.size() > 2 ? std::string(detail::trim(f[2])) : std::string()};
      meta[std::string(detail::trim(f[0]))] = std::move(s);
    }
  }

  std::map<std::string, std::map<Date, double>> rows;
  std::set<Date> all_dates;
  {
    auto in = detail::open_in(returns_path.string());
    std::string line;
    if (!std::getline(in, line)) fail(ErrorCode::Parse, "empty returns file");
    auto header = detail::split_csv(detail::trim(line));
    if (header.size() != 3 || detail::trim(header[0]) != "date" ||
        detail::trim(header[1]) != "ticker" || detail::trim(header[2]) != "return") {
      fail(ErrorCode::Parse, "returns header must be 'date,ticker,return'");
    }
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
      ++lineno;
      if (detail::trim(line).empty()) continue;
      auto f = detail::split_csv(detail::trim(line));
      const std::string ctx = "at returns line " + std::to_string(lineno);
      if (f.size() != 3) fail(ErrorCode::Parse, "wrong field count " + ctx);
      const Date date = Date::parse(f[0]);
      const std::string ticker(detail::trim(f[1]));
      const double value = detail::parse_double(f[2], ctx);
      if (!rows[ticker].emplace(date, value).second) {
        fail(ErrorCode::DuplicateRow,
             "duplicate row (" + ticker + ", " + date.iso() + ") " + ctx);
      }
      all_dates.insert(date);
    }
  }
  if (rows.empty()) fail(ErrorCode::Parse, "returns file has no data rows");

  std::vector<Date> timestamps(all_dates.begin(), all_dates.end());
  const std::size_t t = timestamps.size();
  std::vector<std::string> tickers;
  std::vector<std::string> sectors;
  std::vector<std::string> industries;
  Matrix<double> returns(rows.size(), t);
  std::size_t r = 0;
  for (const auto& [ticker, series] : rows) {
    auto it = meta.find(ticker);
    if (it == meta.end() || it->second.sector.empty()) {
      fail(ErrorCode::MissingSector, "MissingSector(\"" + ticker + "\")");
    }
    if (series.size() != t) {
      fail(ErrorCode::RaggedSeries, "ragged series for '" + ticker + "': " +
                                        std::to_string(series.size()) + " of " +
                                        std::to_string(t) + " observations");
    }
    std::size_t c = 0;
    for (const auto& [date, value] : series) returns(r, c++) = value;
    tickers.push_back(ticker);
    sectors.push_back(it->second.sector);
    industries.push_back(it->second.industry);
    ++r;
  }
  return ReturnsPanel(std::move(tickers), std::move(timestamps), std::move(returns),
                      granularity, std::move(sectors), std::move(industries));
}

void write_panel(const ReturnsPanel& panel, const std::filesystem::path& path) {
  auto out = detail::open_out(path.string());
  out << "date,ticker,return\n";
  for (std::size_t c = 0; c < panel.num_periods(); ++c) {
    const std::string date = panel.timestamps()[c].iso();
    for (std::size_t i = 0; i < panel.num_assets(); ++i) {
      out << date << ',' << detail::csv_field(panel.asset(i).ticker) << ','
          << detail::format_double(panel.returns()(i, c)) << '\n';
    }
  }
  if (!out) fail(ErrorCode::Io, "write failed for '" + path.string() + "'");
}

void write_meta(const ReturnsPanel& panel, const std::filesystem::path& path) {
  auto out = detail::open_out(path.string());
  out << "ticker,sector,industry\n";
  for (std::size_t i = 0; i < panel.num_assets(); ++i) {
    out << detail::csv_field(panel.asset(i).ticker) << ','
        << detail::csv_field(panel.sector(i)) << ','
        << detail::csv_field(panel.industry(i)) << '\n';
  }
  if (!out) fail(ErrorCode::Io, "write failed for '" + path.string() + "'");
}

ReturnsPanel aggregate(const ReturnsPanel& panel, Granularity target,
                       AggregationMode mode) {
  if (panel.granularity() != Granularity::Daily) {
    fail(ErrorCode::InvalidArgument, "aggregation requires a daily panel");
  }
  if (target == Granularity::Daily) {
    fail(ErrorCode::InvalidArgument,
         "aggregation target must be coarser than the input granularity");
  }

  // Contiguous [begin, end) column groups sharing a calendar period.
  const auto& ts = panel.timestamps();
  std::vector<std::pair<std::size_t, std::size_t>> groups;
  for (std::size_t c = 0; c < ts.size();) {
    std::size_t e = c + 1;
    while (e < ts.size() && period_key(ts[e], target) == period_key(ts[c], target)) ++e;
    groups.emplace_back(c, e);
    c = e;
  }
  if (!groups.empty()) {
    const auto [first_start, first_end] = period_bounds(ts.front(), target);
    (void)first_end;
    if (ts.front() > first_start && has_weekday(first_start, Date{ts.front().days - 1})) {
      groups.erase(groups.begin());
    }
  }
  if (!groups.empty()) {
    const auto [last_start, last_end] = period_bounds(ts.back(), target);
    (void)last_start;
    if (ts.back() < last_end && has_weekday(Date{ts.back().days + 1}, last_end)) {
      groups.pop_back();
    }
  }
  if (groups.empty()) {
    fail(ErrorCode::InvalidArgument, "no complete " + std::string(to_string(target)) +
                                         " period in the panel");
  }

  const std::size_t n = panel.num_assets();
  Matrix<double> out(n, groups.size());
  std::vector<Date> stamps;
  stamps.reserve(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto [b, e] = groups[g];
    stamps.push_back(ts[e - 1]);
    for (std::size_t i = 0; i < n; ++i) {
      auto row = panel.series(i);
      double acc = mode == AggregationMode::Compound ? 1.0 : 0.0;
      for (std::size_t c = b; c < e; ++c) {
        if (mode == AggregationMode::Compound) {
          acc *= 1.0 + row[c];
        } else {
          acc += row[c];
        }
      }
      out(i, g) = mode == AggregationMode::Compound ? acc - 1.0 : acc;
    }
  }

  std::vector<std::string> tickers;
  for (const auto& a : panel.assets()) tickers.push_back(a.ticker);
  return ReturnsPanel(std::move(tickers), std::move(stamps), std::move(out), target,
                      panel.sectors(), panel.industries());
}

ReturnWindow window(const ReturnsPanel& panel, std::size_t asset, std::size_t t,
                    std::size_t lookback) {
  require(lookback >= 2, "lookback must be at least 2");
  require(asset < panel.num_assets(), "asset index out of range");
  if (t >= panel.num_periods()) {
    fail(ErrorCode::InvalidArgument, "time index " + std::to_string(t) + " out of range");
  }
  if (t + 1 < lookback) {
    fail(ErrorCode::InsufficientHistory,
         "InsufficientHistory: t=" + std::to_string(t) + " < n-1=" +
             std::to_string(lookback - 1));
  }
  return ReturnWindow{panel.asset(asset), t, lookback,
                      panel.series(asset).subspan(t + 1 - lookback, lookback)};
}

TimeRange valid_times(const ReturnsPanel& panel, std::size_t lookback) {
  require(lookback >= 2, "lookback must be at least 2");
  if (lookback > panel.num_periods()) {
    fail(ErrorCode::WindowLongerThanSeries,
         "WindowLongerThanSeries: lookback " + std::to_string(lookback) + " > T=" +
             std::to_string(panel.num_periods()));
  }
  return TimeRange{lookback - 1, panel.num_periods() - 1};
}

}  // namespace caseembed
