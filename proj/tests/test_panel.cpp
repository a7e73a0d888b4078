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

#include <fstream>

#include "caseembed/error.hpp"
#include "caseembed/panel.hpp"
#include "caseembed/stats.hpp"
#include "support.hpp"

using namespace caseembed;
using testing::TempDir;

namespace {

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("dates") {
  const Date d = Date::parse("2024-02-29");
  CHECK(d.iso() == "2024-02-29");
  CHECK(d.year() == 2024);
  CHECK(d.month() == 2);
  CHECK(d.iso_weekday() == 3);  // Thursday
  CHECK(Date::parse("1970-01-01").days == 0);
  CHECK(Date::from_ymd(2000, 3, 1).days - Date::from_ymd(2000, 2, 28).days == 2);
  CHECK_THROWS_AS(Date::parse("2023-02-29"), Error);
  CHECK_THROWS_AS(Date::parse("2023/01/01"), Error);
}

TEST_CASE("load panel from long CSV") {
  TempDir dir("panel");
  write_file(dir / "r.csv",
             "date,ticker,return\n"
             "2024-01-02,BBB,0.5\n2024-01-02,AAA,0.1\n"
             "2024-01-03,AAA,-0.2\n2024-01-03,BBB,0.25\n");
  write_file(dir / "m.csv", "ticker,sector,industry\nAAA,Energy,Oil\nBBB,\"Tech, Hardware\",Chips\n");
  const ReturnsPanel p = load_panel(dir / "r.csv", dir / "m.csv", Granularity::Daily);
  REQUIRE(p.num_assets() == 2);
  CHECK(p.asset(0).ticker == "AAA");
  CHECK(p.sector(1) == "Tech, Hardware");
  CHECK(p.industry(0) == "Oil");
  CHECK(p.series(1)[0] == 0.5);
  CHECK(p.series(0)[1] == -0.2);
  CHECK(p.classes() == std::vector<std::string>{"Energy", "Tech, Hardware"});

  write_panel(p, dir / "r2.csv");
  write_meta(p, dir / "m2.csv");
  CHECK(load_panel(dir / "r2.csv", dir / "m2.csv", Granularity::Daily) == p);
}

TEST_CASE("load panel contract errors") {
  TempDir dir("panelerr");
  write_file(dir / "m.csv", "ticker,sector\nAAA,Energy\n");
  write_file(dir / "r.csv", "date,ticker,return\n2024-01-02,AAA,0.1\n2024-01-02,XYZ,0.1\n");
  try {
    load_panel(dir / "r.csv", dir / "m.csv", Granularity::Daily);
    FAIL("expected MissingSector");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingSector);
    CHECK(std::string(e.what()).find("XYZ") != std::string::npos);
  }
  write_file(dir / "m.csv", "ticker,sector\nAAA,Energy\nBBB,Tech\n");
  write_file(dir / "r.csv", "date,ticker,return\n2024-01-02,AAA,0.1\n2024-01-02,AAA,0.2\n");
  CHECK(code_of([&] { load_panel(dir / "r.csv", dir / "m.csv", Granularity::Daily); }) ==
        ErrorCode::DuplicateRow);
  write_file(dir / "r.csv",
             "date,ticker,return\n2024-01-02,AAA,0.1\n2024-01-02,BBB,0.1\n2024-01-03,AAA,0.2\n");
  CHECK(code_of([&] { load_panel(dir / "r.csv", dir / "m.csv", Granularity::Daily); }) ==
        ErrorCode::RaggedSeries);
  write_file(dir / "r.csv", "date,ticker,return\n2024-01-02,AAA,abc\n");
  CHECK(code_of([&] { load_panel(dir / "r.csv", dir / "m.csv", Granularity::Daily); }) ==
        ErrorCode::Parse);
  CHECK(code_of([&] { load_panel(dir / "missing.csv", dir / "m.csv", Granularity::Daily); }) ==
        ErrorCode::Io);
}

TEST_CASE("degenerate single asset panel is valid") {
  Matrix<double> r(1, 3, 0.0);
  const ReturnsPanel p = testing::make_panel(r, {"Energy"});
  CHECK(p.num_assets() == 1);
  CHECK(p.num_periods() == 3);
}

TEST_CASE("window slicing") {
  Matrix<double> r(1, 5);
  for (int i = 0; i < 5; ++i) r(0, i) = i + 1;
  const ReturnsPanel p = testing::make_panel(r);
  auto w = window(p, 0, 4, 2);
  CHECK(std::vector<double>(w.values.begin(), w.values.end()) == std::vector<double>{4, 5});
  w = window(p, 0, 1, 2);
  CHECK(std::vector<double>(w.values.begin(), w.values.end()) == std::vector<double>{1, 2});
  CHECK(code_of([&] { window(p, 0, 0, 2); }) == ErrorCode::InsufficientHistory);
}

TEST_CASE("valid time range") {
  Matrix<double> r10(1, 10, 0.0), r5(1, 5, 0.0), r4(1, 4, 0.0);
  auto tr = valid_times(testing::make_panel(r10), 5);
  CHECK(tr.first == 4);
  CHECK(tr.last == 9);
  CHECK(tr.size() == 6);
  tr = valid_times(testing::make_panel(r5), 5);
  CHECK(tr.first == 4);
  CHECK(tr.size() == 1);
  CHECK(code_of([&] { valid_times(testing::make_panel(r4), 5); }) ==
        ErrorCode::WindowLongerThanSeries);
}

TEST_CASE("weekly aggregation compounds within ISO weeks") {
  // Mon 2024-01-01 .. Fri 2024-01-12: two complete weeks.
  const auto days = testing::weekdays(Date::from_ymd(2024, 1, 1), 10);
  Matrix<double> r(2, 10, 0.0);
  r(0, 0) = 0.01;
  r(0, 1) = 0.01;
  r(1, 5) = 0.10;
  r(1, 6) = -0.10;
  const ReturnsPanel p({"A", "B"}, days, r, Granularity::Daily, {"X", "Y"});
  const ReturnsPanel w = aggregate(p, Granularity::Weekly);
  REQUIRE(w.num_periods() == 2);
  CHECK(w.granularity() == Granularity::Weekly);
  CHECK(w.timestamps()[0].iso() == "2024-01-05");
  CHECK(w.series(0)[0] == doctest::Approx(0.0201).epsilon(1e-15));
  CHECK(w.series(1)[1] == doctest::Approx(-0.01).epsilon(1e-15));
  CHECK(w.series(0)[1] == 0.0);

  const ReturnsPanel s = aggregate(p, Granularity::Weekly, AggregationMode::Sum);
  CHECK(s.series(1)[1] == doctest::Approx(0.0));
}

TEST_CASE("aggregation drops partial edge periods") {
  // Wed 2024-01-03 .. Tue 2024-01-16: first and last weeks are partial.
  const auto days = testing::weekdays(Date::from_ymd(2024, 1, 3), 10);
  Matrix<double> r(1, 10, 0.0);
  const ReturnsPanel p({"A"}, days, r, Granularity::Daily, {"X"});
  const ReturnsPanel w = aggregate(p, Granularity::Weekly);
  REQUIRE(w.num_periods() == 1);
  CHECK(w.timestamps()[0].iso() == "2024-01-12");
  CHECK(w.series(0)[0] == 0.0);
}

TEST_CASE("monthly aggregation of an all-zero panel is all zero") {
  const auto days = testing::weekdays(Date::from_ymd(2024, 1, 1), 130);
  Matrix<double> r(3, days.size(), 0.0);
  const ReturnsPanel p({"A", "B", "C"}, days, r, Granularity::Daily, {"X", "X", "Y"});
  const ReturnsPanel m = aggregate(p, Granularity::Monthly);
  CHECK(m.num_periods() == 6);  // Jan..Jun 2024; the last day is 2024-06-28, a Friday
  for (double v : m.returns().data()) CHECK(v == 0.0);
  CHECK_THROWS_AS(aggregate(m, Granularity::Monthly), Error);
}

TEST_CASE("stats helpers") {
  const std::vector<double> v{1, 2, 3, 4, 5};
  CHECK(mean(v) == 3.0);
  CHECK(sample_stddev(v) == doctest::Approx(std::sqrt(2.5)).epsilon(1e-15));
  CHECK(percentile(v, 25) == 2.0);
  CHECK(percentile(v, 50) == 3.0);
  CHECK(percentile(v, 100) == 5.0);
  CHECK(percentile({10, 20}, 99.9) == doctest::Approx(19.99).epsilon(1e-14));
  const std::vector<double> c(7, 0.1);
  CHECK(mean(c) == 0.1);
  CHECK(sample_stddev(c) == 0.0);
}
