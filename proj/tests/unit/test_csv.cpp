#include <doctest.h>

#include <sstream>

#include "lagaboost/csv.hpp"

using namespace lagaboost;

namespace {
CsvTable parse(const std::string& text) {
  std::istringstream is(text);
  return read_csv(is);
}
}  // namespace

TEST_SUITE("csv") {
  TEST_CASE("reads header and rows with CRLF, BOM, blank lines, and padding") {
    const auto t = parse("\xEF\xBB\xBFy, group ,x1\r\n1,3, 0.5\r\n\r\n0,4,-2e-3\r\n");
    CHECK(t.header == std::vector<std::string>{"y", "group", "x1"});
    REQUIRE(t.num_rows() == 2);
    CHECK(numeric_column(t, "x1")[1] == -2e-3);
    CHECK(integer_column(t, "group") == std::vector<std::int64_t>{3, 4});
    CHECK(t.column("x1") == 2);
    CHECK(t.has_column("y"));
    CHECK_FALSE(t.has_column("z"));
    CHECK(numeric_columns(t, {"x1", "y"}).row(0) == Eigen::RowVector2d(0.5, 1.0));
  }

  TEST_CASE("numbers") {
    CHECK(parse_double("+1.5", "c", 1) == 1.5);
    CHECK(parse_double("1e300", "c", 1) == 1e300);
    CHECK(parse_int("12.0", "g", 1) == 12);
    CHECK(parse_int("-7", "g", 1) == -7);
    CHECK_THROWS_AS(parse_double("", "c", 1), CsvError);
    CHECK_THROWS_AS(parse_double("nan", "c", 1), CsvError);
    CHECK_THROWS_AS(parse_double("inf", "c", 1), CsvError);
    CHECK_THROWS_AS(parse_double("1.5x", "c", 1), CsvError);
    CHECK_THROWS_AS(parse_int("1.5", "g", 1), CsvError);
  }

  TEST_CASE("error messages name the column and row") {
    const auto t = parse("y,x\n1,2\n0,abc\n");
    try {
      numeric_column(t, "x");
      FAIL("expected an error");
    } catch (const CsvError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("'x'") != std::string::npos);
      CHECK(msg.find("row 2") != std::string::npos);
    }
    try {
      t.column("group");
      FAIL("expected an error");
    } catch (const CsvError& e) {
      CHECK(std::string(e.what()).find("'group'") != std::string::npos);
    }
  }

  TEST_CASE("malformed files") {
    CHECK_THROWS_AS(parse(""), CsvError);
    CHECK_THROWS_AS(parse("a,b\n1\n"), CsvError);
    CHECK_THROWS_AS(parse("a,a\n1,2\n"), CsvError);
    CHECK_THROWS_AS(parse("a,,b\n1,2,3\n"), CsvError);
    CHECK_THROWS_AS(read_csv_file("/nonexistent/file.csv"), CsvError);
    CHECK(parse("a,b\n").num_rows() == 0);
  }
}
