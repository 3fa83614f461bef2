#include <doctest.h>

#include <random>

#include "irtgrid/csv.hpp"
#include "irtgrid/errors.hpp"

using namespace irtgrid;

TEST_CASE("split_csv_line handles plain and quoted fields") {
  CHECK(split_csv_line("a,b,c") == std::vector<std::string>{"a", "b", "c"});
  CHECK(split_csv_line("a,,c") == std::vector<std::string>{"a", "", "c"});
  CHECK(split_csv_line("\"a,b\",c") == std::vector<std::string>{"a,b", "c"});
  CHECK(split_csv_line("\"he said \"\"hi\"\"\",x") ==
        std::vector<std::string>{"he said \"hi\"", "x"});
  CHECK(split_csv_line("") == std::vector<std::string>{""});
  CHECK_THROWS_AS(split_csv_line("\"unterminated"), ParseError);
}

TEST_CASE("csv_escape quotes only when needed") {
  CHECK(csv_escape("plain") == "plain");
  CHECK(csv_escape("a,b") == "\"a,b\"");
  CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
}

TEST_CASE("format_double round-trips random doubles exactly") {
  std::mt19937_64 eng(123);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_int_distribution<int> scale(-300, 300);
  for (int i = 0; i < 1000; ++i) {
    const double v = std::ldexp(unit(eng), scale(eng));
    const double back = parse_double(format_double(v), "round trip");
    CHECK(back == v);
  }
  CHECK(parse_double(format_double(0.0), "zero") == 0.0);
  CHECK(format_double(std::nan("")) == "nan");
}

TEST_CASE("parse_double rejects junk") {
  CHECK_THROWS_AS(parse_double("1.2.3", "ctx"), ParseError);
  CHECK_THROWS_AS(parse_double("", "ctx"), ParseError);
  CHECK_THROWS_AS(parse_double("12abc", "ctx"), ParseError);
  CHECK(parse_double(" 2.5 ", "ctx") == 2.5);
}

TEST_CASE("trim strips ascii whitespace") {
  CHECK(trim("  x y \t\r\n") == "x y");
  CHECK(trim("") == "");
  CHECK(trim(" \t ") == "");
}
