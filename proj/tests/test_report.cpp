// Copyright 2026 The RWDE Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "rwde/report.hpp"

using namespace rwde;

TEST_CASE("format_g17 round-trips doubles exactly", "[report]") {
  const std::vector<double> xs = {0.0,   1.0,       1.0 / 3.0, 0.1,
                                  -0.25, 6.0,       1e300,     -1e-300,
                                  2.5,   123456789.123456789};
  for (double x : xs) {
    const std::string s = format_g17(x);
    CHECK(std::stod(s) == x);
  }
  // Integral values print without an exponent or trailing zeros.
  CHECK(format_g17(6.0) == "6");
  CHECK(format_g17(-3.0) == "-3");
}

TEST_CASE("fnv1a64 matches the published test vectors", "[report]") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ull);
  // Sensitive to every byte.
  CHECK(fnv1a64("ab") != fnv1a64("ba"));
}

TEST_CASE("hex64 pads to sixteen digits", "[report]") {
  CHECK(hex64(0) == "0000000000000000");
  CHECK(hex64(0xdeadbeefull) == "00000000deadbeef");
  CHECK(hex64(0xffffffffffffffffull) == "ffffffffffffffff");
}

TEST_CASE("CsvReport writes comments, header, and rows in order", "[report]") {
  CsvReport r({"k", "value"});
  r.add_comment("note", "alpha=1");
  r.add_row({"1", "0.5"});
  r.add_row({"2", "0.25"});
  REQUIRE(r.row_count() == 2);

  std::ostringstream os;
  r.write(os, {42, "00ff00ff00ff00ff"});
  CHECK(os.str() ==
        "# seed=42\n"
        "# config=00ff00ff00ff00ff\n"
        "# note=alpha=1\n"
        "k,value\n"
        "1,0.5\n"
        "2,0.25\n");
}

TEST_CASE("CsvReport with no rows still emits the header", "[report]") {
  CsvReport r({"only"});
  std::ostringstream os;
  r.write(os, {7, "aa"});
  CHECK(os.str() == "# seed=7\n# config=aa\nonly\n");
  CHECK(r.row_count() == 0);
}

TEST_CASE("CsvReport rejects rows of the wrong width", "[report]") {
  CsvReport r({"a", "b"});
  CHECK_THROWS_AS(r.add_row({"1"}), std::invalid_argument);
  CHECK_THROWS_AS(r.add_row({"1", "2", "3"}), std::invalid_argument);
  CHECK(r.row_count() == 0);
}

TEST_CASE("CsvReport accessors mirror what was added", "[report]") {
  CsvReport r({"x"});
  r.add_comment("k", "v");
  r.add_row({"9"});
  CHECK(r.columns() == std::vector<std::string>{"x"});
  REQUIRE(r.comments().size() == 1);
  CHECK(r.comments()[0].first == "k");
  CHECK(r.comments()[0].second == "v");
  REQUIRE(r.rows().size() == 1);
  CHECK(r.rows()[0][0] == "9");
}
