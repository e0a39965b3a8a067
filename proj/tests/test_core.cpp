// Copyright 2026 The CLOT Authors.
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

#include "clot/core.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <limits>

#include "clot/rng.hpp"

namespace clot {
namespace {

TEST_CASE("require throws Error with the given message") {
  REQUIRE_NOTHROW(require(true, "fine"));
  REQUIRE_THROWS_AS(require(false, "boom"), Error);
  REQUIRE_THROWS_WITH(require(false, "field x out of range"), "field x out of range");
}

TEST_CASE("format_double round-trips exactly") {
  Rng rng(7);
  for (int i = 0; i < 10000; ++i) {
    const double v = std::ldexp(rng.uniform(-1.0, 1.0), rng.uniform_int(-300, 300));
    const std::string s = format_double(v);
    REQUIRE(parse_double(s, "test") == v);
  }
  REQUIRE(format_double(0.0) == "0");
  REQUIRE(format_double(1.0) == "1");
  REQUIRE(format_double(0.1) == "0.1");
  REQUIRE(parse_double(format_double(-0.0), "test") == 0.0);
}

TEST_CASE("parse_double rejects junk and trailing garbage") {
  REQUIRE_THROWS_AS(parse_double("abc", "ctx"), Error);
  REQUIRE_THROWS_AS(parse_double("1.5x", "ctx"), Error);
  REQUIRE_THROWS_AS(parse_double("", "ctx"), Error);
  REQUIRE(parse_double("-2.5e3", "ctx") == -2500.0);
}

}  // namespace
}  // namespace clot
