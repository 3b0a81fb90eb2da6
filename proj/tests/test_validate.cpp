// Copyright 2026 The halypo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "test_util.hpp"

#include <set>

namespace halypo {
namespace {

class Suite : public ::testing::TestWithParam<std::string> {};

TEST_P(Suite, AllChecksPass) {
  const auto rep = validate::run_suite(GetParam());
  ASSERT_FALSE(rep.checks.empty());
  for (const auto& c : rep.checks) {
    EXPECT_TRUE(c.passed) << c.suite << "/" << c.name << " measured " << c.measured << " tol "
                          << c.tolerance << " " << c.detail;
  }
  EXPECT_TRUE(rep.passed());
}

INSTANTIATE_TEST_SUITE_P(Validate, Suite,
                         ::testing::Values("projection", "gradients", "descent", "convergence",
                                           "metrics"));

TEST(ValidateAll, EnumeratesAtLeastTwentyDistinctChecks) {
  std::size_t total = 0;
  std::set<std::string> names;
  for (const std::string s : {"projection", "gradients", "descent", "convergence", "metrics"}) {
    for (const auto& c : validate::run_suite(s).checks) {
      ++total;
      names.insert(c.suite + "/" + c.name);
    }
  }
  EXPECT_GE(total, 20u);
  EXPECT_EQ(names.size(), total);
}

TEST(ValidateAll, UnknownSuiteIsAConfigError) {
  EXPECT_THROW(validate::run_suite("nonsense"), ConfigError);
}

TEST(ValidateAll, ReportJsonCarriesEveryCheck) {
  const auto rep = validate::run_suite("projection");
  const auto j = validate::report_to_json(rep);
  EXPECT_EQ(j["schema_version"], 1);
  EXPECT_EQ(j["checks"].size(), rep.checks.size());
  EXPECT_TRUE(j["passed"].get<bool>());
  for (const auto& c : j["checks"]) {
    EXPECT_TRUE(c.contains("name"));
    EXPECT_TRUE(c.contains("measured"));
    EXPECT_TRUE(c.contains("tolerance"));
  }
}

}  // namespace
}  // namespace halypo
