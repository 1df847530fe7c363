#include <gtest/gtest.h>

#include "shellmem/harness.hpp"

using namespace shellmem;

class PropertySuite : public ::testing::TestWithParam<std::string> {};

TEST_P(PropertySuite, AllChecksPass) {
  const PropertyReport r = run_properties(GetParam(), 1);
  EXPECT_FALSE(r.checks.empty());
  for (const auto& c : r.checks)
    EXPECT_TRUE(c.passed) << c.name << ": value " << c.value << ", threshold " << c.threshold << " " << c.detail;
}

TEST_P(PropertySuite, OtherSeedAlsoPasses) {
  const PropertyReport r = run_properties(GetParam(), 20261019);
  for (const auto& c : r.checks) EXPECT_TRUE(c.passed) << c.name << ": value " << c.value;
}

INSTANTIATE_TEST_SUITE_P(Suites, PropertySuite, ::testing::ValuesIn(property_suites()),
                         [](const auto& info) { return info.param; });
