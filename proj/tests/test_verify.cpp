#include <gtest/gtest.h>

#include "rsfluct/verify.hpp"

using namespace rsfluct;

TEST(Verify, FastLevelPasses) {
  const auto report = run_verification(VerifyLevel::fast);
  EXPECT_TRUE(report.ok());
  EXPECT_GT(report.checks.size(), 6u);
  for (const auto& c : report.checks) EXPECT_LE(c.N, 20);
}

TEST(Verify, InjectedFaultIsNamed) {
  const auto report = run_verification(VerifyLevel::fast, Fault{4, 20, MultiIndex::single(2), 1});
  ASSERT_FALSE(report.ok());
  bool found = false;
  for (const auto& c : report.checks) {
    if (c.passed) continue;
    EXPECT_EQ(c.k, 4);
    EXPECT_EQ(c.N, 20);
    if (c.suite == "identity") {
      found = true;
      EXPECT_NE(c.detail.find("beta=2delta"), std::string::npos) << c.detail;
    }
  }
  EXPECT_TRUE(found);
}

TEST(Verify, LevelParsing) {
  EXPECT_EQ(parse_verify_level("full"), VerifyLevel::full);
  EXPECT_THROW(parse_verify_level("slow"), std::invalid_argument);
}
