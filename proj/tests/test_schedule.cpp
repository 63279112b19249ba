#include <cmath>

#include <gtest/gtest.h>

#include "nip/schedule.hpp"

using nip::EpsilonSchedule;

TEST(Schedule, HarmonicValues)
{
  const auto s = EpsilonSchedule::harmonic(0.1);
  EXPECT_EQ(s.at(0), 0.1);
  EXPECT_DOUBLE_EQ(s.at(3), 0.025);
  EXPECT_DOUBLE_EQ(EpsilonSchedule::harmonic(1.0, 0.5).at(3), 0.5);
}

TEST(Schedule, LogarithmicStartsAtEps0)
{
  const auto s = EpsilonSchedule::logarithmic(0.2);
  EXPECT_DOUBLE_EQ(s.at(0), 0.2);
  EXPECT_DOUBLE_EQ(s.at(10), 0.2 / std::log(10.0 + std::exp(1.0)));
}

TEST(Schedule, RatioApproachesOne)
{
  const auto s = EpsilonSchedule::harmonic(0.1);
  EXPECT_NEAR(s.at(10001) / s.at(10000), 10001.0 / 10002.0, 1e-15);
  for (std::size_t i = 1000; i < 20000; i += 97) EXPECT_GT(s.at(i + 1) / s.at(i), 0.999);
}

TEST(Schedule, StrictDecreaseAndPositivity)
{
  for (const auto& s : {EpsilonSchedule::harmonic(0.1), EpsilonSchedule::harmonic(0.1, 0.3),
                        EpsilonSchedule::logarithmic(0.1)}) {
    for (std::size_t i = 1; i <= (1u << 20); i *= 2) {
      EXPECT_GT(s.at(i), 0.0);
      EXPECT_LT(s.at(i), s.at(i - 1));
      EXPECT_LT(s.at(i + 1), s.at(i));
    }
  }
}

TEST(Schedule, SublinearWitnessAndNondecreasingRatio)
{
  for (const auto& s : {EpsilonSchedule::harmonic(0.1), EpsilonSchedule::harmonic(0.1, 0.5),
                        EpsilonSchedule::logarithmic(0.1)}) {
    for (double r : {0.9, 0.99}) {
      bool found = false;
      for (std::size_t i = 0; i <= 1000000 && !found; i = i * 2 + 1) found = s.at(i + 1) / s.at(i) > r;
      EXPECT_TRUE(found) << s.descriptor() << " r=" << r;
    }
  }
  const auto h = EpsilonSchedule::harmonic(0.1);
  double prev = 0.0;
  for (std::size_t i = 0; i < 100000; ++i) {
    const double ratio = h.at(i + 1) / h.at(i);
    EXPECT_GE(ratio, prev);
    prev = ratio;
  }
}

TEST(Schedule, ConstantForTesting)
{
  const auto s = EpsilonSchedule::constant_for_testing(0.3);
  EXPECT_EQ(s.at(0), 0.3);
  EXPECT_EQ(s.at(12345), 0.3);
}

TEST(Schedule, Validation)
{
  EXPECT_THROW(EpsilonSchedule::harmonic(0.0), nip::Error);
  EXPECT_THROW(EpsilonSchedule::harmonic(0.1, 1.5), nip::Error);
  EXPECT_THROW(EpsilonSchedule::harmonic(0.1, 0.0), nip::Error);
  EXPECT_THROW(EpsilonSchedule::logarithmic(-1.0), nip::Error);
}

TEST(Schedule, ParseDescriptors)
{
  EXPECT_EQ(EpsilonSchedule::parse("harmonic:p=1", 0.1).kind(), nip::ScheduleKind::Harmonic);
  EXPECT_EQ(EpsilonSchedule::parse("harmonic:p=0.5", 0.1).exponent(), 0.5);
  EXPECT_EQ(EpsilonSchedule::parse("log", 0.1).kind(), nip::ScheduleKind::Logarithmic);
  EXPECT_EQ(EpsilonSchedule::parse("const", 0.1).kind(), nip::ScheduleKind::ConstantForTesting);
  EXPECT_THROW(EpsilonSchedule::parse("geometric", 0.1), nip::Error);
  EXPECT_THROW(EpsilonSchedule::parse("harmonic:p=abc", 0.1), nip::Error);
  const auto s = EpsilonSchedule::parse("harmonic:p=0.75", 0.2);
  EXPECT_EQ(EpsilonSchedule::parse(s.descriptor(), 0.2).exponent(), 0.75);
}
