#include <gtest/gtest.h>

#include <cmath>

#include "cfsv/curves.hpp"
#include "cfsv/error.hpp"

using namespace cfsv;

TEST(Curves, FlatCurve) {
  const auto c = MarketCurves::flat(80.0, 0.95);
  EXPECT_DOUBLE_EQ(c.forward(0.3), 80.0);
  EXPECT_DOUBLE_EQ(c.forward(30.0), 80.0);
  EXPECT_DOUBLE_EQ(c.discount(2.0), 0.95);
}

TEST(Curves, EmptyDiscountMeansUnity) {
  const MarketCurves c({{0.0, 1.0}, {1.0, 2.0}});
  EXPECT_DOUBLE_EQ(c.discount(0.7), 1.0);
}

TEST(Curves, LogLinearInterpolation) {
  const MarketCurves c({{1.0, 1.0}, {2.0, 4.0}}, {{1.0, 0.9}, {3.0, 0.7}});
  EXPECT_NEAR(c.forward(1.5), 2.0, 1e-14);
  EXPECT_NEAR(c.discount(2.0), std::sqrt(0.9 * 0.7), 1e-14);
  EXPECT_DOUBLE_EQ(c.forward(0.5), 1.0);
  EXPECT_DOUBLE_EQ(c.forward(5.0), 4.0);
  EXPECT_DOUBLE_EQ(c.discount(10.0), 0.7);
}

TEST(Curves, RejectsInvalid) {
  EXPECT_THROW(MarketCurves({}), InputError);
  EXPECT_THROW(MarketCurves({{1.0, -1.0}}), InputError);
  EXPECT_THROW(MarketCurves({{1.0, 1.0}, {1.0, 2.0}}), InputError);
  EXPECT_THROW(MarketCurves({{1.0, 1.0}}, {{1.0, 1.5}}), InputError);
  EXPECT_THROW(MarketCurves({{-1.0, 1.0}}), InputError);
  try {
    MarketCurves({{1.0, 0.0}});
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidCurve);
  }
}
