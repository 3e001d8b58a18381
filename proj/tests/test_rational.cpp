#include <gtest/gtest.h>

#include "freepoisson/rational.hpp"

using namespace freepoisson;

TEST(Rational, ParseAndRender) {
    EXPECT_EQ(Rational::parse("6/4").str(), "3/2");
    EXPECT_EQ(Rational::parse("-2/4"), Rational(-1, 2));
    EXPECT_EQ(Rational::parse("+7"), 7);
    EXPECT_EQ(Rational::parse("0/5").str(), "0");
    for (const char* bad : {"", "1/0", "a", "1/-2", "1.5", " 1", "1/", "/2"})
        EXPECT_THROW(Rational::parse(bad), UsageError) << bad;
}

TEST(Rational, LowestTermsAndSign) {
    Rational r(Integer(10), Integer(-4));
    EXPECT_EQ(r.numerator(), -5);
    EXPECT_EQ(r.denominator(), 2);
    EXPECT_THROW(Rational(Integer(1), Integer(0)), UsageError);
    EXPECT_THROW(Rational(1) / Rational(0), UsageError);
}

TEST(Rational, Decimal) {
    EXPECT_EQ(Rational(19, 10).decimal(), "1.9000000000000000000");
    EXPECT_EQ(Rational(2).decimal(), "2.0000000000000000000");
    EXPECT_EQ(Rational(1, 3).decimal(), "0.33333333333333333333");
    EXPECT_EQ(Rational(2, 3).decimal(5), "0.66667");
    EXPECT_EQ(Rational(-1, 640).decimal(4), "-0.001563");
    EXPECT_EQ(Rational(0).decimal(), "0");
    EXPECT_EQ(Rational(99999, 1000).decimal(3), "100");
    EXPECT_EQ(Rational(123456).decimal(3), "123000");
    EXPECT_EQ(Rational(9996, 10000).decimal(3), "1.00");
}

TEST(Rational, Pow) {
    EXPECT_EQ(pow(Rational(-2, 3), 3), Rational(-8, 27));
    EXPECT_EQ(pow(Rational(5), 0), 1);
}
