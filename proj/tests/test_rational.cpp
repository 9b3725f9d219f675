#include <doctest.h>

#include "msubdiv/rational.hpp"

using msubdiv::Rational;

TEST_CASE("rational parsing") {
    CHECK(Rational::parse("1/3") == Rational(1, 3));
    CHECK(Rational::parse("-2/6") == Rational(-1, 3));
    CHECK(Rational::parse("7") == Rational(7));
    CHECK(Rational::parse("0.25") == Rational(1, 4));
    CHECK(Rational::parse("-0.5") == Rational(-1, 2));
    CHECK(Rational::parse(" 2/3 ") == Rational(2, 3));
    CHECK_THROWS_AS(Rational::parse("1/0"), std::domain_error);
    CHECK_THROWS_AS(Rational::parse("abc"), std::invalid_argument);
    CHECK_THROWS_AS(Rational::parse("1e3"), std::invalid_argument);
    CHECK_THROWS_AS(Rational::parse(""), std::invalid_argument);
    CHECK_THROWS_AS(Rational::parse("0.5/2"), std::invalid_argument);
}

TEST_CASE("rational arithmetic normalizes") {
    Rational a(1, 3), b(1, 6);
    CHECK(a + b == Rational(1, 2));
    CHECK(a - b == Rational(1, 6));
    CHECK(a * b == Rational(1, 18));
    CHECK(a / b == Rational(2));
    CHECK((-a).str() == "-1/3");
    CHECK(Rational(4, 8).str() == "1/2");
    CHECK(Rational(3, -6) == Rational(-1, 2));
    CHECK(Rational(0, 5).is_zero());
    CHECK(Rational(1, 3) < Rational(1, 2));
    CHECK(Rational(-1, 2) < Rational(-1, 3));
}

TEST_CASE("rational from_double is exact for dyadics") {
    CHECK(Rational::from_double(0.5) == Rational(1, 2));
    CHECK(Rational::from_double(-0.75) == Rational(-3, 4));
    CHECK(Rational::from_double(3.0) == Rational(3));
    CHECK(Rational::from_double(0.0).is_zero());
    // 0.1 is not a dyadic rational; the conversion is exact for the double bits
    Rational x = Rational::from_double(0.1);
    CHECK(x.to_double() == 0.1);
    CHECK(x != Rational(1, 10));
}

TEST_CASE("rational overflow is detected, not wrapped") {
    Rational big(msubdiv::Int128(1) << 100, 1);
    CHECK_THROWS_AS(big * big, std::overflow_error);
}
