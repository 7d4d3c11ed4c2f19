#include <doctest.h>

#include "mlv/field.hpp"

using namespace mlv;

namespace {
const unsigned kPrimes[] = {2, 3, 5, 7, 11, 13};
}

TEST_CASE("prime recognition and the supported range") {
    CHECK(is_prime(2));
    CHECK(is_prime(13));
    CHECK_FALSE(is_prime(0));
    CHECK_FALSE(is_prime(1));
    CHECK_FALSE(is_prime(9));
    CHECK_NOTHROW(require_supported_prime(13));
    CHECK_THROWS_AS(require_supported_prime(4), std::invalid_argument);
    CHECK_THROWS_AS(require_supported_prime(17), std::invalid_argument);
}

TEST_CASE("element arithmetic on pinned values") {
    CHECK(fp_add(Fp(3, 5), Fp(4, 5)) == Fp(2, 5));
    CHECK(fp_add(Fp(1, 2), Fp(1, 2)) == Fp(0, 2));
    CHECK(fp_mul(Fp(2, 3), Fp(2, 3)) == Fp(1, 3));
    CHECK(fp_sub(Fp(0, 7), Fp(3, 7)) == Fp(4, 7));
    CHECK(Fp(-1, 5) == Fp(4, 5));
    CHECK(Fp(12, 5) == Fp(2, 5));
}

TEST_CASE("multiplicative inverses") {
    CHECK(fp_mul_inv(Fp(2, 5)) == Fp(3, 5));
    CHECK(fp_mul_inv(Fp(1, 2)) == Fp(1, 2));
    CHECK(fp_mul_inv(Fp(12, 13)) == Fp(12, 13));
    CHECK_THROWS_AS(fp_mul_inv(Fp(0, 3)), MismatchError);

    for (unsigned p : kPrimes)
        for (unsigned a = 1; a < p; ++a) {
            Fp x(a, p);
            CHECK(x * x.inv() == Fp(1, p));
            CHECK(x.inv().inv() == x);
        }
}

TEST_CASE("mixed moduli are rejected") {
    CHECK_THROWS_AS(Fp(1, 2) + Fp(1, 3), MismatchError);
    CHECK_THROWS_AS(Fp(1, 5) * Fp(1, 7), MismatchError);
    CHECK_FALSE(Fp(1, 2) == Fp(1, 3));
}

TEST_CASE("field axioms hold exhaustively for every supported modulus") {
    for (unsigned p : kPrimes) {
        for (unsigned a = 0; a < p; ++a)
            for (unsigned b = 0; b < p; ++b) {
                Fp x(a, p), y(b, p);
                CHECK(x + y == y + x);
                CHECK(x * y == y * x);
                CHECK((x - y) + y == x);
                for (unsigned c = 0; c < p; ++c) {
                    Fp z(c, p);
                    CHECK((x + y) + z == x + (y + z));
                    CHECK((x * y) * z == x * (y * z));
                    CHECK(x * (y + z) == x * y + x * z);
                }
            }
        CHECK(Fp(0, p) == -Fp(0, p));
    }
}

TEST_CASE("powers, including negative exponents") {
    CHECK(Fp(2, 5).pow(0) == Fp(1, 5));
    CHECK(Fp(2, 5).pow(4) == Fp(1, 5));
    CHECK(Fp(3, 7).pow(-1) == Fp(3, 7).inv());
    CHECK(Fp(2, 13).pow(12) == Fp(1, 13));
}

TEST_CASE("exact rational carrier") {
    Rational r(9, 16);
    CHECK(numerator(r) == 9);
    CHECK(denominator(r) == 16);
    CHECK(Rational(6, 8) == Rational(3, 4));  // lowest terms
    CHECK(rational_pow(2, -4) == Rational(1, 16));
    CHECK(rational_pow(3, 3) == Rational(27));
    // 3^90 comfortably exceeds 64-bit range and must stay exact
    Rational tiny = rational_pow(3, -90);
    CHECK(tiny * rational_pow(3, 90) == Rational(1));
    CHECK(rational_str(Rational(1, 4)) == "1/4");
    CHECK(rational_str(Rational(3)) == "3");
}
