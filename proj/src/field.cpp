#include "mlv/field.hpp"

#include <ostream>

namespace mlv {

bool is_prime(unsigned n) {
    if (n < 2) return false;
    for (unsigned d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

void require_supported_prime(unsigned p) {
    if (!is_prime(p))
        throw std::invalid_argument("modulus " + std::to_string(p) + " is not prime");
    if (p > kMaxPrime)
        throw std::invalid_argument("modulus " + std::to_string(p) + " exceeds supported maximum " +
                                    std::to_string(kMaxPrime));
}

unsigned mod_inverse(unsigned a, unsigned p) {
    a %= p;
    if (a == 0) throw MismatchError("inverse of zero in F_" + std::to_string(p));
    // extended Euclid on (a, p)
    long long t = 0, new_t = 1, r = p, new_r = a;
    while (new_r != 0) {
        long long q = r / new_r;
        long long tmp = t - q * new_t;
        t = new_t;
        new_t = tmp;
        tmp = r - q * new_r;
        r = new_r;
        new_r = tmp;
    }
    return mod_reduce(t, p);
}

Fp Fp::pow(long long e) const {
    if (e < 0) return inv().pow(-e);
    Fp result(1, p_);
    Fp base = *this;
    unsigned long long n = static_cast<unsigned long long>(e);
    while (n) {
        if (n & 1) result *= base;
        base *= base;
        n >>= 1;
    }
    return result;
}

std::ostream& operator<<(std::ostream& os, const Fp& x) { return os << x.value(); }

BigInt int_pow(unsigned base, unsigned long long exp) {
    BigInt r = 1;
    BigInt b = base;
    while (exp) {
        if (exp & 1) r *= b;
        b *= b;
        exp >>= 1;
    }
    return r;
}

Rational rational_pow(unsigned base, long long exp) {
    if (exp >= 0) return Rational(int_pow(base, static_cast<unsigned long long>(exp)));
    return Rational(1, int_pow(base, static_cast<unsigned long long>(-exp)));
}

std::string rational_str(const Rational& r) {
    std::string num = numerator(r).str();
    if (denominator(r) == 1) return num;
    return num + "/" + denominator(r).str();
}

}  // namespace mlv
