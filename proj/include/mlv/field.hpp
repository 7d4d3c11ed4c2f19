#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

#include "mlv/errors.hpp"

namespace mlv {

/// Exact rational carrier for biases, density bounds and rank values.
/// Always kept in lowest terms; comparisons are exact.
using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

/// Largest prime modulus accepted.  Kept small so that exhaustive
/// enumeration over whole spaces stays cheap.
inline constexpr unsigned kMaxPrime = 13;

bool is_prime(unsigned n);

/// Throws std::invalid_argument unless p is a prime with p <= kMaxPrime.
void require_supported_prime(unsigned p);

/// Reduces an arbitrary integer into [0, p).
inline unsigned mod_reduce(long long value, unsigned p) {
    long long r = value % static_cast<long long>(p);
    if (r < 0) r += p;
    return static_cast<unsigned>(r);
}

/// Multiplicative inverse of a (mod p); a must be nonzero mod p.
unsigned mod_inverse(unsigned a, unsigned p);

/// Element of the prime field F_p.  Each element carries its modulus so
/// that mixed-modulus arithmetic is rejected instead of silently
/// computing garbage.
class Fp {
public:
    Fp() : v_(0), p_(2) {}
    Fp(long long value, unsigned p) : p_(p) {
        require_supported_prime(p);
        v_ = mod_reduce(value, p);
    }

    unsigned value() const { return v_; }
    unsigned modulus() const { return p_; }
    bool is_zero() const { return v_ == 0; }

    friend Fp operator+(Fp a, Fp b) {
        a.check_same(b);
        return Fp::raw(a.v_ + b.v_ >= a.p_ ? a.v_ + b.v_ - a.p_ : a.v_ + b.v_, a.p_);
    }
    friend Fp operator-(Fp a, Fp b) {
        a.check_same(b);
        return Fp::raw(a.v_ >= b.v_ ? a.v_ - b.v_ : a.v_ + a.p_ - b.v_, a.p_);
    }
    friend Fp operator*(Fp a, Fp b) {
        a.check_same(b);
        return Fp::raw(a.v_ * b.v_ % a.p_, a.p_);
    }
    Fp operator-() const { return Fp::raw(v_ == 0 ? 0 : p_ - v_, p_); }

    Fp& operator+=(Fp b) { return *this = *this + b; }
    Fp& operator-=(Fp b) { return *this = *this - b; }
    Fp& operator*=(Fp b) { return *this = *this * b; }

    friend bool operator==(Fp a, Fp b) { return a.p_ == b.p_ && a.v_ == b.v_; }
    friend bool operator!=(Fp a, Fp b) { return !(a == b); }

    /// Multiplicative inverse; throws on zero.
    Fp inv() const {
        if (v_ == 0) throw MismatchError("inverse of zero in F_" + std::to_string(p_));
        return Fp::raw(mod_inverse(v_, p_), p_);
    }

    Fp pow(long long e) const;

    std::string str() const { return std::to_string(v_); }

private:
    static Fp raw(unsigned v, unsigned p) {
        Fp x;
        x.v_ = v;
        x.p_ = p;
        return x;
    }
    void check_same(const Fp& b) const {
        if (p_ != b.p_)
            throw MismatchError("mixed moduli " + std::to_string(p_) + " and " +
                                std::to_string(b.p_));
    }

    unsigned v_;
    unsigned p_;
};

std::ostream& operator<<(std::ostream& os, const Fp& x);

inline Fp fp_add(Fp a, Fp b) { return a + b; }
inline Fp fp_sub(Fp a, Fp b) { return a - b; }
inline Fp fp_mul(Fp a, Fp b) { return a * b; }
inline Fp fp_mul_inv(Fp a) { return a.inv(); }

/// Exact integer power p^e as a big integer (e >= 0).
BigInt int_pow(unsigned base, unsigned long long exp);

/// Exact rational power f^e for integer e of either sign.
Rational rational_pow(unsigned base, long long exp);

/// Renders a rational as "a" (when integral) or "a/b".
std::string rational_str(const Rational& r);

}  // namespace mlv
