#pragma once

// Checked 64-bit integer arithmetic. Every operation that could wrap throws
// NumericOverflow instead.

#include <cstdint>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

namespace lsia {

using Int = std::int64_t;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericOverflow : public Error {
 public:
  explicit NumericOverflow(const std::string& what)
      : Error("numeric overflow in " + what) {}
};

namespace checked {

inline Int add(Int a, Int b) {
  Int r;
  if (__builtin_add_overflow(a, b, &r)) throw NumericOverflow("addition");
  return r;
}

inline Int sub(Int a, Int b) {
  Int r;
  if (__builtin_sub_overflow(a, b, &r)) throw NumericOverflow("subtraction");
  return r;
}

inline Int mul(Int a, Int b) {
  Int r;
  if (__builtin_mul_overflow(a, b, &r)) throw NumericOverflow("multiplication");
  return r;
}

inline Int neg(Int a) {
  if (a == std::numeric_limits<Int>::min()) throw NumericOverflow("negation");
  return -a;
}

inline Int abs(Int a) { return a < 0 ? neg(a) : a; }

inline Int pow(Int base, unsigned exp) {
  Int r = 1;
  while (exp > 0) {
    if (exp & 1u) r = mul(r, base);
    exp >>= 1u;
    if (exp > 0) base = mul(base, base);
  }
  return r;
}

}  // namespace checked

inline int sign(Int a) { return (a > 0) - (a < 0); }

/// floor(a / b) for b != 0.
inline Int floor_div(Int a, Int b) {
  if (b == -1) return checked::neg(a);
  Int q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

/// ceil(a / b) for b != 0.
inline Int ceil_div(Int a, Int b) {
  if (b == -1) return checked::neg(a);
  Int q = a / b;
  if ((a % b != 0) && ((a < 0) == (b < 0))) ++q;
  return q;
}

/// Largest s with s*s <= n, n >= 0.
inline Int isqrt(Int n) {
  if (n < 0) throw std::domain_error("isqrt of negative value");
  if (n < 2) return n;
  // Newton iteration from an upper bound; no floating point.
  Int x = n;
  Int y = n / 2 + n % 2;
  while (y < x) {
    x = y;
    y = (x + n / x) / 2;
  }
  return x;
}

inline Int gcd(Int a, Int b) {
  return std::gcd(checked::abs(a), checked::abs(b));
}

inline Int lcm(Int a, Int b) {
  if (a == 0 || b == 0) return 0;
  Int g = gcd(a, b);
  return checked::abs(checked::mul(a / g, b));
}

/// Exact rational with positive denominator, kept in lowest terms.
struct Rational {
  Int num = 0;
  Int den = 1;

  Rational() = default;
  Rational(Int n) : num(n) {}  // NOLINT(google-explicit-constructor)
  Rational(Int n, Int d) : num(n), den(d) {
    if (den == 0) throw std::domain_error("zero denominator");
    if (den < 0) {
      num = checked::neg(num);
      den = checked::neg(den);
    }
    Int g = gcd(num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }

  bool is_integer() const { return den == 1; }
  bool is_zero() const { return num == 0; }
  int sign() const { return lsia::sign(num); }

  friend Rational operator+(const Rational& a, const Rational& b) {
    Int g = gcd(a.den, b.den);
    Int da = b.den / g;
    Int db = a.den / g;
    return {checked::add(checked::mul(a.num, da), checked::mul(b.num, db)),
            checked::mul(a.den, da)};
  }
  friend Rational operator-(const Rational& a) { return {checked::neg(a.num), a.den}; }
  friend Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }
  friend Rational operator*(const Rational& a, const Rational& b) {
    Int g1 = gcd(a.num, b.den);
    Int g2 = gcd(b.num, a.den);
    if (g1 == 0) g1 = 1;
    if (g2 == 0) g2 = 1;
    return {checked::mul(a.num / g1, b.num / g2), checked::mul(a.den / g2, b.den / g1)};
  }
  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num == b.num && a.den == b.den;
  }
  friend bool operator<(const Rational& a, const Rational& b) { return (a - b).num < 0; }
};

inline std::string to_string(const Rational& r) {
  if (r.is_integer()) return std::to_string(r.num);
  return std::to_string(r.num) + "/" + std::to_string(r.den);
}

inline std::ostream& operator<<(std::ostream& os, const Rational& r) {
  return os << to_string(r);
}

}  // namespace lsia
