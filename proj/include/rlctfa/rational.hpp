#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <ostream>
#include <string>

#include <gmpxx.h>

namespace rlctfa {

/// Exact rational number, always kept in lowest terms with a positive
/// denominator. Thin value wrapper over GMP's mpq_class.
class Rational {
 public:
  Rational() : q_(0) {}
  Rational(long v) : q_(v) {}  // NOLINT: implicit from integers is intended
  Rational(int v) : q_(v) {}   // NOLINT
  Rational(long num, long den);
  explicit Rational(const mpq_class& q) : q_(q) { q_.canonicalize(); }

  /// Parses "a" or "a/b" (optional sign on the numerator).
  static Rational parse(const std::string& text);

  std::string numerator_str() const { return q_.get_num().get_str(); }
  std::string denominator_str() const { return q_.get_den().get_str(); }
  /// "num/den", or just "num" for integers.
  std::string str() const;
  double to_double() const { return q_.get_d(); }
  bool is_integer() const { return q_.get_den() == 1; }
  int sign() const { return sgn(q_); }
  const mpq_class& raw() const { return q_; }

  Rational operator-() const { return Rational(mpq_class(-q_)); }
  Rational& operator+=(const Rational& o) { q_ += o.q_; return *this; }
  Rational& operator-=(const Rational& o) { q_ -= o.q_; return *this; }
  Rational& operator*=(const Rational& o) { q_ *= o.q_; return *this; }
  Rational& operator/=(const Rational& o);

  friend Rational operator+(Rational a, const Rational& b) { return a += b; }
  friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
  friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
  friend Rational operator/(Rational a, const Rational& b) { return a /= b; }

  friend bool operator==(const Rational& a, const Rational& b) { return a.q_ == b.q_; }
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    const int c = cmp(a.q_, b.q_);
    return c < 0 ? std::strong_ordering::less
                 : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
  }

  friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

 private:
  mpq_class q_;
};

inline Rational abs(const Rational& r) { return r.sign() < 0 ? -r : r; }

}  // namespace rlctfa
