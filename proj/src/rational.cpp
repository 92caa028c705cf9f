#include "rlctfa/rational.hpp"

#include <stdexcept>

namespace rlctfa {

Rational::Rational(long num, long den) {
  if (den == 0) throw std::domain_error("Rational: zero denominator");
  q_ = mpq_class(mpz_class(num), mpz_class(den));
  q_.canonicalize();
}

Rational Rational::parse(const std::string& text) {
  mpq_class q;
  if (text.empty() || q.set_str(text, 10) != 0) {
    throw std::invalid_argument("Rational::parse: not a rational: '" + text + "'");
  }
  if (q.get_den() == 0) throw std::invalid_argument("Rational::parse: zero denominator");
  q.canonicalize();
  return Rational(q);
}

std::string Rational::str() const {
  if (is_integer()) return numerator_str();
  return numerator_str() + "/" + denominator_str();
}

Rational& Rational::operator/=(const Rational& o) {
  if (o.q_ == 0) throw std::domain_error("Rational: division by zero");
  q_ /= o.q_;
  return *this;
}

}  // namespace rlctfa
