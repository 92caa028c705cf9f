#include "rlctfa/rlct.hpp"

#include <stdexcept>

namespace rlctfa {

RlctPair::RlctPair(Rational lambda, int mult) : lambda_(std::move(lambda)), mult_(mult) {
  if (lambda_.sign() <= 0) throw std::invalid_argument("RlctPair: threshold must be positive");
  if (mult_ < 1) throw std::invalid_argument("RlctPair: multiplicity must be >= 1");
}

std::strong_ordering compare(const RlctPair& a, const RlctPair& b) {
  if (auto c = a.lambda() <=> b.lambda(); c != 0) return c;
  return b.mult() <=> a.mult();
}

const RlctPair& rlct_min(const RlctPair& a, const RlctPair& b) {
  return compare(b, a) < 0 ? b : a;
}

RlctPair sum_rule(const RlctPair& a, const RlctPair& b) {
  return RlctPair(a.lambda() + b.lambda(), a.mult() + b.mult() - 1);
}

RlctPair product_rule(const RlctPair& a, const RlctPair& b) {
  if (a.lambda() < b.lambda()) return a;
  if (b.lambda() < a.lambda()) return b;
  return RlctPair(a.lambda(), a.mult() + b.mult());
}

std::ostream& operator<<(std::ostream& os, const RlctPair& p) {
  return os << "(" << p.lambda() << ", " << p.mult() << ")";
}

}  // namespace rlctfa
