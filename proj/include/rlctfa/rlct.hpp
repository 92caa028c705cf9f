#pragma once

#include <compare>
#include <ostream>

#include "rlctfa/rational.hpp"

namespace rlctfa {

/// A real log canonical threshold together with its multiplicity.
/// Invariants: lambda > 0, mult >= 1 (checked on construction).
class RlctPair {
 public:
  RlctPair(Rational lambda, int mult);

  const Rational& lambda() const { return lambda_; }
  int mult() const { return mult_; }

  friend bool operator==(const RlctPair&, const RlctPair&) = default;

 private:
  Rational lambda_;
  int mult_;
};

/// Threshold ascending, then multiplicity descending: a pair with a larger
/// multiplicity at the same threshold is the smaller pair.
std::strong_ordering compare(const RlctPair& a, const RlctPair& b);

inline bool rlct_less(const RlctPair& a, const RlctPair& b) { return compare(a, b) < 0; }

const RlctPair& rlct_min(const RlctPair& a, const RlctPair& b);

/// RLCT of a sum of ideals in disjoint variables.
RlctPair sum_rule(const RlctPair& a, const RlctPair& b);

/// RLCT of a product of functions in disjoint variables.
RlctPair product_rule(const RlctPair& a, const RlctPair& b);

std::ostream& operator<<(std::ostream& os, const RlctPair& p);

}  // namespace rlctfa
