#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "rlctfa/rational.hpp"
#include "rlctfa/rlct.hpp"

namespace rlctfa {

enum class Exactness { Exact, UpperBound };

const char* to_string(Exactness e);

/// Learning coefficient of the k-factor model at a covariance generic in
/// the r-factor submodel. Exact values carry their multiplicity; upper
/// bounds carry none.
class LearningCoefficient {
 public:
  static LearningCoefficient exact(Rational value, int mult);
  static LearningCoefficient upper_bound(Rational value);

  const Rational& value() const { return value_; }
  const std::optional<int>& mult() const { return mult_; }
  Exactness exactness() const { return exactness_; }
  bool is_exact() const { return exactness_ == Exactness::Exact; }
  /// Multiplicity used by sBIC: the proven one, or 1 for bounds.
  int mult_or_one() const { return mult_.value_or(1); }

  friend bool operator==(const LearningCoefficient&, const LearningCoefficient&) = default;

 private:
  LearningCoefficient(Rational v, std::optional<int> m, Exactness e)
      : value_(std::move(v)), mult_(m), exactness_(e) {}

  Rational value_;
  std::optional<int> mult_;
  Exactness exactness_;
};

/// Thrown by bound() when d_r exceeds the ambient dimension; the exact
/// saturated value p(p+1)/4 applies there instead.
class SaturatedModel : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// (p(k+2) + r(p-k+1)) / 4, valid when d_r <= p(p+1)/2.
Rational bound(int p, int k, int r);

/// Generic learning coefficient l_{kr} and multiplicity m_{kr}.
LearningCoefficient learning_coefficient(int p, int k, int r);

/// One-factor model at a covariance with exactly two non-zero off-diagonal
/// entries: ((2p-1)/2, 1).
LearningCoefficient special_two_nonzero(int p);

/// ((lambda + p) / 2, mult): learning coefficient from the RLCT of the
/// reduced fiber ideal.
LearningCoefficient fiber_rlct_to_learning(const RlctPair& pair, int p);

/// Lower-triangular table of learning_coefficient(p, s, r), r <= s <= k_max.
class PenaltyTable {
 public:
  PenaltyTable(int p, int k_max);

  int p() const { return p_; }
  int k_max() const { return k_max_; }
  const LearningCoefficient& at(int s, int r) const;
  /// Replaces a cell; used for what-if experiments and reduction checks.
  void set(int s, int r, LearningCoefficient value);

 private:
  std::size_t index(int s, int r) const;

  int p_;
  int k_max_;
  std::vector<LearningCoefficient> cells_;
};

PenaltyTable sbic_penalty_matrix(int p, int k_max);

}  // namespace rlctfa
