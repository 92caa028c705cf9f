#include "rlctfa/learning_table.hpp"

#include <string>

#include "rlctfa/factor_model.hpp"

namespace rlctfa {

const char* to_string(Exactness e) { return e == Exactness::Exact ? "exact" : "upper_bound"; }

LearningCoefficient LearningCoefficient::exact(Rational value, int mult) {
  if (value.sign() <= 0) throw std::invalid_argument("LearningCoefficient: value must be positive");
  if (mult < 1) throw std::invalid_argument("LearningCoefficient: multiplicity must be >= 1");
  return {std::move(value), mult, Exactness::Exact};
}

LearningCoefficient LearningCoefficient::upper_bound(Rational value) {
  if (value.sign() <= 0) throw std::invalid_argument("LearningCoefficient: value must be positive");
  return {std::move(value), std::nullopt, Exactness::UpperBound};
}

namespace {

void check_indices(int p, int k, int r) {
  if (p < 1 || r < 0 || r > k || k > p) {
    throw std::invalid_argument("need 0 <= r <= k <= p and p >= 1 (got p=" + std::to_string(p) +
                                ", k=" + std::to_string(k) + ", r=" + std::to_string(r) + ")");
  }
}

long ambient(int p) { return static_cast<long>(p) * (p + 1) / 2; }

}  // namespace

Rational bound(int p, int k, int r) {
  check_indices(p, k, r);
  if (model_dimension(p, r).d > ambient(p)) {
    throw SaturatedModel("bound: d_r exceeds p(p+1)/2; the learning coefficient is exactly p(p+1)/4");
  }
  return Rational(static_cast<long>(p) * (k + 2) + static_cast<long>(r) * (p - k + 1), 4);
}

LearningCoefficient learning_coefficient(int p, int k, int r) {
  check_indices(p, k, r);
  const Rational saturated(static_cast<long>(p) * (p + 1), 4);

  if (model_dimension(p, r).d > ambient(p)) return LearningCoefficient::exact(saturated, 1);

  if (r == k) return LearningCoefficient::exact(Rational(model_dimension(p, k).d, 2), 1);

  if (r == 0) {
    if (k == p) return LearningCoefficient::exact(Rational(static_cast<long>(p) * p + p + 1, 4), 1);
    const Rational value(static_cast<long>(p) * (k + 2), 4);
    const int mult = (k == p - 1 && k > 0) ? p - 1 : 1;
    return LearningCoefficient::exact(value, mult);
  }

  if (r == 1) {
    if (k >= p - 1) return LearningCoefficient::exact(saturated, 1);
    return LearningCoefficient::exact(Rational(static_cast<long>(p) * k + 3L * p - k + 1, 4), 1);
  }

  return LearningCoefficient::upper_bound(bound(p, k, r));
}

LearningCoefficient special_two_nonzero(int p) {
  if (p < 2) throw std::invalid_argument("special_two_nonzero: need p >= 2");
  return LearningCoefficient::exact(Rational(2L * p - 1, 2), 1);
}

LearningCoefficient fiber_rlct_to_learning(const RlctPair& pair, int p) {
  return LearningCoefficient::exact((pair.lambda() + Rational(p)) / Rational(2), pair.mult());
}

PenaltyTable::PenaltyTable(int p, int k_max) : p_(p), k_max_(k_max) {
  if (p < 1 || k_max < 0 || k_max > p) throw std::invalid_argument("PenaltyTable: need 0 <= k_max <= p");
  for (int s = 0; s <= k_max; ++s) {
    for (int r = 0; r <= s; ++r) cells_.push_back(learning_coefficient(p, s, r));
  }
}

std::size_t PenaltyTable::index(int s, int r) const {
  if (s < 0 || s > k_max_ || r < 0 || r > s) throw std::out_of_range("PenaltyTable: cell out of range");
  return static_cast<std::size_t>(s) * (s + 1) / 2 + static_cast<std::size_t>(r);
}

const LearningCoefficient& PenaltyTable::at(int s, int r) const { return cells_[index(s, r)]; }

void PenaltyTable::set(int s, int r, LearningCoefficient value) { cells_[index(s, r)] = std::move(value); }

PenaltyTable sbic_penalty_matrix(int p, int k_max) { return PenaltyTable(p, k_max); }

}  // namespace rlctfa
