#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "rlctfa/rational.hpp"

namespace rlctfa {

using RationalVector = std::vector<Rational>;

/// Minimize objective·x subject to equality rows (a·x = b) and
/// inequality rows (a·x >= b). Variables are free unless flagged
/// non-negative. Every row is validated on insertion.
class LinearProgram {
 public:
  struct Row {
    RationalVector coeffs;
    Rational rhs;
  };

  explicit LinearProgram(std::size_t num_vars);

  std::size_t num_vars() const { return num_vars_; }

  void set_objective(RationalVector c);
  void add_equality(RationalVector coeffs, Rational rhs);
  void add_greater_equal(RationalVector coeffs, Rational rhs);
  /// Shorthand for the bound x_j >= 0 that does not add a row.
  void set_nonnegative(std::size_t j, bool flag = true);

  const RationalVector& objective() const { return objective_; }
  const std::vector<Row>& equalities() const { return eq_; }
  const std::vector<Row>& inequalities() const { return ge_; }
  bool is_nonnegative(std::size_t j) const { return nonneg_[j]; }

 private:
  void check_length(const RationalVector& v) const;

  std::size_t num_vars_;
  RationalVector objective_;
  std::vector<Row> eq_;
  std::vector<Row> ge_;
  std::vector<bool> nonneg_;
};

struct LpInfeasible {};
struct LpUnbounded {};
struct LpOptimal {
  Rational value;
  RationalVector point;
};

using LpResult = std::variant<LpInfeasible, LpUnbounded, LpOptimal>;

/// Exact two-phase primal simplex with Bland's rule. Deterministic.
LpResult solve_lp(const LinearProgram& lp);

/// True when `point` satisfies every row and sign flag of `lp` exactly.
bool satisfies_constraints(const LinearProgram& lp, std::span<const Rational> point);

/// Dimension of the affine hull of the points. Throws on an empty list or
/// ragged input.
int affine_rank(std::span<const RationalVector> points);

/// Rank of a dense rational matrix given as rows.
int matrix_rank(std::vector<RationalVector> rows);

}  // namespace rlctfa
