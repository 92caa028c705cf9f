#include "rlctfa/lp.hpp"

#include <optional>
#include <stdexcept>
#include <string>

namespace rlctfa {

LinearProgram::LinearProgram(std::size_t num_vars)
    : num_vars_(num_vars), objective_(num_vars, Rational(0)), nonneg_(num_vars, false) {
  if (num_vars == 0) throw std::invalid_argument("LinearProgram: need at least one variable");
}

void LinearProgram::check_length(const RationalVector& v) const {
  if (v.size() != num_vars_) {
    throw std::invalid_argument("LinearProgram: coefficient vector has length " +
                                std::to_string(v.size()) + ", expected " +
                                std::to_string(num_vars_));
  }
}

void LinearProgram::set_objective(RationalVector c) {
  check_length(c);
  objective_ = std::move(c);
}

void LinearProgram::add_equality(RationalVector coeffs, Rational rhs) {
  check_length(coeffs);
  eq_.push_back({std::move(coeffs), std::move(rhs)});
}

void LinearProgram::add_greater_equal(RationalVector coeffs, Rational rhs) {
  check_length(coeffs);
  ge_.push_back({std::move(coeffs), std::move(rhs)});
}

void LinearProgram::set_nonnegative(std::size_t j, bool flag) {
  if (j >= num_vars_) throw std::out_of_range("LinearProgram: variable index");
  nonneg_[j] = flag;
}

namespace {

// Standard form: min c·y, A y = b, y >= 0, b >= 0. Column layout is
// [structural (x+ / x-) | slacks | artificials].
struct Tableau {
  std::vector<RationalVector> rows;  // m rows of width n + 1 (last = rhs)
  std::vector<std::size_t> basis;    // basic column per row
  std::size_t n = 0;

  void pivot(std::size_t r, std::size_t c) {
    const Rational inv = Rational(1) / rows[r][c];
    for (auto& v : rows[r]) v *= inv;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (i == r) continue;
      const Rational f = rows[i][c];
      if (f.sign() == 0) continue;
      for (std::size_t j = 0; j <= n; ++j) {
        if (rows[r][j].sign() != 0) rows[i][j] -= f * rows[r][j];
      }
    }
    basis[r] = c;
  }

  // Bland's rule on columns [0, limit). Returns false when unbounded.
  bool optimize(const RationalVector& cost, std::size_t limit) {
    const std::size_t m = rows.size();
    for (;;) {
      std::optional<std::size_t> entering;
      for (std::size_t j = 0; j < limit; ++j) {
        Rational reduced = cost[j];
        for (std::size_t i = 0; i < m; ++i) {
          if (rows[i][j].sign() != 0) reduced -= cost[basis[i]] * rows[i][j];
        }
        if (reduced.sign() < 0) {
          entering = j;
          break;
        }
      }
      if (!entering) return true;
      const std::size_t c = *entering;
      std::optional<std::size_t> leave;
      Rational best;
      for (std::size_t i = 0; i < m; ++i) {
        if (rows[i][c].sign() <= 0) continue;
        Rational ratio = rows[i][n] / rows[i][c];
        if (!leave || ratio < best || (ratio == best && basis[i] < basis[*leave])) {
          leave = i;
          best = std::move(ratio);
        }
      }
      if (!leave) return false;
      pivot(*leave, c);
    }
  }
};

}  // namespace

LpResult solve_lp(const LinearProgram& lp) {
  const std::size_t nv = lp.num_vars();

  // Structural columns: x_j >= 0 maps to one column, free x_j to x+ and x-.
  std::vector<std::size_t> pos_col(nv), neg_col(nv, SIZE_MAX);
  std::size_t ns = 0;
  for (std::size_t j = 0; j < nv; ++j) {
    pos_col[j] = ns++;
    if (!lp.is_nonnegative(j)) neg_col[j] = ns++;
  }
  const std::size_t num_ge = lp.inequalities().size();
  const std::size_t m = lp.equalities().size() + num_ge;
  const std::size_t slack0 = ns;
  const std::size_t art0 = ns + num_ge;
  const std::size_t n = art0 + m;

  Tableau t;
  t.n = n;
  t.rows.assign(m, RationalVector(n + 1, Rational(0)));
  t.basis.resize(m);

  std::size_t r = 0;
  auto fill = [&](const LinearProgram::Row& row, std::optional<std::size_t> slack) {
    auto& out = t.rows[r];
    for (std::size_t j = 0; j < nv; ++j) {
      out[pos_col[j]] = row.coeffs[j];
      if (neg_col[j] != SIZE_MAX) out[neg_col[j]] = -row.coeffs[j];
    }
    if (slack) out[*slack] = Rational(-1);
    out[n] = row.rhs;
    if (out[n].sign() < 0) {
      for (auto& v : out) v = -v;
    }
    out[art0 + r] = Rational(1);
    t.basis[r] = art0 + r;
    ++r;
  };
  for (const auto& row : lp.equalities()) fill(row, std::nullopt);
  for (std::size_t i = 0; i < num_ge; ++i) fill(lp.inequalities()[i], slack0 + i);

  // Phase 1: minimize the sum of artificials.
  RationalVector phase1(n, Rational(0));
  for (std::size_t i = art0; i < n; ++i) phase1[i] = Rational(1);
  t.optimize(phase1, n);
  Rational infeas(0);
  for (std::size_t i = 0; i < m; ++i) {
    if (t.basis[i] >= art0) infeas += t.rows[i][n];
  }
  if (infeas.sign() > 0) return LpInfeasible{};

  // Drive zero-level artificials out of the basis; drop redundant rows.
  for (std::size_t i = 0; i < t.rows.size();) {
    if (t.basis[i] < art0) {
      ++i;
      continue;
    }
    std::optional<std::size_t> col;
    for (std::size_t j = 0; j < art0; ++j) {
      if (t.rows[i][j].sign() != 0) {
        col = j;
        break;
      }
    }
    if (col) {
      t.pivot(i, *col);
      ++i;
    } else {
      t.rows.erase(t.rows.begin() + static_cast<std::ptrdiff_t>(i));
      t.basis.erase(t.basis.begin() + static_cast<std::ptrdiff_t>(i));
    }
  }

  // Phase 2 over the non-artificial columns.
  RationalVector cost(n, Rational(0));
  for (std::size_t j = 0; j < nv; ++j) {
    cost[pos_col[j]] = lp.objective()[j];
    if (neg_col[j] != SIZE_MAX) cost[neg_col[j]] = -lp.objective()[j];
  }
  if (!t.optimize(cost, art0)) return LpUnbounded{};

  RationalVector y(n, Rational(0));
  for (std::size_t i = 0; i < t.rows.size(); ++i) y[t.basis[i]] = t.rows[i][n];
  LpOptimal opt;
  opt.point.resize(nv);
  opt.value = Rational(0);
  for (std::size_t j = 0; j < nv; ++j) {
    opt.point[j] = y[pos_col[j]];
    if (neg_col[j] != SIZE_MAX) opt.point[j] -= y[neg_col[j]];
    opt.value += lp.objective()[j] * opt.point[j];
  }
  return opt;
}

bool satisfies_constraints(const LinearProgram& lp, std::span<const Rational> point) {
  if (point.size() != lp.num_vars()) return false;
  auto dot = [&](const RationalVector& a) {
    Rational s(0);
    for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * point[j];
    return s;
  };
  for (const auto& row : lp.equalities()) {
    if (dot(row.coeffs) != row.rhs) return false;
  }
  for (const auto& row : lp.inequalities()) {
    if (dot(row.coeffs) < row.rhs) return false;
  }
  for (std::size_t j = 0; j < lp.num_vars(); ++j) {
    if (lp.is_nonnegative(j) && point[j].sign() < 0) return false;
  }
  return true;
}

int matrix_rank(std::vector<RationalVector> rows) {
  if (rows.empty()) return 0;
  const std::size_t cols = rows.front().size();
  int rank = 0;
  std::size_t pivot_row = 0;
  for (std::size_t c = 0; c < cols && pivot_row < rows.size(); ++c) {
    std::size_t sel = pivot_row;
    while (sel < rows.size() && rows[sel][c].sign() == 0) ++sel;
    if (sel == rows.size()) continue;
    std::swap(rows[sel], rows[pivot_row]);
    for (std::size_t i = pivot_row + 1; i < rows.size(); ++i) {
      if (rows[i][c].sign() == 0) continue;
      const Rational f = rows[i][c] / rows[pivot_row][c];
      for (std::size_t j = c; j < cols; ++j) rows[i][j] -= f * rows[pivot_row][j];
    }
    ++pivot_row;
    ++rank;
  }
  return rank;
}

int affine_rank(std::span<const RationalVector> points) {
  if (points.empty()) throw std::invalid_argument("affine_rank: empty point list");
  const auto& base = points.front();
  std::vector<RationalVector> diffs;
  diffs.reserve(points.size() - 1);
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (points[i].size() != base.size()) {
      throw std::invalid_argument("affine_rank: points of unequal length");
    }
    RationalVector d(base.size());
    for (std::size_t j = 0; j < base.size(); ++j) d[j] = points[i][j] - base[j];
    diffs.push_back(std::move(d));
  }
  return matrix_rank(std::move(diffs));
}

}  // namespace rlctfa
