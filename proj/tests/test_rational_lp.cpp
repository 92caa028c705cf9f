#include <doctest.h>

#include <algorithm>
#include <optional>
#include <random>

#include "rlctfa/lp.hpp"
#include "rlctfa/rational.hpp"

using namespace rlctfa;

TEST_CASE("rational canonical form and parsing") {
  CHECK(Rational(6, 4).str() == "3/2");
  CHECK(Rational(-6, -4).str() == "3/2");
  CHECK(Rational(4, -6).str() == "-2/3");
  CHECK(Rational(8, 4).str() == "2");
  CHECK(Rational(8, 4).is_integer());
  CHECK(Rational::parse("10/4") == Rational(5, 2));
  CHECK(Rational::parse("-7") == Rational(-7));
  CHECK_THROWS(Rational(1, 0));
  CHECK_THROWS(Rational::parse("1/0"));
  CHECK_THROWS(Rational::parse("abc"));
  CHECK_THROWS(Rational(1) / Rational(0));
  CHECK(Rational(1, 3) + Rational(1, 6) == Rational(1, 2));
  CHECK(Rational(1, 3) < Rational(1, 2));
  CHECK(abs(Rational(-3, 7)) == Rational(3, 7));
}

TEST_CASE("rational arithmetic is exact") {
  // 1/1 + 1/2 + ... + 1/30 never rounds.
  Rational h(0);
  for (long i = 1; i <= 30; ++i) h += Rational(1, i);
  CHECK(h.str() == "9304682830147/2329089562800");
  CHECK(h - h == Rational(0));
}

TEST_CASE("lp: single bound") {
  LinearProgram lp(1);
  lp.set_objective({Rational(1)});
  lp.add_greater_equal({Rational(1)}, Rational(3));
  const auto res = solve_lp(lp);
  REQUIRE(std::holds_alternative<LpOptimal>(res));
  const auto& opt = std::get<LpOptimal>(res);
  CHECK(opt.value == Rational(3));
  CHECK(opt.point == RationalVector{Rational(3)});
}

TEST_CASE("lp: contradictory constraints are infeasible") {
  LinearProgram lp(1);
  lp.set_objective({Rational(0)});
  lp.add_greater_equal({Rational(1)}, Rational(1));
  lp.add_greater_equal({Rational(-1)}, Rational(0));
  CHECK(std::holds_alternative<LpInfeasible>(solve_lp(lp)));
}

TEST_CASE("lp: open ray is unbounded") {
  LinearProgram lp(1);
  lp.set_objective({Rational(-1)});
  lp.add_greater_equal({Rational(1)}, Rational(0));
  CHECK(std::holds_alternative<LpUnbounded>(solve_lp(lp)));
}

TEST_CASE("lp: equalities, free variables and redundant rows") {
  // min x + y, x + y = 2 (twice), x - y = 1/2, x, y free.
  LinearProgram lp(2);
  lp.set_objective({Rational(1), Rational(1)});
  lp.add_equality({Rational(1), Rational(1)}, Rational(2));
  lp.add_equality({Rational(2), Rational(2)}, Rational(4));
  lp.add_equality({Rational(1), Rational(-1)}, Rational(1, 2));
  const auto res = solve_lp(lp);
  REQUIRE(std::holds_alternative<LpOptimal>(res));
  const auto& opt = std::get<LpOptimal>(res);
  CHECK(opt.value == Rational(2));
  CHECK(opt.point[0] == Rational(5, 4));
  CHECK(opt.point[1] == Rational(3, 4));
  CHECK(satisfies_constraints(lp, opt.point));
}

TEST_CASE("lp: malformed rows are rejected") {
  LinearProgram lp(2);
  CHECK_THROWS(lp.add_equality({Rational(1)}, Rational(0)));
  CHECK_THROWS(lp.set_objective({Rational(1), Rational(2), Rational(3)}));
}

TEST_CASE("affine rank") {
  CHECK(affine_rank(std::vector<RationalVector>{{0, 0}}) == 0);
  CHECK(affine_rank(std::vector<RationalVector>{{0, 0}, {1, 0}, {0, 1}}) == 2);
  CHECK(affine_rank(std::vector<RationalVector>{{0, 0}, {1, 1}, {2, 2}}) == 1);
  CHECK_THROWS(affine_rank(std::vector<RationalVector>{}));
  CHECK_THROWS(affine_rank(std::vector<RationalVector>{{0, 0}, {1}}));
}

TEST_CASE("affine rank is permutation and translation invariant") {
  std::mt19937_64 gen(11);
  std::uniform_int_distribution<int> coord(-3, 3), count(1, 6), dim(1, 4);
  for (int trial = 0; trial < 300; ++trial) {
    const int d = dim(gen);
    std::vector<RationalVector> pts(static_cast<std::size_t>(count(gen)));
    for (auto& v : pts) {
      for (int j = 0; j < d; ++j) v.push_back(Rational(coord(gen)));
    }
    const int base = affine_rank(pts);
    auto shuffled = pts;
    std::shuffle(shuffled.begin(), shuffled.end(), gen);
    CHECK(affine_rank(shuffled) == base);
    auto moved = pts;
    RationalVector shift;
    for (int j = 0; j < d; ++j) shift.push_back(Rational(coord(gen), 7));
    for (auto& v : moved) {
      for (int j = 0; j < d; ++j) v[static_cast<std::size_t>(j)] += shift[static_cast<std::size_t>(j)];
    }
    CHECK(affine_rank(moved) == base);
  }
}

namespace {

// Unique solution of a square rational system, if any.
std::optional<RationalVector> solve_square(std::vector<RationalVector> a, RationalVector b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    while (piv < n && a[piv][c] == Rational(0)) ++piv;
    if (piv == n) return std::nullopt;
    std::swap(a[piv], a[c]);
    std::swap(b[piv], b[c]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c || a[r][c] == Rational(0)) continue;
      const Rational f = a[r][c] / a[c][c];
      for (std::size_t j = c; j < n; ++j) a[r][j] -= f * a[c][j];
      b[r] -= f * b[c];
    }
  }
  RationalVector x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
  return x;
}

// Minimum of c.x over {A x >= b} by enumerating basic solutions.
std::optional<Rational> vertex_oracle(const std::vector<RationalVector>& rows, const RationalVector& rhs,
                                      const RationalVector& c) {
  const std::size_t m = rows.size(), n = c.size();
  std::optional<Rational> best;
  std::vector<bool> pick(m, false);
  std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(n), true);
  do {
    std::vector<RationalVector> a;
    RationalVector b;
    for (std::size_t i = 0; i < m; ++i) {
      if (pick[i]) {
        a.push_back(rows[i]);
        b.push_back(rhs[i]);
      }
    }
    const auto x = solve_square(a, b);
    if (!x) continue;
    bool ok = true;
    for (std::size_t i = 0; i < m && ok; ++i) {
      Rational v(0);
      for (std::size_t j = 0; j < n; ++j) v += rows[i][j] * (*x)[j];
      ok = v >= rhs[i];
    }
    if (!ok) continue;
    Rational val(0);
    for (std::size_t j = 0; j < n; ++j) val += c[j] * (*x)[j];
    if (!best || val < *best) best = val;
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return best;
}

}  // namespace

TEST_CASE("lp optimum matches vertex enumeration on random bounded problems") {
  std::mt19937_64 gen(2024);
  std::uniform_int_distribution<int> coef(-4, 4), vars(1, 6), extra(1, 4), bound(1, 5);
  int optimal = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const int n = vars(gen);
    std::vector<RationalVector> rows;
    RationalVector rhs;
    // Box 0 <= x_j <= u_j keeps every instance bounded.
    for (int j = 0; j < n; ++j) {
      RationalVector lo(static_cast<std::size_t>(n), Rational(0)), hi = lo;
      lo[static_cast<std::size_t>(j)] = Rational(1);
      hi[static_cast<std::size_t>(j)] = Rational(-1);
      rows.push_back(lo);
      rhs.push_back(Rational(0));
      rows.push_back(hi);
      rhs.push_back(Rational(-bound(gen)));
    }
    const int m = n <= 4 ? extra(gen) : 2;
    for (int i = 0; i < m; ++i) {
      RationalVector r;
      for (int j = 0; j < n; ++j) r.push_back(Rational(coef(gen)));
      rows.push_back(r);
      rhs.push_back(Rational(coef(gen), 2));
    }
    RationalVector c;
    for (int j = 0; j < n; ++j) c.push_back(Rational(coef(gen)));

    LinearProgram lp(static_cast<std::size_t>(n));
    lp.set_objective(c);
    for (std::size_t i = 0; i < rows.size(); ++i) lp.add_greater_equal(rows[i], rhs[i]);
    const auto res = solve_lp(lp);
    const auto oracle = vertex_oracle(rows, rhs, c);
    if (!oracle) {
      CHECK(std::holds_alternative<LpInfeasible>(res));
      continue;
    }
    REQUIRE(std::holds_alternative<LpOptimal>(res));
    const auto& opt = std::get<LpOptimal>(res);
    CHECK(opt.value == *oracle);
    CHECK(satisfies_constraints(lp, opt.point));
    ++optimal;
  }
  CHECK(optimal > 10);
}

TEST_CASE("lp is deterministic") {
  LinearProgram lp(3);
  lp.set_objective({Rational(1), Rational(1), Rational(1)});
  lp.add_greater_equal({Rational(1), Rational(1), Rational(0)}, Rational(1));
  lp.add_greater_equal({Rational(0), Rational(1), Rational(1)}, Rational(1));
  lp.add_greater_equal({Rational(1), Rational(0), Rational(1)}, Rational(1));
  for (std::size_t j = 0; j < 3; ++j) lp.set_nonnegative(j);
  const auto a = std::get<LpOptimal>(solve_lp(lp));
  const auto b = std::get<LpOptimal>(solve_lp(lp));
  CHECK(a.value == Rational(3, 2));
  CHECK(a.point == b.point);
}
