#include <doctest.h>

#include <random>

#include "rlctfa/rlct.hpp"

using namespace rlctfa;

namespace {

RlctPair pair(long num, long den, int mult) { return RlctPair(Rational(num, den), mult); }

RlctPair random_pair(std::mt19937_64& gen) {
  std::uniform_int_distribution<int> num(1, 12), den(1, 4), mult(1, 4);
  return RlctPair(Rational(num(gen), den(gen)), mult(gen));
}

}  // namespace

TEST_CASE("construction rejects non-positive threshold or multiplicity") {
  CHECK_THROWS(RlctPair(Rational(0), 1));
  CHECK_THROWS(RlctPair(Rational(-1, 2), 1));
  CHECK_THROWS(RlctPair(Rational(1), 0));
}

TEST_CASE("order: threshold first, larger multiplicity is smaller") {
  CHECK(compare(pair(1, 1, 2), pair(2, 1, 1)) < 0);
  CHECK(compare(pair(2, 1, 3), pair(2, 1, 1)) < 0);
  CHECK(compare(pair(2, 1, 1), pair(2, 1, 1)) == 0);
  CHECK(rlct_min(pair(2, 1, 1), pair(2, 1, 3)) == pair(2, 1, 3));
}

TEST_CASE("sum rule examples") {
  // (p-1, 1) + ((p-1)(k-1)/2, 1) at p = 4, k = 2
  CHECK(sum_rule(pair(3, 1, 1), pair(3, 2, 1)) == pair(9, 2, 1));
  CHECK(sum_rule(pair(5, 3, 1), pair(7, 2, 1)) == pair(31, 6, 1));
  CHECK(sum_rule(pair(3, 1, 2), pair(3, 2, 2)) == pair(9, 2, 3));
}

TEST_CASE("product rule examples") {
  CHECK(product_rule(pair(5, 1, 1), pair(9, 2, 1)) == pair(9, 2, 1));
  CHECK(product_rule(pair(5, 1, 1), pair(6, 1, 1)) == pair(5, 1, 1));
  // (p(p-1)/2, 1) with (p(p-1)/2, p-2) at p = 4
  CHECK(product_rule(pair(6, 1, 1), pair(6, 1, 2)) == pair(6, 1, 3));
  CHECK(product_rule(pair(1, 1, 1), pair(2, 1, 5)) == pair(1, 1, 1));
}

TEST_CASE("order is a total order (randomized)") {
  std::mt19937_64 gen(7);
  for (int i = 0; i < 10000; ++i) {
    const auto a = random_pair(gen), b = random_pair(gen), c = random_pair(gen);
    const auto ab = compare(a, b), ba = compare(b, a);
    CHECK((ab < 0) == (ba > 0));
    CHECK((ab == 0) == (a == b));
    if (ab <= 0 && compare(b, c) <= 0) CHECK(compare(a, c) <= 0);
  }
}

TEST_CASE("sum and product rule algebra (randomized)") {
  std::mt19937_64 gen(8);
  for (int i = 0; i < 10000; ++i) {
    const auto a = random_pair(gen), b = random_pair(gen), c = random_pair(gen);
    CHECK(sum_rule(a, b) == sum_rule(b, a));
    CHECK(sum_rule(sum_rule(a, b), c) == sum_rule(a, sum_rule(b, c)));
    CHECK(sum_rule(a, RlctPair(b.lambda(), 1)).mult() == a.mult());
    CHECK(product_rule(a, b) == product_rule(b, a));
    CHECK(product_rule(product_rule(a, b), c) == product_rule(a, product_rule(b, c)));
    CHECK(product_rule(a, a) == RlctPair(a.lambda(), 2 * a.mult()));
    if (a.lambda() != b.lambda()) CHECK(product_rule(a, b) == rlct_min(a, b));
  }
}
