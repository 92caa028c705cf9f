#pragma once

#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "rlctfa/lp.hpp"
#include "rlctfa/rational.hpp"
#include "rlctfa/rlct.hpp"

namespace rlctfa {

using ExponentVector = std::vector<int>;

/// Raised for the unit ideal <1>, where the Newton polyhedron contains the
/// origin and no threshold exists.
class InapplicableIdeal : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Ideal generated by monomials w^a in `dim` variables. Generators are
/// deduplicated on construction; the order of first appearance is kept.
class MonomialIdeal {
 public:
  MonomialIdeal(int dim, std::vector<ExponentVector> generators);

  int dim() const { return dim_; }
  const std::vector<ExponentVector>& generators() const { return gens_; }
  std::size_t size() const { return gens_.size(); }

 private:
  int dim_;
  std::vector<ExponentVector> gens_;
};

/// Exponent of the monomial amplitude w^tau.
struct AmplitudeExponent {
  ExponentVector tau;

  static AmplitudeExponent zero(int dim) { return {ExponentVector(static_cast<std::size_t>(dim), 0)}; }
};

/// Smallest t >= 0 with t * (tau + 1) in the Newton polyhedron.
Rational tau_distance(const MonomialIdeal& ideal, const AmplitudeExponent& tau);

/// Point delta_tau * (tau + 1) on the boundary of the Newton polyhedron.
RationalVector tau_point(const MonomialIdeal& ideal, const AmplitudeExponent& tau);

struct FaceMembers {
  std::set<int> vertices;  // generator indices
  std::set<int> rays;      // coordinate directions
};

/// Generators and recession directions that appear with positive weight in
/// some representation of x; together they span the smallest face holding x.
/// Throws std::domain_error when x is outside the polyhedron.
FaceMembers minimal_face_members(const MonomialIdeal& ideal, const RationalVector& x);

/// Dimension of the face spanned by `members`.
int face_dimension(const MonomialIdeal& ideal, const FaceMembers& members);

/// Codimension of the smallest face containing the tau point.
int tau_multiplicity(const MonomialIdeal& ideal, const AmplitudeExponent& tau);

/// (1 / delta_tau, mu_tau)
RlctPair rlct_monomial(const MonomialIdeal& ideal, const AmplitudeExponent& tau);

/// Whether x = theta . a + mu for some convex theta and mu >= 0.
bool in_newton_polyhedron(const MonomialIdeal& ideal, const RationalVector& x);

class IdealParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct IdealInput {
  MonomialIdeal ideal;
  AmplitudeExponent tau;
};

/// Reads the JSON ideal document
///   {"dim": d, "generators": [[...], ...], "tau": [...]}
/// `tau` is optional (all zeros). Negative exponents, ragged rows and the
/// unit ideal are rejected with IdealParseError naming the offending field.
IdealInput parse_ideal(const std::string& text);

}  // namespace rlctfa
