#include "rlctfa/newton.hpp"

#include <algorithm>
#include <cassert>
#include <string>

#include <json.hpp>

namespace rlctfa {

MonomialIdeal::MonomialIdeal(int dim, std::vector<ExponentVector> generators) : dim_(dim) {
  if (dim <= 0) throw std::invalid_argument("MonomialIdeal: dimension must be positive");
  if (generators.empty()) throw std::invalid_argument("MonomialIdeal: no generators");
  for (auto& g : generators) {
    if (static_cast<int>(g.size()) != dim) {
      throw std::invalid_argument("MonomialIdeal: generator length differs from dimension");
    }
    if (std::any_of(g.begin(), g.end(), [](int e) { return e < 0; })) {
      throw std::invalid_argument("MonomialIdeal: negative exponent");
    }
    if (std::all_of(g.begin(), g.end(), [](int e) { return e == 0; })) {
      throw InapplicableIdeal("RLCT machinery inapplicable: the ideal is the unit ideal <1>");
    }
    if (std::find(gens_.begin(), gens_.end(), g) == gens_.end()) gens_.push_back(std::move(g));
  }
}

namespace {

void check_tau(const MonomialIdeal& ideal, const AmplitudeExponent& tau) {
  if (static_cast<int>(tau.tau.size()) != ideal.dim()) {
    throw std::invalid_argument("tau length differs from ideal dimension");
  }
  if (std::any_of(tau.tau.begin(), tau.tau.end(), [](int e) { return e < 0; })) {
    throw std::invalid_argument("tau has a negative entry");
  }
}

// Variables [theta_0..theta_{n-1}, mu_0..mu_{d-1}], all non-negative, with
// x = sum theta_i a_i + mu and sum theta_i = 1.
LinearProgram representation_lp(const MonomialIdeal& ideal, const RationalVector& x) {
  const auto n = ideal.size();
  const auto d = static_cast<std::size_t>(ideal.dim());
  LinearProgram lp(n + d);
  for (std::size_t v = 0; v < n + d; ++v) lp.set_nonnegative(v);
  for (std::size_t j = 0; j < d; ++j) {
    RationalVector row(n + d, Rational(0));
    for (std::size_t i = 0; i < n; ++i) row[i] = Rational(ideal.generators()[i][j]);
    row[n + j] = Rational(1);
    lp.add_equality(std::move(row), x[j]);
  }
  RationalVector ones(n + d, Rational(0));
  for (std::size_t i = 0; i < n; ++i) ones[i] = Rational(1);
  lp.add_equality(std::move(ones), Rational(1));
  return lp;
}

bool positive_in_some_representation(LinearProgram lp, std::size_t var) {
  RationalVector obj(lp.num_vars(), Rational(0));
  obj[var] = Rational(-1);
  lp.set_objective(std::move(obj));
  const auto res = solve_lp(lp);
  // Bounded: theta <= 1 and mu_j <= x_j.
  const auto* opt = std::get_if<LpOptimal>(&res);
  assert(opt != nullptr);
  return opt != nullptr && opt->value.sign() < 0;
}

}  // namespace

Rational tau_distance(const MonomialIdeal& ideal, const AmplitudeExponent& tau) {
  check_tau(ideal, tau);
  const auto n = ideal.size();
  const auto d = static_cast<std::size_t>(ideal.dim());
  // Variables [theta_0..theta_{n-1}, t].
  LinearProgram lp(n + 1);
  for (std::size_t v = 0; v <= n; ++v) lp.set_nonnegative(v);
  RationalVector obj(n + 1, Rational(0));
  obj[n] = Rational(1);
  lp.set_objective(std::move(obj));
  for (std::size_t j = 0; j < d; ++j) {
    RationalVector row(n + 1, Rational(0));
    for (std::size_t i = 0; i < n; ++i) row[i] = Rational(-ideal.generators()[i][j]);
    row[n] = Rational(tau.tau[j] + 1);
    lp.add_greater_equal(std::move(row), Rational(0));
  }
  RationalVector ones(n + 1, Rational(1));
  ones[n] = Rational(0);
  lp.add_equality(std::move(ones), Rational(1));

  const auto res = solve_lp(lp);
  const auto& opt = std::get<LpOptimal>(res);
  // Non-zero generators keep the polyhedron away from the origin.
  assert(opt.value.sign() > 0);
  return opt.value;
}

RationalVector tau_point(const MonomialIdeal& ideal, const AmplitudeExponent& tau) {
  const Rational delta = tau_distance(ideal, tau);
  RationalVector x(tau.tau.size());
  for (std::size_t j = 0; j < x.size(); ++j) x[j] = delta * Rational(tau.tau[j] + 1);
  return x;
}

bool in_newton_polyhedron(const MonomialIdeal& ideal, const RationalVector& x) {
  if (static_cast<int>(x.size()) != ideal.dim()) {
    throw std::invalid_argument("point length differs from ideal dimension");
  }
  const auto res = solve_lp(representation_lp(ideal, x));
  return !std::holds_alternative<LpInfeasible>(res);
}

FaceMembers minimal_face_members(const MonomialIdeal& ideal, const RationalVector& x) {
  if (!in_newton_polyhedron(ideal, x)) {
    throw std::domain_error("minimal_face_members: point lies outside the Newton polyhedron");
  }
  const LinearProgram base = representation_lp(ideal, x);
  const auto n = ideal.size();
  FaceMembers out;
  for (std::size_t i = 0; i < n; ++i) {
    if (positive_in_some_representation(base, i)) out.vertices.insert(static_cast<int>(i));
  }
  for (int j = 0; j < ideal.dim(); ++j) {
    if (positive_in_some_representation(base, n + static_cast<std::size_t>(j))) out.rays.insert(j);
  }
  return out;
}

int face_dimension(const MonomialIdeal& ideal, const FaceMembers& members) {
  if (members.vertices.empty()) throw std::invalid_argument("face_dimension: no vertex member");
  std::vector<RationalVector> pts;
  auto as_rational = [](const ExponentVector& e) {
    RationalVector v(e.size());
    for (std::size_t j = 0; j < e.size(); ++j) v[j] = Rational(e[j]);
    return v;
  };
  for (int i : members.vertices) pts.push_back(as_rational(ideal.generators()[static_cast<std::size_t>(i)]));
  const RationalVector anchor = pts.front();
  for (int j : members.rays) {
    RationalVector v = anchor;
    v[static_cast<std::size_t>(j)] += Rational(1);
    pts.push_back(std::move(v));
  }
  return affine_rank(pts);
}

int tau_multiplicity(const MonomialIdeal& ideal, const AmplitudeExponent& tau) {
  const auto x = tau_point(ideal, tau);
  return ideal.dim() - face_dimension(ideal, minimal_face_members(ideal, x));
}

RlctPair rlct_monomial(const MonomialIdeal& ideal, const AmplitudeExponent& tau) {
  const auto x = tau_point(ideal, tau);
  const Rational delta = x[0] / Rational(tau.tau[0] + 1);
  const int mult = ideal.dim() - face_dimension(ideal, minimal_face_members(ideal, x));
  return RlctPair(Rational(1) / delta, mult);
}

namespace {

ExponentVector parse_exponents(const nlohmann::json& node, const std::string& where) {
  if (!node.is_array()) throw IdealParseError(where + ": expected an array of integers");
  ExponentVector out;
  for (std::size_t i = 0; i < node.size(); ++i) {
    const auto& e = node[i];
    const std::string at = where + "[" + std::to_string(i) + "]";
    if (!e.is_number_integer()) throw IdealParseError(at + ": expected an integer");
    const auto v = e.get<long long>();
    if (v < 0) throw IdealParseError(at + ": negative exponent " + std::to_string(v));
    if (v > 1000000) throw IdealParseError(at + ": exponent too large");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

}  // namespace

IdealInput parse_ideal(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw IdealParseError(std::string("ideal file: ") + e.what());
  }
  if (!doc.is_object()) throw IdealParseError("ideal file: top level must be an object");
  if (!doc.contains("dim") || !doc["dim"].is_number_integer()) {
    throw IdealParseError("dim: missing or not an integer");
  }
  const auto dim = doc["dim"].get<long long>();
  if (dim <= 0 || dim > 64) throw IdealParseError("dim: must be in [1, 64]");
  if (!doc.contains("generators") || !doc["generators"].is_array() || doc["generators"].empty()) {
    throw IdealParseError("generators: missing or empty");
  }
  std::vector<ExponentVector> gens;
  for (std::size_t i = 0; i < doc["generators"].size(); ++i) {
    const std::string where = "generators[" + std::to_string(i) + "]";
    auto g = parse_exponents(doc["generators"][i], where);
    if (static_cast<long long>(g.size()) != dim) {
      throw IdealParseError(where + ": length " + std::to_string(g.size()) + " differs from dim");
    }
    gens.push_back(std::move(g));
  }
  AmplitudeExponent tau = AmplitudeExponent::zero(static_cast<int>(dim));
  if (doc.contains("tau")) {
    tau.tau = parse_exponents(doc["tau"], "tau");
    if (static_cast<long long>(tau.tau.size()) != dim) throw IdealParseError("tau: length differs from dim");
  }
  try {
    return {MonomialIdeal(static_cast<int>(dim), std::move(gens)), std::move(tau)};
  } catch (const std::invalid_argument& e) {
    throw IdealParseError(std::string("generators: ") + e.what());
  }
}

}  // namespace rlctfa
