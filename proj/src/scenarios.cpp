#include "rlctfa/scenarios.hpp"

#include <stdexcept>

namespace rlctfa {

const std::vector<std::string>& builtin_scenario_names() {
  static const std::vector<std::string> names{"diag3", "two3", "generic3"};
  return names;
}

FactorModelPoint builtin_scenario(const std::string& name) {
  Matrix lambda(3, 1);
  if (name == "diag3") {
    lambda << 0, 0, 0;
  } else if (name == "two3") {
    lambda << 1, 1, 0;
  } else if (name == "generic3") {
    lambda << 1, 1, 1;
  } else {
    throw std::invalid_argument("unknown scenario '" + name + "'");
  }
  return FactorModelPoint::from_params(FactorParams(Vector::Ones(3), lambda));
}

}  // namespace rlctfa
