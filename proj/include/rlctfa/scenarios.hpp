#pragma once

#include <string>
#include <vector>

#include "rlctfa/factor_model.hpp"

namespace rlctfa {

/// Named p = 3 one-factor points with psi = 1:
///   diag3    Lambda = 0          (diagonal)
///   two3     Lambda = (1, 1, 0)  (one non-zero covariance)
///   generic3 Lambda = (1, 1, 1)  (all covariances non-zero)
FactorModelPoint builtin_scenario(const std::string& name);

const std::vector<std::string>& builtin_scenario_names();

}  // namespace rlctfa
