#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>

namespace alvar {

using Index = Eigen::Index;
using IndexArray = Eigen::Array<Index, Eigen::Dynamic, 1>;
using ArrayXd = Eigen::ArrayXd;

/// Raised when every selection (or initial) weight vanishes.
class DegenerateWeights : public std::runtime_error {
 public:
  explicit DegenerateWeights(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when a model callback returns a value outside its contract.
class ModelContractViolation : public std::domain_error {
 public:
  explicit ModelContractViolation(const std::string& what) : std::domain_error(what) {}
};

inline IndexArray identity_indices(Index n) { return IndexArray::LinSpaced(n, 0, n - 1); }

}  // namespace alvar
