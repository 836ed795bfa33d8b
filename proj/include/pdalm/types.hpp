#pragma once

#include <vector>

#include <Eigen/Dense>

namespace pdalm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;
using IndexList = std::vector<Index>;

/// Sup-norm that tolerates empty vectors (a problem may have no equality
/// constraints, in which case ‖h‖ is zero by convention).
inline double inf_norm(const Vector& v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

}  // namespace pdalm
