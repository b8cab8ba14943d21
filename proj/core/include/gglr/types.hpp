#pragma once

#include <Eigen/Core>

namespace gglr {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using DenseMatrix = Eigen::MatrixXd;

}  // namespace gglr
