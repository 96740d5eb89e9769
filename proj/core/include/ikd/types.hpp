#pragma once

#include <Eigen/Core>

namespace ikd {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// T x N observations, one row per data point.
using ObservationMatrix = Matrix;
/// T x M latent coordinates, one row per data point.
using LatentMatrix = Matrix;

}  // namespace ikd
