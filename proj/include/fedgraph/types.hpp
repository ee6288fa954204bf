#pragma once

#include <Eigen/Dense>

#include <cstdint>

namespace fedgraph {

using Index = Eigen::Index;

template <typename Scalar>
using MatX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using VecX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using RowVecX = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

// All model arithmetic runs in double precision.
using Mat = MatX<double>;
using Vec = VecX<double>;
using RowVec = RowVecX<double>;

}  // namespace fedgraph
