#pragma once

#include <Eigen/Dense>

#include "boq/tensor.hpp"

namespace boq::detail {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixView = Eigen::Map<RowMatrix>;
using ConstMatrixView = Eigen::Map<const RowMatrix>;
using VectorView = Eigen::Map<Eigen::RowVectorXd>;
using ConstVectorView = Eigen::Map<const Eigen::RowVectorXd>;

inline MatrixView as_matrix(Tensor& t, std::size_t rows, std::size_t cols) {
  return MatrixView(t.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}
inline ConstMatrixView as_matrix(const Tensor& t, std::size_t rows, std::size_t cols) {
  return ConstMatrixView(t.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}
inline ConstVectorView as_row(const Tensor& t) {
  return ConstVectorView(t.data(), static_cast<Eigen::Index>(t.size()));
}
inline VectorView as_row(Tensor& t) {
  return VectorView(t.data(), static_cast<Eigen::Index>(t.size()));
}

}  // namespace boq::detail
