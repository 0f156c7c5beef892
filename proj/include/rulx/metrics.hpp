#pragma once

#include "rulx/common.hpp"

#include <Eigen/Dense>

namespace rulx {

namespace detail {
template <typename A, typename B>
void check_pair(const Eigen::DenseBase<A>& y_true, const Eigen::DenseBase<B>& y_pred) {
  if (y_true.size() != y_pred.size())
    fail(ErrorKind::invalid_argument, "metric inputs differ in length (" + std::to_string(y_true.size()) + " vs " +
                                          std::to_string(y_pred.size()) + ")");
  if (y_true.size() == 0) fail(ErrorKind::invalid_argument, "metric inputs are empty");
}
}  // namespace detail

/// Mean squared residual, in squared target units.
template <typename A, typename B>
typename A::Scalar mse(const Eigen::DenseBase<A>& y_true, const Eigen::DenseBase<B>& y_pred) {
  detail::check_pair(y_true, y_pred);
  return (y_true.derived().array() - y_pred.derived().array()).square().mean();
}

template <typename A, typename B>
typename A::Scalar mae(const Eigen::DenseBase<A>& y_true, const Eigen::DenseBase<B>& y_pred) {
  detail::check_pair(y_true, y_pred);
  return (y_true.derived().array() - y_pred.derived().array()).abs().mean();
}

}  // namespace rulx
