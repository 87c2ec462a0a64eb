#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <limits>

namespace gdm {

template <typename Scalar>
constexpr Scalar neg_inf() {
  return -std::numeric_limits<Scalar>::infinity();
}

// log(sum(exp(x))). Entries equal to -inf are excluded; an all -inf input
// yields -inf.
template <typename Derived>
typename Derived::Scalar log_sum_exp(const Eigen::DenseBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  if (x.size() == 0) return neg_inf<Scalar>();
  const Scalar hi = x.maxCoeff();
  if (hi == neg_inf<Scalar>()) return hi;
  Scalar sum = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const Scalar v = x.derived().coeff(i);
    if (v != neg_inf<Scalar>()) sum += std::exp(v - hi);
  }
  return hi + std::log(sum);
}

// Normalizes log-weights in place so that exp(x) sums to one.
template <typename Derived>
void log_normalize(Eigen::DenseBase<Derived>& x) {
  const auto lse = log_sum_exp(x);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    auto& v = x.derived().coeffRef(i);
    if (v != neg_inf<typename Derived::Scalar>()) v -= lse;
  }
}

// Element-wise exp that maps -inf to exactly 0.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> exp_of(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  return x.unaryExpr([](Scalar v) { return Scalar(std::exp(v)); });
}

// Pairwise (tree) summation over [begin, end); the split point depends only on
// the range, so the result is independent of how the values were produced.
template <typename Scalar>
Scalar pairwise_sum(const Scalar* values, std::size_t n) {
  if (n == 0) return Scalar(0);
  if (n == 1) return values[0];
  const std::size_t half = n / 2;
  return pairwise_sum(values, half) + pairwise_sum(values + half, n - half);
}

// Column-wise pairwise reduction of a (rows x n) matrix into one column.
Eigen::VectorXd pairwise_column_sum(const Eigen::MatrixXd& columns);

}  // namespace gdm
