#pragma once

#include <Eigen/Dense>

#include <atomic>
#include <cmath>
#include <cstdint>
#include <string>

#include "cmrls/error.hpp"

namespace cmrls {

template <typename Scalar, int N>
using Mat = Eigen::Matrix<Scalar, N, N, (N == 1 ? Eigen::ColMajor : Eigen::RowMajor)>;

template <typename Scalar, int N>
using Vec = Eigen::Matrix<Scalar, N, 1>;

using Mat4 = Mat<double, 4>;
using Vec4 = Vec<double, 4>;

namespace detail {

inline std::atomic<std::uint64_t>& inversion_counter() {
  static std::atomic<std::uint64_t> counter{0};
  return counter;
}

}  // namespace detail

/// Number of solve()/invert() calls made by this process so far.
///
/// The estimators never factorise a matrix; tests compare this counter before
/// and after an identification run to prove it.
inline std::uint64_t inversion_count() {
  return detail::inversion_counter().load(std::memory_order_relaxed);
}

/// Induced infinity norm: the largest absolute row sum. For a column vector this
/// is the largest absolute entry.
template <typename Derived>
typename Derived::Scalar inf_norm(const Eigen::MatrixBase<Derived>& m) {
  if (m.size() == 0) {
    return typename Derived::Scalar(0);
  }
  return m.cwiseAbs().rowwise().sum().maxCoeff();
}

// Pivots smaller than this fraction of ||A||_inf count as zero.
inline constexpr double kSingularityRatio = 1e-13;

namespace detail {

// Partial-pivot LU with the scale-aware singularity check shared by solve/invert.
template <typename Derived>
Eigen::PartialPivLU<typename Derived::PlainObject> checked_lu(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  if (a.rows() != a.cols()) {
    throw SingularMatrix("matrix is not square");
  }
  inversion_counter().fetch_add(1, std::memory_order_relaxed);
  const Scalar scale = inf_norm(a);
  Eigen::PartialPivLU<typename Derived::PlainObject> lu(a.eval());
  const auto& packed = lu.matrixLU();
  for (Eigen::Index i = 0; i < packed.rows(); ++i) {
    if (!(std::abs(packed(i, i)) >= Scalar(kSingularityRatio) * scale) || scale == Scalar(0)) {
      throw SingularMatrix("pivot " + std::to_string(i) + " below singularity threshold");
    }
  }
  return lu;
}

}  // namespace detail

/// Solves A x = b by partial-pivot elimination. Intended for small systems and
/// test oracles.
template <typename DerivedA, typename DerivedB>
typename DerivedB::PlainObject solve(const Eigen::MatrixBase<DerivedA>& a,
                                     const Eigen::MatrixBase<DerivedB>& b) {
  return detail::checked_lu(a).solve(b);
}

template <typename Derived>
typename Derived::PlainObject invert(const Eigen::MatrixBase<Derived>& a) {
  return detail::checked_lu(a).inverse();
}

/// kappa(A) = ||A||_inf * ||A^-1||_inf through an explicit inverse. Throws
/// SingularMatrix, which callers treat as an infinite condition number.
template <typename Derived>
typename Derived::Scalar condition_number_direct(const Eigen::MatrixBase<Derived>& a) {
  return inf_norm(a) * inf_norm(invert(a));
}

}  // namespace cmrls
