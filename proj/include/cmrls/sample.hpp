#pragma once

#include "cmrls/linalg.hpp"

namespace cmrls {

/// One (d_t, phi_t) pair of a linear regression d = theta^T phi, stamped with the
/// time of the newest measurement it uses.
template <typename Scalar, int N>
struct BasicSample {
  double t = 0.0;
  Scalar d = Scalar(0);
  Vec<Scalar, N> phi = Vec<Scalar, N>::Zero();
};

}  // namespace cmrls
