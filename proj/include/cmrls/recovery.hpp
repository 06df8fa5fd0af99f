#pragma once

#include <array>
#include <limits>
#include <span>
#include <string>

#include "cmrls/ecm.hpp"
#include "cmrls/linalg.hpp"

namespace cmrls::recovery {

enum class Reason {
  Ok,
  NonFinite,
  DecayOutOfRange,  // a2 outside (0, 1)
  DecayNearOne,     // |1 - a2| < 1e-12
  NonPositive,      // recovered quantity <= 0
};

std::string to_string(Reason r);

struct FieldValue {
  double value = std::numeric_limits<double>::quiet_NaN();
  Reason reason = Reason::NonFinite;

  bool valid() const { return reason == Reason::Ok; }
};

/// Physical parameters recovered from one coefficient vector. beta1 and Cap
/// appear only through their ratio, so that ratio is what is reported.
struct PhysicalEstimate {
  FieldValue r0;
  FieldValue tau;  // R1 * C1, s
  FieldValue r1;
  FieldValue c1;
  FieldValue slope_over_cap;  // beta1 / Cap, V/(A s)
};

inline constexpr std::array<const char*, 5> kFieldNames = {"r0", "tau", "r1", "c1", "slope_over_cap"};

const FieldValue& field(const PhysicalEstimate& e, std::size_t index);

/// Inverts ecm::theta_from_params. Never throws; unusable coefficients mark the
/// fields that depend on them invalid and leave the rest intact.
PhysicalEstimate params_from_theta(const Vec4& theta, double dt);

struct FieldStats {
  double truth = 0.0;
  double mean = std::numeric_limits<double>::quiet_NaN();
  double mae = std::numeric_limits<double>::quiet_NaN();
  double valid_fraction = 0.0;
  std::size_t count = 0;  // entries after burn-in
};

struct MaeReport {
  std::array<FieldStats, 5> fields;  // ordered as kFieldNames
  std::size_t burn_in = 0;
};

/// Mean identified value and mean absolute error per field over the valid
/// estimates after dropping the first burn_in_fraction of the series. Throws
/// EmptySeries when nothing is left.
MaeReport mean_abs_error(std::span<const PhysicalEstimate> series, const ecm::EcmParams& truth,
                         double burn_in_fraction = 0.1);

}  // namespace cmrls::recovery
