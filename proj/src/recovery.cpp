#include "cmrls/recovery.hpp"

#include <algorithm>
#include <cmath>

#include "cmrls/error.hpp"

namespace cmrls::recovery {

namespace {

FieldValue make(double v, Reason fallback = Reason::Ok) {
  if (fallback != Reason::Ok) return {v, fallback};
  if (!std::isfinite(v)) return {v, Reason::NonFinite};
  return {v, Reason::Ok};
}

FieldValue positive(double v) {
  FieldValue f = make(v);
  if (f.valid() && !(v > 0.0)) f.reason = Reason::NonPositive;
  return f;
}

}  // namespace

std::string to_string(Reason r) {
  switch (r) {
    case Reason::Ok:
      return "ok";
    case Reason::NonFinite:
      return "non_finite";
    case Reason::DecayOutOfRange:
      return "decay_out_of_range";
    case Reason::DecayNearOne:
      return "decay_near_one";
    case Reason::NonPositive:
      return "non_positive";
  }
  return "non_finite";
}

const FieldValue& field(const PhysicalEstimate& e, std::size_t index) {
  switch (index) {
    case 0:
      return e.r0;
    case 1:
      return e.tau;
    case 2:
      return e.r1;
    case 3:
      return e.c1;
    default:
      return e.slope_over_cap;
  }
}

PhysicalEstimate params_from_theta(const Vec4& theta, double dt) {
  const double a2 = theta(0), a3 = theta(1), a4 = theta(2), a5 = theta(3);
  PhysicalEstimate e;
  e.r0 = make(a3);

  Reason decay = Reason::Ok;
  if (!std::isfinite(a2) || !std::isfinite(dt) || !(dt > 0.0)) {
    decay = Reason::NonFinite;
  } else if (std::abs(1.0 - a2) < 1e-12) {
    decay = Reason::DecayNearOne;
  } else if (!(a2 > 0.0 && a2 < 1.0)) {
    decay = Reason::DecayOutOfRange;
  }

  // With u = R1 (1 - a2) and w = beta1 dt / Cap the coefficient map reads
  //   a4 =  u + w - a3 (1 + a2)
  //   a5 = -u - a2 w + a3 a2
  // so a4 + a5 = w (1 - a2) - a3.
  const bool solvable = decay == Reason::Ok || decay == Reason::DecayOutOfRange;
  const double one_minus = 1.0 - a2;
  const double w = solvable ? (a4 + a5 + a3) / one_minus : std::nan("");
  const double u = a4 - w + a3 * (1.0 + a2);

  e.slope_over_cap = solvable ? positive(w / dt) : make(std::nan(""), decay);

  if (decay != Reason::Ok) {
    e.tau = make(std::nan(""), decay);
    e.r1 = make(std::nan(""), decay);
    e.c1 = make(std::nan(""), decay);
    return e;
  }
  e.tau = positive(-dt / std::log(a2));
  e.r1 = positive(u / one_minus);
  if (e.tau.valid() && e.r1.valid()) {
    e.c1 = positive(e.tau.value / e.r1.value);
  } else {
    e.c1 = make(std::nan(""), e.r1.valid() ? e.tau.reason : e.r1.reason);
  }
  return e;
}

MaeReport mean_abs_error(std::span<const PhysicalEstimate> series, const ecm::EcmParams& truth,
                         double burn_in_fraction) {
  MaeReport report;
  const double frac = std::clamp(burn_in_fraction, 0.0, 1.0);
  report.burn_in = static_cast<std::size_t>(std::floor(frac * static_cast<double>(series.size())));
  if (report.burn_in >= series.size()) {
    throw EmptySeries("no estimates left after burn-in");
  }
  const std::array<double, 5> truths = {truth.r0, truth.tau(), truth.r1, truth.c1,
                                        truth.beta1 / truth.cap};
  const auto kept = series.subspan(report.burn_in);
  for (std::size_t f = 0; f < report.fields.size(); ++f) {
    FieldStats& s = report.fields[f];
    s.truth = truths[f];
    s.count = kept.size();
    double sum = 0.0, abs_sum = 0.0;
    std::size_t valid = 0;
    for (const auto& e : kept) {
      const FieldValue& v = field(e, f);
      if (!v.valid()) continue;
      sum += v.value;
      abs_sum += std::abs(v.value - s.truth);
      ++valid;
    }
    s.valid_fraction = static_cast<double>(valid) / static_cast<double>(kept.size());
    if (valid > 0) {
      s.mean = sum / static_cast<double>(valid);
      s.mae = abs_sum / static_cast<double>(valid);
    }
  }
  return report;
}

}  // namespace cmrls::recovery
