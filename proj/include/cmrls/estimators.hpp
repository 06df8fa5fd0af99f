#pragma once

// Forgetting-factor recursive least squares, its batch weighted least-squares
// oracle, and condition-memory RLS (CMRLS).
//
// Every estimator state carries both the covariance P and the information
// matrix Phi = P^-1, each propagated by its own recursion. The condition number
// kappa(P) = ||P||_inf ||Phi||_inf is then available in O(n^2) without ever
// inverting a matrix.

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cmrls/error.hpp"
#include "cmrls/linalg.hpp"
#include "cmrls/sample.hpp"

namespace cmrls {

template <typename Scalar, int N>
struct EstimatorState {
  Vec<Scalar, N> theta = Vec<Scalar, N>::Zero();
  Mat<Scalar, N> p = Mat<Scalar, N>::Identity();
  Mat<Scalar, N> info = Mat<Scalar, N>::Identity();  // tracked Phi
  Vec<Scalar, N> gain = Vec<Scalar, N>::Zero();
  Scalar innovation = Scalar(0);
  std::int64_t step = 0;
  Scalar kappa = Scalar(1);
  // Remaining steps that still use lambda_rem after a restore (CMRLS only).
  int hold_left = 0;
};

/// Condition memory: a full copy of the estimator state taken while it was well
/// conditioned.
template <typename Scalar, int N>
struct Snapshot {
  EstimatorState<Scalar, N> state;
};

template <typename Scalar, int N>
struct InitConfig {
  Scalar p0_scale = Scalar(1e3);  // P_0 = p0_scale * I
  Vec<Scalar, N> theta0 = Vec<Scalar, N>::Zero();
};

template <typename Scalar, int N>
void validate(const InitConfig<Scalar, N>& cfg) {
  if (!(cfg.p0_scale > Scalar(0)) || !std::isfinite(static_cast<double>(cfg.p0_scale))) {
    throw InvalidConfig("p0_scale must be finite and > 0");
  }
  if (!cfg.theta0.allFinite()) {
    throw InvalidConfig("theta0 must be finite");
  }
}

/// Which well-conditioned state CMRLS keeps in memory.
enum class MemoryPolicy {
  BestConditioned,  // state with the smallest kappa seen so far
  Latest,           // most recent state with kappa <= c_rem
};

struct CmrlsConfig {
  double c_rem = 1e4;
  double c_upper = 1e8;
  double lambda_for = 0.999;
  double lambda_rem = 1.05;
  int restore_hold_steps = 1;
  MemoryPolicy memory = MemoryPolicy::BestConditioned;
};

inline void validate(const CmrlsConfig& c) {
  if (!(c.c_rem >= 1.0) || !(c.c_upper > c.c_rem)) {
    throw InvalidConfig("need 1 <= c_rem < c_upper");
  }
  if (!(c.lambda_for > 0.0 && c.lambda_for <= 1.0)) {
    throw InvalidConfig("lambda_for must lie in (0, 1]");
  }
  if (!(c.lambda_rem > 1.0) || !std::isfinite(c.lambda_rem)) {
    throw InvalidConfig("lambda_rem must be finite and > 1");
  }
  if (c.restore_hold_steps < 1) {
    throw InvalidConfig("restore_hold_steps must be >= 1");
  }
}

enum class StepKind { Normal, Restored, Degraded };

struct StepEvent {
  StepKind kind = StepKind::Normal;
  bool memorized = false;

  bool operator==(const StepEvent&) const = default;
};

/// CSV label: restored and degraded take precedence over memorized.
inline std::string to_string(const StepEvent& e) {
  switch (e.kind) {
    case StepKind::Restored:
      return "restored";
    case StepKind::Degraded:
      return "degraded";
    case StepKind::Normal:
      break;
  }
  return e.memorized ? "memorized" : "normal";
}

/// kappa(P) from the tracked pair; no inversion.
template <typename Scalar, int N>
Scalar tracked_condition(const EstimatorState<Scalar, N>& s) {
  return inf_norm(s.p) * inf_norm(s.info);
}

template <typename Scalar, int N>
EstimatorState<Scalar, N> rls_init(const InitConfig<Scalar, N>& cfg) {
  validate(cfg);
  EstimatorState<Scalar, N> s;
  s.theta = cfg.theta0;
  s.p = cfg.p0_scale * Mat<Scalar, N>::Identity();
  s.info = (Scalar(1) / cfg.p0_scale) * Mat<Scalar, N>::Identity();
  s.kappa = tracked_condition(s);
  return s;
}

/// One RLS update with forgetting factor lambda:
///   k     = P phi / (lambda + phi^T P phi)
///   alpha = d - phi^T theta
///   P     = (P - k phi^T P) / lambda, then symmetrised
///   theta = theta + k alpha
///   Phi   = lambda Phi + phi phi^T
/// lambda > 1 is legal; CMRLS uses it to down-weight a sample against restored
/// memory.
template <typename Scalar, int N>
EstimatorState<Scalar, N> rls_step(const EstimatorState<Scalar, N>& s, const Vec<Scalar, N>& phi,
                                   Scalar d, Scalar lambda) {
  if (!(lambda > Scalar(0))) {
    throw InvalidConfig("forgetting factor must be > 0");
  }
  const Vec<Scalar, N> p_phi = s.p * phi;
  const Scalar denom = lambda + phi.dot(p_phi);
  if (!(denom > Scalar(0)) || !std::isfinite(static_cast<double>(denom))) {
    throw NumericalBreakdown("lambda + phi^T P phi = " + std::to_string(static_cast<double>(denom)));
  }
  EstimatorState<Scalar, N> out = s;
  out.gain = p_phi / denom;
  out.innovation = d - phi.dot(s.theta);
  Mat<Scalar, N> p = (s.p - out.gain * (phi.transpose() * s.p)) / lambda;
  out.p = Scalar(0.5) * (p + p.transpose());
  out.theta = s.theta + out.gain * out.innovation;
  out.info = lambda * s.info + phi * phi.transpose();
  out.step = s.step + 1;
  out.kappa = tracked_condition(out);
  if (!out.theta.allFinite() || !out.p.allFinite() || !out.info.allFinite()) {
    throw NumericalBreakdown("non-finite estimator state");
  }
  return out;
}

template <typename Scalar, int N>
EstimatorState<Scalar, N> rls_step(const EstimatorState<Scalar, N>& s, const BasicSample<Scalar, N>& x,
                                   Scalar lambda) {
  return rls_step(s, x.phi, x.d, lambda);
}

/// Direct solution of the exponentially weighted normal equations over
/// samples[0..m), including the decayed prior that makes it coincide with
/// rls_init followed by m rls_step calls:
///   (sum_k lambda^{m-1-k} phi_k phi_k^T + lambda^m / p0 I) theta
///     = sum_k lambda^{m-1-k} phi_k d_k + lambda^m / p0 theta0
/// Test oracle; throws SingularMatrix.
template <typename Scalar, int N>
Vec<Scalar, N> batch_wls(std::span<const BasicSample<Scalar, N>> samples, Scalar lambda,
                         const InitConfig<Scalar, N>& cfg) {
  validate(cfg);
  const auto m = static_cast<int>(samples.size());
  const Scalar prior = std::pow(lambda, Scalar(m)) / cfg.p0_scale;
  Mat<Scalar, N> normal = prior * Mat<Scalar, N>::Identity();
  Vec<Scalar, N> rhs = prior * cfg.theta0;
  for (int k = 0; k < m; ++k) {
    const Scalar w = std::pow(lambda, Scalar(m - 1 - k));
    const auto& x = samples[static_cast<std::size_t>(k)];
    normal += w * x.phi * x.phi.transpose();
    rhs += w * x.d * x.phi;
  }
  return solve(normal, rhs);
}

template <typename Scalar, int N>
struct CmrlsStepResult {
  EstimatorState<Scalar, N> state;
  std::optional<Snapshot<Scalar, N>> memory;
  StepEvent event;
};

/// One CMRLS step:
///  1. kappa of the incoming state;
///  2. kappa > c_upper with memory: restart from the snapshot and update with
///     lambda_rem (Restored);
///  3. otherwise update with lambda_for (Degraded if kappa > c_upper but no
///     memory exists yet);
///  4. keep the updated state as memory if its kappa <= c_rem and the memory
///     policy accepts it.
template <typename Scalar, int N>
CmrlsStepResult<Scalar, N> cmrls_step(const EstimatorState<Scalar, N>& state,
                                      const std::optional<Snapshot<Scalar, N>>& memory,
                                      const BasicSample<Scalar, N>& sample, const CmrlsConfig& cfg) {
  CmrlsStepResult<Scalar, N> r{state, memory, {}};
  const Scalar kappa = tracked_condition(state);
  const auto lambda_for = static_cast<Scalar>(cfg.lambda_for);
  const auto lambda_rem = static_cast<Scalar>(cfg.lambda_rem);

  if (kappa > static_cast<Scalar>(cfg.c_upper) && memory) {
    EstimatorState<Scalar, N> restored = memory->state;
    restored.step = state.step;
    r.state = rls_step(restored, sample, lambda_rem);
    r.state.hold_left = cfg.restore_hold_steps - 1;
    r.event.kind = StepKind::Restored;
  } else {
    const Scalar lambda = state.hold_left > 0 ? lambda_rem : lambda_for;
    r.state = rls_step(state, sample, lambda);
    r.state.hold_left = state.hold_left > 0 ? state.hold_left - 1 : 0;
    if (kappa > static_cast<Scalar>(cfg.c_upper)) {
      r.event.kind = StepKind::Degraded;
    }
  }

  const Scalar after = r.state.kappa;
  if (after <= static_cast<Scalar>(cfg.c_rem)) {
    const bool better = !r.memory || cfg.memory == MemoryPolicy::Latest || after < r.memory->state.kappa;
    if (better) {
      r.memory = Snapshot<Scalar, N>{r.state};
      r.event.memorized = true;
    }
  }
  return r;
}

enum class Algorithm { Rls, Cmrls };

inline std::string to_string(Algorithm a) { return a == Algorithm::Rls ? "rls" : "cmrls"; }

inline Algorithm parse_algorithm(const std::string& s) {
  if (s == "rls") return Algorithm::Rls;
  if (s == "cmrls") return Algorithm::Cmrls;
  throw InvalidConfig("unknown algorithm '" + s + "' (expected rls or cmrls)");
}

template <typename Scalar, int N>
struct IdentConfig {
  Algorithm algorithm = Algorithm::Cmrls;
  CmrlsConfig cmrls;  // plain RLS uses cmrls.lambda_for only
  InitConfig<Scalar, N> init;
};

template <typename Scalar, int N>
struct IdentRecord {
  double t = 0.0;
  Vec<Scalar, N> theta;
  Scalar kappa = Scalar(1);
  StepEvent event;
};

template <typename Scalar, int N>
using IdentTrace = std::vector<IdentRecord<Scalar, N>>;

/// Runs an estimator over a sample stream, one record per sample. Step failures
/// are rethrown as IdentificationFailure carrying the sample index.
template <typename Scalar, int N>
IdentTrace<Scalar, N> run_identification(std::span<const BasicSample<Scalar, N>> samples,
                                         const IdentConfig<Scalar, N>& cfg) {
  validate(cfg.cmrls);
  EstimatorState<Scalar, N> state = rls_init(cfg.init);
  std::optional<Snapshot<Scalar, N>> memory;
  IdentTrace<Scalar, N> trace;
  trace.reserve(samples.size());
  const auto lambda = static_cast<Scalar>(cfg.cmrls.lambda_for);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    StepEvent event;
    try {
      if (cfg.algorithm == Algorithm::Rls) {
        state = rls_step(state, samples[i], lambda);
      } else {
        auto r = cmrls_step(state, memory, samples[i], cfg.cmrls);
        state = std::move(r.state);
        memory = std::move(r.memory);
        event = r.event;
      }
    } catch (const Error& e) {
      throw IdentificationFailure(i, e.what());
    }
    trace.push_back({samples[i].t, state.theta, state.kappa, event});
  }
  return trace;
}

}  // namespace cmrls
