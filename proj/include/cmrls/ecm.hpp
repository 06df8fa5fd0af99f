#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "cmrls/linalg.hpp"

namespace cmrls::ecm {

/// Physical parameters of the 1RC equivalent circuit with a linear OCV curve,
/// OCV(soc) = beta1 * soc + beta2. Positive current charges the cell.
struct EcmParams {
  double r0 = 6.193e-3;  // ohm
  double r1 = 4.613e-1;  // ohm
  double c1 = 2.029e4;   // farad
  double cap = 8280.0;   // ampere-seconds
  double beta1 = 0.7;    // volt per unit SOC
  double beta2 = 3.4;    // volt

  double tau() const { return r1 * c1; }
  double ocv(double soc) const { return beta1 * soc + beta2; }
};

/// Throws InvalidParams unless every resistance, capacitance, the capacity and
/// the OCV slope are finite and strictly positive.
void validate(const EcmParams& params);

struct EcmState {
  double v1 = 0.0;
  double soc = 0.5;
};

/// Exact zero-order-hold discretisation of the circuit for one timestep.
struct DiscreteModel {
  Eigen::Matrix2d a_d;
  Eigen::Vector2d b_d;
  Eigen::RowVector2d c_d;
  double d_d = 0.0;
  double beta2 = 0.0;  // carried so step() can emit terminal voltage
  double dt = 0.0;
};

DiscreteModel discretize(const EcmParams& params, double dt);

struct StepResult {
  EcmState next;
  double voltage;  // terminal voltage at the start of the step
};

/// Emits V_t = C x_t + D u_t + beta2 and advances x_{t+1} = A_d x_t + B_d u_t.
StepResult step(const DiscreteModel& model, const EcmState& state, double current);

struct CurrentProfile {
  double dt = 0.0;  // uniform spacing of samples
  std::vector<double> time;
  std::vector<double> current;

  std::size_t size() const { return time.size(); }
};

/// Builds a profile with uniform spacing starting at t0 from per-sample currents.
CurrentProfile make_profile(std::vector<double> current, double dt, double t0 = 0.0);

struct SimTrace {
  std::vector<double> time;
  std::vector<double> current;
  std::vector<double> voltage;
  std::vector<double> soc;
  std::vector<double> v1;

  std::size_t size() const { return time.size(); }
};

/// Folds step() over the profile. Sample k of the trace holds the state reached
/// after k steps and the voltage under the k-th current sample.
SimTrace simulate(const EcmParams& params, const CurrentProfile& profile, const EcmState& initial);

enum class SignMode { Alternating, Random, Fixed };

SignMode parse_sign_mode(const std::string& s);
std::string to_string(SignMode mode);

/// Random piecewise-constant pulse train. Durations are quantised to multiples of
/// `align` (or of `step` when align is zero) so that segment edges fall on the
/// estimator grid. Optional long rests are spliced in every `long_rest_every`
/// seconds.
struct PulseConfig {
  double amp_min = 0.5;      // A
  double amp_max = 3.0;      // A
  double hold_min = 10.0;    // s
  double hold_max = 600.0;   // s
  double rest_min = 0.0;     // s
  double rest_max = 0.0;     // s
  SignMode sign_mode = SignMode::Alternating;
  double duration = 3600.0;  // s
  double step = 0.01;        // s, fine simulation step
  double align = 10.0;       // s, 0 disables alignment
  double long_rest_every = 0.0;     // s of pulsing between long rests, 0 disables
  double long_rest_duration = 0.0;  // s
};

void validate(const PulseConfig& cfg);

CurrentProfile gen_random_pulse(const PulseConfig& cfg, std::uint64_t seed);

/// Regression coefficients [a2, a3, a4, a5] of the differenced ARX form of the
/// discretised circuit; a1 = -a2 - 1 is implied.
Vec4 theta_from_params(const EcmParams& params, double dt);

}  // namespace cmrls::ecm
