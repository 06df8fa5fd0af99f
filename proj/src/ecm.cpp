#include "cmrls/ecm.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "cmrls/error.hpp"

namespace cmrls::ecm {

namespace {

bool positive(double x) { return std::isfinite(x) && x > 0.0; }

void require(bool ok, const char* what) {
  if (!ok) {
    throw InvalidConfig(std::string("pulse config: ") + what);
  }
}

// Number of `grid` units covering a draw x from [lo, hi]; the result stays in range.
long quantize(double x, double lo, double hi, double grid, long min_units) {
  const long lo_units = std::max(min_units, static_cast<long>(std::ceil(lo / grid - 1e-9)));
  const long hi_units = static_cast<long>(std::floor(hi / grid + 1e-9));
  if (hi_units < lo_units) {
    throw InvalidConfig("pulse config: range [" + std::to_string(lo) + ", " + std::to_string(hi) +
                        "] holds no multiple of the alignment grid");
  }
  return std::clamp(std::lround(x / grid), lo_units, hi_units);
}

}  // namespace

void validate(const EcmParams& p) {
  if (!positive(p.r0) || !positive(p.r1) || !positive(p.c1) || !positive(p.cap)) {
    throw InvalidParams("r0, r1, c1 and cap must be finite and > 0");
  }
  if (!positive(p.beta1)) {
    throw InvalidParams("beta1 must be finite and > 0");
  }
  if (!std::isfinite(p.beta2)) {
    throw InvalidParams("beta2 must be finite");
  }
}

DiscreteModel discretize(const EcmParams& params, double dt) {
  validate(params);
  if (!std::isfinite(dt) || dt < 0.0) {
    throw InvalidParams("timestep must be finite and >= 0");
  }
  const double decay = std::exp(-dt / params.tau());
  DiscreteModel m;
  m.a_d << decay, 0.0, 0.0, 1.0;
  // -expm1 keeps R1 (1 - e^{-dt/tau}) accurate for dt << tau.
  m.b_d << -params.r1 * std::expm1(-dt / params.tau()), dt / params.cap;
  m.c_d << 1.0, params.beta1;
  m.d_d = params.r0;
  m.beta2 = params.beta2;
  m.dt = dt;
  return m;
}

StepResult step(const DiscreteModel& model, const EcmState& state, double current) {
  const Eigen::Vector2d x(state.v1, state.soc);
  const double voltage = model.c_d.dot(x) + model.d_d * current + model.beta2;
  const Eigen::Vector2d next = model.a_d * x + model.b_d * current;
  return {{next(0), next(1)}, voltage};
}

CurrentProfile make_profile(std::vector<double> current, double dt, double t0) {
  CurrentProfile p;
  p.dt = dt;
  p.time.resize(current.size());
  for (std::size_t k = 0; k < current.size(); ++k) {
    p.time[k] = t0 + static_cast<double>(k) * dt;
  }
  p.current = std::move(current);
  return p;
}

SimTrace simulate(const EcmParams& params, const CurrentProfile& profile, const EcmState& initial) {
  const DiscreteModel model = discretize(params, profile.dt);
  SimTrace trace;
  const std::size_t n = profile.size();
  trace.time = profile.time;
  trace.current = profile.current;
  trace.voltage.resize(n);
  trace.soc.resize(n);
  trace.v1.resize(n);
  EcmState state = initial;
  for (std::size_t k = 0; k < n; ++k) {
    trace.soc[k] = state.soc;
    trace.v1[k] = state.v1;
    const StepResult r = step(model, state, profile.current[k]);
    trace.voltage[k] = r.voltage;
    state = r.next;
  }
  return trace;
}

SignMode parse_sign_mode(const std::string& s) {
  if (s == "alternating") return SignMode::Alternating;
  if (s == "random") return SignMode::Random;
  if (s == "fixed") return SignMode::Fixed;
  throw InvalidConfig("unknown sign_mode '" + s + "'");
}

std::string to_string(SignMode mode) {
  switch (mode) {
    case SignMode::Alternating:
      return "alternating";
    case SignMode::Random:
      return "random";
    case SignMode::Fixed:
      return "fixed";
  }
  return "fixed";
}

void validate(const PulseConfig& c) {
  const double fields[] = {c.amp_min, c.amp_max, c.hold_min, c.hold_max, c.rest_min, c.rest_max,
                           c.duration, c.step, c.align, c.long_rest_every, c.long_rest_duration};
  for (double f : fields) {
    require(std::isfinite(f) && f >= 0.0, "fields must be finite and non-negative");
  }
  require(c.amp_max >= c.amp_min, "amp_max < amp_min");
  require(c.hold_max >= c.hold_min && c.hold_max > 0.0, "empty hold range");
  require(c.rest_max >= c.rest_min, "rest_max < rest_min");
  require(c.duration > 0.0, "duration must be > 0");
  require(c.step > 0.0, "step must be > 0");
  if (c.align > 0.0) {
    const double ratio = c.align / c.step;
    require(ratio >= 1.0 - 1e-9 && std::abs(ratio - std::round(ratio)) < 1e-6,
            "align must be an integer multiple of step");
  }
  require((c.long_rest_every > 0.0) == (c.long_rest_duration > 0.0),
          "long_rest_every and long_rest_duration must be set together");
}

CurrentProfile gen_random_pulse(const PulseConfig& cfg, std::uint64_t seed) {
  validate(cfg);
  const double grid = cfg.align > 0.0 ? cfg.align : cfg.step;
  const auto steps_per_grid = static_cast<std::size_t>(std::llround(grid / cfg.step));
  const auto n = static_cast<std::size_t>(std::llround(cfg.duration / cfg.step)) + 1;
  const std::size_t grid_cells = (n + steps_per_grid - 1) / steps_per_grid;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto draw = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  // Current per grid cell; cells not written stay at rest.
  std::vector<double> cells(grid_cells, 0.0);
  std::size_t cell = 0;
  double sign = -1.0;
  double since_long_rest = 0.0;
  const long long_rest_units =
      cfg.long_rest_duration > 0.0
          ? quantize(cfg.long_rest_duration, cfg.long_rest_duration, cfg.long_rest_duration, grid, 1)
          : 0;
  while (cell < grid_cells) {
    if (long_rest_units > 0 && since_long_rest >= cfg.long_rest_every) {
      cell += static_cast<std::size_t>(long_rest_units);
      since_long_rest = 0.0;
      continue;
    }
    const double amp = draw(cfg.amp_min, cfg.amp_max);
    switch (cfg.sign_mode) {
      case SignMode::Alternating:
        sign = -sign;
        break;
      case SignMode::Random:
        sign = unit(rng) < 0.5 ? -1.0 : 1.0;
        break;
      case SignMode::Fixed:
        sign = 1.0;
        break;
    }
    const long hold = quantize(draw(cfg.hold_min, cfg.hold_max), cfg.hold_min, cfg.hold_max, grid, 1);
    for (long u = 0; u < hold && cell < grid_cells; ++u) {
      cells[cell++] = sign * amp;
    }
    since_long_rest += static_cast<double>(hold) * grid;
    if (cfg.rest_max > 0.0) {
      const long rest = quantize(draw(cfg.rest_min, cfg.rest_max), cfg.rest_min, cfg.rest_max, grid, 0);
      cell += static_cast<std::size_t>(rest);
      since_long_rest += static_cast<double>(rest) * grid;
    }
  }

  std::vector<double> current(n);
  for (std::size_t k = 0; k < n; ++k) {
    current[k] = cells[k / steps_per_grid];
  }
  return make_profile(std::move(current), cfg.step);
}

Vec4 theta_from_params(const EcmParams& p, double dt) {
  validate(p);
  if (!std::isfinite(dt) || dt <= 0.0) {
    throw InvalidParams("timestep must be finite and > 0");
  }
  const double a2 = std::exp(-dt / p.tau());
  const double u = -p.r1 * std::expm1(-dt / p.tau());  // R1 (1 - a2) without cancellation
  const double w = p.beta1 * dt / p.cap;
  const double a3 = p.r0;
  const double a4 = u + w - p.r0 * a2 - p.r0;
  const double a5 = -u - a2 * w + p.r0 * a2;
  return Vec4(a2, a3, a4, a5);
}

}  // namespace cmrls::ecm
