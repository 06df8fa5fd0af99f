#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cmrls/ecm.hpp"
#include "cmrls/linalg.hpp"
#include "cmrls/sample.hpp"

namespace cmrls::regression {

/// For the 1RC model: d = V_t - V_{t-1},
/// phi = [V_{t-1} - V_{t-2}, I_t, I_{t-1}, I_{t-2}].
using RegressorSample = BasicSample<double, 4>;

struct Measurement {
  double t = 0.0;  // s
  double v = 0.0;  // V
  double i = 0.0;  // A
};

/// Holds the last three measurements and turns each new one into a regressor
/// sample. When `nominal_step` is positive, a spacing off by more than
/// `jitter` (relative) restarts the window at the new point.
class SampleWindow {
 public:
  explicit SampleWindow(double nominal_step = 0.0, double jitter = 0.01);

  /// Returns nothing until three points have been seen since the last restart.
  /// Throws NonMonotoneTime if t does not advance.
  std::optional<RegressorSample> push(double v, double i, double t);

  void reset() { count_ = 0; }
  std::size_t filled() const { return count_; }
  std::size_t restarts() const { return restarts_; }

 private:
  double nominal_step_;
  double jitter_;
  std::array<Measurement, 3> buf_{};  // buf_[0] newest
  std::size_t count_ = 0;
  std::size_t restarts_ = 0;
  std::optional<double> last_t_;
};

/// Every `factor`-th point of the trace, starting with the first. Point sampling,
/// no anti-alias filter. Throws InvalidFactor for factor < 1.
std::vector<Measurement> decimate(const ecm::SimTrace& trace, long factor);

/// Runs a stream through one window. With nominal_step > 0 gaps restart it.
std::vector<RegressorSample> build_samples(std::span<const Measurement> stream, double nominal_step = 0.0);

/// Puts an irregular log onto the nominal grid by linear interpolation. Spacing
/// up to (1 + jitter) * step is bridged; any larger gap starts a new segment.
std::vector<std::vector<Measurement>> regularize(std::span<const Measurement> raw, double step,
                                                 double jitter = 0.01);

/// Regressor samples of every segment, each through a fresh window.
std::vector<RegressorSample> samples_from_segments(const std::vector<std::vector<Measurement>>& segments);

/// Reads `time_s,current_a,voltage_v` (column order taken from the header, other
/// columns ignored, `#` lines skipped). Throws IoError.
std::vector<Measurement> read_measurements_csv(const std::string& path);

void write_measurements_csv(const std::string& path, std::span<const Measurement> rows);

}  // namespace cmrls::regression
