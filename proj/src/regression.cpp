#include "cmrls/regression.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "cmrls/error.hpp"
#include "csv.hpp"

namespace cmrls::regression {

SampleWindow::SampleWindow(double nominal_step, double jitter)
    : nominal_step_(nominal_step), jitter_(jitter) {}

std::optional<RegressorSample> SampleWindow::push(double v, double i, double t) {
  if (last_t_ && !(t > *last_t_)) {
    throw NonMonotoneTime("time " + std::to_string(t) + " does not advance past " +
                          std::to_string(*last_t_));
  }
  if (count_ > 0 && nominal_step_ > 0.0 &&
      std::abs((t - buf_[0].t) - nominal_step_) > jitter_ * nominal_step_) {
    count_ = 0;
    ++restarts_;
  }
  last_t_ = t;
  buf_[2] = buf_[1];
  buf_[1] = buf_[0];
  buf_[0] = {t, v, i};
  if (count_ < 3) ++count_;
  if (count_ < 3) return std::nullopt;

  RegressorSample s;
  s.t = t;
  s.d = buf_[0].v - buf_[1].v;
  s.phi << buf_[1].v - buf_[2].v, buf_[0].i, buf_[1].i, buf_[2].i;
  return s;
}

std::vector<Measurement> decimate(const ecm::SimTrace& trace, long factor) {
  if (factor < 1) {
    throw InvalidFactor("decimation factor must be >= 1, got " + std::to_string(factor));
  }
  std::vector<Measurement> out;
  const auto f = static_cast<std::size_t>(factor);
  out.reserve(trace.size() / f + 1);
  for (std::size_t k = 0; k < trace.size(); k += f) {
    out.push_back({trace.time[k], trace.voltage[k], trace.current[k]});
  }
  return out;
}

std::vector<RegressorSample> build_samples(std::span<const Measurement> stream, double nominal_step) {
  SampleWindow window(nominal_step);
  std::vector<RegressorSample> out;
  out.reserve(stream.size());
  for (const auto& m : stream) {
    if (auto s = window.push(m.v, m.i, m.t)) out.push_back(*s);
  }
  return out;
}

std::vector<std::vector<Measurement>> regularize(std::span<const Measurement> raw, double step,
                                                 double jitter) {
  if (!(step > 0.0)) {
    throw InvalidConfig("nominal step must be > 0");
  }
  std::vector<std::vector<Measurement>> segments;
  if (raw.empty()) return segments;

  segments.push_back({raw[0]});
  double origin = raw[0].t;
  long next_k = 1;
  for (std::size_t j = 0; j + 1 < raw.size(); ++j) {
    const Measurement& a = raw[j];
    const Measurement& b = raw[j + 1];
    if (!(b.t > a.t)) {
      throw NonMonotoneTime("log row " + std::to_string(j + 1) + " does not advance in time");
    }
    if (b.t - a.t > (1.0 + jitter) * step) {
      segments.push_back({b});
      origin = b.t;
      next_k = 1;
      continue;
    }
    // Grid points inside (a.t, b.t]. Only where b closes its segment may a
    // point overshoot b.t (by the jitter tolerance), holding b's values.
    const bool closes = j + 2 == raw.size() || raw[j + 2].t - b.t > (1.0 + jitter) * step;
    const double limit = closes ? b.t + jitter * step : b.t;
    while (true) {
      const double tg = origin + static_cast<double>(next_k) * step;
      if (tg > limit) break;
      const double w = std::clamp((tg - a.t) / (b.t - a.t), 0.0, 1.0);
      segments.back().push_back({tg, a.v + w * (b.v - a.v), a.i + w * (b.i - a.i)});
      ++next_k;
    }
  }
  return segments;
}

std::vector<RegressorSample> samples_from_segments(const std::vector<std::vector<Measurement>>& segments) {
  std::vector<RegressorSample> out;
  for (const auto& seg : segments) {
    auto part = build_samples(seg);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

std::vector<Measurement> read_measurements_csv(const std::string& path) {
  const csv::Table table = csv::read(path);
  const int ct = table.column("time_s");
  const int ci = table.column("current_a");
  const int cv = table.column("voltage_v");
  if (ct < 0 || ci < 0 || cv < 0) {
    throw IoError("'" + path + "' needs columns time_s,current_a,voltage_v");
  }
  std::vector<Measurement> out;
  out.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    out.push_back({row[ct], row[cv], row[ci]});
  }
  return out;
}

void write_measurements_csv(const std::string& path, std::span<const Measurement> rows) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << "time_s,current_a,voltage_v\n";
  for (const auto& m : rows) {
    out << csv::format(m.t) << ',' << csv::format(m.i) << ',' << csv::format(m.v) << '\n';
  }
}

}  // namespace cmrls::regression
