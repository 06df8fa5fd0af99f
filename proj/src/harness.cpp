#include "cmrls/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "cmrls/error.hpp"
#include "csv.hpp"

namespace cmrls::harness {

namespace fs = std::filesystem;
using regression::Measurement;

namespace {

void check_keys(const Json& obj, const char* section, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) {
    throw InvalidConfig(std::string(section) + " must be an object");
  }
  const std::set<std::string> names(allowed.begin(), allowed.end());
  for (const auto& [key, _] : obj.items()) {
    if (!names.count(key)) {
      throw InvalidConfig(std::string("unknown key '") + key + "' in " + section);
    }
  }
}

template <typename T>
void read(const Json& obj, const char* key, T& out) {
  const auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    out = it->template get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidConfig(std::string("bad value for '") + key + "': " + e.what());
  }
}

NoiseKind parse_noise_kind(const std::string& s) {
  if (s == "none") return NoiseKind::None;
  if (s == "gaussian") return NoiseKind::Gaussian;
  if (s == "uniform") return NoiseKind::Uniform;
  throw InvalidConfig("unknown noise kind '" + s + "'");
}

std::string to_string(NoiseKind k) {
  switch (k) {
    case NoiseKind::None:
      return "none";
    case NoiseKind::Gaussian:
      return "gaussian";
    case NoiseKind::Uniform:
      return "uniform";
  }
  return "none";
}

MemoryPolicy parse_memory(const std::string& s) {
  if (s == "latest") return MemoryPolicy::Latest;
  if (s == "best") return MemoryPolicy::BestConditioned;
  throw InvalidConfig("unknown cmrls.memory '" + s + "' (expected latest or best)");
}

Json nullable(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  return out;
}

void write_echo(std::ostream& out, const Json& echo) {
  std::istringstream lines(echo.dump(2));
  std::string line;
  while (std::getline(lines, line)) out << "# " << line << '\n';
}

void write_json(const std::string& path, const Json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

std::string join(const std::string& dir, const std::string& file) { return (fs::path(dir) / file).string(); }

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir + "': " + ec.message());
}

}  // namespace

ExperimentConfig config_from_json(const Json& j) {
  ExperimentConfig c;
  check_keys(j, "config", {"name", "ecm", "soc0", "pulse", "profile_seed", "noise", "sim_step", "estimator_step",
                           "estimators", "cmrls", "init", "burn_in_fraction", "known", "ocv_table", "notes"});
  read(j, "name", c.name);
  if (j.contains("ecm")) {
    const Json& e = j["ecm"];
    check_keys(e, "ecm", {"r0", "r1", "c1", "cap", "beta1", "beta2"});
    read(e, "r0", c.ecm.r0);
    read(e, "r1", c.ecm.r1);
    read(e, "c1", c.ecm.c1);
    read(e, "cap", c.ecm.cap);
    read(e, "beta1", c.ecm.beta1);
    read(e, "beta2", c.ecm.beta2);
  }
  read(j, "soc0", c.soc0);
  if (j.contains("pulse")) {
    const Json& p = j["pulse"];
    check_keys(p, "pulse", {"amp_min", "amp_max", "hold_min", "hold_max", "rest_min", "rest_max", "sign_mode",
                            "duration", "long_rest_every", "long_rest_duration"});
    read(p, "amp_min", c.pulse.amp_min);
    read(p, "amp_max", c.pulse.amp_max);
    read(p, "hold_min", c.pulse.hold_min);
    read(p, "hold_max", c.pulse.hold_max);
    read(p, "rest_min", c.pulse.rest_min);
    read(p, "rest_max", c.pulse.rest_max);
    std::string mode = ecm::to_string(c.pulse.sign_mode);
    read(p, "sign_mode", mode);
    c.pulse.sign_mode = ecm::parse_sign_mode(mode);
    read(p, "duration", c.pulse.duration);
    read(p, "long_rest_every", c.pulse.long_rest_every);
    read(p, "long_rest_duration", c.pulse.long_rest_duration);
  }
  read(j, "profile_seed", c.profile_seed);
  if (j.contains("noise")) {
    const Json& n = j["noise"];
    check_keys(n, "noise", {"kind", "sigma_v", "sigma_i", "seed"});
    std::string kind = to_string(c.noise.kind);
    read(n, "kind", kind);
    c.noise.kind = parse_noise_kind(kind);
    read(n, "sigma_v", c.noise.sigma_v);
    read(n, "sigma_i", c.noise.sigma_i);
    read(n, "seed", c.noise.seed);
  }
  read(j, "sim_step", c.sim_step);
  read(j, "estimator_step", c.estimator_step);
  if (j.contains("estimators")) {
    std::vector<std::string> names;
    read(j, "estimators", names);
    c.estimators.clear();
    for (const auto& n : names) c.estimators.push_back(parse_algorithm(n));
  }
  if (j.contains("cmrls")) {
    const Json& m = j["cmrls"];
    check_keys(m, "cmrls", {"c_rem", "c_upper", "lambda_for", "lambda_rem", "restore_hold_steps", "memory"});
    read(m, "c_rem", c.cmrls.c_rem);
    read(m, "c_upper", c.cmrls.c_upper);
    read(m, "lambda_for", c.cmrls.lambda_for);
    read(m, "lambda_rem", c.cmrls.lambda_rem);
    read(m, "restore_hold_steps", c.cmrls.restore_hold_steps);
    std::string memory = c.cmrls.memory == MemoryPolicy::Latest ? "latest" : "best";
    read(m, "memory", memory);
    c.cmrls.memory = parse_memory(memory);
  }
  if (j.contains("init")) {
    const Json& i = j["init"];
    check_keys(i, "init", {"p0_scale", "theta0"});
    read(i, "p0_scale", c.init.p0_scale);
    if (i.contains("theta0")) {
      std::vector<double> t0;
      read(i, "theta0", t0);
      if (t0.size() != 4) throw InvalidConfig("init.theta0 needs 4 entries");
      c.init.theta0 = Vec4(t0[0], t0[1], t0[2], t0[3]);
    }
  }
  read(j, "burn_in_fraction", c.burn_in_fraction);
  read(j, "known", c.known);
  read(j, "ocv_table", c.ocv_table);
  validate(c);
  return c;
}

Json to_json(const ExperimentConfig& c) {
  Json j;
  j["name"] = c.name;
  j["ecm"] = {{"r0", c.ecm.r0}, {"r1", c.ecm.r1}, {"c1", c.ecm.c1},
              {"cap", c.ecm.cap}, {"beta1", c.ecm.beta1}, {"beta2", c.ecm.beta2}};
  j["soc0"] = c.soc0;
  j["pulse"] = {{"amp_min", c.pulse.amp_min},
                {"amp_max", c.pulse.amp_max},
                {"hold_min", c.pulse.hold_min},
                {"hold_max", c.pulse.hold_max},
                {"rest_min", c.pulse.rest_min},
                {"rest_max", c.pulse.rest_max},
                {"sign_mode", ecm::to_string(c.pulse.sign_mode)},
                {"duration", c.pulse.duration},
                {"long_rest_every", c.pulse.long_rest_every},
                {"long_rest_duration", c.pulse.long_rest_duration}};
  j["profile_seed"] = c.profile_seed;
  j["noise"] = {{"kind", to_string(c.noise.kind)},
                {"sigma_v", c.noise.sigma_v},
                {"sigma_i", c.noise.sigma_i},
                {"seed", c.noise.seed}};
  j["sim_step"] = c.sim_step;
  j["estimator_step"] = c.estimator_step;
  Json algos = Json::array();
  for (auto a : c.estimators) algos.push_back(to_string(a));
  j["estimators"] = algos;
  j["cmrls"] = {{"c_rem", c.cmrls.c_rem},
                {"c_upper", c.cmrls.c_upper},
                {"lambda_for", c.cmrls.lambda_for},
                {"lambda_rem", c.cmrls.lambda_rem},
                {"restore_hold_steps", c.cmrls.restore_hold_steps},
                {"memory", c.cmrls.memory == MemoryPolicy::Latest ? "latest" : "best"}};
  j["init"] = {{"p0_scale", c.init.p0_scale},
               {"theta0", {c.init.theta0(0), c.init.theta0(1), c.init.theta0(2), c.init.theta0(3)}}};
  j["burn_in_fraction"] = c.burn_in_fraction;
  j["known"] = c.known;
  j["ocv_table"] = c.ocv_table;
  return j;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  Json j;
  try {
    j = Json::parse(in, nullptr, true, true);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidConfig("config '" + path + "': " + e.what());
  }
  return config_from_json(j);
}

long decimation_factor(const ExperimentConfig& c) {
  if (!(c.sim_step > 0.0) || !(c.estimator_step > 0.0)) {
    throw InvalidConfig("sim_step and estimator_step must be > 0");
  }
  const double ratio = c.estimator_step / c.sim_step;
  const long factor = std::lround(ratio);
  if (factor < 1 || std::abs(ratio - static_cast<double>(factor)) > 1e-6 * ratio) {
    throw InvalidConfig("estimator_step must be an integer multiple of sim_step");
  }
  return factor;
}

void validate(const ExperimentConfig& c) {
  ecm::validate(c.ecm);
  decimation_factor(c);
  ecm::PulseConfig pulse = c.pulse;
  pulse.step = c.sim_step;
  pulse.align = c.estimator_step;
  ecm::validate(pulse);
  validate(c.cmrls);
  validate(c.init);
  if (!std::isfinite(c.soc0)) throw InvalidConfig("soc0 must be finite");
  if (!(c.noise.sigma_v >= 0.0) || !(c.noise.sigma_i >= 0.0)) {
    throw InvalidConfig("noise sigmas must be >= 0");
  }
  if (!(c.burn_in_fraction >= 0.0 && c.burn_in_fraction < 1.0)) {
    throw InvalidConfig("burn_in_fraction must lie in [0, 1)");
  }
  if (c.known != "none" && c.known != "cap" && c.known != "beta1") {
    throw InvalidConfig("known must be none, cap or beta1");
  }
  if (c.estimators.empty()) throw InvalidConfig("estimators must not be empty");
}

OcvTable::OcvTable(std::vector<double> soc, std::vector<double> ocv) : soc_(std::move(soc)), ocv_(std::move(ocv)) {
  if (soc_.size() < 2 || soc_.size() != ocv_.size()) {
    throw InvalidConfig("OCV table needs at least two (soc, ocv) rows");
  }
  for (std::size_t k = 1; k < soc_.size(); ++k) {
    if (!(soc_[k] > soc_[k - 1])) throw InvalidConfig("OCV table soc must be strictly increasing");
  }
}

OcvTable OcvTable::load(const std::string& path) {
  const csv::Table t = csv::read(path);
  const int cs = t.column("soc");
  const int co = t.column("ocv_v");
  if (cs < 0 || co < 0) throw IoError("'" + path + "' needs columns soc,ocv_v");
  std::vector<double> soc, ocv;
  for (const auto& row : t.rows) {
    soc.push_back(row[cs]);
    ocv.push_back(row[co]);
  }
  return OcvTable(std::move(soc), std::move(ocv));
}

double OcvTable::operator()(double soc) const {
  if (soc <= soc_.front()) return ocv_.front();
  if (soc >= soc_.back()) return ocv_.back();
  const auto hi = static_cast<std::size_t>(std::upper_bound(soc_.begin(), soc_.end(), soc) - soc_.begin());
  const std::size_t lo = hi - 1;
  const double w = (soc - soc_[lo]) / (soc_[hi] - soc_[lo]);
  return ocv_[lo] + w * (ocv_[hi] - ocv_[lo]);
}

ecm::CurrentProfile make_profile(const ExperimentConfig& cfg) {
  ecm::PulseConfig pulse = cfg.pulse;
  pulse.step = cfg.sim_step;
  pulse.align = cfg.estimator_step;
  return ecm::gen_random_pulse(pulse, cfg.profile_seed);
}

ecm::SimTrace run_simulation(const ExperimentConfig& cfg, const ecm::CurrentProfile& profile) {
  ecm::SimTrace trace = ecm::simulate(cfg.ecm, profile, {0.0, cfg.soc0});
  if (!cfg.ocv_table.empty()) {
    const OcvTable table = OcvTable::load(cfg.ocv_table);
    for (std::size_t k = 0; k < trace.size(); ++k) {
      trace.voltage[k] += table(trace.soc[k]) - cfg.ecm.ocv(trace.soc[k]);
    }
  }
  return trace;
}

void add_noise(Segments& segments, const NoiseConfig& noise) {
  if (noise.kind == NoiseKind::None) return;
  std::mt19937_64 rng(noise.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> flat(-std::sqrt(3.0), std::sqrt(3.0));
  const auto draw = [&] { return noise.kind == NoiseKind::Gaussian ? gauss(rng) : flat(rng); };
  for (auto& seg : segments) {
    for (auto& m : seg) {
      m.v += noise.sigma_v * draw();
      m.i += noise.sigma_i * draw();
    }
  }
}

Segments to_estimator_grid(const ExperimentConfig& cfg, std::span<const Measurement> raw) {
  if (raw.size() < 2) return {std::vector<Measurement>(raw.begin(), raw.end())};
  std::vector<double> gaps(raw.size() - 1);
  for (std::size_t k = 0; k + 1 < raw.size(); ++k) gaps[k] = raw[k + 1].t - raw[k].t;
  std::nth_element(gaps.begin(), gaps.begin() + gaps.size() / 2, gaps.end());
  const double spacing = gaps[gaps.size() / 2];

  const double ratio = cfg.estimator_step / spacing;
  const long factor = std::lround(ratio);
  const bool uniform = std::all_of(raw.begin() + 1, raw.end(), [&, prev = raw[0].t](const Measurement& m) mutable {
    const bool ok = std::abs((m.t - prev) - spacing) <= 1e-6 * spacing;
    prev = m.t;
    return ok;
  });
  if (uniform && factor > 1 && std::abs(ratio - static_cast<double>(factor)) <= 1e-6 * ratio) {
    std::vector<Measurement> out;
    for (std::size_t k = 0; k < raw.size(); k += static_cast<std::size_t>(factor)) out.push_back(raw[k]);
    return {std::move(out)};
  }
  return regression::regularize(raw, cfg.estimator_step);
}

Segments measure(const ExperimentConfig& cfg, const ecm::SimTrace& trace) {
  Segments segs{regression::decimate(trace, decimation_factor(cfg))};
  add_noise(segs, cfg.noise);
  return segs;
}

AlgorithmRun run_algorithm(const ExperimentConfig& cfg, std::span<const regression::RegressorSample> samples,
                           Algorithm algorithm) {
  AlgorithmRun run;
  run.algorithm = algorithm;
  IdentConfig<double, 4> ident{algorithm, cfg.cmrls, cfg.init};
  const auto start = std::chrono::steady_clock::now();
  run.trace = run_identification(samples, ident);
  const auto stop = std::chrono::steady_clock::now();
  if (!samples.empty()) {
    run.seconds_per_step =
        std::chrono::duration<double>(stop - start).count() / static_cast<double>(samples.size());
  }

  run.estimates.reserve(run.trace.size());
  std::size_t above = 0;
  for (const auto& r : run.trace) {
    run.estimates.push_back(recovery::params_from_theta(r.theta, cfg.estimator_step));
    run.kappa.max = std::max(run.kappa.max, r.kappa);
    if (r.kappa > cfg.cmrls.c_upper) ++above;
    switch (r.event.kind) {
      case StepKind::Restored:
        ++run.restored;
        break;
      case StepKind::Degraded:
        ++run.degraded;
        break;
      case StepKind::Normal:
        ++run.normal;
        break;
    }
    if (r.event.memorized) ++run.memorized;
  }
  if (!run.trace.empty()) {
    run.kappa.final = run.trace.back().kappa;
    run.kappa.fraction_above_c_upper = static_cast<double>(above) / static_cast<double>(run.trace.size());
    try {
      run.mae = recovery::mean_abs_error(run.estimates, cfg.ecm, cfg.burn_in_fraction);
    } catch (const EmptySeries&) {
      run.mae.reset();
    }
  }
  return run;
}

Json algorithm_report(const ExperimentConfig& cfg, const AlgorithmRun& run) {
  Json j;
  j["algo"] = to_string(run.algorithm);
  j["samples"] = run.trace.size();
  Json params = Json::object();
  if (run.mae) {
    j["burn_in"] = run.mae->burn_in;
    for (std::size_t f = 0; f < recovery::kFieldNames.size(); ++f) {
      const auto& s = run.mae->fields[f];
      params[recovery::kFieldNames[f]] = {{"true", s.truth},
                                          {"mean", nullable(s.mean)},
                                          {"mae", nullable(s.mae)},
                                          {"valid_fraction", s.valid_fraction}};
    }
    const auto& ratio = run.mae->fields[4];
    if (cfg.known == "cap") {
      params["beta1_from_ratio"] = {{"true", cfg.ecm.beta1}, {"mean", nullable(ratio.mean * cfg.ecm.cap)}};
    } else if (cfg.known == "beta1") {
      params["cap_from_ratio"] = {{"true", cfg.ecm.cap}, {"mean", nullable(cfg.ecm.beta1 / ratio.mean)}};
    }
  }
  j["parameters"] = params;
  j["kappa"] = {{"max", run.kappa.max},
                {"final", run.kappa.final},
                {"fraction_above_c_upper", run.kappa.fraction_above_c_upper},
                {"exceeded_c_upper", run.kappa.max > cfg.cmrls.c_upper}};
  j["events"] = {{"normal", run.normal},
                 {"memorized", run.memorized},
                 {"restored", run.restored},
                 {"degraded", run.degraded}};
  return j;
}

std::vector<std::string> soc_warnings(const ecm::SimTrace& trace) {
  if (trace.soc.empty()) return {};
  const auto [lo, hi] = std::minmax_element(trace.soc.begin(), trace.soc.end());
  if (*lo >= 0.05 && *hi <= 0.95) return {};
  return {"soc left [0.05, 0.95]: min " + csv::format(*lo) + ", max " + csv::format(*hi)};
}

void write_profile_csv(const std::string& path, const ecm::CurrentProfile& profile, const Json& echo) {
  auto out = open_out(path);
  write_echo(out, echo);
  out << "time_s,current_a\n";
  for (std::size_t k = 0; k < profile.size(); ++k) {
    out << csv::format(profile.time[k]) << ',' << csv::format(profile.current[k]) << '\n';
  }
}

ecm::CurrentProfile read_profile_csv(const std::string& path) {
  const csv::Table t = csv::read(path);
  const int ct = t.column("time_s");
  const int ci = t.column("current_a");
  if (ct < 0 || ci < 0) throw IoError("'" + path + "' needs columns time_s,current_a");
  if (t.rows.size() < 2) throw InvalidConfig("profile needs at least two rows");
  const double t0 = t.rows[0][ct];
  const double dt = (t.rows.back()[ct] - t0) / static_cast<double>(t.rows.size() - 1);
  std::vector<double> current;
  current.reserve(t.rows.size());
  for (std::size_t k = 0; k < t.rows.size(); ++k) {
    const double expected = t0 + static_cast<double>(k) * dt;
    if (std::abs(t.rows[k][ct] - expected) > 1e-6 * dt) {
      throw InvalidConfig("profile time stamps are not uniformly spaced at row " + std::to_string(k));
    }
    current.push_back(t.rows[k][ci]);
  }
  return ecm::make_profile(std::move(current), dt, t0);
}

void write_trace_csv(const std::string& path, const ecm::SimTrace& trace, const Json& echo) {
  auto out = open_out(path);
  write_echo(out, echo);
  out << "time_s,current_a,voltage_v,soc,v1\n";
  for (std::size_t k = 0; k < trace.size(); ++k) {
    out << csv::format(trace.time[k]) << ',' << csv::format(trace.current[k]) << ','
        << csv::format(trace.voltage[k]) << ',' << csv::format(trace.soc[k]) << ',' << csv::format(trace.v1[k])
        << '\n';
  }
}

void write_ident_csv(const std::string& path, const IdentTrace<double, 4>& trace) {
  auto out = open_out(path);
  out << "time_s,a2,a3,a4,a5,kappa,event\n";
  for (const auto& r : trace) {
    out << csv::format(r.t);
    for (int i = 0; i < 4; ++i) out << ',' << csv::format(r.theta(i));
    out << ',' << csv::format(r.kappa) << ',' << to_string(r.event) << '\n';
  }
}

void write_param_csv(const std::string& path, const AlgorithmRun& run, std::size_t field, double truth) {
  auto out = open_out(path);
  out << "time_s,estimate,true,valid\n";
  for (std::size_t k = 0; k < run.trace.size(); ++k) {
    const auto& v = recovery::field(run.estimates[k], field);
    out << csv::format(run.trace[k].t) << ',' << (std::isfinite(v.value) ? csv::format(v.value) : "nan") << ','
        << csv::format(truth) << ',' << (v.valid() ? 1 : 0) << '\n';
  }
}

std::string cmd_gen_profile(const ExperimentConfig& cfg, const std::string& out_dir) {
  ensure_dir(out_dir);
  const auto profile = make_profile(cfg);
  const std::string path = join(out_dir, "profile.csv");
  write_profile_csv(path, profile, to_json(cfg));
  return path;
}

std::string cmd_simulate(const ExperimentConfig& cfg, const std::string& profile_path, const std::string& out_dir) {
  const auto profile = read_profile_csv(profile_path);
  ensure_dir(out_dir);
  const auto trace = run_simulation(cfg, profile);
  const std::string path = join(out_dir, "trace.csv");
  write_trace_csv(path, trace, to_json(cfg));
  return path;
}

Json cmd_identify(const ExperimentConfig& cfg, const std::string& trace_path, Algorithm algorithm,
                  const std::string& out_dir) {
  const auto raw = regression::read_measurements_csv(trace_path);
  Segments segs = to_estimator_grid(cfg, raw);
  add_noise(segs, cfg.noise);
  const auto samples = regression::samples_from_segments(segs);
  const AlgorithmRun run = run_algorithm(cfg, samples, algorithm);

  ensure_dir(out_dir);
  const std::string name = to_string(algorithm);
  write_ident_csv(join(out_dir, name + "_ident.csv"), run.trace);
  Json report;
  report["config"] = to_json(cfg);
  report["seeds"] = {{"noise", cfg.noise.seed}};
  report["input"] = trace_path;
  report["result"] = algorithm_report(cfg, run);
  write_json(join(out_dir, name + "_report.json"), report);
  return report;
}

Json cmd_compare(const ExperimentConfig& cfg, const std::string& out_dir) {
  ensure_dir(out_dir);
  const auto profile = make_profile(cfg);
  const auto trace = run_simulation(cfg, profile);
  const auto samples = regression::samples_from_segments(measure(cfg, trace));

  Json report;
  report["config"] = to_json(cfg);
  report["seeds"] = {{"profile", cfg.profile_seed}, {"noise", cfg.noise.seed}};
  Json warnings = Json::array();
  for (const auto& w : soc_warnings(trace)) warnings.push_back(w);
  report["warnings"] = warnings;

  Json timing;
  Json algos = Json::object();
  std::vector<AlgorithmRun> runs;
  for (Algorithm a : cfg.estimators) {
    runs.push_back(run_algorithm(cfg, samples, a));
    const AlgorithmRun& run = runs.back();
    const std::string name = to_string(a);
    algos[name] = algorithm_report(cfg, run);
    timing[name] = {{"seconds_per_step", run.seconds_per_step}, {"samples", run.trace.size()}};
    write_ident_csv(join(out_dir, name + "_ident.csv"), run.trace);
    const std::array<double, 5> truths = {cfg.ecm.r0, cfg.ecm.tau(), cfg.ecm.r1, cfg.ecm.c1,
                                          cfg.ecm.beta1 / cfg.ecm.cap};
    for (std::size_t f = 0; f < recovery::kFieldNames.size(); ++f) {
      write_param_csv(join(out_dir, name + "_" + recovery::kFieldNames[f] + ".csv"), run, f, truths[f]);
    }
  }
  report["algorithms"] = algos;

  const auto find = [&](Algorithm a) -> const AlgorithmRun* {
    for (const auto& r : runs)
      if (r.algorithm == a && r.mae) return &r;
    return nullptr;
  };
  if (const auto *rls = find(Algorithm::Rls), *cm = find(Algorithm::Cmrls); rls && cm) {
    Json ratio = Json::object();
    for (std::size_t f = 0; f < recovery::kFieldNames.size(); ++f) {
      ratio[recovery::kFieldNames[f]] = nullable(rls->mae->fields[f].mae / cm->mae->fields[f].mae);
    }
    report["mae_ratio_rls_over_cmrls"] = ratio;
  }
  write_json(join(out_dir, "report.json"), report);
  write_json(join(out_dir, "timing.json"), timing);
  return report;
}

}  // namespace cmrls::harness
