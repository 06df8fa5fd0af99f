#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "cmrls/ecm.hpp"
#include "cmrls/estimators.hpp"
#include "cmrls/recovery.hpp"
#include "cmrls/regression.hpp"

namespace cmrls::harness {

using Json = nlohmann::ordered_json;

enum class NoiseKind { None, Gaussian, Uniform };

/// Additive, zero-mean sensor noise on the estimator-rate measurements. For the
/// uniform kind sigma is still the standard deviation (half-width sigma*sqrt(3)).
struct NoiseConfig {
  NoiseKind kind = NoiseKind::Gaussian;
  double sigma_v = 1e-3;  // V
  double sigma_i = 1e-2;  // A
  std::uint64_t seed = 7;
};

struct ExperimentConfig {
  std::string name = "default";
  ecm::EcmParams ecm;
  double soc0 = 0.5;
  ecm::PulseConfig pulse;  // step/align are overwritten from the two steps below
  std::uint64_t profile_seed = 42;
  NoiseConfig noise;
  double sim_step = 0.01;        // s
  double estimator_step = 10.0;  // s
  std::vector<Algorithm> estimators = {Algorithm::Rls, Algorithm::Cmrls};
  CmrlsConfig cmrls;
  InitConfig<double, 4> init;
  double burn_in_fraction = 0.1;
  std::string known = "none";  // "cap" or "beta1" splits beta1/Cap in reports
  std::string ocv_table;       // optional soc,ocv_v CSV, simulation only
};

/// Missing keys keep their defaults; unknown keys are rejected. Throws
/// InvalidConfig.
ExperimentConfig config_from_json(const Json& j);
Json to_json(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::string& path);

/// Throws InvalidConfig on inconsistent settings, e.g. an estimator step that is
/// not an integer multiple of the simulation step.
void validate(const ExperimentConfig& cfg);
long decimation_factor(const ExperimentConfig& cfg);

/// Piecewise-linear OCV curve, clamped at both ends.
class OcvTable {
 public:
  OcvTable(std::vector<double> soc, std::vector<double> ocv);
  static OcvTable load(const std::string& path);
  double operator()(double soc) const;

 private:
  std::vector<double> soc_;
  std::vector<double> ocv_;
};

ecm::CurrentProfile make_profile(const ExperimentConfig& cfg);

/// Simulates the profile; with an OCV table the linear OCV term is swapped for
/// the tabulated one.
ecm::SimTrace run_simulation(const ExperimentConfig& cfg, const ecm::CurrentProfile& profile);

using Segments = std::vector<std::vector<regression::Measurement>>;

/// Adds configured sensor noise in place, drawing from one generator across all
/// segments in order.
void add_noise(Segments& segments, const NoiseConfig& noise);

/// Puts a (time, V, I) stream on the estimator grid. Uniformly oversampled data
/// (e.g. a simulated trace) is decimated by index; anything else is regularised,
/// which splits it at gaps.
Segments to_estimator_grid(const ExperimentConfig& cfg, std::span<const regression::Measurement> raw);

/// Decimated estimator-rate measurements of a simulated trace with noise added.
Segments measure(const ExperimentConfig& cfg, const ecm::SimTrace& trace);

struct KappaStats {
  double max = 0.0;
  double final = 0.0;
  double fraction_above_c_upper = 0.0;
};

struct AlgorithmRun {
  Algorithm algorithm = Algorithm::Cmrls;
  IdentTrace<double, 4> trace;
  std::vector<recovery::PhysicalEstimate> estimates;
  std::optional<recovery::MaeReport> mae;  // empty when nothing survives burn-in
  KappaStats kappa;
  std::size_t normal = 0, memorized = 0, restored = 0, degraded = 0;
  double seconds_per_step = 0.0;
};

AlgorithmRun run_algorithm(const ExperimentConfig& cfg, std::span<const regression::RegressorSample> samples,
                           Algorithm algorithm);

/// Report of one algorithm run. Contains no timing so that identical inputs give
/// byte-identical reports.
Json algorithm_report(const ExperimentConfig& cfg, const AlgorithmRun& run);

std::vector<std::string> soc_warnings(const ecm::SimTrace& trace);

void write_profile_csv(const std::string& path, const ecm::CurrentProfile& profile, const Json& echo);
ecm::CurrentProfile read_profile_csv(const std::string& path);
void write_trace_csv(const std::string& path, const ecm::SimTrace& trace, const Json& echo);
void write_ident_csv(const std::string& path, const IdentTrace<double, 4>& trace);

/// Parameter-vs-time plot data: time_s,estimate,true,valid.
void write_param_csv(const std::string& path, const AlgorithmRun& run, std::size_t field, double truth);

// CLI subcommand bodies. Each writes into out_dir (created if missing) and
// returns the JSON report where one is produced.
std::string cmd_gen_profile(const ExperimentConfig& cfg, const std::string& out_dir);
std::string cmd_simulate(const ExperimentConfig& cfg, const std::string& profile_path, const std::string& out_dir);
Json cmd_identify(const ExperimentConfig& cfg, const std::string& trace_path, Algorithm algorithm,
                  const std::string& out_dir);
Json cmd_compare(const ExperimentConfig& cfg, const std::string& out_dir);

}  // namespace cmrls::harness
