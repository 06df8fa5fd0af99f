// Command-line front end: gen-profile, simulate, identify, compare.
//
// Exit codes: 0 success, 1 numerical failure, 2 I/O or configuration error.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cmrls/error.hpp"
#include "cmrls/harness.hpp"

namespace {

using namespace cmrls;
using harness::ExperimentConfig;

ExperimentConfig load(const std::string& path, const std::optional<std::uint64_t>& seed, bool reseed_noise) {
  ExperimentConfig cfg = path.empty() ? ExperimentConfig{} : harness::load_config(path);
  if (seed) {
    cfg.profile_seed = *seed;
    if (reseed_noise) cfg.noise.seed = *seed + 1;
  }
  harness::validate(cfg);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Battery ECM simulation and online parameter identification"};
  app.require_subcommand(1);

  std::string config, out = ".", profile, trace, algo = "cmrls";
  std::optional<std::uint64_t> seed;

  const auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "Experiment config (JSON)")->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "Profile seed; compare also reseeds noise with seed + 1");
    sub->add_option("--out", out, "Output directory");
  };

  auto* gen = app.add_subcommand("gen-profile", "Generate a random pulse current profile");
  common(gen);
  auto* sim = app.add_subcommand("simulate", "Simulate the ECM over a profile");
  common(sim);
  sim->add_option("--profile", profile, "Profile CSV (time_s,current_a)")->required();
  auto* ident = app.add_subcommand("identify", "Identify parameters from a measured trace");
  common(ident);
  ident->add_option("--trace", trace, "Trace CSV (time_s,current_a,voltage_v)")->required();
  ident->add_option("--algo", algo, "rls or cmrls")->check(CLI::IsMember({"rls", "cmrls"}));
  auto* cmp = app.add_subcommand("compare", "Run the full pipeline for every configured estimator");
  common(cmp);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) {
      std::cout << harness::cmd_gen_profile(load(config, seed, false), out) << '\n';
    } else if (sim->parsed()) {
      std::cout << harness::cmd_simulate(load(config, seed, false), profile, out) << '\n';
    } else if (ident->parsed()) {
      const auto report = harness::cmd_identify(load(config, seed, false), trace, parse_algorithm(algo), out);
      std::cout << report["result"].dump(2) << '\n';
    } else if (cmp->parsed()) {
      const auto report = harness::cmd_compare(load(config, seed, true), out);
      for (const auto& w : report["warnings"]) std::cerr << "warning: " << w.get<std::string>() << '\n';
      if (report.contains("mae_ratio_rls_over_cmrls")) {
        std::cout << report["mae_ratio_rls_over_cmrls"].dump(2) << '\n';
      }
    }
  } catch (const IdentificationFailure& e) {
    std::cerr << "error: numerical failure at " << e.what() << '\n';
    return 1;
  } catch (const NumericalBreakdown& e) {
    std::cerr << "error: numerical failure: " << e.what() << '\n';
    return 1;
  } catch (const SingularMatrix& e) {
    std::cerr << "error: numerical failure: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
