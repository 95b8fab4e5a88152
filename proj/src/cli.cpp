#include <ostream>

#include "CLI11.hpp"
#include "darkpool/harness.hpp"

namespace darkpool {

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Censored multi-venue allocation: simulate, fit and estimate"};
  app.require_subcommand(1);

  SimulateArgs sim;
  std::string sim_out;
  std::uint64_t sim_seed = 0;
  auto* simulate = app.add_subcommand("simulate", "Run the experiments described by a config file");
  simulate->add_option("--config", sim.config, "JSON experiment config")->required();
  auto* out_opt = simulate->add_option("--out", sim_out, "Output directory (overrides config)");
  auto* seed_opt = simulate->add_option("--seed", sim_seed, "Master seed (overrides config)");

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a venue model per venue and report log-loss");
  fit_cmd->add_option("--data", fit.data, "Observation CSV: venue_id,submitted,consumed")->required();
  fit_cmd->add_option("--family", fit.family,
                      "zb-uniform | zb-power-law | zb-poisson | zb-exponential | nonparametric")
      ->required();
  fit_cmd->add_option("--split", fit.split, "Training fraction")->capture_default_str();
  fit_cmd->add_option("--seed", fit.seed, "Split seed")->capture_default_str();

  EstimateArgs est;
  auto* estimate = app.add_subcommand("estimate", "Optimistic Kaplan-Meier curves per venue");
  estimate->add_option("--data", est.data, "Observation CSV: venue_id,submitted,consumed")->required();
  estimate->add_option("--epsilon", est.epsilon, "Target accuracy")->required();
  estimate->add_option("--delta", est.delta, "Confidence parameter")->required();
  estimate->add_option("--vcap", est.vcap, "Maximum order volume")->required();
  estimate->add_option("--explore-const", est.explore_const, "Cutoff constant")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (simulate->parsed()) {
      if (out_opt->count() > 0) sim.out = sim_out;
      if (seed_opt->count() > 0) sim.seed = sim_seed;
      for (const auto& path : cmd_simulate(sim)) out << path.string() << '\n';
    } else if (fit_cmd->parsed()) {
      cmd_fit(fit, out);
    } else if (estimate->parsed()) {
      cmd_estimate(est, out);
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return 1;
  }
  return kExitOk;
}

}  // namespace darkpool
