#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "darkpool/policies.hpp"
#include "darkpool/simulator.hpp"

namespace darkpool {

/// Version written on the first line of every CSV the harness emits.
inline constexpr int kCsvSchemaVersion = 1;

/// Malformed config or input data. Maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unreadable input or unwritable output. Maps to exit code 3.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum ExitCode : int { kExitOk = 0, kExitUsage = 2, kExitIo = 3 };

struct ExperimentConfig {
  SimConfig sim;
  std::vector<PolicySpec> policies;
  std::filesystem::path output_path = "out";
  ExperimentOptions options;
};

/// JSON config with sections "sim", "policies" and "output". Throws
/// ConfigError naming the line/column of a syntax error or the path of the
/// offending field.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json config_to_json(const ExperimentConfig& config);

nlohmann::json venue_to_json(const VenueModel& model);
VenueModel venue_from_json(const nlohmann::json& j);

/// One row of an observation log.
struct Observation {
  std::int64_t venue_id = 0;
  CensoredSample sample;

  friend bool operator==(const Observation&, const Observation&) = default;
};

/// CSV with header venue_id,submitted,consumed. An empty stream is an empty
/// log. Throws ConfigError with the line number of a malformed row.
std::vector<Observation> read_observations(std::istream& in);
std::vector<Observation> load_observations(const std::filesystem::path& path);
void write_observations(std::ostream& out, const std::vector<Observation>& rows);

/// Shortest round-trip decimal; "inf"/"-inf"/"nan" for non-finite values.
std::string format_number(double x);

/// Learning-curve CSV: schema line, then episode,mean,smoothed,stderr.
void write_curve_csv(std::ostream& out, const std::vector<CurvePoint>& points);

struct SimulateArgs {
  std::filesystem::path config;
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
};

struct FitArgs {
  std::filesystem::path data;
  std::string family;
  double split = 0.5;
  std::uint64_t seed = 0;
};

struct EstimateArgs {
  std::filesystem::path data;
  double epsilon = 1.0;
  double delta = 0.05;
  Volume vcap = 1;
  double explore_const = 128.0;
};

/// Runs every configured policy and writes <label>_<metric>.csv per policy
/// and metric plus summary.csv into the output directory. Returns the paths
/// written. Throws ConfigError or IoError.
std::vector<std::filesystem::path> cmd_simulate(const SimulateArgs& args);

/// Per venue: random train/test split, censored MLE on train, log-loss on
/// both. Writes a CSV report to `out`.
void cmd_fit(const FitArgs& args, std::ostream& out);

/// Per venue: Kaplan-Meier and optimistic curves, opportunity counts,
/// cutoff and concentration half-widths. Writes a CSV report to `out`.
void cmd_estimate(const EstimateArgs& args, std::ostream& out);

/// Runs the command-line front end on argv; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace darkpool
