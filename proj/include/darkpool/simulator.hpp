#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "darkpool/dist_models.hpp"
#include "darkpool/policies.hpp"
#include "darkpool/random.hpp"
#include "darkpool/types.hpp"

namespace darkpool {

/// Per-episode order volume: a constant V or a distribution on 1..V_max.
class VolumeSource {
 public:
  static VolumeSource constant(Volume volume);
  /// probs[i] is the probability of volume i + 1.
  static VolumeSource distribution(std::vector<double> probs);

  bool is_constant() const noexcept { return !model_.has_value(); }
  Volume max() const noexcept { return max_; }
  /// Probabilities of volumes 1..max (empty for constant sources).
  std::vector<double> probabilities() const;

  Volume draw(RandomStream& rng) const;

  friend bool operator==(const VolumeSource& a, const VolumeSource& b) {
    return a.max_ == b.max_ && a.probabilities() == b.probabilities();
  }

 private:
  VolumeSource(Volume max, std::optional<VenueModel> model) : max_(max), model_(std::move(model)) {}

  Volume max_;
  std::optional<VenueModel> model_;
};

struct SimConfig {
  std::vector<VenueModel> venues;
  VolumeSource volume = VolumeSource::constant(1);
  std::size_t episodes = 1;
  std::size_t trials = 1;
  std::uint64_t seed = 0;
  std::size_t half_life_cap = 1000;

  /// Throws std::invalid_argument when K, episodes, trials or the cap is zero.
  void validate() const;
};

struct EpisodeRecord {
  std::size_t episode = 0;
  Allocation allocation;
  std::vector<Volume> fills;
  double filled_fraction = 0.0;
};

/// Draws latent liquidity s_i for every venue (whether or not it receives
/// units) and reports (v_i, min(v_i, s_i)).
std::vector<CensoredSample> step(std::span<const VenueModel> venues, const Allocation& alloc,
                                 RandomStream& rng);

/// Draws V, then decide, step, observe.
EpisodeRecord run_episode(const SimConfig& config, Policy& policy, RandomStream& rng,
                          std::size_t episode = 0);

/// Steps of repeated resubmission of the unfilled remainder until more than
/// half of `total` has filled; nullopt if half_life_cap steps do not suffice.
/// The policy is not updated during the resubmissions.
std::optional<std::size_t> order_half_life(const SimConfig& config, const Policy& policy,
                                           Volume total, RandomStream& rng);

struct ExperimentOptions {
  bool filled_fraction = true;
  bool half_life = false;
  /// Half-life is measured after every `half_life_interval` episodes.
  std::size_t half_life_interval = 10;
  /// Retention factor of the exponential moving average.
  double smoothing = 0.99;
  /// Episodes at the end of the run summarized per trial.
  std::size_t final_window = 50;
  /// 0 picks the hardware concurrency.
  unsigned threads = 0;
};

struct CurvePoint {
  std::size_t episode;  // 1-based
  double mean;
  double smoothed;
  double std_error;
};

/// Mean of per-trial averages over the final window, and its standard error.
struct WindowSummary {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t points = 0;
};

struct ExperimentResult {
  std::string policy;
  std::vector<CurvePoint> filled_fraction;
  WindowSummary filled_fraction_final;
  /// Infinite half-lives are stored as +inf.
  std::vector<CurvePoint> half_life;
  WindowSummary half_life_final;
};

/// Runs `trials` independent replicates of `episodes` episodes. Trial t uses
/// streams derived from (seed, t) only, so output does not depend on thread
/// count or trial order.
ExperimentResult run_experiment(const SimConfig& config, const PolicySpec& spec,
                                const ExperimentOptions& options = {});

}  // namespace darkpool
