#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "darkpool/dist_models.hpp"
#include "darkpool/km_estimator.hpp"
#include "darkpool/types.hpp"

namespace darkpool {

enum class PolicyKind { LearnerKM, LearnerParametric, Ideal, Uniform, Bandit };

/// learner-km, learner-parametric, ideal, uniform, bandit.
std::string_view policy_kind_name(PolicyKind kind);
/// Throws std::invalid_argument for unknown names.
PolicyKind parse_policy_kind(std::string_view name);

inline constexpr double kDefaultBanditAlpha = 1.05;

/// An allocation policy with its learned state.
///
/// The five kinds share decide/observe:
///   LearnerKM          greedy on optimistic Kaplan-Meier curves
///   LearnerParametric  greedy on censored-MLE fits, refit every few episodes
///   Ideal              greedy on the true venue tails
///   Uniform            equal split, remainder to the lowest indices
///   Bandit             split proportional to multiplicative weights
///
/// A Policy is owned and mutated by a single episode loop.
class Policy {
 public:
  /// `delta` is the run-wide confidence and is split evenly across venues.
  static Policy learner_km(std::size_t venues, Volume v_cap, double epsilon, double delta,
                           double explore_const = 128.0);
  static Policy learner_parametric(std::size_t venues, Volume v_cap,
                                   Family family = Family::ZbPowerLaw,
                                   std::size_t refit_every = 1);
  static Policy ideal(std::span<const VenueModel> venues, Volume v_cap);
  static Policy uniform(std::size_t venues);
  static Policy bandit(std::size_t venues, double alpha = kDefaultBanditAlpha);
  static Policy bandit(std::vector<double> weights, double alpha = kDefaultBanditAlpha);

  PolicyKind kind() const noexcept;
  std::size_t venues() const noexcept;

  Allocation decide(Volume total) const;

  /// Feeds back one fill per venue. Throws std::domain_error on a venue
  /// count mismatch.
  void observe(std::span<const CensoredSample> fills);

  /// The curves decide() allocates on. Throws UnsupportedOperationError for
  /// Uniform and Bandit.
  std::vector<TailCurve> current_tails() const;

  /// LearnerKM only.
  const std::vector<VenueCounters>& counters() const;
  std::vector<Volume> cutoffs() const;
  const ExplorationParams& venue_params() const;

  /// LearnerParametric only: full per-venue sample logs and latest fits
  /// (empty until a venue has a positive fill).
  const std::vector<std::vector<CensoredSample>>& observations() const;
  const std::vector<std::optional<FitResult>>& fits() const;

  /// Bandit only.
  const std::vector<double>& weights() const;
  double alpha() const;

 private:
  struct LearnerKmState {
    std::vector<VenueCounters> counters;
    ExplorationParams params;
    std::vector<TailCurve> curves;
  };
  struct LearnerParametricState {
    Family family;
    std::size_t refit_every;
    std::size_t observed = 0;
    Volume v_cap;
    std::vector<std::vector<CensoredSample>> observations;
    std::vector<CensoredHistogram> histograms;
    std::vector<std::optional<FitResult>> fits;
    std::vector<TailCurve> curves;
  };
  struct IdealState {
    std::vector<TailCurve> true_tails;
  };
  struct UniformState {
    std::size_t venues;
  };
  struct BanditState {
    std::vector<double> weights;
    double alpha;
  };
  using State =
      std::variant<LearnerKmState, LearnerParametricState, IdealState, UniformState, BanditState>;

  explicit Policy(State state) : state_(std::move(state)) {}

  template <typename T>
  const T& expect(std::string_view what) const;

  State state_;
};

/// Parameters for building a fresh Policy per trial.
struct PolicySpec {
  PolicyKind kind = PolicyKind::Uniform;
  /// Output label; defaults to the kind name.
  std::string name;
  /// LearnerKM. epsilon defaults to 0.1 * v_cap when unset.
  std::optional<double> epsilon;
  double delta = 0.05;
  double explore_const = 128.0;
  /// LearnerParametric.
  Family family = Family::ZbPowerLaw;
  std::size_t refit_every = 1;
  /// Bandit.
  double alpha = kDefaultBanditAlpha;

  std::string label() const { return name.empty() ? std::string(policy_kind_name(kind)) : name; }

  friend bool operator==(const PolicySpec&, const PolicySpec&) = default;
};

/// `venues` are the true models (used by Ideal); `v_cap` is the largest
/// volume the policy will be asked to allocate.
Policy make_policy(const PolicySpec& spec, std::span<const VenueModel> venues, Volume v_cap);

/// Largest-remainder apportionment of `total` proportional to `weights`;
/// leftover units go to the largest fractional parts, ties to the lowest index.
Allocation apportion(Volume total, std::span<const double> weights);

}  // namespace darkpool
