#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "darkpool/random.hpp"
#include "darkpool/types.hpp"

namespace darkpool {

enum class Family { ZbUniform, ZbPowerLaw, ZbPoisson, ZbExponential, Nonparametric };

/// Canonical names: zb-uniform, zb-power-law, zb-poisson, zb-exponential, nonparametric.
std::string_view family_name(Family family);
/// Throws std::invalid_argument for unknown names.
Family parse_family(std::string_view name);

/// Lower bound applied to probabilities inside log-loss evaluation.
inline constexpr double kProbabilityFloor = 1e-12;

/// Discrete liquidity distribution on 0..s_max.
///
/// Parametric families put `zero_prob` on s = 0 (the zero bin) and spread the
/// rest over 1..s_max with a body shape that is normalized on that range:
///
///   uniform      body(s) ∝ 1
///   power law    body(s) ∝ s^-shape      (shape may be negative)
///   Poisson      body(s) ∝ shape^s / s!
///   exponential  body(s) ∝ exp(-shape * s)
///
/// The nonparametric family stores an explicit pmf. Instances are immutable;
/// the pmf and tail curve are computed once at construction.
class VenueModel {
 public:
  static VenueModel zb_uniform(double zero_prob, Volume s_max);
  static VenueModel zb_power_law(double zero_prob, double beta, Volume s_max);
  static VenueModel zb_poisson(double zero_prob, double rate, Volume s_max);
  static VenueModel zb_exponential(double zero_prob, double rate, Volume s_max);
  /// Dispatches on `family`; `shape` is ignored for ZbUniform and required otherwise.
  static VenueModel parametric(Family family, double zero_prob, std::optional<double> shape,
                               Volume s_max);
  /// `pmf` must be nonnegative and sum to 1 within 1e-6; sums off by more than
  /// 1e-12 are renormalized.
  static VenueModel nonparametric(std::vector<double> pmf);

  Family family() const noexcept { return family_; }
  double zero_prob() const noexcept { return pmf_[0]; }
  std::optional<double> shape() const noexcept { return shape_; }
  Volume s_max() const noexcept { return pmf_.size() - 1; }

  /// P(s). Throws std::domain_error for s > s_max.
  double pmf(Volume s) const;
  const std::vector<double>& pmf_values() const noexcept { return pmf_; }

  /// T(s) for s = 0..s_max+1, with T(0) = 1 and T(s_max+1) = 0.
  const TailCurve& tail() const noexcept { return tail_; }

  /// Inverse-CDF draw on the tail curve.
  Volume sample(RandomStream& rng) const;

 private:
  VenueModel(Family family, std::optional<double> shape, std::vector<double> pmf);

  Family family_;
  std::optional<double> shape_;
  std::vector<double> pmf_;
  TailCurve tail_;
};

inline TailCurve tail_curve(const VenueModel& model) { return model.tail(); }

/// Sufficient statistics of a censored sample set on 0..s_max.
///
/// direct[r] counts direct observations with consumed == r; censored[v] counts
/// censored observations at submitted == v. Samples with submitted == 0 carry
/// no information and are dropped.
class CensoredHistogram {
 public:
  explicit CensoredHistogram(Volume s_max);

  /// Throws std::domain_error for submitted > s_max or consumed > submitted.
  void add(const CensoredSample& sample);

  Volume s_max() const noexcept { return direct_.size() - 1; }
  const std::vector<std::uint64_t>& direct() const noexcept { return direct_; }
  const std::vector<std::uint64_t>& censored() const noexcept { return censored_; }
  std::uint64_t informative() const noexcept { return informative_; }
  std::uint64_t positive() const noexcept { return informative_ - direct_[0]; }

 private:
  std::vector<std::uint64_t> direct_;
  std::vector<std::uint64_t> censored_;
  std::uint64_t informative_ = 0;
};

struct FitResult {
  VenueModel model;
  /// Censored log-likelihood of the fitting data under `model`.
  double log_likelihood;
  /// Set when the likelihood has no interior maximizer: the body is
  /// unidentified (no positive observation) or the search hit a bound.
  bool degenerate = false;
  /// Number of informative samples used.
  std::uint64_t samples = 0;
};

/// Censored maximum-likelihood fit within `family`.
///
/// A direct sample with consumed r contributes log P(r); a censored sample at
/// v contributes log T(v). For zero-bin families the zero bin has a closed
/// form and the body shape is found by golden-section search. The
/// nonparametric family returns the Kaplan-Meier estimate as a pmf.
///
/// Throws InsufficientDataError when no sample has submitted > 0.
FitResult fit_mle(const CensoredHistogram& data, Family family);
/// `s_max` defaults to the largest submitted volume in `samples`.
FitResult fit_mle(std::span<const CensoredSample> samples, Family family,
                  std::optional<Volume> s_max = std::nullopt);

/// Censored log-likelihood contribution of one sample, with probabilities
/// below `floor` raised to `floor`. Volumes beyond s_max have probability 0.
double sample_log_likelihood(const VenueModel& model, const CensoredSample& sample,
                             double floor = 0.0);

/// Sum of sample_log_likelihood over the histogram, no floor.
double log_likelihood(const VenueModel& model, const CensoredHistogram& data);

/// Average negative log-likelihood per informative sample.
/// Throws InsufficientDataError when no sample has submitted > 0.
double log_loss(const VenueModel& model, std::span<const CensoredSample> samples,
                double floor = kProbabilityFloor);

}  // namespace darkpool
