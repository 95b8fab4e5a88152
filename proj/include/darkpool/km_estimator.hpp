#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "darkpool/types.hpp"

namespace darkpool {

/// Kaplan-Meier counts for one venue on volumes 0..s_max.
///
///   d[s]  number of direct observations of exactly s units
///         (consumed == s, submitted > s)
///   n[s]  number of opportunities for such an observation
///         (consumed >= s, submitted > s)
///
/// n is nonincreasing in s and d[s] <= n[s].
class VenueCounters {
 public:
  explicit VenueCounters(Volume s_max);

  /// Rebuilds counters from stored arrays. Throws std::invalid_argument when
  /// the arrays differ in length or break an invariant.
  static VenueCounters from_arrays(std::vector<std::uint64_t> d, std::vector<std::uint64_t> n,
                                   std::uint64_t total_obs);

  /// Throws std::domain_error for submitted > s_max or consumed > submitted.
  void ingest(const CensoredSample& sample);

  Volume s_max() const noexcept { return d_.size() - 1; }
  const std::vector<std::uint64_t>& d() const noexcept { return d_; }
  const std::vector<std::uint64_t>& n() const noexcept { return n_; }
  std::uint64_t total_obs() const noexcept { return total_obs_; }

  friend bool operator==(const VenueCounters&, const VenueCounters&) = default;

 private:
  std::vector<std::uint64_t> d_;
  std::vector<std::uint64_t> n_;
  std::uint64_t total_obs_ = 0;
};

/// Kaplan-Meier tail estimate on 0..s_max+1:
///   T(s) = prod_{s' < s} (1 - d[s'] / n[s']),  with the factor 1 when n[s'] = 0.
/// The last entry is 0: liquidity beyond the counted range is not modelled.
TailCurve km_tail(const VenueCounters& counters);

/// Parameters of the confidence cutoff and optimistic modification.
struct ExplorationParams {
  double epsilon = 1.0;
  double delta = 0.05;
  Volume v_cap = 1;
  double explore_const = 128.0;

  /// Throws std::invalid_argument when a parameter is out of range.
  void validate() const;
};

/// Opportunity count needed at n[s-1] to certify volume s:
///   explore_const * (s * v_cap / epsilon)^2 * ln(2 * v_cap / delta).
double cutoff_threshold(Volume s, const ExplorationParams& params);

/// Largest s in 0..v_cap with s == 0 or n[s-1] >= cutoff_threshold(s).
Volume cutoff(const VenueCounters& counters, const ExplorationParams& params);

/// km_tail with T(c+1) raised to T(c) when the cutoff c is below v_cap.
/// The returned curve records c. Requires v_cap <= s_max.
TailCurve optimistic_km(const VenueCounters& counters, const ExplorationParams& params);

/// Concentration half-width s * sqrt(2 ln(2 v_cap / delta) / n[s-1]) for
/// s >= 1, 0 for s == 0, and +inf when n[s-1] == 0.
double km_half_width(const VenueCounters& counters, Volume s, Volume v_cap, double delta);

/// Checkpoint file: JSON object {"schema_version": 1, "venues": [{"venue_id",
/// "total_obs", "d", "n"}, ...]}. Venue ids are the positions in `venues`.
void write_checkpoint(std::ostream& out, std::span<const VenueCounters> venues);
/// Throws std::invalid_argument on malformed input.
std::vector<VenueCounters> read_checkpoint(std::istream& in);

}  // namespace darkpool
