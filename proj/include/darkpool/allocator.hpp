#pragma once

#include <span>

#include "darkpool/dist_models.hpp"
#include "darkpool/types.hpp"

namespace darkpool {

/// Greedy marginal allocation.
///
/// Hands out `total` units one at a time, each to the venue whose next unit
/// has the largest tail probability T_i(v_i + 1); ties go to the lowest venue
/// index. For nonincreasing tails the result maximizes
/// sum_i sum_{s=1}^{v_i} T_i(s), the expected number of units consumed.
///
/// Throws std::domain_error if any curve stores fewer than total + 1 entries.
Allocation greedy_allocate(Volume total, std::span<const TailCurve> tails);

/// sum_i sum_{s=1}^{v_i} T_i(s), accumulated by pairwise summation.
double expected_fill(const Allocation& alloc, std::span<const TailCurve> tails);

/// Exhaustive search over all compositions of `total` into K parts. Test
/// oracle only: refuses (std::domain_error) when total > 12 or K > 4.
Allocation brute_force_allocate(Volume total, std::span<const TailCurve> tails);

/// E[min(s, v)] for s drawn from the model, summed directly over the pmf.
/// Equals sum_{s=1}^{v} T(s). Throws std::domain_error for v > s_max.
double mean_min_fill(const VenueModel& model, Volume v);

}  // namespace darkpool
