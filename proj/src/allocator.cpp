#include "darkpool/allocator.hpp"

#include <algorithm>
#include <queue>
#include <string>
#include <utility>
#include <vector>

namespace darkpool {
namespace {

double pairwise_sum(std::span<const double> xs) {
  if (xs.size() <= 8) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  const std::size_t mid = xs.size() / 2;
  return pairwise_sum(xs.first(mid)) + pairwise_sum(xs.subspan(mid));
}

void enumerate(Volume remaining, std::size_t venue, std::vector<Volume>& current,
               std::span<const TailCurve> tails, double& best_value, std::vector<Volume>& best) {
  if (venue + 1 == current.size()) {
    current[venue] = remaining;
    const double value = expected_fill(Allocation(current), tails);
    if (best.empty() || value > best_value) {
      best_value = value;
      best = current;
    }
    return;
  }
  for (Volume take = 0; take <= remaining; ++take) {
    current[venue] = take;
    enumerate(remaining - take, venue + 1, current, tails, best_value, best);
  }
}

}  // namespace

Allocation greedy_allocate(Volume total, std::span<const TailCurve> tails) {
  const std::size_t k = tails.size();
  if (k == 0) throw std::domain_error("allocation needs at least one venue");
  for (std::size_t i = 0; i < k; ++i) {
    if (tails[i].size() < total + 1) {
      throw std::domain_error("tail curve " + std::to_string(i) + " covers " +
                              std::to_string(tails[i].size()) + " volumes, need " +
                              std::to_string(total + 1));
    }
  }
  std::vector<Volume> v(k, 0);
  // Max-heap on the next unit's tail, then on the lowest index.
  using Entry = std::pair<double, std::size_t>;
  auto worse = [](const Entry& a, const Entry& b) {
    if (a.first != b.first) return a.first < b.first;
    return a.second > b.second;
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(worse)> heap(worse);
  for (std::size_t i = 0; i < k; ++i) heap.emplace(tails[i].at(1), i);
  for (Volume unit = 0; unit < total; ++unit) {
    const std::size_t i = heap.top().second;
    heap.pop();
    ++v[i];
    heap.emplace(tails[i].at(v[i] + 1), i);
  }
  return Allocation(std::move(v));
}

double expected_fill(const Allocation& alloc, std::span<const TailCurve> tails) {
  if (alloc.venues() != tails.size()) {
    throw std::invalid_argument("allocation and tail curves differ in venue count");
  }
  std::vector<double> terms;
  terms.reserve(alloc.total);
  for (std::size_t i = 0; i < tails.size(); ++i) {
    for (Volume s = 1; s <= alloc[i]; ++s) terms.push_back(tails[i].at(s));
  }
  return pairwise_sum(terms);
}

double mean_min_fill(const VenueModel& model, Volume v) {
  if (v > model.s_max()) throw std::domain_error("volume exceeds the model support");
  const auto& pmf = model.pmf_values();
  std::vector<double> terms;
  terms.reserve(pmf.size());
  for (Volume s = 1; s < pmf.size(); ++s) terms.push_back(pmf[s] * static_cast<double>(std::min(s, v)));
  return pairwise_sum(terms);
}

Allocation brute_force_allocate(Volume total, std::span<const TailCurve> tails) {
  if (total > 12 || tails.size() > 4) {
    throw std::domain_error("brute-force allocation is limited to total <= 12 and K <= 4");
  }
  if (tails.empty()) throw std::domain_error("allocation needs at least one venue");
  std::vector<Volume> current(tails.size(), 0);
  std::vector<Volume> best;
  double best_value = 0.0;
  enumerate(total, 0, current, tails, best_value, best);
  return Allocation(std::move(best));
}

}  // namespace darkpool
