#include "darkpool/km_estimator.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

namespace darkpool {

VenueCounters::VenueCounters(Volume s_max) : d_(s_max + 1, 0), n_(s_max + 1, 0) {}

VenueCounters VenueCounters::from_arrays(std::vector<std::uint64_t> d,
                                         std::vector<std::uint64_t> n,
                                         std::uint64_t total_obs) {
  if (d.empty() || d.size() != n.size()) {
    throw std::invalid_argument("counter arrays must be nonempty and of equal length");
  }
  for (std::size_t s = 0; s < d.size(); ++s) {
    if (d[s] > n[s]) {
      throw std::invalid_argument("d[" + std::to_string(s) + "] exceeds n[" +
                                  std::to_string(s) + "]");
    }
    if (s > 0 && n[s] > n[s - 1]) {
      throw std::invalid_argument("n is not nonincreasing at s = " + std::to_string(s));
    }
  }
  if (n[0] > total_obs) throw std::invalid_argument("n[0] exceeds total_obs");
  VenueCounters out(d.size() - 1);
  out.d_ = std::move(d);
  out.n_ = std::move(n);
  out.total_obs_ = total_obs;
  return out;
}

void VenueCounters::ingest(const CensoredSample& sample) {
  sample.validate();
  if (sample.submitted > s_max()) {
    throw std::domain_error("submitted volume " + std::to_string(sample.submitted) +
                            " exceeds counter range " + std::to_string(s_max()));
  }
  ++total_obs_;
  if (sample.submitted == 0) return;
  // n[s] counts s with consumed >= s and submitted > s.
  const Volume last = sample.direct() ? sample.consumed : sample.submitted - 1;
  for (Volume s = 0; s <= last; ++s) ++n_[s];
  if (sample.direct()) ++d_[sample.consumed];
}

TailCurve km_tail(const VenueCounters& counters) {
  const auto& d = counters.d();
  const auto& n = counters.n();
  const Volume s_max = counters.s_max();
  TailCurve curve;
  curve.t.assign(s_max + 2, 0.0);
  curve.t[0] = 1.0;
  // Between censoring points n[s+1] = n[s] - d[s], so the product of
  // (n - d) / n factors telescopes to one ratio against the run's first n.
  // Evaluating it that way keeps uncensored data exactly on the empirical
  // survival function.
  double run_base = 1.0;
  Volume run_start = 0;
  for (Volume s = 1; s <= s_max; ++s) {
    const Volume prev = s - 1;
    if (n[prev] == 0) {
      curve.t[s] = curve.t[prev];
      continue;
    }
    const std::uint64_t survivors = n[prev] - d[prev];
    curve.t[s] = run_base * (static_cast<double>(survivors) / static_cast<double>(n[run_start]));
    if (survivors != n[s]) {
      run_base = curve.t[s];
      run_start = s;
    }
  }
  return curve;
}

void ExplorationParams::validate() const {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
  if (v_cap < 1) throw std::invalid_argument("v_cap must be at least 1");
  if (!(explore_const > 0.0)) throw std::invalid_argument("explore_const must be positive");
}

double cutoff_threshold(Volume s, const ExplorationParams& params) {
  const double scaled = static_cast<double>(s) * static_cast<double>(params.v_cap) / params.epsilon;
  return params.explore_const * scaled * scaled *
         std::log(2.0 * static_cast<double>(params.v_cap) / params.delta);
}

Volume cutoff(const VenueCounters& counters, const ExplorationParams& params) {
  params.validate();
  const auto& n = counters.n();
  Volume c = 0;
  for (Volume s = 1; s <= params.v_cap; ++s) {
    const std::uint64_t opportunities = s - 1 < n.size() ? n[s - 1] : 0;
    if (static_cast<double>(opportunities) >= cutoff_threshold(s, params)) c = s;
  }
  return c;
}

TailCurve optimistic_km(const VenueCounters& counters, const ExplorationParams& params) {
  if (params.v_cap > counters.s_max()) {
    throw std::domain_error("v_cap exceeds the counter range");
  }
  TailCurve curve = km_tail(counters);
  const Volume c = cutoff(counters, params);
  if (c < params.v_cap) curve.t[c + 1] = curve.t[c];
  curve.cutoff = c;
  return curve;
}

double km_half_width(const VenueCounters& counters, Volume s, Volume v_cap, double delta) {
  if (s == 0) return 0.0;
  const auto& n = counters.n();
  const std::uint64_t opportunities = s - 1 < n.size() ? n[s - 1] : 0;
  if (opportunities == 0) return std::numeric_limits<double>::infinity();
  return static_cast<double>(s) *
         std::sqrt(2.0 * std::log(2.0 * static_cast<double>(v_cap) / delta) /
                   static_cast<double>(opportunities));
}

void write_checkpoint(std::ostream& out, std::span<const VenueCounters> venues) {
  nlohmann::json doc;
  doc["schema_version"] = 1;
  doc["venues"] = nlohmann::json::array();
  for (std::size_t i = 0; i < venues.size(); ++i) {
    doc["venues"].push_back({{"venue_id", i},
                             {"total_obs", venues[i].total_obs()},
                             {"d", venues[i].d()},
                             {"n", venues[i].n()}});
  }
  out << doc.dump(1) << '\n';
}

std::vector<VenueCounters> read_checkpoint(std::istream& in) {
  nlohmann::json doc;
  try {
    in >> doc;
    if (doc.at("schema_version").get<int>() != 1) {
      throw std::invalid_argument("unsupported checkpoint schema version");
    }
    const auto& entries = doc.at("venues");
    std::vector<VenueCounters> venues;
    venues.reserve(entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const auto& entry = entries[i];
      if (entry.at("venue_id").get<std::size_t>() != i) {
        throw std::invalid_argument("checkpoint venues must be listed in id order");
      }
      venues.push_back(VenueCounters::from_arrays(entry.at("d").get<std::vector<std::uint64_t>>(),
                                                  entry.at("n").get<std::vector<std::uint64_t>>(),
                                                  entry.at("total_obs").get<std::uint64_t>()));
    }
    return venues;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed checkpoint: ") + e.what());
  }
}

}  // namespace darkpool
