#include "darkpool/policies.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "darkpool/allocator.hpp"

namespace darkpool {
namespace {

constexpr double kWeightCeiling = 1e100;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

// The curve every learner starts from: all ones up to v_cap.
TailCurve optimistic_start(Volume v_cap) {
  TailCurve curve = km_tail(VenueCounters(v_cap));
  curve.cutoff = 0;
  return curve;
}

void check_venues(std::size_t venues) {
  if (venues == 0) throw std::invalid_argument("a policy needs at least one venue");
}

}  // namespace

std::string_view policy_kind_name(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::LearnerKM: return "learner-km";
    case PolicyKind::LearnerParametric: return "learner-parametric";
    case PolicyKind::Ideal: return "ideal";
    case PolicyKind::Uniform: return "uniform";
    case PolicyKind::Bandit: return "bandit";
  }
  return "unknown";
}

PolicyKind parse_policy_kind(std::string_view name) {
  for (PolicyKind k : {PolicyKind::LearnerKM, PolicyKind::LearnerParametric, PolicyKind::Ideal,
                       PolicyKind::Uniform, PolicyKind::Bandit}) {
    if (policy_kind_name(k) == name) return k;
  }
  throw std::invalid_argument("unknown policy kind '" + std::string(name) + "'");
}

Allocation apportion(Volume total, std::span<const double> weights) {
  const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<Volume> v(weights.size(), 0);
  std::vector<double> remainder(weights.size(), 0.0);
  Volume assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double quota = static_cast<double>(total) * (weights[i] / sum);
    const double whole = std::floor(quota);
    v[i] = static_cast<Volume>(whole);
    remainder[i] = quota - whole;
    assigned += v[i];
  }
  // Rounding can only leave a shortfall; guard against an overshoot anyway.
  while (assigned > total) {
    const auto it = std::max_element(v.begin(), v.end());
    --*it;
    --assigned;
  }
  std::vector<std::size_t> order(weights.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t j = 0; assigned < total; j = (j + 1) % order.size()) {
    ++v[order[j]];
    ++assigned;
  }
  return Allocation(std::move(v));
}

Policy Policy::learner_km(std::size_t venues, Volume v_cap, double epsilon, double delta,
                          double explore_const) {
  check_venues(venues);
  LearnerKmState state;
  state.params = ExplorationParams{epsilon, delta / static_cast<double>(venues), v_cap,
                                   explore_const};
  state.params.validate();
  state.counters.assign(venues, VenueCounters(v_cap));
  for (const auto& c : state.counters) state.curves.push_back(optimistic_km(c, state.params));
  return Policy(std::move(state));
}

Policy Policy::learner_parametric(std::size_t venues, Volume v_cap, Family family,
                                  std::size_t refit_every) {
  check_venues(venues);
  if (v_cap < 1) throw std::invalid_argument("v_cap must be at least 1");
  if (refit_every < 1) throw std::invalid_argument("refit_every must be at least 1");
  LearnerParametricState state{family, refit_every, 0, v_cap, {}, {}, {}, {}};
  state.observations.resize(venues);
  state.histograms.assign(venues, CensoredHistogram(v_cap));
  state.fits.resize(venues);
  state.curves.assign(venues, optimistic_start(v_cap));
  return Policy(std::move(state));
}

Policy Policy::ideal(std::span<const VenueModel> venues, Volume v_cap) {
  check_venues(venues.size());
  IdealState state;
  for (const auto& model : venues) state.true_tails.push_back(model.tail().padded(v_cap + 2));
  return Policy(std::move(state));
}

Policy Policy::uniform(std::size_t venues) {
  check_venues(venues);
  return Policy(UniformState{venues});
}

Policy Policy::bandit(std::size_t venues, double alpha) {
  return bandit(std::vector<double>(venues, 1.0), alpha);
}

Policy Policy::bandit(std::vector<double> weights, double alpha) {
  check_venues(weights.size());
  if (!(alpha > 1.0)) throw std::invalid_argument("bandit alpha must exceed 1");
  for (double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w)) throw std::invalid_argument("weights must be positive");
  }
  return Policy(BanditState{std::move(weights), alpha});
}

PolicyKind Policy::kind() const noexcept {
  return std::visit(Overloaded{
                        [](const LearnerKmState&) { return PolicyKind::LearnerKM; },
                        [](const LearnerParametricState&) { return PolicyKind::LearnerParametric; },
                        [](const IdealState&) { return PolicyKind::Ideal; },
                        [](const UniformState&) { return PolicyKind::Uniform; },
                        [](const BanditState&) { return PolicyKind::Bandit; },
                    },
                    state_);
}

std::size_t Policy::venues() const noexcept {
  return std::visit(Overloaded{
                        [](const LearnerKmState& s) { return s.counters.size(); },
                        [](const LearnerParametricState& s) { return s.curves.size(); },
                        [](const IdealState& s) { return s.true_tails.size(); },
                        [](const UniformState& s) { return s.venues; },
                        [](const BanditState& s) { return s.weights.size(); },
                    },
                    state_);
}

Allocation Policy::decide(Volume total) const {
  return std::visit(Overloaded{
                        [&](const LearnerKmState& s) { return greedy_allocate(total, s.curves); },
                        [&](const LearnerParametricState& s) {
                          return greedy_allocate(total, s.curves);
                        },
                        [&](const IdealState& s) { return greedy_allocate(total, s.true_tails); },
                        [&](const UniformState& s) {
                          std::vector<Volume> v(s.venues, total / s.venues);
                          for (std::size_t i = 0; i < total % s.venues; ++i) ++v[i];
                          return Allocation(std::move(v));
                        },
                        [&](const BanditState& s) { return apportion(total, s.weights); },
                    },
                    state_);
}

void Policy::observe(std::span<const CensoredSample> fills) {
  if (fills.size() != venues()) {
    throw std::domain_error("expected " + std::to_string(venues()) + " fills, got " +
                            std::to_string(fills.size()));
  }
  for (const auto& f : fills) f.validate();
  std::visit(Overloaded{
                 [&](LearnerKmState& s) {
                   for (std::size_t i = 0; i < fills.size(); ++i) {
                     s.counters[i].ingest(fills[i]);
                     if (fills[i].submitted > 0) s.curves[i] = optimistic_km(s.counters[i], s.params);
                   }
                 },
                 [&](LearnerParametricState& s) {
                   for (std::size_t i = 0; i < fills.size(); ++i) {
                     s.histograms[i].add(fills[i]);
                     s.observations[i].push_back(fills[i]);
                   }
                   if (++s.observed % s.refit_every != 0) return;
                   for (std::size_t i = 0; i < fills.size(); ++i) {
                     // Until a venue shows a positive fill its body is
                     // unidentified; keep the optimistic start curve.
                     if (s.histograms[i].positive() == 0) continue;
                     s.fits[i] = fit_mle(s.histograms[i], s.family);
                     s.curves[i] = s.fits[i]->model.tail().padded(s.v_cap + 2);
                   }
                 },
                 [](IdealState&) {},
                 [](UniformState&) {},
                 [&](BanditState& s) {
                   for (std::size_t i = 0; i < fills.size(); ++i) {
                     if (fills[i].consumed > 0) s.weights[i] *= s.alpha;
                   }
                   const double top = *std::max_element(s.weights.begin(), s.weights.end());
                   if (top > kWeightCeiling) {
                     for (double& w : s.weights) w /= top;
                   }
                 },
             },
             state_);
}

std::vector<TailCurve> Policy::current_tails() const {
  return std::visit(Overloaded{
                        [](const LearnerKmState& s) { return s.curves; },
                        [](const LearnerParametricState& s) { return s.curves; },
                        [](const IdealState& s) { return s.true_tails; },
                        [](const UniformState&) -> std::vector<TailCurve> {
                          throw UnsupportedOperationError("uniform policy has no tail curves");
                        },
                        [](const BanditState&) -> std::vector<TailCurve> {
                          throw UnsupportedOperationError("bandit policy has no tail curves");
                        },
                    },
                    state_);
}

template <typename T>
const T& Policy::expect(std::string_view what) const {
  if (const T* s = std::get_if<T>(&state_)) return *s;
  throw UnsupportedOperationError(std::string(what) + " is not available for " +
                                  std::string(policy_kind_name(kind())) + " policies");
}

const std::vector<VenueCounters>& Policy::counters() const {
  return expect<LearnerKmState>("counters").counters;
}

std::vector<Volume> Policy::cutoffs() const {
  const auto& s = expect<LearnerKmState>("cutoffs");
  std::vector<Volume> out;
  for (const auto& curve : s.curves) out.push_back(curve.cutoff.value_or(0));
  return out;
}

const ExplorationParams& Policy::venue_params() const {
  return expect<LearnerKmState>("venue_params").params;
}

const std::vector<std::vector<CensoredSample>>& Policy::observations() const {
  return expect<LearnerParametricState>("observations").observations;
}

const std::vector<std::optional<FitResult>>& Policy::fits() const {
  return expect<LearnerParametricState>("fits").fits;
}

const std::vector<double>& Policy::weights() const { return expect<BanditState>("weights").weights; }

double Policy::alpha() const { return expect<BanditState>("alpha").alpha; }

Policy make_policy(const PolicySpec& spec, std::span<const VenueModel> venues, Volume v_cap) {
  const std::size_t k = venues.size();
  switch (spec.kind) {
    case PolicyKind::LearnerKM:
      return Policy::learner_km(k, v_cap, spec.epsilon.value_or(0.1 * static_cast<double>(v_cap)),
                                spec.delta, spec.explore_const);
    case PolicyKind::LearnerParametric:
      return Policy::learner_parametric(k, v_cap, spec.family, spec.refit_every);
    case PolicyKind::Ideal:
      return Policy::ideal(venues, v_cap);
    case PolicyKind::Uniform:
      return Policy::uniform(k);
    case PolicyKind::Bandit:
      return Policy::bandit(k, spec.alpha);
  }
  throw std::invalid_argument("unknown policy kind");
}

}  // namespace darkpool
