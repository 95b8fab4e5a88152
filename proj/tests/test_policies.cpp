#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "darkpool/allocator.hpp"
#include "darkpool/policies.hpp"
#include "darkpool/random.hpp"
#include "oracles.hpp"

using namespace darkpool;

namespace {

std::vector<VenueModel> four_venues() {
  return {VenueModel::zb_power_law(0.6, 1.3, 60), VenueModel::zb_power_law(0.75, 0.7, 60),
          VenueModel::zb_power_law(0.85, 0.5, 60), VenueModel::zb_power_law(0.9, 0.3, 60)};
}

std::vector<CensoredSample> realize(const std::vector<VenueModel>& venues, const Allocation& a,
                                    RandomStream& rng) {
  std::vector<CensoredSample> out;
  for (std::size_t i = 0; i < venues.size(); ++i) {
    const Volume s = venues[i].sample(rng);
    out.push_back({a[i], std::min(a[i], s)});
  }
  return out;
}

// Largest remainder computed from the quotas by hand.
std::vector<Volume> largest_remainder(Volume total, const std::vector<double>& w) {
  double sum = 0.0;
  for (double x : w) sum += x;
  std::vector<Volume> v;
  std::vector<std::pair<double, std::size_t>> rem;
  Volume used = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double q = total * w[i] / sum;
    v.push_back(static_cast<Volume>(q));
    used += v.back();
    rem.push_back({-(q - std::floor(q)), i});
  }
  std::sort(rem.begin(), rem.end());
  for (std::size_t j = 0; used < total; ++j, ++used) ++v[rem[j].second];
  return v;
}

}  // namespace

TEST_CASE("uniform split") {
  CHECK(Policy::uniform(4).decide(1000) == Allocation({250, 250, 250, 250}));
  CHECK(Policy::uniform(4).decide(1003) == Allocation({251, 251, 251, 250}));
  CHECK(Policy::uniform(3).decide(0) == Allocation({0, 0, 0}));
}

TEST_CASE("bandit apportionment") {
  const std::vector<double> w = {1, 1.05, 1, 1};
  CHECK(Policy::bandit(w).decide(100) == Allocation({25, 26, 25, 24}));
  CHECK(largest_remainder(100, w) == std::vector<Volume>{25, 26, 25, 24});
  std::mt19937_64 gen(31);
  std::uniform_real_distribution<double> u(0.01, 10.0);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> weights(1 + gen() % 6);
    for (double& x : weights) x = u(gen);
    const Volume total = gen() % 5000;
    CHECK(apportion(total, weights).v == largest_remainder(total, weights));
  }
}

TEST_CASE("bandit decisions are scale invariant") {
  std::mt19937_64 gen(32);
  std::uniform_real_distribution<double> u(0.1, 3.0);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> w(2 + gen() % 4);
    for (double& x : w) x = u(gen);
    auto scaled = w;
    // Powers of two scale exactly, so quotas are bitwise identical.
    for (double& x : scaled) x *= 1024.0;
    const Volume total = gen() % 3000;
    CHECK(Policy::bandit(w).decide(total) == Policy::bandit(scaled).decide(total));
  }
}

TEST_CASE("fresh kaplan-meier learner sends everything to the first venue") {
  const auto policy = Policy::learner_km(2, 10, 1.0, 0.05);
  CHECK(policy.decide(4) == Allocation({4, 0}));
  for (const auto& curve : policy.current_tails()) {
    CHECK(curve.cutoff == Volume{0});
    for (Volume s = 0; s <= 10; ++s) CHECK(curve.t[s] == 1.0);
  }
}

TEST_CASE("bandit observe bumps venues with a positive fill") {
  auto policy = Policy::bandit(4);
  policy.observe(std::vector<CensoredSample>{{5, 0}, {9, 7}, {0, 0}, {3, 0}});
  CHECK(policy.weights() == std::vector<double>{1, 1.05, 1, 1});
  CHECK(policy.alpha() == 1.05);
}

TEST_CASE("bandit weights are renormalized before overflow") {
  auto policy = Policy::bandit({1e100, 2e99, 1.0}, 1.5);
  const auto before = policy.decide(1000);
  policy.observe(std::vector<CensoredSample>{{1, 1}, {1, 1}, {1, 1}});
  const auto& w = policy.weights();
  CHECK(w[0] == 1.0);
  CHECK(w[1] == doctest::Approx(0.2));
  CHECK(std::isfinite(w[2]));
  CHECK(policy.decide(1000) == before);
}

TEST_CASE("ideal policy ignores feedback") {
  const auto venues = four_venues();
  auto policy = Policy::ideal(venues, 100);
  const auto tails = policy.current_tails();
  for (std::size_t i = 0; i < venues.size(); ++i) {
    CHECK(tails[i].size() == 102);
    for (Volume s = 0; s < 102; ++s) CHECK(tails[i].t[s] == venues[i].tail().at(s));
  }
  const auto before = policy.decide(100);
  policy.observe(std::vector<CensoredSample>{{25, 3}, {25, 25}, {25, 0}, {25, 1}});
  CHECK(policy.decide(100) == before);
  CHECK(policy.current_tails() == tails);
}

TEST_CASE("learner counters follow ingest") {
  auto policy = Policy::learner_km(2, 5, 1.0, 0.05);
  policy.observe(std::vector<CensoredSample>{{3, 2}, {0, 0}});
  VenueCounters expected(5);
  expected.ingest({3, 2});
  CHECK(policy.counters()[0] == expected);
  CHECK(policy.counters()[1].total_obs() == 1);
  CHECK(policy.venue_params().delta == doctest::Approx(0.025));
}

TEST_CASE("unsupported introspection") {
  CHECK_THROWS_AS(Policy::uniform(2).current_tails(), UnsupportedOperationError);
  CHECK_THROWS_AS(Policy::bandit(2).current_tails(), UnsupportedOperationError);
  CHECK_THROWS_AS(Policy::uniform(2).weights(), UnsupportedOperationError);
  CHECK_THROWS_AS(Policy::bandit(2).counters(), UnsupportedOperationError);
  CHECK_THROWS_AS(Policy::learner_km(2, 3, 1, 0.1).fits(), UnsupportedOperationError);
}

TEST_CASE("observe checks the venue count") {
  auto policy = Policy::uniform(3);
  CHECK_THROWS_AS(policy.observe(std::vector<CensoredSample>{{1, 0}}), std::domain_error);
  auto learner = Policy::learner_km(2, 4, 1.0, 0.1);
  CHECK_THROWS_AS(learner.observe(std::vector<CensoredSample>{{1, 0}, {1, 0}, {1, 0}}),
                  std::domain_error);
}

TEST_CASE("constructor validation") {
  CHECK_THROWS_AS(Policy::uniform(0), std::invalid_argument);
  CHECK_THROWS_AS(Policy::bandit(2, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(Policy::bandit({1.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(Policy::learner_km(2, 4, 0.0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(Policy::learner_parametric(2, 4, Family::ZbPowerLaw, 0), std::invalid_argument);
  CHECK(parse_policy_kind("learner-parametric") == PolicyKind::LearnerParametric);
  CHECK_THROWS_AS(parse_policy_kind("greedy"), std::invalid_argument);
}

TEST_CASE("parametric learner converges to the true tails") {
  const auto truth = VenueModel::zb_power_law(0.7, 0.6, 200);
  auto policy = Policy::learner_parametric(1, 200, Family::ZbPowerLaw, 50'000);
  RandomStream rng(33);
  for (int i = 0; i < 50'000; ++i) {
    const Volume s = truth.sample(rng);
    policy.observe(std::vector<CensoredSample>{{200, std::min<Volume>(200, s)}});
  }
  REQUIRE(policy.fits()[0].has_value());
  CHECK(policy.observations()[0].size() == 50'000);
  const auto fitted = policy.current_tails()[0];
  double sup = 0.0;
  for (Volume s = 0; s <= 201; ++s) sup = std::max(sup, std::abs(fitted.at(s) - truth.tail().at(s)));
  CHECK(sup <= 0.02);
}

TEST_CASE("parametric learner keeps the optimistic start until a venue fills") {
  auto policy = Policy::learner_parametric(2, 10);
  policy.observe(std::vector<CensoredSample>{{6, 0}, {4, 2}});
  CHECK_FALSE(policy.fits()[0].has_value());
  REQUIRE(policy.fits()[1].has_value());
  CHECK(policy.current_tails()[0].t[10] == 1.0);
}

TEST_CASE("every policy returns a feasible allocation") {
  const auto venues = four_venues();
  std::vector<PolicySpec> specs;
  for (PolicyKind k : {PolicyKind::LearnerKM, PolicyKind::LearnerParametric, PolicyKind::Ideal,
                       PolicyKind::Uniform, PolicyKind::Bandit}) {
    PolicySpec spec;
    spec.kind = k;
    spec.explore_const = 0.01;
    spec.refit_every = 7;
    specs.push_back(spec);
  }
  for (const auto& spec : specs) {
    CAPTURE(spec.label());
    auto policy = make_policy(spec, venues, 120);
    RandomStream rng(34);
    for (int e = 0; e < 150; ++e) {
      const Volume total = rng.uniform_index(121);
      const auto a = policy.decide(total);
      CHECK(a.venues() == 4);
      Volume sum = 0;
      for (Volume x : a.v) sum += x;
      CHECK(sum == total);
      CHECK(a.total == total);
      policy.observe(realize(venues, a, rng));
    }
  }
}

TEST_CASE("learner cutoffs only grow and exploration opens the cutoff slot") {
  const auto venues = four_venues();
  auto policy = Policy::learner_km(4, 60, 6.0, 0.05, 0.01);
  RandomStream rng(35);
  auto cuts = policy.cutoffs();
  bool exercised = false;
  for (int e = 0; e < 400; ++e) {
    const auto a = policy.decide(60);
    const auto fills = realize(venues, a, rng);
    const auto before = policy.counters();
    policy.observe(fills);
    for (std::size_t i = 0; i < 4; ++i) {
      if (a[i] > cuts[i] && fills[i].consumed >= cuts[i]) {
        CHECK(policy.counters()[i].n()[cuts[i]] == before[i].n()[cuts[i]] + 1);
        exercised = true;
      }
    }
    const auto now = policy.cutoffs();
    for (std::size_t i = 0; i < 4; ++i) CHECK(now[i] >= cuts[i]);
    cuts = now;
  }
  CHECK(exercised);
}

TEST_CASE("policy spec defaults") {
  PolicySpec spec;
  spec.kind = PolicyKind::LearnerKM;
  CHECK(spec.label() == "learner-km");
  spec.name = "km";
  CHECK(spec.label() == "km");
  const auto venues = four_venues();
  const auto policy = make_policy(spec, venues, 50);
  CHECK(policy.venue_params().epsilon == doctest::Approx(5.0));
  CHECK(policy.venue_params().v_cap == 50);
}
