#include <cmath>
#include <vector>

#include "doctest.h"
#include "darkpool/allocator.hpp"
#include "darkpool/simulator.hpp"
#include "oracles.hpp"

using namespace darkpool;

namespace {

VenueModel point_mass(Volume at) {
  std::vector<double> pmf(at + 1, 0.0);
  pmf[at] = 1.0;
  return VenueModel::nonparametric(pmf);
}

SimConfig config_of(std::vector<VenueModel> venues, Volume volume, std::size_t episodes = 1,
                    std::size_t trials = 1) {
  SimConfig c;
  c.venues = std::move(venues);
  c.volume = VolumeSource::constant(volume);
  c.episodes = episodes;
  c.trials = trials;
  c.seed = 42;
  return c;
}

PolicySpec spec_of(PolicyKind kind) {
  PolicySpec s;
  s.kind = kind;
  s.explore_const = 0.01;
  return s;
}

}  // namespace

TEST_CASE("step examples") {
  RandomStream rng(1);
  const std::vector<VenueModel> venues = {point_mass(5), VenueModel::zb_power_law(0.5, 0.5, 9)};
  const auto none = step(venues, Allocation({0, 0}), rng);
  CHECK(none == std::vector<CensoredSample>{{0, 0}, {0, 0}});
  const std::vector<VenueModel> five = {point_mass(5)};
  CHECK(step(five, Allocation({8}), rng) == std::vector<CensoredSample>{{8, 5}});
  const auto capped = step(five, Allocation({3}), rng);
  CHECK(capped == std::vector<CensoredSample>{{3, 3}});
  CHECK(capped[0].censored());
  CHECK_THROWS_AS(step(five, Allocation({1, 1}), rng), std::domain_error);
}

TEST_CASE("step obeys the censoring law") {
  const std::vector<VenueModel> venues = {VenueModel::zb_power_law(0.4, 0.8, 30),
                                          VenueModel::zb_poisson(0.2, 6.0, 30)};
  RandomStream rng(2);
  RandomStream replay(2);
  for (int i = 0; i < 5000; ++i) {
    const Allocation a({rng.uniform_index(31), rng.uniform_index(31)});
    (void)replay.uniform_index(31);
    (void)replay.uniform_index(31);
    const auto fills = step(venues, a, rng);
    for (std::size_t k = 0; k < 2; ++k) {
      const Volume latent = venues[k].sample(replay);
      CHECK(fills[k].submitted == a[k]);
      CHECK(fills[k].consumed == std::min(a[k], latent));
    }
  }
}

TEST_CASE("episode examples") {
  RandomStream rng(3);
  {
    const auto c = config_of({point_mass(0), point_mass(0)}, 10);
    auto policy = make_policy(spec_of(PolicyKind::Ideal), c.venues, 10);
    CHECK(run_episode(c, policy, rng).filled_fraction == 0.0);
  }
  {
    const auto c = config_of({point_mass(7)}, 7);
    auto policy = make_policy(spec_of(PolicyKind::Ideal), c.venues, 7);
    CHECK(run_episode(c, policy, rng).filled_fraction == 1.0);
  }
  {
    const auto c = config_of({point_mass(100), point_mass(100), point_mass(100), point_mass(100)}, 1000);
    auto policy = make_policy(spec_of(PolicyKind::Uniform), c.venues, 1000);
    const auto r = run_episode(c, policy, rng, 9);
    CHECK(r.episode == 9);
    CHECK(r.fills == std::vector<Volume>{100, 100, 100, 100});
    CHECK(r.filled_fraction == doctest::Approx(0.4));
    CHECK(r.allocation == Allocation({250, 250, 250, 250}));
  }
}

TEST_CASE("half-life examples") {
  RandomStream rng(4);
  const auto three = config_of({point_mass(3)}, 8);
  const auto policy = Policy::ideal(three.venues, 8);
  CHECK(order_half_life(three, policy, 8, rng) == std::size_t{2});
  CHECK(order_half_life(three, policy, 7, rng) == std::size_t{2});
  CHECK(order_half_life(three, policy, 6, rng) == std::size_t{2});
  CHECK(order_half_life(three, policy, 5, rng) == std::size_t{1});

  const auto full = config_of({point_mass(12)}, 12);
  CHECK(order_half_life(full, Policy::ideal(full.venues, 12), 12, rng) == std::size_t{1});

  auto zero = config_of({point_mass(0), point_mass(0)}, 20);
  zero.half_life_cap = 50;
  CHECK_FALSE(order_half_life(zero, Policy::uniform(2), 20, rng).has_value());
  CHECK_THROWS_AS(order_half_life(zero, Policy::uniform(2), 0, rng), std::invalid_argument);
}

TEST_CASE("half-life never increases with capacity") {
  RandomStream rng(5);
  for (Volume total : {7, 20, 33}) {
    std::size_t previous = SIZE_MAX;
    for (Volume cap = 1; cap <= total; ++cap) {
      const auto c = config_of({point_mass(cap)}, total);
      const auto steps = order_half_life(c, Policy::uniform(1), total, rng);
      REQUIRE(steps.has_value());
      CHECK(*steps <= previous);
      previous = *steps;
    }
  }
}

TEST_CASE("half-life freezes learning") {
  const auto c = config_of({VenueModel::zb_power_law(0.5, 0.5, 20)}, 20);
  const auto policy = Policy::learner_km(1, 20, 2.0, 0.1, 0.01);
  RandomStream rng(6);
  (void)order_half_life(c, policy, 20, rng);
  CHECK(policy.counters()[0].total_obs() == 0);
}

TEST_CASE("single trial reproduces the episode record") {
  const auto c = config_of({point_mass(4), point_mass(2)}, 5);
  const auto result = run_experiment(c, spec_of(PolicyKind::Ideal));
  REQUIRE(result.filled_fraction.size() == 1);
  CHECK(result.filled_fraction[0].episode == 1);
  CHECK(result.filled_fraction[0].mean == doctest::Approx(1.0));
  CHECK(result.filled_fraction[0].smoothed == result.filled_fraction[0].mean);
  CHECK(result.filled_fraction[0].std_error == 0.0);
  CHECK(result.filled_fraction_final.points == 1);
  CHECK(result.half_life.empty());
  CHECK(result.policy == "ideal");
}

TEST_CASE("experiments are deterministic across runs and thread counts") {
  auto c = config_of({VenueModel::zb_power_law(0.6, 1.3, 40), VenueModel::zb_power_law(0.9, 0.3, 40)},
                     40, 30, 12);
  c.volume = VolumeSource::distribution({0.1, 0.0, 0.2, 0.3, 0.4});
  ExperimentOptions opts;
  opts.half_life = true;
  opts.half_life_interval = 7;
  opts.final_window = 10;
  for (PolicyKind kind : {PolicyKind::LearnerKM, PolicyKind::Bandit, PolicyKind::LearnerParametric}) {
    opts.threads = 1;
    const auto a = run_experiment(c, spec_of(kind), opts);
    const auto b = run_experiment(c, spec_of(kind), opts);
    opts.threads = 4;
    const auto d = run_experiment(c, spec_of(kind), opts);
    for (const auto* other : {&b, &d}) {
      REQUIRE(other->filled_fraction.size() == a.filled_fraction.size());
      for (std::size_t i = 0; i < a.filled_fraction.size(); ++i) {
        CHECK(other->filled_fraction[i].mean == a.filled_fraction[i].mean);
        CHECK(other->filled_fraction[i].smoothed == a.filled_fraction[i].smoothed);
        CHECK(other->filled_fraction[i].std_error == a.filled_fraction[i].std_error);
      }
      REQUIRE(other->half_life.size() == a.half_life.size());
      for (std::size_t i = 0; i < a.half_life.size(); ++i) {
        CHECK(other->half_life[i].mean == a.half_life[i].mean);
      }
    }
    // Measured after episodes 7, 14, 21, 28 and the last one.
    REQUIRE(a.half_life.size() == 5);
    CHECK(a.half_life[4].episode == 30);
  }
}

TEST_CASE("smoothing and final window follow their definitions") {
  const auto c = config_of({VenueModel::zb_power_law(0.5, 0.5, 30), VenueModel::zb_power_law(0.8, 0.2, 30)},
                           30, 40, 6);
  ExperimentOptions opts;
  opts.smoothing = 0.9;
  opts.final_window = 15;
  const auto r = run_experiment(c, spec_of(PolicyKind::Bandit), opts);
  double ema = r.filled_fraction[0].mean;
  double window = 0.0;
  for (std::size_t i = 0; i < r.filled_fraction.size(); ++i) {
    if (i > 0) ema = 0.9 * ema + 0.1 * r.filled_fraction[i].mean;
    CHECK(r.filled_fraction[i].smoothed == doctest::Approx(ema).epsilon(1e-14));
    if (i >= 25) window += r.filled_fraction[i].mean;
  }
  CHECK(r.filled_fraction_final.points == 15);
  CHECK(r.filled_fraction_final.mean == doctest::Approx(window / 15).epsilon(1e-12));
}

TEST_CASE("ideal beats uniform on asymmetric venues at every episode") {
  const std::vector<VenueModel> venues = {VenueModel::zb_power_law(0.9, 0.3, 200),
                                          VenueModel::zb_power_law(0.2, 1.5, 200),
                                          VenueModel::zb_power_law(0.5, 0.2, 200)};
  const auto c = config_of(venues, 200, 10, 1000);
  const auto ideal = run_experiment(c, spec_of(PolicyKind::Ideal));
  const auto uniform = run_experiment(c, spec_of(PolicyKind::Uniform));
  for (std::size_t i = 0; i < 10; ++i) {
    const auto& a = ideal.filled_fraction[i];
    const auto& b = uniform.filled_fraction[i];
    CHECK(a.mean - b.mean > 3.0 * std::hypot(a.std_error, b.std_error));
  }

  // The ideal mean agrees with the analytic expected fill.
  std::vector<TailCurve> tails;
  for (const auto& v : venues) tails.push_back(v.tail());
  const double analytic = expected_fill(greedy_allocate(200, tails), tails) / 200.0;
  const auto& w = ideal.filled_fraction_final;
  CHECK(std::abs(w.mean - analytic) <= 3.0 * w.std_error);
}

TEST_CASE("volume sources") {
  RandomStream rng(7);
  const auto constant = VolumeSource::constant(17);
  CHECK(constant.is_constant());
  CHECK(constant.draw(rng) == 17);
  CHECK(constant.probabilities().empty());

  const auto dist = VolumeSource::distribution({0.0, 0.5, 0.0, 0.5});
  CHECK(dist.max() == 4);
  std::size_t twos = 0;
  for (int i = 0; i < 10000; ++i) {
    const Volume v = dist.draw(rng);
    CHECK((v == 2 || v == 4));
    twos += v == 2 ? 1 : 0;
  }
  CHECK(std::abs(twos / 10000.0 - 0.5) < 0.03);
  CHECK_THROWS_AS(VolumeSource::constant(0), std::invalid_argument);
  CHECK_THROWS_AS(VolumeSource::distribution({}), std::invalid_argument);
}

TEST_CASE("config validation") {
  auto c = config_of({point_mass(1)}, 1);
  c.trials = 0;
  CHECK_THROWS_AS(run_experiment(c, spec_of(PolicyKind::Uniform)), std::invalid_argument);
  c.trials = 1;
  c.venues.clear();
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}
