#include "darkpool/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

namespace darkpool {
namespace {

constexpr std::uint64_t kEpisodeStream = 0;
constexpr std::uint64_t kHalfLifeStream = 1;
constexpr double kInf = std::numeric_limits<double>::infinity();

struct TrialOutput {
  std::vector<double> filled;
  std::vector<double> half_life;
};

bool measures_half_life(std::size_t episode, std::size_t episodes, std::size_t interval) {
  return (episode + 1) % interval == 0 || episode + 1 == episodes;
}

TrialOutput run_trial(const SimConfig& config, const PolicySpec& spec,
                      const ExperimentOptions& options, std::size_t trial) {
  RandomStream rng(derive_seed(config.seed, trial, kEpisodeStream));
  RandomStream half_rng(derive_seed(config.seed, trial, kHalfLifeStream));
  Policy policy = make_policy(spec, config.venues, config.volume.max());
  TrialOutput out;
  out.filled.reserve(config.episodes);
  for (std::size_t e = 0; e < config.episodes; ++e) {
    const EpisodeRecord record = run_episode(config, policy, rng, e + 1);
    out.filled.push_back(record.filled_fraction);
    if (options.half_life && measures_half_life(e, config.episodes, options.half_life_interval)) {
      const Volume total = config.volume.draw(half_rng);
      const auto steps = order_half_life(config, policy, total, half_rng);
      out.half_life.push_back(steps ? static_cast<double>(*steps) : kInf);
    }
  }
  return out;
}

// Column-wise mean, EMA and standard error over trials, reduced in trial order.
std::vector<CurvePoint> summarize(const std::vector<std::vector<double>>& per_trial,
                                  const std::vector<std::size_t>& episodes, double retention) {
  std::vector<CurvePoint> points;
  const std::size_t n = per_trial.size();
  double smoothed = 0.0;
  for (std::size_t j = 0; j < episodes.size(); ++j) {
    double sum = 0.0;
    for (const auto& row : per_trial) sum += row[j];
    const double mean = sum / static_cast<double>(n);
    double se = 0.0;
    if (!std::isfinite(mean)) {
      se = kInf;
    } else if (n > 1) {
      double ss = 0.0;
      for (const auto& row : per_trial) ss += (row[j] - mean) * (row[j] - mean);
      se = std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
    }
    smoothed = j == 0 ? mean : retention * smoothed + (1.0 - retention) * mean;
    points.push_back({episodes[j], mean, smoothed, se});
  }
  return points;
}

WindowSummary final_window(const std::vector<std::vector<double>>& per_trial,
                           const std::vector<std::size_t>& episodes, std::size_t last_episode,
                           std::size_t window) {
  WindowSummary summary;
  const std::size_t first = last_episode > window ? last_episode - window + 1 : 1;
  std::size_t begin = episodes.size();
  for (std::size_t j = 0; j < episodes.size(); ++j) {
    if (episodes[j] >= first) {
      begin = j;
      break;
    }
  }
  if (begin == episodes.size()) begin = episodes.empty() ? 0 : episodes.size() - 1;
  summary.points = episodes.size() - begin;
  if (summary.points == 0) return summary;

  std::vector<double> trial_means;
  for (const auto& row : per_trial) {
    double s = 0.0;
    for (std::size_t j = begin; j < row.size(); ++j) s += row[j];
    trial_means.push_back(s / static_cast<double>(summary.points));
  }
  const double n = static_cast<double>(trial_means.size());
  summary.mean = std::accumulate(trial_means.begin(), trial_means.end(), 0.0) / n;
  if (!std::isfinite(summary.mean)) {
    summary.std_error = kInf;
  } else if (trial_means.size() > 1) {
    double ss = 0.0;
    for (double m : trial_means) ss += (m - summary.mean) * (m - summary.mean);
    summary.std_error = std::sqrt(ss / (n - 1.0) / n);
  }
  return summary;
}

}  // namespace

VolumeSource VolumeSource::constant(Volume volume) {
  if (volume < 1) throw std::invalid_argument("constant volume must be at least 1");
  return VolumeSource(volume, std::nullopt);
}

VolumeSource VolumeSource::distribution(std::vector<double> probs) {
  if (probs.empty()) throw std::invalid_argument("volume distribution must be nonempty");
  probs.insert(probs.begin(), 0.0);
  VenueModel model = VenueModel::nonparametric(std::move(probs));
  const Volume max = model.s_max();
  return VolumeSource(max, std::move(model));
}

std::vector<double> VolumeSource::probabilities() const {
  if (!model_) return {};
  const auto& pmf = model_->pmf_values();
  return {pmf.begin() + 1, pmf.end()};
}

Volume VolumeSource::draw(RandomStream& rng) const {
  return model_ ? model_->sample(rng) : max_;
}

void SimConfig::validate() const {
  if (venues.empty()) throw std::invalid_argument("simulator needs at least one venue");
  if (episodes < 1) throw std::invalid_argument("episodes must be at least 1");
  if (trials < 1) throw std::invalid_argument("trials must be at least 1");
  if (half_life_cap < 1) throw std::invalid_argument("half_life_cap must be at least 1");
}

std::vector<CensoredSample> step(std::span<const VenueModel> venues, const Allocation& alloc,
                                 RandomStream& rng) {
  if (alloc.venues() != venues.size()) {
    throw std::domain_error("allocation does not match the venue count");
  }
  std::vector<CensoredSample> fills;
  fills.reserve(venues.size());
  for (std::size_t i = 0; i < venues.size(); ++i) {
    const Volume liquidity = venues[i].sample(rng);
    fills.push_back({alloc[i], std::min(alloc[i], liquidity)});
  }
  return fills;
}

EpisodeRecord run_episode(const SimConfig& config, Policy& policy, RandomStream& rng,
                          std::size_t episode) {
  const Volume total = config.volume.draw(rng);
  EpisodeRecord record;
  record.episode = episode;
  record.allocation = policy.decide(total);
  const auto fills = step(config.venues, record.allocation, rng);
  policy.observe(fills);
  Volume filled = 0;
  for (const auto& f : fills) {
    record.fills.push_back(f.consumed);
    filled += f.consumed;
  }
  record.filled_fraction =
      total > 0 ? static_cast<double>(filled) / static_cast<double>(total) : 0.0;
  return record;
}

std::optional<std::size_t> order_half_life(const SimConfig& config, const Policy& policy,
                                           Volume total, RandomStream& rng) {
  if (total < 1) throw std::invalid_argument("half-life needs a positive volume");
  Volume filled = 0;
  for (std::size_t steps = 1; steps <= config.half_life_cap; ++steps) {
    const auto fills = step(config.venues, policy.decide(total - filled), rng);
    for (const auto& f : fills) filled += f.consumed;
    if (2 * filled > total) return steps;
  }
  return std::nullopt;
}

ExperimentResult run_experiment(const SimConfig& config, const PolicySpec& spec,
                                const ExperimentOptions& options) {
  config.validate();
  if (options.half_life && options.half_life_interval < 1) {
    throw std::invalid_argument("half_life_interval must be at least 1");
  }
  if (!(options.smoothing >= 0.0 && options.smoothing < 1.0)) {
    throw std::invalid_argument("smoothing must lie in [0, 1)");
  }
  // Fail fast on a bad spec before spawning workers.
  (void)make_policy(spec, config.venues, config.volume.max());

  std::vector<TrialOutput> trials(config.trials);
  unsigned workers = options.threads ? options.threads : std::thread::hardware_concurrency();
  workers = std::clamp<unsigned>(workers, 1, static_cast<unsigned>(config.trials));
  if (workers == 1) {
    for (std::size_t t = 0; t < config.trials; ++t) trials[t] = run_trial(config, spec, options, t);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t t = next++; t < config.trials && !failed; t = next++) {
          try {
            trials[t] = run_trial(config, spec, options, t);
          } catch (...) {
            if (!failed.exchange(true)) failure = std::current_exception();
          }
        }
      });
    }
    pool.clear();
    if (failure) std::rethrow_exception(failure);
  }

  ExperimentResult result;
  result.policy = spec.label();
  std::vector<std::vector<double>> filled;
  std::vector<std::vector<double>> half;
  for (auto& t : trials) {
    filled.push_back(std::move(t.filled));
    half.push_back(std::move(t.half_life));
  }
  std::vector<std::size_t> episodes(config.episodes);
  std::iota(episodes.begin(), episodes.end(), std::size_t{1});
  if (options.filled_fraction) {
    result.filled_fraction = summarize(filled, episodes, options.smoothing);
    result.filled_fraction_final =
        final_window(filled, episodes, config.episodes, options.final_window);
  }
  if (options.half_life) {
    std::vector<std::size_t> points;
    for (std::size_t e = 0; e < config.episodes; ++e) {
      if (measures_half_life(e, config.episodes, options.half_life_interval)) points.push_back(e + 1);
    }
    result.half_life = summarize(half, points, options.smoothing);
    result.half_life_final = final_window(half, points, config.episodes, options.final_window);
  }
  return result;
}

}  // namespace darkpool
