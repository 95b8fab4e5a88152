#include "darkpool/dist_models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "darkpool/km_estimator.hpp"

namespace darkpool {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Shape search ranges. The power-law exponent may be negative.
constexpr double kBetaLow = -3.0;
constexpr double kBetaHigh = 3.0;
constexpr double kRateLow = 1e-6;
constexpr double kSearchTolerance = 1e-6;

void check_zero_prob(double zero_prob) {
  if (!(zero_prob >= 0.0 && zero_prob <= 1.0)) {
    throw std::invalid_argument("zero_prob must lie in [0, 1]");
  }
}

// Unnormalized log body weights on 1..s_max; index 0 is unused.
std::vector<double> body_log_weights(Family family, double shape, Volume s_max) {
  std::vector<double> lw(s_max + 1, 0.0);
  for (Volume s = 1; s <= s_max; ++s) {
    const double x = static_cast<double>(s);
    switch (family) {
      case Family::ZbUniform:
        break;
      case Family::ZbPowerLaw:
        lw[s] = -shape * std::log(x);
        break;
      case Family::ZbPoisson:
        lw[s] = x * std::log(shape) - std::lgamma(x + 1.0);
        break;
      case Family::ZbExponential:
        lw[s] = -shape * x;
        break;
      case Family::Nonparametric:
        throw std::logic_error("nonparametric family has no body weights");
    }
  }
  return lw;
}

// Normalizer and scaled weights for a set of log weights on 1..s_max.
struct ScaledBody {
  double log_scale;            // max log weight
  std::vector<double> scaled;  // exp(lw - log_scale), index 0 unused
  double log_norm;             // log sum_s exp(lw[s])
};

ScaledBody scale_body(const std::vector<double>& lw) {
  ScaledBody body;
  body.log_scale = *std::max_element(lw.begin() + 1, lw.end());
  body.scaled.assign(lw.size(), 0.0);
  double total = 0.0;
  for (std::size_t s = 1; s < lw.size(); ++s) {
    body.scaled[s] = std::exp(lw[s] - body.log_scale);
    total += body.scaled[s];
  }
  body.log_norm = body.log_scale + std::log(total);
  return body;
}

// Body part of the censored log-likelihood: direct positive observations and
// censored observations, each measured against the normalized body.
double body_log_likelihood(const std::vector<double>& lw, const CensoredHistogram& data) {
  const ScaledBody body = scale_body(lw);
  const auto& direct = data.direct();
  const auto& censored = data.censored();
  const Volume s_max = data.s_max();
  double total = 0.0;
  for (Volume r = 1; r <= s_max; ++r) {
    if (direct[r] > 0) total += static_cast<double>(direct[r]) * (lw[r] - body.log_norm);
  }
  // Suffix sums for censored terms; fall back to log space if they underflow.
  double suffix = 0.0;
  double log_suffix = kNegInf;
  bool underflow = false;
  for (Volume v = s_max; v >= 1; --v) {
    suffix += body.scaled[v];
    if (underflow || suffix == 0.0) {
      underflow = true;
      const double hi = std::max(log_suffix, lw[v]);
      log_suffix = hi + std::log(std::exp(log_suffix - hi) + std::exp(lw[v] - hi));
    } else {
      log_suffix = body.log_scale + std::log(suffix);
    }
    if (censored[v] > 0) total += static_cast<double>(censored[v]) * (log_suffix - body.log_norm);
  }
  return total;
}

// Maximizes a function on [lo, hi] by golden-section search.
template <typename F>
double golden_section_max(F&& f, double lo, double hi, double tolerance) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  while (b - a > tolerance) {
    if (f1 >= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    }
  }
  return 0.5 * (a + b);
}

struct ShapeRange {
  double lo;
  double hi;
};

ShapeRange shape_range(Family family, Volume s_max) {
  if (family == Family::ZbPowerLaw) return {kBetaLow, kBetaHigh};
  return {kRateLow, static_cast<double>(s_max)};
}

FitResult fit_nonparametric(const CensoredHistogram& data) {
  const Volume s_max = data.s_max();
  const auto& direct = data.direct();
  const auto& censored = data.censored();
  std::vector<std::uint64_t> n(s_max + 1, 0);
  // n[s] = #direct with consumed >= s + #censored with submitted > s.
  std::uint64_t running = 0;
  for (Volume s = s_max + 1; s-- > 0;) {
    running += direct[s];
    if (s + 1 <= s_max) running += censored[s + 1];
    n[s] = running;
  }
  const VenueCounters counters = VenueCounters::from_arrays(direct, n, data.informative());
  const TailCurve tail = km_tail(counters);
  std::vector<double> pmf(s_max + 1);
  for (Volume s = 0; s < s_max; ++s) pmf[s] = std::max(0.0, tail.t[s] - tail.t[s + 1]);
  pmf[s_max] = tail.t[s_max];
  VenueModel model = VenueModel::nonparametric(std::move(pmf));
  const double ll = log_likelihood(model, data);
  return FitResult{std::move(model), ll, false, data.informative()};
}

}  // namespace

std::string_view family_name(Family family) {
  switch (family) {
    case Family::ZbUniform: return "zb-uniform";
    case Family::ZbPowerLaw: return "zb-power-law";
    case Family::ZbPoisson: return "zb-poisson";
    case Family::ZbExponential: return "zb-exponential";
    case Family::Nonparametric: return "nonparametric";
  }
  return "unknown";
}

Family parse_family(std::string_view name) {
  for (Family f : {Family::ZbUniform, Family::ZbPowerLaw, Family::ZbPoisson,
                   Family::ZbExponential, Family::Nonparametric}) {
    if (family_name(f) == name) return f;
  }
  throw std::invalid_argument("unknown family '" + std::string(name) + "'");
}

VenueModel::VenueModel(Family family, std::optional<double> shape, std::vector<double> pmf)
    : family_(family), shape_(shape), pmf_(std::move(pmf)) {
  const Volume s_max = pmf_.size() - 1;
  tail_.t.assign(s_max + 2, 0.0);
  double suffix = 0.0;
  for (Volume s = s_max + 1; s-- > 1;) {
    suffix += pmf_[s];
    tail_.t[s] = std::min(suffix, 1.0);
  }
  tail_.t[0] = 1.0;
}

VenueModel VenueModel::parametric(Family family, double zero_prob, std::optional<double> shape,
                                  Volume s_max) {
  if (family == Family::Nonparametric) {
    throw std::invalid_argument("use VenueModel::nonparametric for explicit pmfs");
  }
  check_zero_prob(zero_prob);
  if (s_max < 1) throw std::invalid_argument("s_max must be at least 1");
  if (family == Family::ZbUniform) {
    shape.reset();
  } else {
    if (!shape || !std::isfinite(*shape)) {
      throw std::invalid_argument(std::string(family_name(family)) + " needs a finite shape");
    }
    if (family != Family::ZbPowerLaw && !(*shape > 0.0)) {
      throw std::invalid_argument(std::string(family_name(family)) + " rate must be positive");
    }
  }
  const ScaledBody body = scale_body(body_log_weights(family, shape.value_or(0.0), s_max));
  double total = 0.0;
  for (Volume s = 1; s <= s_max; ++s) total += body.scaled[s];
  std::vector<double> pmf(s_max + 1);
  pmf[0] = zero_prob;
  for (Volume s = 1; s <= s_max; ++s) pmf[s] = (1.0 - zero_prob) * body.scaled[s] / total;
  return VenueModel(family, shape, std::move(pmf));
}

VenueModel VenueModel::zb_uniform(double zero_prob, Volume s_max) {
  return parametric(Family::ZbUniform, zero_prob, std::nullopt, s_max);
}
VenueModel VenueModel::zb_power_law(double zero_prob, double beta, Volume s_max) {
  return parametric(Family::ZbPowerLaw, zero_prob, beta, s_max);
}
VenueModel VenueModel::zb_poisson(double zero_prob, double rate, Volume s_max) {
  return parametric(Family::ZbPoisson, zero_prob, rate, s_max);
}
VenueModel VenueModel::zb_exponential(double zero_prob, double rate, Volume s_max) {
  return parametric(Family::ZbExponential, zero_prob, rate, s_max);
}

VenueModel VenueModel::nonparametric(std::vector<double> pmf) {
  if (pmf.empty()) throw std::invalid_argument("pmf must be nonempty");
  double total = 0.0;
  for (double p : pmf) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw std::invalid_argument("pmf entries must be finite and nonnegative");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-6) throw std::invalid_argument("pmf must sum to 1");
  // Already-normalized input is kept verbatim so serialized models reload bit-exactly.
  if (std::abs(total - 1.0) > 1e-12) {
    for (double& p : pmf) p /= total;
  }
  return VenueModel(Family::Nonparametric, std::nullopt, std::move(pmf));
}

double VenueModel::pmf(Volume s) const {
  if (s > s_max()) {
    throw std::domain_error("volume " + std::to_string(s) + " is outside the support 0.." +
                            std::to_string(s_max()));
  }
  return pmf_[s];
}

Volume VenueModel::sample(RandomStream& rng) const {
  const double u = rng.uniform();
  // First s with T(s) <= u; T(0) = 1 > u and T(s_max+1) = 0 <= u bound the search.
  const auto it = std::partition_point(tail_.t.begin(), tail_.t.end(),
                                       [u](double t) { return t > u; });
  return static_cast<Volume>(it - tail_.t.begin()) - 1;
}

CensoredHistogram::CensoredHistogram(Volume s_max)
    : direct_(s_max + 1, 0), censored_(s_max + 1, 0) {}

void CensoredHistogram::add(const CensoredSample& sample) {
  sample.validate();
  if (sample.submitted > s_max()) {
    throw std::domain_error("submitted volume " + std::to_string(sample.submitted) +
                            " exceeds s_max " + std::to_string(s_max()));
  }
  if (sample.submitted == 0) return;
  ++informative_;
  if (sample.direct()) {
    ++direct_[sample.consumed];
  } else {
    ++censored_[sample.submitted];
  }
}

FitResult fit_mle(const CensoredHistogram& data, Family family) {
  if (data.informative() == 0) {
    throw InsufficientDataError("no sample with submitted > 0 to fit");
  }
  if (family == Family::Nonparametric) return fit_nonparametric(data);

  const Volume s_max = data.s_max();
  if (s_max < 1) throw std::invalid_argument("s_max must be at least 1");
  const double zero_prob =
      static_cast<double>(data.direct()[0]) / static_cast<double>(data.informative());

  std::optional<double> shape;
  bool degenerate = false;
  if (family != Family::ZbUniform) {
    const ShapeRange range = shape_range(family, s_max);
    if (data.positive() == 0) {
      // Body unidentified: every informative sample was a direct zero.
      shape = 0.5 * (range.lo + range.hi);
      degenerate = true;
    } else {
      auto objective = [&](double x) {
        return body_log_likelihood(body_log_weights(family, x, s_max), data);
      };
      shape = golden_section_max(objective, range.lo, range.hi, kSearchTolerance);
      const double edge = 10.0 * kSearchTolerance;
      degenerate = *shape - range.lo < edge || range.hi - *shape < edge;
    }
  } else if (data.positive() == 0) {
    degenerate = true;
  }

  VenueModel model = VenueModel::parametric(family, zero_prob, shape, s_max);
  const double ll = log_likelihood(model, data);
  return FitResult{std::move(model), ll, degenerate, data.informative()};
}

FitResult fit_mle(std::span<const CensoredSample> samples, Family family,
                  std::optional<Volume> s_max) {
  if (samples.empty()) throw InsufficientDataError("no samples to fit");
  Volume range = 0;
  if (s_max) {
    range = *s_max;
  } else {
    for (const auto& sample : samples) range = std::max(range, sample.submitted);
  }
  CensoredHistogram data(range);
  for (const auto& sample : samples) data.add(sample);
  return fit_mle(data, family);
}

double sample_log_likelihood(const VenueModel& model, const CensoredSample& sample, double floor) {
  if (sample.submitted == 0) return 0.0;
  double p;
  if (sample.direct()) {
    p = sample.consumed <= model.s_max() ? model.pmf_values()[sample.consumed] : 0.0;
  } else {
    p = model.tail().at(sample.submitted);
  }
  p = std::max(p, floor);
  return p > 0.0 ? std::log(p) : kNegInf;
}

double log_likelihood(const VenueModel& model, const CensoredHistogram& data) {
  double total = 0.0;
  const auto& direct = data.direct();
  const auto& censored = data.censored();
  for (Volume s = 0; s <= data.s_max(); ++s) {
    if (direct[s] > 0) {
      total += static_cast<double>(direct[s]) *
               sample_log_likelihood(model, CensoredSample{s + 1, s});
    }
    if (censored[s] > 0) {
      total += static_cast<double>(censored[s]) *
               sample_log_likelihood(model, CensoredSample{s, s});
    }
  }
  return total;
}

double log_loss(const VenueModel& model, std::span<const CensoredSample> samples, double floor) {
  double total = 0.0;
  std::size_t informative = 0;
  for (const auto& sample : samples) {
    sample.validate();
    if (sample.submitted == 0) continue;
    total += sample_log_likelihood(model, sample, floor);
    ++informative;
  }
  if (informative == 0) throw InsufficientDataError("no sample with submitted > 0");
  return -total / static_cast<double>(informative);
}

}  // namespace darkpool
