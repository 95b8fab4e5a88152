#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "darkpool/harness.hpp"
#include "darkpool/km_estimator.hpp"

namespace darkpool {
namespace {

constexpr std::string_view kObservationHeader = "venue_id,submitted,consumed";

void write_schema_line(std::ostream& out) { out << "#schema_version=" << kCsvSchemaVersion << '\n'; }

template <typename T>
bool parse_integer(std::string_view text, T& value) {
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  return ec == std::errc() && ptr == text.data() + text.size();
}

std::map<std::int64_t, std::vector<CensoredSample>> group_by_venue(
    const std::vector<Observation>& rows) {
  std::map<std::int64_t, std::vector<CensoredSample>> venues;
  for (const auto& row : rows) venues[row.venue_id].push_back(row.sample);
  return venues;
}

void ensure_writable(const std::ostream& out, const std::filesystem::path& path) {
  if (!out) throw IoError("cannot write " + path.string());
}

// Unique file-name stems for policy labels.
std::vector<std::string> policy_stems(const std::vector<PolicySpec>& policies) {
  std::vector<std::string> stems;
  std::set<std::string> used;
  for (std::size_t i = 0; i < policies.size(); ++i) {
    std::string stem;
    for (char c : policies[i].label()) {
      stem += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
    }
    if (used.contains(stem)) stem += "_" + std::to_string(i);
    used.insert(stem);
    stems.push_back(stem);
  }
  return stems;
}

}  // namespace

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

std::vector<Observation> read_observations(std::istream& in) {
  std::vector<Observation> rows;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != kObservationHeader) {
        throw ConfigError("line " + std::to_string(line_no) + ": expected header '" +
                          std::string(kObservationHeader) + "'");
      }
      header_seen = true;
      continue;
    }
    std::string_view view(line);
    const auto c1 = view.find(',');
    const auto c2 = c1 == std::string_view::npos ? c1 : view.find(',', c1 + 1);
    Observation row;
    if (c2 == std::string_view::npos || view.find(',', c2 + 1) != std::string_view::npos ||
        !parse_integer(view.substr(0, c1), row.venue_id) ||
        !parse_integer(view.substr(c1 + 1, c2 - c1 - 1), row.sample.submitted) ||
        !parse_integer(view.substr(c2 + 1), row.sample.consumed)) {
      throw ConfigError("line " + std::to_string(line_no) +
                        ": expected three nonnegative integers venue_id,submitted,consumed");
    }
    if (row.sample.consumed > row.sample.submitted) {
      throw ConfigError("line " + std::to_string(line_no) + ": consumed exceeds submitted");
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<Observation> load_observations(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read data file " + path.string());
  try {
    return read_observations(in);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void write_observations(std::ostream& out, const std::vector<Observation>& rows) {
  out << kObservationHeader << '\n';
  for (const auto& r : rows) {
    out << r.venue_id << ',' << r.sample.submitted << ',' << r.sample.consumed << '\n';
  }
}

void write_curve_csv(std::ostream& out, const std::vector<CurvePoint>& points) {
  write_schema_line(out);
  out << "episode,mean,smoothed,stderr\n";
  for (const auto& p : points) {
    out << p.episode << ',' << format_number(p.mean) << ',' << format_number(p.smoothed) << ','
        << format_number(p.std_error) << '\n';
  }
}

std::vector<std::filesystem::path> cmd_simulate(const SimulateArgs& args) {
  ExperimentConfig config = load_config(args.config);
  if (args.seed) config.sim.seed = *args.seed;
  const std::filesystem::path dir = args.out.value_or(config.output_path);

  std::vector<ExperimentResult> results;
  for (const auto& spec : config.policies) {
    try {
      results.push_back(run_experiment(config.sim, spec, config.options));
    } catch (const std::invalid_argument& e) {
      throw ConfigError("policy '" + spec.label() + "': " + e.what());
    } catch (const std::domain_error& e) {
      throw ConfigError("policy '" + spec.label() + "': " + e.what());
    }
  }

  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());

  std::vector<std::filesystem::path> written;
  const auto stems = policy_stems(config.policies);
  auto write_curve = [&](const std::string& stem, const char* metric,
                         const std::vector<CurvePoint>& points) {
    const auto path = dir / (stem + "_" + metric + ".csv");
    std::ofstream out(path, std::ios::binary);
    ensure_writable(out, path);
    write_curve_csv(out, points);
    ensure_writable(out, path);
    written.push_back(path);
  };
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (config.options.filled_fraction) write_curve(stems[i], "filled_fraction", results[i].filled_fraction);
    if (config.options.half_life) write_curve(stems[i], "half_life", results[i].half_life);
  }

  const auto summary_path = dir / "summary.csv";
  std::ofstream summary(summary_path, std::ios::binary);
  ensure_writable(summary, summary_path);
  write_schema_line(summary);
  summary << "policy,metric,final_window,points,mean,stderr\n";
  auto summary_row = [&](const ExperimentResult& r, const char* metric, const WindowSummary& w) {
    summary << r.policy << ',' << metric << ',' << config.options.final_window << ',' << w.points
            << ',' << format_number(w.mean) << ',' << format_number(w.std_error) << '\n';
  };
  for (const auto& r : results) {
    if (config.options.filled_fraction) summary_row(r, "filled_fraction", r.filled_fraction_final);
    if (config.options.half_life) summary_row(r, "half_life", r.half_life_final);
  }
  ensure_writable(summary, summary_path);
  written.push_back(summary_path);
  return written;
}

void cmd_fit(const FitArgs& args, std::ostream& out) {
  Family family;
  try {
    family = parse_family(args.family);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (!(args.split > 0.0 && args.split < 1.0)) throw ConfigError("--split must lie in (0, 1)");
  const auto venues = group_by_venue(load_observations(args.data));

  write_schema_line(out);
  out << "venue_id,family,n_train,n_test,zero_prob,shape,train_loss,test_loss,flag\n";
  for (const auto& [venue_id, samples] : venues) {
    // Shuffle with a stream keyed by (seed, venue) and cut at the split.
    std::vector<CensoredSample> shuffled = samples;
    RandomStream rng(derive_seed(args.seed, static_cast<std::uint64_t>(venue_id)));
    for (std::size_t i = shuffled.size(); i > 1; --i) {
      std::swap(shuffled[i - 1], shuffled[rng.uniform_index(i)]);
    }
    const auto n_train = static_cast<std::size_t>(
        std::floor(args.split * static_cast<double>(shuffled.size()) + 0.5));
    const std::span<const CensoredSample> train(shuffled.data(), n_train);
    const std::span<const CensoredSample> test(shuffled.data() + n_train,
                                               shuffled.size() - n_train);
    Volume s_max = 0;
    for (const auto& s : samples) s_max = std::max(s_max, s.submitted);

    out << venue_id << ',' << family_name(family) << ',' << train.size() << ',' << test.size()
        << ',';
    std::optional<FitResult> fit;
    try {
      fit = fit_mle(train, family, s_max);
    } catch (const InsufficientDataError&) {
      out << ",,,,insufficient_data\n";
      continue;
    }
    const auto& model = fit->model;
    std::string flag = fit->degenerate ? "degenerate" : "ok";
    std::string test_loss;
    try {
      test_loss = format_number(log_loss(model, test));
    } catch (const InsufficientDataError&) {
      flag = "no_test_data";
    }
    out << format_number(model.zero_prob()) << ','
        << (model.shape() ? format_number(*model.shape()) : "") << ','
        << format_number(log_loss(model, train)) << ',' << test_loss << ',' << flag << '\n';
  }
}

void cmd_estimate(const EstimateArgs& args, std::ostream& out) {
  const ExplorationParams params{args.epsilon, args.delta, args.vcap, args.explore_const};
  try {
    params.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const auto venues = group_by_venue(load_observations(args.data));

  write_schema_line(out);
  out << "venue_id,s,n,d,km_tail,optimistic_tail,half_width,cutoff\n";
  for (const auto& [venue_id, samples] : venues) {
    Volume s_max = args.vcap;
    for (const auto& s : samples) s_max = std::max(s_max, s.submitted);
    VenueCounters counters(s_max);
    for (const auto& s : samples) counters.ingest(s);
    const TailCurve km = km_tail(counters);
    const TailCurve optimistic = optimistic_km(counters, params);
    for (Volume s = 0; s <= s_max; ++s) {
      out << venue_id << ',' << s << ',' << counters.n()[s] << ',' << counters.d()[s] << ','
          << format_number(km.t[s]) << ',' << format_number(optimistic.t[s]) << ','
          << format_number(km_half_width(counters, s, args.vcap, args.delta)) << ','
          << *optimistic.cutoff << '\n';
    }
  }
}

}  // namespace darkpool
