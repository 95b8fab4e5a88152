#include <fstream>
#include <set>
#include <sstream>

#include "darkpool/harness.hpp"

namespace darkpool {
namespace {

using nlohmann::json;

[[noreturn]] void field_error(const std::string& path, const std::string& what) {
  throw ConfigError("config field '" + path + "': " + what);
}

// Walks a JSON object, remembering the dotted path for diagnostics and
// rejecting keys that were never read.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) field_error(path_, "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  std::string child_path(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) field_error(child_path(key), "missing");
    return j_.at(key);
  }

  template <typename T>
  T get(const std::string& key) {
    const json& v = raw(key);
    try {
      if constexpr (std::is_unsigned_v<T>) {
        if (!v.is_number_unsigned()) field_error(child_path(key), "expected a nonnegative integer");
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) field_error(child_path(key), "expected a number");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) field_error(child_path(key), "expected a string");
      }
      return v.get<T>();
    } catch (const json::exception& e) {
      field_error(child_path(key), e.what());
    }
  }

  template <typename T>
  T get_or(const std::string& key, T fallback) {
    return has(key) ? get<T>(key) : fallback;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.contains(key)) field_error(child_path(key), "unknown key");
    }
  }

  const std::string& path() const { return path_; }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

std::vector<double> number_list(const json& j, const std::string& path) {
  if (!j.is_array()) field_error(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) field_error(path + "[" + std::to_string(i) + "]", "expected a number");
    out.push_back(j[i].get<double>());
  }
  return out;
}

VenueModel parse_venue(const json& j, const std::string& path) {
  Section s(j, path);
  const std::string family_text = s.get<std::string>("family");
  Family family;
  try {
    family = parse_family(family_text);
  } catch (const std::invalid_argument& e) {
    field_error(s.child_path("family"), e.what());
  }
  try {
    if (family == Family::Nonparametric) {
      auto pmf = number_list(s.raw("pmf"), s.child_path("pmf"));
      s.finish();
      return VenueModel::nonparametric(std::move(pmf));
    }
    const double zero_prob = s.get<double>("zero_prob");
    const Volume s_max = s.get<Volume>("s_max");
    std::optional<double> shape;
    if (family != Family::ZbUniform) shape = s.get<double>("shape");
    s.finish();
    return VenueModel::parametric(family, zero_prob, shape, s_max);
  } catch (const std::invalid_argument& e) {
    field_error(path, e.what());
  }
}

VolumeSource parse_volume(const json& j, const std::string& path) {
  try {
    if (j.is_number_unsigned()) return VolumeSource::constant(j.get<Volume>());
    Section s(j, path);
    auto probs = number_list(s.raw("probs"), s.child_path("probs"));
    s.finish();
    return VolumeSource::distribution(std::move(probs));
  } catch (const std::invalid_argument& e) {
    field_error(path, e.what());
  }
}

PolicySpec parse_policy(const json& j, const std::string& path) {
  Section s(j, path);
  PolicySpec spec;
  try {
    spec.kind = parse_policy_kind(s.get<std::string>("kind"));
  } catch (const std::invalid_argument& e) {
    field_error(s.child_path("kind"), e.what());
  }
  spec.name = s.get_or<std::string>("name", "");
  switch (spec.kind) {
    case PolicyKind::LearnerKM:
      if (s.has("epsilon")) spec.epsilon = s.get<double>("epsilon");
      spec.delta = s.get_or<double>("delta", spec.delta);
      spec.explore_const = s.get_or<double>("explore_const", spec.explore_const);
      if (spec.epsilon && !(*spec.epsilon > 0.0)) field_error(s.child_path("epsilon"), "must be positive");
      if (!(spec.delta > 0.0 && spec.delta < 1.0)) field_error(s.child_path("delta"), "must lie in (0, 1)");
      if (!(spec.explore_const > 0.0)) field_error(s.child_path("explore_const"), "must be positive");
      break;
    case PolicyKind::LearnerParametric:
      if (s.has("family")) {
        try {
          spec.family = parse_family(s.get<std::string>("family"));
        } catch (const std::invalid_argument& e) {
          field_error(s.child_path("family"), e.what());
        }
      }
      spec.refit_every = s.get_or<std::size_t>("refit_every", spec.refit_every);
      if (spec.refit_every < 1) field_error(s.child_path("refit_every"), "must be at least 1");
      break;
    case PolicyKind::Bandit:
      spec.alpha = s.get_or<double>("alpha", spec.alpha);
      if (!(spec.alpha > 1.0)) field_error(s.child_path("alpha"), "must exceed 1");
      break;
    case PolicyKind::Ideal:
    case PolicyKind::Uniform:
      break;
  }
  s.finish();
  return spec;
}

std::pair<std::size_t, std::size_t> line_and_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

}  // namespace

nlohmann::json venue_to_json(const VenueModel& model) {
  json j;
  j["family"] = std::string(family_name(model.family()));
  if (model.family() == Family::Nonparametric) {
    j["pmf"] = model.pmf_values();
    return j;
  }
  j["zero_prob"] = model.zero_prob();
  if (model.shape()) j["shape"] = *model.shape();
  j["s_max"] = model.s_max();
  return j;
}

VenueModel venue_from_json(const nlohmann::json& j) { return parse_venue(j, "venue"); }

ExperimentConfig parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, column] = line_and_column(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ConfigError("config syntax error at line " + std::to_string(line) + ", column " +
                      std::to_string(column) + ": " + e.what());
  }

  ExperimentConfig config;
  Section root(doc, "");

  Section sim(root.raw("sim"), "sim");
  const json& venues = sim.raw("venues");
  if (!venues.is_array() || venues.empty()) field_error("sim.venues", "expected a nonempty array");
  for (std::size_t i = 0; i < venues.size(); ++i) {
    config.sim.venues.push_back(parse_venue(venues[i], "sim.venues[" + std::to_string(i) + "]"));
  }
  config.sim.volume = parse_volume(sim.raw("volume"), "sim.volume");
  config.sim.episodes = sim.get_or<std::size_t>("episodes", config.sim.episodes);
  config.sim.trials = sim.get_or<std::size_t>("trials", config.sim.trials);
  config.sim.seed = sim.get_or<std::uint64_t>("seed", config.sim.seed);
  config.sim.half_life_cap = sim.get_or<std::size_t>("half_life_cap", config.sim.half_life_cap);
  sim.finish();
  try {
    config.sim.validate();
  } catch (const std::invalid_argument& e) {
    field_error("sim", e.what());
  }

  const json& policies = root.raw("policies");
  if (!policies.is_array() || policies.empty()) field_error("policies", "expected a nonempty array");
  for (std::size_t i = 0; i < policies.size(); ++i) {
    config.policies.push_back(parse_policy(policies[i], "policies[" + std::to_string(i) + "]"));
  }

  if (root.has("output")) {
    Section out(root.raw("output"), "output");
    config.output_path = out.get_or<std::string>("path", config.output_path.string());
    auto& opt = config.options;
    if (out.has("metrics")) {
      const json& metrics = out.raw("metrics");
      if (!metrics.is_array() || metrics.empty()) field_error("output.metrics", "expected a nonempty array");
      opt.filled_fraction = false;
      opt.half_life = false;
      for (const auto& m : metrics) {
        const std::string name = m.is_string() ? m.get<std::string>() : "";
        if (name == "filled_fraction") {
          opt.filled_fraction = true;
        } else if (name == "half_life") {
          opt.half_life = true;
        } else {
          field_error("output.metrics", "unknown metric " + m.dump());
        }
      }
    }
    opt.smoothing = out.get_or<double>("smoothing", opt.smoothing);
    opt.half_life_interval = out.get_or<std::size_t>("half_life_interval", opt.half_life_interval);
    opt.final_window = out.get_or<std::size_t>("final_window", opt.final_window);
    opt.threads = out.get_or<unsigned>("threads", opt.threads);
    if (!(opt.smoothing >= 0.0 && opt.smoothing < 1.0)) field_error("output.smoothing", "must lie in [0, 1)");
    if (opt.half_life_interval < 1) field_error("output.half_life_interval", "must be at least 1");
    if (opt.final_window < 1) field_error("output.final_window", "must be at least 1");
    out.finish();
  }
  root.finish();
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

nlohmann::json config_to_json(const ExperimentConfig& config) {
  json sim;
  sim["venues"] = json::array();
  for (const auto& v : config.sim.venues) sim["venues"].push_back(venue_to_json(v));
  if (config.sim.volume.is_constant()) {
    sim["volume"] = config.sim.volume.max();
  } else {
    sim["volume"] = {{"probs", config.sim.volume.probabilities()}};
  }
  sim["episodes"] = config.sim.episodes;
  sim["trials"] = config.sim.trials;
  sim["seed"] = config.sim.seed;
  sim["half_life_cap"] = config.sim.half_life_cap;

  json policies = json::array();
  for (const auto& p : config.policies) {
    json j;
    j["kind"] = std::string(policy_kind_name(p.kind));
    if (!p.name.empty()) j["name"] = p.name;
    switch (p.kind) {
      case PolicyKind::LearnerKM:
        if (p.epsilon) j["epsilon"] = *p.epsilon;
        j["delta"] = p.delta;
        j["explore_const"] = p.explore_const;
        break;
      case PolicyKind::LearnerParametric:
        j["family"] = std::string(family_name(p.family));
        j["refit_every"] = p.refit_every;
        break;
      case PolicyKind::Bandit:
        j["alpha"] = p.alpha;
        break;
      default:
        break;
    }
    policies.push_back(std::move(j));
  }

  const auto& opt = config.options;
  json metrics = json::array();
  if (opt.filled_fraction) metrics.push_back("filled_fraction");
  if (opt.half_life) metrics.push_back("half_life");
  json output{{"path", config.output_path.string()},
              {"metrics", metrics},
              {"smoothing", opt.smoothing},
              {"half_life_interval", opt.half_life_interval},
              {"final_window", opt.final_window},
              {"threads", opt.threads}};
  return json{{"sim", sim}, {"policies", policies}, {"output", output}};
}

}  // namespace darkpool
