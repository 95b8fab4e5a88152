#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "darkpool/allocator.hpp"
#include "darkpool/dist_models.hpp"
#include "darkpool/harness.hpp"
#include "darkpool/km_estimator.hpp"
#include "darkpool/policies.hpp"
#include "darkpool/simulator.hpp"

#define STRINGIFY(x) #x
#define MACRO_STRINGIFY(x) STRINGIFY(x)

namespace py = pybind11;
using namespace darkpool;

namespace {

void bind_core_types(py::module_& m) {
  py::class_<RandomStream>(m, "RandomStream")
      .def(py::init<std::uint64_t>(), py::arg("seed"))
      .def("uniform", &RandomStream::uniform)
      .def("uniform_index", &RandomStream::uniform_index, py::arg("n"));
  m.def("derive_seed", &derive_seed, py::arg("master"), py::arg("index"), py::arg("purpose") = 0);

  py::class_<CensoredSample>(m, "CensoredSample")
      .def(py::init([](Volume submitted, Volume consumed) {
             CensoredSample s{submitted, consumed};
             s.validate();
             return s;
           }),
           py::arg("submitted"), py::arg("consumed"))
      .def_readonly("submitted", &CensoredSample::submitted)
      .def_readonly("consumed", &CensoredSample::consumed)
      .def_property_readonly("censored", &CensoredSample::censored)
      .def_property_readonly("direct", &CensoredSample::direct)
      .def("__eq__", [](const CensoredSample& a, const CensoredSample& b) { return a == b; })
      .def("__repr__", [](const CensoredSample& s) {
        return "CensoredSample(submitted=" + std::to_string(s.submitted) +
               ", consumed=" + std::to_string(s.consumed) + ")";
      });

  py::class_<TailCurve>(m, "TailCurve")
      .def(py::init([](std::vector<double> t, std::optional<Volume> cutoff) {
             return TailCurve{std::move(t), cutoff};
           }),
           py::arg("t"), py::arg("cutoff") = std::nullopt)
      .def_readonly("t", &TailCurve::t)
      .def_readonly("cutoff", &TailCurve::cutoff)
      .def("__len__", &TailCurve::size)
      .def("__getitem__", &TailCurve::at);

  py::class_<Allocation>(m, "Allocation")
      .def_readonly("v", &Allocation::v)
      .def_readonly("total", &Allocation::total)
      .def("__len__", &Allocation::venues)
      .def("__getitem__", &Allocation::operator[])
      .def("__eq__", [](const Allocation& a, const Allocation& b) { return a == b; })
      .def("__repr__", [](const Allocation& a) {
        std::string s = "Allocation([";
        for (std::size_t i = 0; i < a.v.size(); ++i) s += (i ? ", " : "") + std::to_string(a.v[i]);
        return s + "])";
      });

  py::register_exception<InsufficientDataError>(m, "InsufficientDataError", PyExc_ValueError);
  py::register_exception<UnsupportedOperationError>(m, "UnsupportedOperationError",
                                                    PyExc_TypeError);
}

void bind_dist_models(py::module_& m) {
  py::enum_<Family>(m, "Family")
      .value("ZbUniform", Family::ZbUniform)
      .value("ZbPowerLaw", Family::ZbPowerLaw)
      .value("ZbPoisson", Family::ZbPoisson)
      .value("ZbExponential", Family::ZbExponential)
      .value("Nonparametric", Family::Nonparametric);
  m.def("parse_family", [](const std::string& name) { return parse_family(name); });
  m.def("family_name", [](Family f) { return std::string(family_name(f)); });

  py::class_<VenueModel>(m, "VenueModel")
      .def_static("zb_uniform", &VenueModel::zb_uniform, py::arg("zero_prob"), py::arg("s_max"))
      .def_static("zb_power_law", &VenueModel::zb_power_law, py::arg("zero_prob"),
                  py::arg("beta"), py::arg("s_max"))
      .def_static("zb_poisson", &VenueModel::zb_poisson, py::arg("zero_prob"), py::arg("rate"),
                  py::arg("s_max"))
      .def_static("zb_exponential", &VenueModel::zb_exponential, py::arg("zero_prob"),
                  py::arg("rate"), py::arg("s_max"))
      .def_static("nonparametric", &VenueModel::nonparametric, py::arg("pmf"))
      .def_property_readonly("family", &VenueModel::family)
      .def_property_readonly("zero_prob", &VenueModel::zero_prob)
      .def_property_readonly("shape", &VenueModel::shape)
      .def_property_readonly("s_max", &VenueModel::s_max)
      .def("pmf", &VenueModel::pmf, py::arg("s"))
      .def("pmf_values", &VenueModel::pmf_values)
      .def("tail_curve", &VenueModel::tail)
      .def("sample", &VenueModel::sample, py::arg("rng"));

  m.def("mean_min_fill", &mean_min_fill, py::arg("model"), py::arg("v"));

  py::class_<FitResult>(m, "FitResult")
      .def_readonly("model", &FitResult::model)
      .def_readonly("log_likelihood", &FitResult::log_likelihood)
      .def_readonly("degenerate", &FitResult::degenerate)
      .def_readonly("samples", &FitResult::samples);

  m.def(
      "fit_mle",
      [](const std::vector<CensoredSample>& samples, Family family, std::optional<Volume> s_max) {
        return fit_mle(samples, family, s_max);
      },
      py::arg("samples"), py::arg("family"), py::arg("s_max") = std::nullopt);
  m.def(
      "log_loss",
      [](const VenueModel& model, const std::vector<CensoredSample>& samples, double floor) {
        return log_loss(model, samples, floor);
      },
      py::arg("model"), py::arg("samples"), py::arg("floor") = kProbabilityFloor);
}

void bind_estimator(py::module_& m) {
  py::class_<VenueCounters>(m, "VenueCounters")
      .def(py::init<Volume>(), py::arg("s_max"))
      .def("ingest", &VenueCounters::ingest, py::arg("sample"))
      .def_property_readonly("s_max", &VenueCounters::s_max)
      .def_property_readonly("d", &VenueCounters::d)
      .def_property_readonly("n", &VenueCounters::n)
      .def_property_readonly("total_obs", &VenueCounters::total_obs);

  py::class_<ExplorationParams>(m, "ExplorationParams")
      .def(py::init([](double epsilon, double delta, Volume v_cap, double explore_const) {
             ExplorationParams p{epsilon, delta, v_cap, explore_const};
             p.validate();
             return p;
           }),
           py::arg("epsilon"), py::arg("delta"), py::arg("v_cap"), py::arg("explore_const") = 128.0)
      .def_readonly("epsilon", &ExplorationParams::epsilon)
      .def_readonly("delta", &ExplorationParams::delta)
      .def_readonly("v_cap", &ExplorationParams::v_cap)
      .def_readonly("explore_const", &ExplorationParams::explore_const);

  m.def("km_tail", &km_tail, py::arg("counters"));
  m.def("cutoff", &cutoff, py::arg("counters"), py::arg("params"));
  m.def("optimistic_km", &optimistic_km, py::arg("counters"), py::arg("params"));
  m.def("km_half_width", &km_half_width, py::arg("counters"), py::arg("s"), py::arg("v_cap"),
        py::arg("delta"));
}

void bind_allocator(py::module_& m) {
  m.def(
      "greedy_allocate",
      [](Volume total, const std::vector<TailCurve>& tails) { return greedy_allocate(total, tails); },
      py::arg("total"), py::arg("tails"));
  m.def(
      "brute_force_allocate",
      [](Volume total, const std::vector<TailCurve>& tails) {
        return brute_force_allocate(total, tails);
      },
      py::arg("total"), py::arg("tails"));
  m.def(
      "expected_fill",
      [](const Allocation& alloc, const std::vector<TailCurve>& tails) {
        return expected_fill(alloc, tails);
      },
      py::arg("alloc"), py::arg("tails"));
  m.def("make_allocation", [](std::vector<Volume> v) { return Allocation(std::move(v)); },
        py::arg("v"));
}

void bind_policies(py::module_& m) {
  py::enum_<PolicyKind>(m, "PolicyKind")
      .value("LearnerKM", PolicyKind::LearnerKM)
      .value("LearnerParametric", PolicyKind::LearnerParametric)
      .value("Ideal", PolicyKind::Ideal)
      .value("Uniform", PolicyKind::Uniform)
      .value("Bandit", PolicyKind::Bandit);

  py::class_<Policy>(m, "Policy")
      .def_static("learner_km", &Policy::learner_km, py::arg("venues"), py::arg("v_cap"),
                  py::arg("epsilon"), py::arg("delta"), py::arg("explore_const") = 128.0)
      .def_static("learner_parametric", &Policy::learner_parametric, py::arg("venues"),
                  py::arg("v_cap"), py::arg("family") = Family::ZbPowerLaw,
                  py::arg("refit_every") = 1)
      .def_static("ideal",
                  [](const std::vector<VenueModel>& venues, Volume v_cap) {
                    return Policy::ideal(venues, v_cap);
                  },
                  py::arg("venues"), py::arg("v_cap"))
      .def_static("uniform", &Policy::uniform, py::arg("venues"))
      .def_static("bandit",
                  [](std::vector<double> weights, double alpha) {
                    return Policy::bandit(std::move(weights), alpha);
                  },
                  py::arg("weights"), py::arg("alpha") = kDefaultBanditAlpha)
      .def_property_readonly("kind", &Policy::kind)
      .def_property_readonly("venues", &Policy::venues)
      .def("decide", &Policy::decide, py::arg("total"))
      .def(
          "observe",
          [](Policy& p, const std::vector<CensoredSample>& fills) { p.observe(fills); },
          py::arg("fills"))
      .def("current_tails", &Policy::current_tails)
      .def("cutoffs", &Policy::cutoffs)
      .def_property_readonly("weights", &Policy::weights);
}

void bind_simulator(py::module_& m) {
  py::class_<CurvePoint>(m, "CurvePoint")
      .def_readonly("episode", &CurvePoint::episode)
      .def_readonly("mean", &CurvePoint::mean)
      .def_readonly("smoothed", &CurvePoint::smoothed)
      .def_readonly("std_error", &CurvePoint::std_error);
  py::class_<WindowSummary>(m, "WindowSummary")
      .def_readonly("mean", &WindowSummary::mean)
      .def_readonly("std_error", &WindowSummary::std_error)
      .def_readonly("points", &WindowSummary::points);
  py::class_<ExperimentResult>(m, "ExperimentResult")
      .def_readonly("policy", &ExperimentResult::policy)
      .def_readonly("filled_fraction", &ExperimentResult::filled_fraction)
      .def_readonly("filled_fraction_final", &ExperimentResult::filled_fraction_final)
      .def_readonly("half_life", &ExperimentResult::half_life)
      .def_readonly("half_life_final", &ExperimentResult::half_life_final);

  m.def(
      "step",
      [](const std::vector<VenueModel>& venues, const Allocation& alloc, RandomStream& rng) {
        return step(venues, alloc, rng);
      },
      py::arg("venues"), py::arg("alloc"), py::arg("rng"));

  m.def(
      "order_half_life",
      [](const std::vector<VenueModel>& venues, const Policy& policy, Volume total,
         RandomStream& rng, std::size_t cap) {
        SimConfig config;
        config.venues = venues;
        config.half_life_cap = cap;
        return order_half_life(config, policy, total, rng);
      },
      py::arg("venues"), py::arg("policy"), py::arg("total"), py::arg("rng"),
      py::arg("cap") = 1000,
      "Resubmission steps to fill more than half of total; None if the cap is reached.");

  m.def(
      "run_experiments",
      [](const std::string& config_json) {
        const ExperimentConfig config = parse_config(config_json);
        std::vector<ExperimentResult> results;
        for (const auto& spec : config.policies) {
          results.push_back(run_experiment(config.sim, spec, config.options));
        }
        return results;
      },
      py::arg("config_json"), "Run every policy of a JSON experiment config.");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Censored multi-venue exploration: estimation, allocation and simulation.";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  bind_core_types(m);
  bind_dist_models(m);
  bind_estimator(m);
  bind_allocator(m);
  bind_policies(m);
  bind_simulator(m);

  m.def(
      "cli",
      [](const std::vector<std::string>& args) {
        std::vector<const char*> argv{"darkpool"};
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out, err;
        const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Run the command-line front end; returns (exit_code, stdout, stderr).");

#ifdef VERSION_INFO
  m.attr("__version__") = MACRO_STRINGIFY(VERSION_INFO);
#else
  m.attr("__version__") = "dev";
#endif
}
