#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "mlitune/mlitune.hpp"

namespace py = pybind11;
using namespace mlitune;

namespace {

py::dict evaluation_dict(const Evaluation& e) {
  py::dict d;
  d["of"] = e.fitness.of_value();
  d["thd_pct"] = e.metrics.thd_percent;
  d["vrms_V"] = e.metrics.v_rms;
  d["vrms_err_V"] = e.fitness.vrms_error();
  d["degenerate"] = e.fitness.is_degenerate();
  return d;
}

py::dict log_dict(const TimeSeriesLog& log) {
  py::list records;
  for (const auto& r : log.records) {
    py::dict d;
    d["t_s"] = r.t;
    d["mode"] = r.mode == Mode::kSteady ? "steady" : "tuning";
    d["connected"] = r.connected;
    d["of"] = r.of_value;
    d["thd_pct"] = r.thd_percent;
    d["vrms_V"] = r.v_rms;
    d["angles"] = r.angles.vector();
    records.append(d);
  }
  const RunSummary& s = log.summary;
  py::dict summary;
  summary["angles"] = s.best_angles.vector();
  summary["of"] = s.final_fitness.of_value();
  summary["thd_pct"] = s.final_metrics.thd_percent;
  summary["vrms_V"] = s.final_metrics.v_rms;
  summary["vrms_err_V"] = s.final_fitness.vrms_error();
  summary["grid_current_thd_pct"] = s.grid_current_thd;
  summary["evaluations"] = s.evaluations_used;
  summary["tuning_sessions"] = s.tuning_sessions;

  py::dict out;
  out["records"] = records;
  out["summary"] = summary;
  out["final_vdc"] = log.final_config.vdc;
  return out;
}

std::vector<double> spectrum_list(const HarmonicSpectrum& s) { return s.magnitudes; }

// Exception types owned by the module object; kept as borrowed pointers for
// the capture-free translator.
PyObject* g_exhausted = nullptr;
PyObject* g_protocol = nullptr;

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Cascaded H-bridge staircase simulation, harmonic analysis and hybrid GA/PSO tuning";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ArgumentError>(m, "ArgumentError", PyExc_ValueError);
  py::register_exception<ScenarioError>(m, "ScenarioError", PyExc_ValueError);
  py::register_exception<SingularCircuitError>(m, "SingularCircuitError", PyExc_ArithmeticError);
  py::register_exception<UndefinedThdError>(m, "UndefinedThdError", PyExc_ArithmeticError);
  g_protocol = py::register_exception<ProtocolError>(m, "ProtocolError", PyExc_RuntimeError).ptr();
  g_exhausted =
      py::register_exception<SearchExhausted>(m, "SearchExhausted", PyExc_RuntimeError).ptr();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const SearchExhausted& e) {
      // args: (message, reason, best angles, best objective or None)
      py::object best_of = e.best_fitness() ? py::cast(e.best_fitness()->of_value()) : py::none();
      py::tuple args = py::make_tuple(
          e.what(), e.reason() == SearchExhausted::Reason::kBudget ? "budget" : "stagnation",
          e.best().vector(), best_of);
      PyErr_SetObject(g_exhausted, args.ptr());
    } catch (const OrderingError& e) {
      PyErr_SetString(g_protocol, e.what());
    }
  });

  py::class_<ResistiveLoad>(m, "ResistiveLoad")
      .def(py::init<>())
      .def(py::init([](double r) { return ResistiveLoad{r}; }), py::arg("r_load"))
      .def_readwrite("r_load", &ResistiveLoad::r_load);
  py::class_<IdealGrid>(m, "IdealGrid")
      .def(py::init<>())
      .def(py::init([](double v, double f, double ph) { return IdealGrid{v, f, ph}; }),
           py::arg("v_rms") = 220.0, py::arg("frequency") = 50.0, py::arg("phase") = 0.0)
      .def_readwrite("v_rms", &IdealGrid::v_rms)
      .def_readwrite("frequency", &IdealGrid::frequency)
      .def_readwrite("phase", &IdealGrid::phase);
  py::class_<OpenCircuit>(m, "OpenCircuit").def(py::init<>());

  py::class_<InverterConfig>(m, "InverterConfig")
      .def(py::init<>())
      .def(py::init([](std::vector<double> vdc, std::vector<double> r_internal, double r_line,
                       Load load, double f0) {
             InverterConfig c;
             c.bridges = vdc.size();
             c.vdc = std::move(vdc);
             c.r_internal = std::move(r_internal);
             c.r_line = r_line;
             c.load = load;
             c.f0 = f0;
             c.validate();
             return c;
           }),
           py::arg("vdc"), py::arg("r_internal") = std::vector<double>{}, py::arg("r_line") = 0.0,
           py::arg("load") = Load{OpenCircuit{}}, py::arg("f0") = 50.0)
      .def_readwrite("bridges", &InverterConfig::bridges)
      .def_readwrite("vdc", &InverterConfig::vdc)
      .def_readwrite("r_internal", &InverterConfig::r_internal)
      .def_readwrite("r_line", &InverterConfig::r_line)
      .def_readwrite("load", &InverterConfig::load)
      .def_readwrite("f0", &InverterConfig::f0)
      .def("validate", &InverterConfig::validate)
      .def("level_count", &InverterConfig::level_count);

  py::class_<ObjectiveConfig>(m, "ObjectiveConfig")
      .def(py::init([](double k_v, double v_target, std::size_t n_max, std::size_t n_samples) {
             ObjectiveConfig o{k_v, v_target, n_max, n_samples};
             o.validate();
             return o;
           }),
           py::arg("k_v") = 0.5, py::arg("v_target") = 220.0,
           py::arg("n_max") = kDefaultHarmonicCutoff, py::arg("n_samples") = kDefaultSamples)
      .def_readwrite("k_v", &ObjectiveConfig::k_v)
      .def_readwrite("v_target", &ObjectiveConfig::v_target)
      .def_readwrite("n_max", &ObjectiveConfig::n_max)
      .def_readwrite("n_samples", &ObjectiveConfig::n_samples);

  py::class_<FiringAngles>(m, "FiringAngles")
      .def(py::init<std::vector<double>>(), py::arg("degrees"))
      .def("degrees", &FiringAngles::vector)
      .def("__len__", &FiringAngles::size)
      .def("__getitem__", [](const FiringAngles& a, std::size_t k) {
        if (k >= a.size()) throw py::index_error();
        return a[k];
      })
      .def("__eq__", [](const FiringAngles& a, const FiringAngles& b) { return a == b; })
      .def("__repr__", [](const FiringAngles& a) {
        return "FiringAngles(" + py::repr(py::cast(a.vector())).cast<std::string>() + ")";
      });
  py::implicitly_convertible<std::vector<double>, FiringAngles>();

  py::class_<Fitness>(m, "Fitness")
      .def(py::init<double, double, double>(), py::arg("thd_pct"), py::arg("vrms_err"),
           py::arg("k_v"))
      .def_static("from_value", &Fitness::from_value)
      .def_property_readonly("of", &Fitness::of_value)
      .def_property_readonly("thd_pct", &Fitness::thd_percent)
      .def_property_readonly("vrms_err", &Fitness::vrms_error)
      .def_property_readonly("degenerate", &Fitness::is_degenerate);

  m.def("synth_staircase", &synth_staircase, py::arg("config"), py::arg("angles"),
        py::arg("n_samples") = kDefaultSamples, "Ideal no-load staircase over one period.");
  m.def(
      "simulate_period",
      [](const InverterConfig& c, const FiringAngles& a, std::size_t n) {
        const PeriodWaveform w = simulate_period(c, a, n);
        return py::make_tuple(w.v_out, w.i_out);
      },
      py::arg("config"), py::arg("angles"), py::arg("n_samples") = kDefaultSamples,
      "(v_out, i_out) of the loaded circuit over one period.");
  m.def(
      "dft_spectrum",
      [](const std::vector<double>& x, std::size_t n_max) { return spectrum_list(dft_spectrum(x, n_max)); },
      py::arg("samples"), py::arg("n_max") = kDefaultHarmonicCutoff,
      "Peak harmonic magnitudes 1..n_max.");
  m.def(
      "analytic_spectrum",
      [](const InverterConfig& c, const FiringAngles& a, std::size_t n_max) {
        return spectrum_list(analytic_spectrum(c, a, n_max));
      },
      py::arg("config"), py::arg("angles"), py::arg("n_max") = kDefaultHarmonicCutoff);
  m.def(
      "thd", [](std::vector<double> mags) { return thd(HarmonicSpectrum{std::move(mags)}); },
      py::arg("magnitudes"), "THD in percent of a magnitude list starting at the fundamental.");
  m.def("rms", [](const std::vector<double>& x) { return rms(x); }, py::arg("samples"));
  m.def(
      "evaluate",
      [](const InverterConfig& c, const ObjectiveConfig& o, const FiringAngles& a) {
        return evaluation_dict(evaluate_detailed(c, o, a));
      },
      py::arg("config"), py::arg("objective") = ObjectiveConfig{}, py::arg("angles"));

  py::class_<HybridOptimizer>(m, "HybridOptimizer")
      .def(py::init([](std::size_t dim, std::size_t population, std::uint64_t seed,
                       std::size_t budget, std::size_t stagnation_generations,
                       std::optional<FiringAngles> seed_position) {
             StopCriteria stop;
             stop.budget = budget;
             stop.stagnation_generations = stagnation_generations;
             return HybridOptimizer(dim, {}, {}, population, seed, stop, std::move(seed_position));
           }),
           py::arg("dimension"), py::arg("population") = 20, py::arg("seed") = 1,
           py::arg("budget") = 500, py::arg("stagnation_generations") = 5,
           py::arg("seed_position") = std::nullopt)
      .def(
          "ask",
          [](HybridOptimizer& o) {
            const Candidate c = o.ask();
            return py::make_tuple(c.id, c.angles.vector());
          },
          "(id, angles) of the next candidate; raises SearchExhausted when done.")
      .def(
          "tell",
          [](HybridOptimizer& o, std::uint64_t id, py::object fitness) {
            if (py::isinstance<Fitness>(fitness)) {
              o.tell(id, fitness.cast<Fitness>());
            } else {
              o.tell(id, Fitness::from_value(fitness.cast<double>()));
            }
          },
          py::arg("id"), py::arg("fitness"))
      .def("finished", &HybridOptimizer::finished)
      .def_property_readonly("evaluations", &HybridOptimizer::evaluations_used)
      .def_property_readonly("best_angles",
                             [](const HybridOptimizer& o) { return o.best_position().vector(); })
      .def_property_readonly("best_of", [](const HybridOptimizer& o) -> std::optional<double> {
        if (!o.best_fitness()) return std::nullopt;
        return o.best_fitness()->of_value();
      });

  py::class_<Scenario>(m, "Scenario")
      .def_readwrite("inverter", &Scenario::inverter)
      .def_readwrite("objective", &Scenario::objective)
      .def_readwrite("population", &Scenario::population)
      .def_readwrite("budget_evals", &Scenario::budget_evals)
      .def_readwrite("duration", &Scenario::duration)
      .def_readwrite("seed", &Scenario::seed)
      .def_readwrite("disconnect_during_tuning", &Scenario::disconnect_during_tuning)
      .def_readwrite("stagnation_generations", &Scenario::stagnation_generations)
      .def_property(
          "initial_angles",
          [](const Scenario& s) -> std::optional<std::vector<double>> {
            if (!s.initial_angles) return std::nullopt;
            return s.initial_angles->vector();
          },
          [](Scenario& s, std::optional<FiringAngles> a) { s.initial_angles = std::move(a); })
      .def("__eq__", [](const Scenario& a, const Scenario& b) { return a == b; });

  m.def("parse_scenario", &parse_scenario, py::arg("path"));
  m.def("parse_scenario_text", &parse_scenario_text, py::arg("text"),
        py::arg("source") = "<scenario>");
  m.def("scenario_to_json", &scenario_to_json, py::arg("scenario"), py::arg("indent") = 2);
  m.def(
      "run_scenario",
      [](const Scenario& s) {
        TimeSeriesLog log;
        {
          py::gil_scoped_release release;
          log = run_scenario(s);
        }
        return log_dict(log);
      },
      py::arg("scenario"), "Timeline run; returns {'records', 'summary', 'final_vdc'}.");
  m.def(
      "optimize_static",
      [](const Scenario& s) {
        TimeSeriesLog log;
        {
          py::gil_scoped_release release;
          log = optimize_static(s);
        }
        return log_dict(log);
      },
      py::arg("scenario"));
  m.def(
      "emit_report",
      [](const Scenario& s, const std::filesystem::path& out_dir, bool simulate) {
        TimeSeriesLog log = simulate ? run_scenario(s) : optimize_static(s);
        emit_report(log, out_dir);
        const py::dict d = log_dict(log);
        return py::object(d["summary"]);
      },
      py::arg("scenario"), py::arg("out_dir"), py::arg("simulate") = true,
      "Run the scenario and write timeseries.csv, waveform.csv and summary.csv.");
  m.def(
      "grid_search",
      [](const InverterConfig& c, const ObjectiveConfig& o, double step, std::size_t threads) {
        GridSearchResult r;
        {
          py::gil_scoped_release release;
          r = grid_search(c, o, {.step = step, .threads = threads, .keep_values = false});
        }
        return py::make_tuple(r.angles.vector(), r.fitness.of_value(), r.evaluated);
      },
      py::arg("config"), py::arg("objective") = ObjectiveConfig{}, py::arg("step") = 0.5,
      py::arg("threads") = 0, "(angles, of, evaluated) of the exhaustive grid minimum.");
}
