// Python bindings for the core model, arbiters and experiment commands.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "wdmarb/algorithms.hpp"
#include "wdmarb/config.hpp"
#include "wdmarb/experiments.hpp"
#include "wdmarb/ideal_arbiter.hpp"
#include "wdmarb/metrics.hpp"
#include "wdmarb/model.hpp"
#include "wdmarb/oblivious_env.hpp"
#include "wdmarb/output.hpp"

namespace py = pybind11;
using namespace wdmarb;

namespace {

Table run_command(const std::string& name, const ExperimentConfig& cfg) {
  if (name == "shmoo") return cmd_shmoo(cfg);
  if (name == "mintr") return cmd_mintr(cfg);
  if (name == "ltd") return cmd_ltd(cfg);
  if (name == "sensitivity") return cmd_sensitivity(cfg);
  if (name == "fsr") return cmd_fsr(cfg);
  if (name == "breakdown") return cmd_breakdown(cfg);
  if (name == "sample") return cmd_sample(cfg);
  throw std::invalid_argument("unknown command: " + name);
}

py::object cell_to_py(const Cell& c) {
  return std::visit(
      [](const auto& v) -> py::object {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>)
          return py::none();
        else
          return py::cast(v);
      },
      c);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "WDM wavelength arbitration simulator";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<InvariantViolation>(m, "InvariantViolation", PyExc_AssertionError);

  py::enum_<Policy>(m, "Policy").value("LtD", Policy::LtD).value("LtC", Policy::LtC).value("LtA", Policy::LtA);
  py::enum_<Algorithm>(m, "Algorithm")
      .value("Sequential", Algorithm::Sequential)
      .value("RsSsm", Algorithm::RsSsm)
      .value("VtRsSsm", Algorithm::VtRsSsm);
  py::enum_<OutcomeClass>(m, "OutcomeClass")
      .value("Success", OutcomeClass::Success)
      .value("ZeroLock", OutcomeClass::ZeroLock)
      .value("DuplLock", OutcomeClass::DuplLock)
      .value("LaneOrderError", OutcomeClass::LaneOrderError);

  py::class_<DwdmGridSpec>(m, "DwdmGridSpec")
      .def(py::init<>())
      .def_readwrite("n_ch", &DwdmGridSpec::n_ch)
      .def_readwrite("grid_spacing", &DwdmGridSpec::grid_spacing)
      .def_readwrite("center", &DwdmGridSpec::center)
      .def_readwrite("ring_bias", &DwdmGridSpec::ring_bias)
      .def_static("preset", &DwdmGridSpec::preset, py::arg("n_ch"), py::arg("grid_spacing"),
                  py::arg("center") = 1300.0);

  py::class_<VariationParams>(m, "VariationParams")
      .def(py::init<>())
      .def_readwrite("grid_offset_bound", &VariationParams::grid_offset_bound)
      .def_readwrite("laser_local_bound", &VariationParams::laser_local_bound)
      .def_readwrite("ring_local_bound", &VariationParams::ring_local_bound)
      .def_readwrite("fsr_mean", &VariationParams::fsr_mean)
      .def_readwrite("fsr_rel_bound", &VariationParams::fsr_rel_bound)
      .def_readwrite("tr_mean", &VariationParams::tr_mean)
      .def_readwrite("tr_rel_bound", &VariationParams::tr_rel_bound)
      .def_static("defaults_for", &VariationParams::defaults_for);

  py::class_<SpectralOrdering>(m, "SpectralOrdering")
      .def(py::init<std::vector<int>>())
      .def_static("natural", &SpectralOrdering::natural)
      .def_static("permuted", &SpectralOrdering::permuted)
      .def_property_readonly("ranks", &SpectralOrdering::ranks)
      .def("__len__", &SpectralOrdering::size)
      .def("__repr__", &SpectralOrdering::to_string);

  py::class_<MwlSample>(m, "MwlSample")
      .def_readonly("wavelengths", &MwlSample::wavelengths)
      .def_readonly("grid_offset", &MwlSample::grid_offset);
  py::class_<Ring>(m, "Ring")
      .def_readonly("resonance", &Ring::resonance)
      .def_readonly("fsr", &Ring::fsr)
      .def_readonly("tr", &Ring::tr);
  py::class_<RingRowSample>(m, "RingRowSample")
      .def_readonly("rings", &RingRowSample::rings)
      .def("with_tr_mean", &RingRowSample::with_tr_mean);

  m.def(
      "sample_instance",
      [](const DwdmGridSpec& grid, const VariationParams& var, const SpectralOrdering& r, std::uint64_t seed) {
        Rng rng(seed);
        MwlSample mwl = sample_mwl(grid, var, rng);
        RingRowSample row = sample_ring_row(grid, var, r, rng);
        return py::make_tuple(mwl, row);
      },
      py::arg("grid"), py::arg("variation"), py::arg("r"), py::arg("seed"),
      "Draw one (laser, ring row) pair from a seeded stream.");

  py::class_<IdealResult>(m, "IdealResult")
      .def_readonly("feasible", &IdealResult::feasible)
      .def_readonly("assignment", &IdealResult::assignment)
      .def_readonly("shift", &IdealResult::shift)
      .def_readonly("total_tuning", &IdealResult::total_tuning);
  m.def("arbitrate_ideal",
        py::overload_cast<const MwlSample&, const RingRowSample&, Policy, const SpectralOrdering&, double>(
            &arbitrate_ideal),
        py::arg("mwl"), py::arg("row"), py::arg("policy"), py::arg("s"), py::arg("eps") = kDefaultEps);

  py::class_<ArbitrationOutcome>(m, "ArbitrationOutcome")
      .def_readonly("kind", &ArbitrationOutcome::kind)
      .def_readonly("shift", &ArbitrationOutcome::shift)
      .def_readonly("assignment", &ArbitrationOutcome::assignment)
      .def_property_readonly("success", &ArbitrationOutcome::success);
  m.def("run_algorithm", &run_algorithm, py::arg("mwl"), py::arg("row"), py::arg("s"), py::arg("algorithm"),
        py::arg("eps") = kDefaultEps);

  py::class_<TrialPlan>(m, "TrialPlan")
      .def(py::init<>())
      .def_readwrite("grid", &TrialPlan::grid)
      .def_readwrite("variation", &TrialPlan::variation)
      .def_readwrite("policy", &TrialPlan::policy)
      .def_readwrite("r", &TrialPlan::r)
      .def_readwrite("s", &TrialPlan::s)
      .def_readwrite("algorithms", &TrialPlan::algorithms)
      .def_readwrite("n_lasers", &TrialPlan::n_lasers)
      .def_readwrite("n_rows", &TrialPlan::n_rows)
      .def_readwrite("seed", &TrialPlan::seed)
      .def_readwrite("cell", &TrialPlan::cell)
      .def_readwrite("jobs", &TrialPlan::jobs);

  py::class_<StatRecord>(m, "StatRecord")
      .def_readonly("trials", &StatRecord::trials)
      .def_readonly("ideal_successes", &StatRecord::ideal_successes)
      .def_readonly("ideal_failures", &StatRecord::ideal_failures)
      .def_property_readonly("afp", &StatRecord::afp)
      .def("cafp", &StatRecord::cafp)
      .def(
          "failures_by_class",
          [](const StatRecord& rec, std::size_t k) {
            const ClassCounts& c = rec.algorithms.at(k).given_ideal_success;
            py::dict d;
            for (int i = 0; i < kOutcomeClassCount; ++i)
              d[py::str(std::string(to_string(static_cast<OutcomeClass>(i))))] = c.by_class[i];
            return d;
          },
          "Outcome counts of algorithm k over trials the ideal arbiter solved.");
  m.def("run_afp", py::overload_cast<const TrialPlan&>(&run_afp));
  m.def("run_cafp", py::overload_cast<const TrialPlan&>(&run_cafp));

  m.def(
      "min_tuning_range",
      [](const TrialPlan& plan, double resolution, double ceiling) {
        return min_tuning_range(plan, MinTrSettings{resolution, ceiling}).min_tr;
      },
      py::arg("plan"), py::arg("resolution") = 0.056, py::arg("ceiling") = 0.0,
      "Smallest tr_mean (nm) at which every trial arbitrates; None above the ceiling.");

  m.def(
      "run_experiment",
      [](const std::string& command, const std::string& toml_text) {
        const Table t = run_command(command, parse_config(toml_text));
        py::list rows;
        for (const auto& r : t.rows) {
          py::dict d;
          for (std::size_t i = 0; i < t.columns.size(); ++i) d[py::str(t.columns[i])] = cell_to_py(r[i]);
          rows.append(d);
        }
        return rows;
      },
      py::arg("command"), py::arg("config") = "", "Run a CLI subcommand on TOML text; one dict per output row.");
  m.def(
      "experiment_csv",
      [](const std::string& command, const std::string& toml_text) {
        std::ostringstream out;
        write_csv(run_command(command, parse_config(toml_text)), out);
        return out.str();
      },
      py::arg("command"), py::arg("config") = "");
}
