// Python bindings for the active fault diagnosis toolkit.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "afdi/export.hpp"
#include "afdi/runtime.hpp"
#include "afdi/scenario.hpp"
#include "afdi/svd_separation.hpp"

namespace py = pybind11;
using namespace afdi;

namespace {

SeparationResult separate(const ScenarioConfig& cfg) {
  if (cfg.method == "svd") {
    if (cfg.modes.size() != 2) throw ConfigError("method svd: exactly two modes required");
    return svd_separation_input(cfg.modes[0], cfg.modes[1], cfg.sets, cfg.N, cfg.cost, 1e-3,
                                50, cfg.solver);
  }
  return separation_input(cfg.modes, cfg.sets, cfg.N, cfg.cost, cfg.sampling, cfg.schedule,
                          cfg.solver);
}

}  // namespace

PYBIND11_MODULE(_afdi, m) {
  m.doc() = "Set-based active fault detection and isolation for uncertain LPV systems";

  py::register_exception<ConfigError>(m, "ConfigError");
  py::register_exception<ModelInadequacyAlarm>(m, "ModelInadequacyAlarm");

  py::class_<CCG>(m, "CCG")
      .def_static("box", &CCG::box, py::arg("lo"), py::arg("hi"))
      .def_static("ball", &CCG::ball, py::arg("center"), py::arg("radius"))
      .def_static("point", &CCG::point, py::arg("at"))
      .def_property_readonly("dim", &CCG::dim)
      .def_property_readonly("generators", &CCG::generators)
      .def("__repr__", [](const CCG& z) {
        return "<CCG dim=" + std::to_string(z.dim()) +
               " generators=" + std::to_string(z.generators()) + ">";
      });

  m.def(
      "support",
      [](const CCG& z, const Eigen::VectorXd& d) {
        const SupportResult r = support(z, d);
        if (r.status != SolveStatus::Optimal)
          throw std::runtime_error(std::string("support: ") + to_string(r.status));
        return r.value;
      },
      py::arg("set"), py::arg("direction"), "Support function h(d) = max d'x over the set");

  m.def(
      "contains",
      [](const CCG& z, const Eigen::VectorXd& x) { return definitely(contains(z, x)); },
      py::arg("set"), py::arg("point"));

  m.def("minkowski_sum", &minkowski_sum, py::arg("a"), py::arg("b"));
  m.def("linear_map", &linear_map, py::arg("M"), py::arg("t"), py::arg("set"));
  m.def(
      "intersect", [](const CCG& a, const CCG& b) { return intersect(a, b); }, py::arg("a"),
      py::arg("b"));
  m.def(
      "is_empty", [](const CCG& z) { return definitely(is_empty(z)); }, py::arg("set"));

  py::class_<ScenarioConfig>(m, "ScenarioConfig")
      .def_readonly("name", &ScenarioConfig::name)
      .def_readonly("N", &ScenarioConfig::N)
      .def_readwrite("method", &ScenarioConfig::method)
      .def_property_readonly("n_x", &ScenarioConfig::n_x)
      .def_property_readonly("n_u", &ScenarioConfig::n_u)
      .def_property_readonly("n_modes",
                             [](const ScenarioConfig& c) { return c.modes.size(); });

  m.def("load_scenario", &load_scenario, py::arg("name_or_path"),
        "Built-in scenario name ('vehicle-s5', 'quadrotor-s5') or JSON config path");

  py::class_<SeparationResult>(m, "SeparationResult")
      .def_readonly("u_star", &SeparationResult::u_star)
      .def_readonly("cost", &SeparationResult::cost)
      .def_readonly("certified", &SeparationResult::certified)
      .def_readonly("rays_used", &SeparationResult::rays_used)
      .def_readonly("iterations", &SeparationResult::iterations)
      .def_readonly("lifted_ray_solves", &SeparationResult::lifted_ray_solves)
      .def_readonly("sigma_history", &SeparationResult::sigma_history);

  m.def("separate", &separate, py::arg("scenario"),
        "Excitation input via the scenario's configured method ('ccg' or 'svd')");

  py::class_<EpisodeLog>(m, "EpisodeLog")
      .def_readonly("detection", &EpisodeLog::detection)
      .def_readonly("detection_step", &EpisodeLog::detection_step)
      .def_readonly("isolation", &EpisodeLog::isolation)
      .def_readonly("isolation_step", &EpisodeLog::isolation_step)
      .def_readonly("isolated_mode", &EpisodeLog::isolated_mode)
      .def_readonly("alarm", &EpisodeLog::alarm)
      .def_readonly("true_mode_eliminated", &EpisodeLog::true_mode_eliminated)
      .def_property_readonly("n_steps",
                             [](const EpisodeLog& l) { return l.steps.size(); })
      .def("to_csv", &episode_to_csv);

  m.def(
      "run_episode",
      [](const ScenarioConfig& cfg, int plant_mode, long seed, int n_steps,
         py::object excitation) {
        if (excitation.is_none()) return run_episode(cfg, plant_mode, seed, n_steps);
        const Eigen::VectorXd exc = excitation.cast<Eigen::VectorXd>();
        return run_episode(cfg, plant_mode, seed, n_steps, &exc);
      },
      py::arg("scenario"), py::arg("plant_mode"), py::arg("seed"), py::arg("n_steps") = 20,
      py::arg("excitation") = py::none(),
      "Closed-loop diagnosis episode; excitation is a chronological stacked sequence");

  m.def("time_ordered", &time_ordered, py::arg("u"), py::arg("N"), py::arg("n_u"),
        "Swap a stacked control sequence between lifted and chronological order");
}
