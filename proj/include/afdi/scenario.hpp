#ifndef AFDI_SCENARIO_HPP_
#define AFDI_SCENARIO_HPP_

#include <stdexcept>
#include <string>

#include "afdi/separation.hpp"

namespace afdi {

/// Configuration error with the offending JSON field path in the message.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct ScenarioConfig {
  std::string name;
  std::vector<LPVMode> modes;
  UncertaintySets sets;
  int N = 1;
  CostSpec cost;
  Eigen::MatrixXd Q, P;  // tracking weights (state, terminal)
  SamplingParams sampling;
  SolveOptions solver;
  std::string method = "ccg";  // "ccg" | "svd"
  SchedulePolicy schedule = SchedulePolicy::VertexConstant;

  int n_x() const { return modes.empty() ? 0 : modes[0].n_x(); }
  int n_u() const { return modes.empty() ? 0 : modes[0].n_u(); }
  void validate() const;
};

/// Resolves a built-in scenario name ("vehicle-s5", "quadrotor-s5") or loads
/// and validates a JSON config file.
ScenarioConfig load_scenario(const std::string& name_or_path);

/// Parses a scenario from JSON text (schema errors name the field path).
ScenarioConfig scenario_from_json(const std::string& text);
std::string to_json(const ScenarioConfig& cfg);

/// Two-mode ground vehicle with decoupled axes and uncertain friction.
ScenarioConfig vehicle_scenario();
/// Ten-state hovering quadrotor with a thrust-effectiveness fault.
ScenarioConfig quadrotor_scenario();

}  // namespace afdi

#endif  // AFDI_SCENARIO_HPP_
