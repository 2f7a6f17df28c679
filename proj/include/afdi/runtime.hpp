#ifndef AFDI_RUNTIME_HPP_
#define AFDI_RUNTIME_HPP_

#include <random>
#include <string>
#include <vector>

#include "afdi/scenario.hpp"

namespace afdi {

/// Raised when a measurement contradicts every candidate model: the library
/// itself is inadequate, which must surface as a distinct terminal state.
struct ModelInadequacyAlarm : std::runtime_error {
  explicit ModelInadequacyAlarm(const std::string& what) : std::runtime_error(what) {}
};

/// Bank of mode-consistent sets maintained by the diagnoser.  Eliminated
/// modes never reactivate.
struct ModeBank {
  std::vector<LPVMode> modes;
  std::vector<CCG> sets;    // per mode, the measurement-consistent state set
  std::vector<bool> active;
  std::vector<std::pair<int, int>> eliminations;  // (step, mode index)

  int active_count() const;
  /// Index of the only active mode, or -1 while the bank is ambiguous.
  int sole_active() const;
};

ModeBank make_bank(const std::vector<LPVMode>& modes, const CCG& X0);

/// One-step set recursion for every active mode:
///   X_{k+1} = Hull over Theta vertices of (A X_k + B u + r) + E W.
ModeBank propagate(const ModeBank& bank, const Eigen::VectorXd& u_applied,
                   const UncertaintySets& sets, const SolveOptions& opts = {});

struct UpdateEvents {
  std::vector<int> eliminated;
  bool detection = false;  // the nominal mode (index 0) was eliminated
  bool isolation = false;  // exactly one mode left active
};

/// Generalized intersection of each active set with the measurement-consistent
/// slab {x : C x in y - s - F V}; empty sets eliminate their mode.  Throws
/// ModelInadequacyAlarm when nothing survives.
UpdateEvents measurement_update(ModeBank& bank, const Eigen::VectorXd& y,
                                const UncertaintySets& sets, int step,
                                const SolveOptions& opts = {});

/// Certainty-equivalent finite-horizon quadratic tracking at the Theta
/// centroid: minimizes sum of stage costs x~'Qx~ + u'R1u plus terminal
/// x~'Px~ over nonnegative input sequences, and returns the first input.
Eigen::VectorXd tracking_input(const LPVMode& mode, const Eigen::VectorXd& x_est,
                               const Eigen::VectorXd& x_ref, const Eigen::MatrixXd& Q,
                               const Eigen::MatrixXd& P, const Eigen::MatrixXd& R1, int N);

struct StepRecord {
  int t = 0;
  Eigen::VectorXd u;
  Eigen::VectorXd y;
  std::vector<int> active_modes;
  bool excited = false;
  std::string event;        // "", "detection", "isolation", "alarm"
  double tracking_error = 0.0;
};

struct EpisodeLog {
  std::vector<StepRecord> steps;
  bool detection = false;
  int detection_step = -1;
  bool isolation = false;
  int isolation_step = -1;
  int isolated_mode = -1;
  bool alarm = false;
  bool true_mode_eliminated = false;
};

/// Uniform sample of a factory-shaped CCG (no equality constraints; box,
/// ball, nonnegative-ball, point).  Used to drive plant noise in episodes.
Eigen::VectorXd sample_point(const CCG& Z, std::mt19937_64& rng);

/// Closed-loop episode: the true plant runs at modes[plant_mode] with seeded
/// in-set noise; the diagnoser excites (separation sequence, cycled) while
/// ambiguous and tracks the origin once isolated.  `excitation` optionally
/// supplies a precomputed chronological input sequence to avoid re-solving
/// the separation problem per episode.
EpisodeLog run_episode(const ScenarioConfig& cfg, int plant_mode, long seed, int n_steps = 20,
                       const Eigen::VectorXd* excitation = nullptr,
                       const SolveOptions& opts = {});

/// EpisodeLog as CSV rows: t, u..., y..., active_modes, excited, event.
std::string episode_to_csv(const EpisodeLog& log);

}  // namespace afdi

#endif  // AFDI_RUNTIME_HPP_
