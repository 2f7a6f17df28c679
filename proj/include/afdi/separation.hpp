#ifndef AFDI_SEPARATION_HPP_
#define AFDI_SEPARATION_HPP_

#include <utility>
#include <vector>

#include "afdi/reachability.hpp"
#include "afdi/solver.hpp"

namespace afdi {

/// Excitation cost gamma * u'R1u + (1-gamma) * ||R2 u||^2 over the stacked
/// input sequence u in R^{N*n_u}.
struct CostSpec {
  Eigen::MatrixXd R1;
  Eigen::MatrixXd R2;
  double gamma = 0.5;

  double cost(const Eigen::VectorXd& u) const;
  void validate(int dim) const;

  /// R1 = I, R2 = stacked first-difference operator, so that with gamma=0.5
  /// the cost is proportional to sum u_k^2 + ||u_{k+1} - u_k||^2.
  static CostSpec energy_with_variation(int N, int n_u, double gamma = 0.5);
  /// Pure input energy (R2 empty, gamma = 1).
  static CostSpec energy(int N, int n_u);
};

struct PairCertificate {
  int i = 0, j = 0;     // mode indices of the pair
  bool empty = false;   // lifted intersection sliced at u* is infeasible
  double margin = 0.0;  // distance between the sliced reach sets
};

struct PhaseTimings {
  double reach_ms = 0.0;
  double intersect_ms = 0.0;
  double sample_ms = 0.0;
  double certify_ms = 0.0;
};

struct SeparationResult {
  Eigen::VectorXd u_star;
  double cost = 0.0;
  std::vector<PairCertificate> certificates;
  bool certified = false;
  int rays_used = 0;
  long seed = 0;
  // Ray-shooting bookkeeping: boundary sampling must happen in the N*n_u
  // control space only, never in the lifted (n_x + N*n_u) space.
  int control_ray_solves = 0;
  int lifted_ray_solves = 0;
  PhaseTimings timings;
  // Iterative (SVD) path extras.
  int iterations = 0;
  std::vector<double> sigma_history;
};

/// Control sequences for which two modes' reachable sets can still intersect.
struct IndistinguishableSet {
  CCG set;  // in control space R^{N*n_u}
  std::vector<std::pair<int, int>> pairs;
  bool all_empty = false;  // every pair distinguishable regardless of input
};

struct SamplingParams {
  int n_rays = 0;  // 0 = default max(484, 2*dim^2)
  double eps_inflate = 0.01;
  long seed = 0;
};

/// Intersection of two lifted sets over the full shared (state, control)
/// space, projected onto the control coordinates.
CCG indistinguishable_pair(const LiftedReachSet& Ri, const LiftedReachSet& Rj,
                           const SolveOptions& opts = {});

/// Convex hull of the nonempty pair sets.
IndistinguishableSet indistinguishable_union(const std::vector<CCG>& pair_sets,
                                             const std::vector<std::pair<int, int>>& ids,
                                             const SolveOptions& opts = {});

/// Boundary samples of I pushed slightly outside and clamped into the input
/// bounds; candidates that remain inside I are discarded.  `ray_count`
/// reports the number of ray solves performed (all in control space).
std::vector<Eigen::VectorXd> boundary_candidates(const IndistinguishableSet& I, const CCG& U_N,
                                                 int n_rays, double eps_inflate, long seed,
                                                 int* ray_count = nullptr,
                                                 const SolveOptions& opts = {});

/// Distance-based emptiness certificate for one mode pair at a fixed input.
PairCertificate certify_pair(const LiftedReachSet& Ri, const LiftedReachSet& Rj, int i, int j,
                             const Eigen::VectorXd& u, double eps = 1e-7,
                             const SolveOptions& opts = {});

/// Algorithm: build the per-mode reachable sets, the pairwise
/// indistinguishable sets and their hull, sample its boundary, and return the
/// cheapest certified excitation sequence.
SeparationResult separation_input(const std::vector<LPVMode>& modes,
                                  const UncertaintySets& sets, int N, const CostSpec& cost,
                                  const SamplingParams& sampling,
                                  SchedulePolicy policy = SchedulePolicy::VertexConstant,
                                  const SolveOptions& opts = {});

}  // namespace afdi

#endif  // AFDI_SEPARATION_HPP_
