#ifndef AFDI_REACHABILITY_HPP_
#define AFDI_REACHABILITY_HPP_

#include <string>
#include <vector>

#include "afdi/ccg.hpp"

namespace afdi {

/// Uncertain LPV mode described on the vertices of its scheduling polytope:
///   x_{k+1} = A(theta) x_k + B(theta) u_k + r(theta) + E(theta) w_k
///   y_k     = C x_k + s + F v_k
/// One matrix tuple is stored per vertex; `A_nom`/`B_nom` hold the matrices
/// evaluated at the centroid of Theta (used by the SVD separation path).
struct LPVMode {
  std::string name;
  std::vector<Eigen::VectorXd> thetas;  // vertex list of Theta
  std::vector<Eigen::MatrixXd> A;       // per vertex, n_x x n_x
  std::vector<Eigen::MatrixXd> B;       // per vertex, n_x x n_u
  std::vector<Eigen::MatrixXd> E;       // per vertex, n_x x n_w
  std::vector<Eigen::VectorXd> r;       // per vertex, n_x
  Eigen::MatrixXd A_nom, B_nom;         // evaluated at the Theta centroid
  Eigen::MatrixXd C;                    // n_y x n_x
  Eigen::MatrixXd F;                    // n_y x n_v
  Eigen::VectorXd s;                    // n_y

  int n_x() const { return A.empty() ? 0 : static_cast<int>(A[0].rows()); }
  int n_u() const { return B.empty() ? 0 : static_cast<int>(B[0].cols()); }
  int n_y() const { return static_cast<int>(C.rows()); }
  int n_w() const { return E.empty() ? 0 : static_cast<int>(E[0].cols()); }
  int vertex_count() const { return static_cast<int>(A.size()); }

  void validate() const;
};

/// Bounded uncertainty description shared by every mode.
struct UncertaintySets {
  CCG X0;  // initial states
  CCG U;   // admissible inputs, contained in the nonnegative orthant
  CCG W;   // process disturbance
  CCG V;   // measurement noise

  /// Checks U against the nonnegative orthant (support along -e_i <= tol).
  void validate(int n_x, int n_u) const;
};

/// Reachable set in the lifted space R^{n_x + N*n_u}: coordinates are the
/// terminal state block followed by the stacked control blocks
/// (u_{N-1}, ..., u_0, backwards in time to match the controllability
/// layout); the x-u correlation is exact because both blocks
/// share the control latent variables.
struct LiftedReachSet {
  CCG set;
  int N = 0;
  int n_x = 0;
  int n_u = 0;
  std::string mode;

  int ambient() const { return n_x + N * n_u; }
  /// Coordinate indices of the control subspace, in lifted order.
  std::vector<int> control_indices() const;
  /// Coordinate indices of the state block.
  std::vector<int> state_indices() const;
};

enum class SchedulePolicy {
  VertexConstant,  // one theta held over the horizon, hull over vertices
  PerStepHull      // hull applied at each propagation step (time-varying theta)
};

/// Reorders a stacked control vector between the lifted layout (backwards in
/// time, see controllability_matrix) and chronological order (u_0 first).
/// The permutation is its own inverse.
Eigen::VectorXd time_ordered(const Eigen::VectorXd& u, int N, int n_u);

/// C_N = [B  AB  ...  A^{N-1}B]: block j multiplies u_{N-1-j} in
/// x_N = A^N x_0 + sum_k A^{N-1-k} B u_k, so the stacked control vector runs
/// backwards in time.
Eigen::MatrixXd controllability_matrix(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                       int N);

/// Lifted reachable set for one fixed scheduling vertex.
LiftedReachSet lift_vertex(const LPVMode& mode, int vertex, int N,
                           const UncertaintySets& sets);

/// Convex hull over all scheduling vertices.
LiftedReachSet reach_mode(const LPVMode& mode, int N, const UncertaintySets& sets,
                          SchedulePolicy policy = SchedulePolicy::VertexConstant);

/// Replace the state block by the measured output: C*x + s (+) F*V.
LiftedReachSet apply_output_map(const LiftedReachSet& rs, const LPVMode& mode,
                                const UncertaintySets& sets);

}  // namespace afdi

#endif  // AFDI_REACHABILITY_HPP_
