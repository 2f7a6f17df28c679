#ifndef AFDI_SVD_SEPARATION_HPP_
#define AFDI_SVD_SEPARATION_HPP_

#include "afdi/queries.hpp"
#include "afdi/separation.hpp"

namespace afdi {

/// Reachable set of the terminal state only (no control block) when the
/// whole input sequence is pinned to `u`; hull over scheduling vertices.
/// Used to shape the order-reduction boxes of the iterative separation.
CCG state_reach_at_input(const LPVMode& mode, int N, const UncertaintySets& sets,
                         const Eigen::VectorXd& u);

/// Divergence matrix between the two modes in measured-output coordinates:
/// V = Phi1^{-1} C^{(1)} C_N^{(1)} - Phi2^{-1} C^{(2)} C_N^{(2)}, with the
/// controllability matrices evaluated at the Theta centroid (A_nom, B_nom)
/// and Phi_j an n_y x n_y shape matrix (from reduce_order of the output
/// reachable set).  Working on the measured rows keeps the direction aligned
/// with what the diagnoser can actually distinguish.
Eigen::MatrixXd build_V(const LPVMode& mode1, const LPVMode& mode2, int N,
                        const Eigen::MatrixXd& Phi1, const Eigen::MatrixXd& Phi2);

/// Top right singular vector and singular value of V.
struct SeparationDirection {
  Eigen::VectorXd u_dir;  // unit vector in R^{N*n_u}
  double sigma = 0.0;
};
SeparationDirection max_separation_direction(const Eigen::MatrixXd& V);

/// Iterative suboptimal separation: recompute the divergence direction from
/// the order-reduced reachable sets at the current candidate, scale the
/// magnitude by bisection on the pairwise emptiness certificate, repeat until
/// the candidate settles.  Unlike separation_input, u_star is reported in
/// chronological order (u_0 first), not in the lifted stacking.
SeparationResult svd_separation_input(const LPVMode& mode1, const LPVMode& mode2,
                                      const UncertaintySets& sets, int N, const CostSpec& cost,
                                      double tol = 1e-3, int max_iter = 50,
                                      const SolveOptions& opts = {});

}  // namespace afdi

#endif  // AFDI_SVD_SEPARATION_HPP_
