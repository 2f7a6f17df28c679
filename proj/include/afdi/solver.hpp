#ifndef AFDI_SOLVER_HPP_
#define AFDI_SOLVER_HPP_

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <vector>

#include "afdi/cone.hpp"

namespace afdi {

/// Conic feasibility/optimization problem over a latent vector xi:
///   minimize c' xi   s.t.  A xi = b,  xi in C_1 x ... x C_np.
/// All ConeSpec variants are accepted; boxes, balls and free factors are
/// compiled to nonnegative/second-order cones internally.
struct ConicProblem {
  Eigen::VectorXd c;
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  std::vector<ConeSpec> cones;

  int vars() const { return static_cast<int>(c.size()); }
  void validate() const;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, NumericalFailure };

const char* to_string(SolveStatus s);

struct SolveOutcome {
  SolveStatus status = SolveStatus::NumericalFailure;
  double value = 0.0;        // c' xi at the solution (Optimal only)
  Eigen::VectorXd x;         // primal point in the original latent coordinates
  double primal_res = 0.0;
  double dual_res = 0.0;
  double gap = 0.0;
  int iterations = 0;
};

struct SolveOptions {
  double tol = 1e-8;          // feasibility / duality gap tolerance
  double reduced_tol = 1e-6;  // acceptance threshold when progress stalls
  double infeas_tol = 1e-7;   // certificate tolerance for Infeasible/Unbounded
  int max_iter = 100;
  bool verbose = false;       // iteration log on stderr (AFDI_LOG also enables it)
};

/// Primal-dual interior-point solve on the homogeneous self-dual embedding.
/// Deterministic for fixed inputs; status is certified, never guessed
/// (iteration-limit exits report NumericalFailure).
SolveOutcome solve(const ConicProblem& problem, const SolveOptions& options = {});

}  // namespace afdi

#endif  // AFDI_SOLVER_HPP_
