#ifndef AFDI_QUERIES_HPP_
#define AFDI_QUERIES_HPP_

#include <optional>

#include "afdi/ccg.hpp"
#include "afdi/solver.hpp"

namespace afdi {

/// Tri-state answer for set queries: numerical failures are reported as
/// `unknown`, never coerced into a boolean.
enum class Tri { yes, no, unknown };

inline bool definitely(Tri t) { return t == Tri::yes; }
inline bool definitely_not(Tri t) { return t == Tri::no; }

struct SupportResult {
  SolveStatus status = SolveStatus::NumericalFailure;
  double value = 0.0;
  Eigen::VectorXd argmax;
};

struct RayResult {
  SolveStatus status = SolveStatus::NumericalFailure;
  double t = 0.0;  // Unbounded rays keep status Unbounded, never a large t
};

/// True iff Z has no feasible latent point.
Tri is_empty(const CCG& Z, const SolveOptions& opts = {});

/// max_{x in Z} d'x together with an attaining point.
SupportResult support(const CCG& Z, const Eigen::VectorXd& d, const SolveOptions& opts = {});

/// Membership of the ambient point p.
Tri contains(const CCG& Z, const Eigen::VectorXd& p, const SolveOptions& opts = {});

/// Largest t >= 0 with origin + t*dir in Z.  Throws std::invalid_argument
/// when the origin itself is outside Z.
RayResult ray_max(const CCG& Z, const Eigen::VectorXd& origin, const Eigen::VectorXd& dir,
                  const SolveOptions& opts = {});

/// Any feasible ambient point of Z, when one exists.
std::optional<Eigen::VectorXd> feasible_point(const CCG& Z, const SolveOptions& opts = {});

/// Euclidean distance min ||x1 - x2|| over x1 in Z1, x2 in Z2; +inf when
/// either set is empty (trivially separated).
struct DistanceResult {
  SolveStatus status = SolveStatus::NumericalFailure;
  double distance = 0.0;
  bool either_empty = false;
};
DistanceResult set_distance(const CCG& Z1, const CCG& Z2, const SolveOptions& opts = {});

/// Box over-approximation with a square invertible generator:
///   Z is contained in { Phi xi + center : ||xi||_inf <= 1 }.
/// Directions come from the left singular vectors of G; degenerate radii are
/// regularized so Phi stays invertible.
struct OrderReduction {
  Eigen::MatrixXd Phi;
  Eigen::VectorXd center;
};
OrderReduction reduce_order(const CCG& Z, const SolveOptions& opts = {});

}  // namespace afdi

#endif  // AFDI_QUERIES_HPP_
