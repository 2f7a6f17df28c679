#ifndef AFDI_CCG_HPP_
#define AFDI_CCG_HPP_

#include <Eigen/Dense>
#include <vector>

#include "afdi/cone.hpp"

namespace afdi {

/// Constrained Convex Generator.
///
/// Represents the convex set
///   Z = { G xi + c : A xi = b, xi in C_1 x ... x C_np }
/// where the C_i are the factors in `cones`.  A CCG with zero generators
/// (n_g == 0) is the singleton {c}.  Values are immutable in spirit: all
/// operations return new CCGs and never mutate their arguments.
struct CCG {
  Eigen::MatrixXd G;  // n x n_g
  Eigen::VectorXd c;  // n
  Eigen::MatrixXd A;  // n_c x n_g
  Eigen::VectorXd b;  // n_c
  std::vector<ConeSpec> cones;

  CCG() = default;
  CCG(Eigen::MatrixXd G_, Eigen::VectorXd c_, Eigen::MatrixXd A_, Eigen::VectorXd b_,
      std::vector<ConeSpec> cones_);

  int dim() const { return static_cast<int>(c.size()); }
  int generators() const { return static_cast<int>(G.cols()); }
  int constraints() const { return static_cast<int>(A.rows()); }

  void validate() const;

  /// Singleton {p}.
  static CCG point(const Eigen::VectorXd& p);
  /// Axis-aligned box [lo, hi].
  static CCG box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi);
  /// Euclidean ball of given radius around `center`.
  static CCG ball(const Eigen::VectorXd& center, double radius);
  /// Intersection of a ball around `center` with the nonnegative orthant.
  static CCG nonnegative_ball(const Eigen::VectorXd& center, double radius);
};

/// A CCG over R^{p*q} read column-major as p x q matrices.
struct MatrixCCG {
  CCG set;
  int rows = 0;
  int cols = 0;

  MatrixCCG() = default;
  MatrixCCG(CCG s, int p, int q);

  static MatrixCCG singleton(const Eigen::MatrixXd& M);
  /// Column slice of the generator matrix mapping the latent space to
  /// matrix column `j` (p x n_g).
  Eigen::MatrixXd generator_slice(int j) const;
  Eigen::MatrixXd center_matrix() const;
};

// --- closed-form set operations -------------------------------------------

/// R*Z + t.
CCG linear_map(const Eigen::MatrixXd& R, const Eigen::VectorXd& t, const CCG& Z);

/// Z (+) W, Minkowski sum.
CCG minkowski_sum(const CCG& Z, const CCG& W);

/// Generalized intersection { z in Z : R z in Y }.
CCG intersect(const CCG& Z, const CCG& Y, const Eigen::MatrixXd& R);
/// Plain intersection (R = identity); ambient dimensions must match.
CCG intersect(const CCG& Z, const CCG& Y);

/// Exact convex hull Conv(Z u W) via lambda-scaled copies of both arguments.
CCG convex_hull(const CCG& Z, const CCG& W);

/// Z x W.
CCG cartesian_product(const CCG& Z, const CCG& W);

/// Coordinate projection onto `idx` (0-based, in output order).
CCG project(const CCG& Z, const std::vector<int>& idx);

/// Over-approximation of { B*u : B in Bset, u in U } in the joint (x, u)
/// space: first `rows` coordinates hold the product, the trailing ones the
/// u that produced it.  U may only use box/ball latent factors, and the
/// bilinear relaxation assumes the coordinates of U are nonnegative (the
/// norm-cone slack equals the affine expression of u, which must stay >= 0).
CCG set_matrix_vector_product(const MatrixCCG& Bset, const CCG& U);

}  // namespace afdi

#endif  // AFDI_CCG_HPP_
