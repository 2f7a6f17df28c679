#include "afdi/queries.hpp"

#include <cmath>

namespace afdi {

namespace {

ConicProblem feasibility_problem(const CCG& Z) {
  ConicProblem p;
  p.c = Eigen::VectorXd::Zero(Z.generators());
  p.A = Z.A;
  p.b = Z.b;
  p.cones = Z.cones;
  return p;
}

}  // namespace

Tri is_empty(const CCG& Z, const SolveOptions& opts) {
  const SolveOutcome out = solve(feasibility_problem(Z), opts);
  switch (out.status) {
    case SolveStatus::Optimal: return Tri::no;
    case SolveStatus::Infeasible: return Tri::yes;
    default: return Tri::unknown;
  }
}

std::optional<Eigen::VectorXd> feasible_point(const CCG& Z, const SolveOptions& opts) {
  const SolveOutcome out = solve(feasibility_problem(Z), opts);
  if (out.status != SolveStatus::Optimal) return std::nullopt;
  return Z.G * out.x + Z.c;
}

SupportResult support(const CCG& Z, const Eigen::VectorXd& d, const SolveOptions& opts) {
  if (d.size() != Z.dim()) throw std::invalid_argument("support: direction dimension mismatch");
  ConicProblem p = feasibility_problem(Z);
  p.c = -(Z.G.transpose() * d);
  const SolveOutcome out = solve(p, opts);
  SupportResult r;
  r.status = out.status;
  if (out.status == SolveStatus::Optimal) {
    r.argmax = Z.G * out.x + Z.c;
    r.value = d.dot(r.argmax);
  }
  return r;
}

Tri contains(const CCG& Z, const Eigen::VectorXd& p, const SolveOptions& opts) {
  if (p.size() != Z.dim()) throw std::invalid_argument("contains: point dimension mismatch");
  ConicProblem prob;
  const int ng = Z.generators();
  prob.c = Eigen::VectorXd::Zero(ng);
  prob.A.resize(Z.constraints() + Z.dim(), ng);
  prob.A << Z.A, Z.G;
  prob.b.resize(Z.constraints() + Z.dim());
  prob.b << Z.b, p - Z.c;
  prob.cones = Z.cones;
  const SolveOutcome out = solve(prob, opts);
  switch (out.status) {
    case SolveStatus::Optimal: return Tri::yes;
    case SolveStatus::Infeasible: return Tri::no;
    default: return Tri::unknown;
  }
}

RayResult ray_max(const CCG& Z, const Eigen::VectorXd& origin, const Eigen::VectorXd& dir,
                  const SolveOptions& opts) {
  if (origin.size() != Z.dim() || dir.size() != Z.dim())
    throw std::invalid_argument("ray_max: dimension mismatch");
  if (dir.norm() <= 0.0) throw std::invalid_argument("ray_max: zero direction");
  // Variables (xi, t): G xi - t dir = origin - c, t >= 0, maximize t.
  const int ng = Z.generators();
  ConicProblem p;
  p.c = Eigen::VectorXd::Zero(ng + 1);
  p.c(ng) = -1.0;
  p.A = Eigen::MatrixXd::Zero(Z.constraints() + Z.dim(), ng + 1);
  p.A.topLeftCorner(Z.constraints(), ng) = Z.A;
  p.A.bottomLeftCorner(Z.dim(), ng) = Z.G;
  p.A.bottomRightCorner(Z.dim(), 1) = -dir;
  p.b.resize(Z.constraints() + Z.dim());
  p.b << Z.b, origin - Z.c;
  p.cones = Z.cones;
  p.cones.push_back(ConeSpec::nonnegative(1));

  const SolveOutcome out = solve(p, opts);
  RayResult r;
  r.status = out.status;
  if (out.status == SolveStatus::Optimal) {
    r.t = -out.value;
  } else if (out.status == SolveStatus::Infeasible) {
    throw std::invalid_argument("ray_max: origin is not inside the set");
  }
  return r;
}

DistanceResult set_distance(const CCG& Z1, const CCG& Z2, const SolveOptions& opts) {
  if (Z1.dim() != Z2.dim()) throw std::invalid_argument("set_distance: dimension mismatch");
  const int n = Z1.dim(), n1 = Z1.generators(), n2 = Z2.generators();
  const int nc1 = Z1.constraints(), nc2 = Z2.constraints();
  // Variables (xi1, xi2, d, t): G1 xi1 - G2 xi2 - d = c2 - c1, ||d|| <= t.
  ConicProblem p;
  const int nv = n1 + n2 + n + 1;
  p.c = Eigen::VectorXd::Zero(nv);
  p.c(nv - 1) = 1.0;
  p.A = Eigen::MatrixXd::Zero(nc1 + nc2 + n, nv);
  p.A.topLeftCorner(nc1, n1) = Z1.A;
  p.A.block(nc1, n1, nc2, n2) = Z2.A;
  p.A.block(nc1 + nc2, 0, n, n1) = Z1.G;
  p.A.block(nc1 + nc2, n1, n, n2) = -Z2.G;
  p.A.block(nc1 + nc2, n1 + n2, n, n) = -Eigen::MatrixXd::Identity(n, n);
  p.b.resize(nc1 + nc2 + n);
  p.b << Z1.b, Z2.b, Z2.c - Z1.c;
  p.cones = Z1.cones;
  p.cones.insert(p.cones.end(), Z2.cones.begin(), Z2.cones.end());
  p.cones.push_back(ConeSpec::soc(n + 1));

  const SolveOutcome out = solve(p, opts);
  DistanceResult r;
  r.status = out.status;
  if (out.status == SolveStatus::Optimal) {
    r.distance = out.value;
  } else if (out.status == SolveStatus::Infeasible) {
    r.either_empty = true;
    r.distance = std::numeric_limits<double>::infinity();
  }
  return r;
}

OrderReduction reduce_order(const CCG& Z, const SolveOptions& opts) {
  if (Z.dim() == 0) throw std::invalid_argument("reduce_order: ambient dimension is zero");
  const int n = Z.dim();
  Eigen::MatrixXd U;
  if (Z.generators() == 0) {
    U = Eigen::MatrixXd::Identity(n, n);
  } else {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Z.G, Eigen::ComputeFullU);
    U = svd.matrixU();
  }
  // Coarse but sound radius bound along d: drop the equality constraints and
  // bound each latent factor separately (dropping constraints only enlarges
  // the set).  Used when the conic solve fails on a degenerate direction.
  auto coarse_radius = [&Z](const Eigen::VectorXd& d) {
    const Eigen::VectorXd g = Z.G.transpose() * d;
    double r = 0.0;
    int at = 0;
    for (const auto& cone : Z.cones) {
      const auto seg = g.segment(at, cone.dim());
      switch (cone.kind()) {
        case ConeSpec::Kind::Box:
          for (int i = 0; i < cone.dim(); ++i)
            r += std::max(std::abs(seg(i) * cone.lo()(i)), std::abs(seg(i) * cone.hi()(i)));
          break;
        case ConeSpec::Kind::Ball2:
          r += cone.radius() * seg.norm();
          break;
        default:
          throw std::runtime_error("reduce_order: support query failed");
      }
      at += cone.dim();
    }
    return r;
  };
  Eigen::VectorXd h(n);
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd d = U.col(i);
    const SupportResult hp = support(Z, d, opts);
    const SupportResult hm = support(Z, -d, opts);
    if (hp.status == SolveStatus::Infeasible || hm.status == SolveStatus::Infeasible)
      throw std::invalid_argument("reduce_order: set is empty");
    if (hp.status != SolveStatus::Optimal || hm.status != SolveStatus::Optimal) {
      h(i) = coarse_radius(d);
      continue;
    }
    const double center = d.dot(Z.c);
    h(i) = std::max(hp.value - center, hm.value + center);
  }
  const double eps = 1e-8 * std::max(h.maxCoeff(), 1e-30);
  for (int i = 0; i < n; ++i) h(i) = std::max(h(i), eps);
  OrderReduction out;
  out.Phi = U * h.asDiagonal();
  out.center = Z.c;
  return out;
}

}  // namespace afdi
