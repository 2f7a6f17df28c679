#include "afdi/ccg.hpp"

#include <cmath>
#include <utility>

namespace afdi {

namespace {

Eigen::MatrixXd zeros(int r, int c) { return Eigen::MatrixXd::Zero(r, c); }

}  // namespace

CCG::CCG(Eigen::MatrixXd G_, Eigen::VectorXd c_, Eigen::MatrixXd A_, Eigen::VectorXd b_,
         std::vector<ConeSpec> cones_)
    : G(std::move(G_)), c(std::move(c_)), A(std::move(A_)), b(std::move(b_)),
      cones(std::move(cones_)) {
  validate();
}

void CCG::validate() const {
  const int ng = total_dim(cones);
  if (G.cols() != ng || A.cols() != ng)
    throw std::invalid_argument("CCG: generator/constraint column count must equal total cone dim");
  if (G.rows() != c.size())
    throw std::invalid_argument("CCG: G row count must equal length of c");
  if (A.rows() != b.size())
    throw std::invalid_argument("CCG: A row count must equal length of b");
}

CCG CCG::point(const Eigen::VectorXd& p) {
  const int n = static_cast<int>(p.size());
  return CCG(zeros(n, 0), p, zeros(0, 0), Eigen::VectorXd(0), {});
}

CCG CCG::box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  const int n = static_cast<int>(lo.size());
  return CCG(Eigen::MatrixXd::Identity(n, n), Eigen::VectorXd::Zero(n), zeros(0, n),
             Eigen::VectorXd(0), {ConeSpec::box(lo, hi)});
}

CCG CCG::ball(const Eigen::VectorXd& center, double radius) {
  const int n = static_cast<int>(center.size());
  return CCG(Eigen::MatrixXd::Identity(n, n), center, zeros(0, n), Eigen::VectorXd(0),
             {ConeSpec::ball2(n, radius)});
}

CCG CCG::nonnegative_ball(const Eigen::VectorXd& center, double radius) {
  const int n = static_cast<int>(center.size());
  // latent (xi_a in ball, xi_b >= 0) with xi_a + center restricted by xi_a + center = xi_b
  Eigen::MatrixXd G(n, 2 * n);
  G << Eigen::MatrixXd::Identity(n, n), zeros(n, n);
  Eigen::MatrixXd A(n, 2 * n);
  A << Eigen::MatrixXd::Identity(n, n), -Eigen::MatrixXd::Identity(n, n);
  return CCG(G, center, A, -center, {ConeSpec::ball2(n, radius), ConeSpec::nonnegative(n)});
}

MatrixCCG::MatrixCCG(CCG s, int p, int q) : set(std::move(s)), rows(p), cols(q) {
  if (set.dim() != p * q)
    throw std::invalid_argument("MatrixCCG: ambient dim must equal rows*cols");
}

MatrixCCG MatrixCCG::singleton(const Eigen::MatrixXd& M) {
  Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(M.data(), M.size());
  return MatrixCCG(CCG::point(v), static_cast<int>(M.rows()), static_cast<int>(M.cols()));
}

Eigen::MatrixXd MatrixCCG::generator_slice(int j) const {
  if (j < 0 || j >= cols) throw std::out_of_range("MatrixCCG::generator_slice");
  return set.G.middleRows(static_cast<Eigen::Index>(j) * rows, rows);
}

Eigen::MatrixXd MatrixCCG::center_matrix() const {
  return Eigen::Map<const Eigen::MatrixXd>(set.c.data(), rows, cols);
}

CCG linear_map(const Eigen::MatrixXd& R, const Eigen::VectorXd& t, const CCG& Z) {
  if (R.cols() != Z.dim())
    throw std::invalid_argument("linear_map: R column count must equal ambient dim of Z");
  if (R.rows() != t.size())
    throw std::invalid_argument("linear_map: R row count must equal length of t");
  return CCG(R * Z.G, R * Z.c + t, Z.A, Z.b, Z.cones);
}

CCG minkowski_sum(const CCG& Z, const CCG& W) {
  if (Z.dim() != W.dim())
    throw std::invalid_argument("minkowski_sum: ambient dimensions must match");
  const int ngz = Z.generators(), ngw = W.generators();
  Eigen::MatrixXd G(Z.dim(), ngz + ngw);
  G << Z.G, W.G;
  Eigen::MatrixXd A = zeros(Z.constraints() + W.constraints(), ngz + ngw);
  A.topLeftCorner(Z.constraints(), ngz) = Z.A;
  A.bottomRightCorner(W.constraints(), ngw) = W.A;
  Eigen::VectorXd b(Z.constraints() + W.constraints());
  b << Z.b, W.b;
  std::vector<ConeSpec> cones = Z.cones;
  cones.insert(cones.end(), W.cones.begin(), W.cones.end());
  return CCG(G, Z.c + W.c, A, b, cones);
}

CCG intersect(const CCG& Z, const CCG& Y, const Eigen::MatrixXd& R) {
  if (R.cols() != Z.dim() || R.rows() != Y.dim())
    throw std::invalid_argument("intersect: R must map ambient(Z) to ambient(Y)");
  const int ngz = Z.generators(), ngy = Y.generators();
  Eigen::MatrixXd G(Z.dim(), ngz + ngy);
  G << Z.G, zeros(Z.dim(), ngy);
  const int ncz = Z.constraints(), ncy = Y.constraints();
  Eigen::MatrixXd A = zeros(ncz + ncy + Y.dim(), ngz + ngy);
  A.topLeftCorner(ncz, ngz) = Z.A;
  A.block(ncz, ngz, ncy, ngy) = Y.A;
  A.block(ncz + ncy, 0, Y.dim(), ngz) = R * Z.G;
  A.block(ncz + ncy, ngz, Y.dim(), ngy) = -Y.G;
  Eigen::VectorXd b(ncz + ncy + Y.dim());
  b << Z.b, Y.b, Y.c - R * Z.c;
  std::vector<ConeSpec> cones = Z.cones;
  cones.insert(cones.end(), Y.cones.begin(), Y.cones.end());
  return CCG(G, Z.c, A, b, cones);
}

CCG intersect(const CCG& Z, const CCG& Y) {
  if (Z.dim() != Y.dim())
    throw std::invalid_argument("intersect: ambient dimensions must match for R = I");
  return intersect(Z, Y, Eigen::MatrixXd::Identity(Z.dim(), Z.dim()));
}

namespace {

// Lambda-scaled copy of one convex-hull argument.  Variables are laid out
// cone group by cone group; equality rows are of the form
//   Arows * vars + lambda_col * lambda = 0.
struct ScaledCopy {
  int nvars = 0;
  Eigen::MatrixXd Gpart;       // ambient x nvars
  std::vector<ConeSpec> cones;
  Eigen::MatrixXd Arows;       // nrows x nvars
  Eigen::VectorXd lambda_col;  // nrows
};

ScaledCopy scale_copy(const CCG& S) {
  // Pass 1: sizes.
  int nvars = 0, extra_rows = 0;
  for (const auto& cn : S.cones) {
    switch (cn.kind()) {
      case ConeSpec::Kind::Box:
        nvars += 3 * cn.dim();
        extra_rows += 2 * cn.dim();
        break;
      case ConeSpec::Kind::Ball2:
        nvars += cn.dim() + 1;
        extra_rows += 1;
        break;
      default:
        nvars += cn.dim();
    }
  }
  ScaledCopy out;
  out.nvars = nvars;
  out.Gpart = zeros(S.dim(), nvars);
  out.Arows = zeros(S.constraints() + extra_rows, nvars);
  out.lambda_col = Eigen::VectorXd::Zero(S.constraints() + extra_rows);

  // Pass 2: fill.  `src` walks the original latent coordinates, `dst` the
  // new variable layout, `row` the auxiliary equality rows.
  int src = 0, dst = 0, row = S.constraints();
  out.lambda_col.head(S.constraints()) = -S.b;
  for (const auto& cn : S.cones) {
    const int d = cn.dim();
    switch (cn.kind()) {
      case ConeSpec::Kind::Box: {
        // xi free, slacks p, q >= 0 with xi - lo*lam - p = 0, xi - hi*lam + q = 0
        out.Gpart.middleCols(dst, d) = S.G.middleCols(src, d);
        out.Arows.block(0, dst, S.constraints(), d) = S.A.middleCols(src, d);
        out.Arows.block(row, dst, d, d).setIdentity();
        out.Arows.block(row, dst + d, d, d) = -Eigen::MatrixXd::Identity(d, d);
        out.lambda_col.segment(row, d) = -cn.lo();
        out.Arows.block(row + d, dst, d, d).setIdentity();
        out.Arows.block(row + d, dst + 2 * d, d, d).setIdentity();
        out.lambda_col.segment(row + d, d) = -cn.hi();
        out.cones.push_back(ConeSpec::free(d));
        out.cones.push_back(ConeSpec::nonnegative(d));
        out.cones.push_back(ConeSpec::nonnegative(d));
        row += 2 * d;
        dst += 3 * d;
        break;
      }
      case ConeSpec::Kind::Ball2: {
        // ||xi|| <= t with t = radius*lam
        out.Gpart.middleCols(dst, d) = S.G.middleCols(src, d);
        out.Arows.block(0, dst, S.constraints(), d) = S.A.middleCols(src, d);
        out.Arows(row, dst + d) = 1.0;
        out.lambda_col(row) = -cn.radius();
        out.cones.push_back(ConeSpec::soc(d + 1));
        row += 1;
        dst += d + 1;
        break;
      }
      default: {
        // genuine cones are scale invariant
        out.Gpart.middleCols(dst, d) = S.G.middleCols(src, d);
        out.Arows.block(0, dst, S.constraints(), d) = S.A.middleCols(src, d);
        out.cones.push_back(cn);
        dst += d;
      }
    }
    src += d;
  }
  return out;
}

}  // namespace

CCG convex_hull(const CCG& Z, const CCG& W) {
  if (Z.dim() != W.dim())
    throw std::invalid_argument("convex_hull: ambient dimensions must match");
  const ScaledCopy sz = scale_copy(Z);
  const ScaledCopy sw = scale_copy(W);
  const int n = Z.dim();
  const int nv = sz.nvars + sw.nvars + 2;
  const int col_lz = sz.nvars + sw.nvars;
  const int col_lw = col_lz + 1;

  Eigen::MatrixXd G = zeros(n, nv);
  G.leftCols(sz.nvars) = sz.Gpart;
  G.middleCols(sz.nvars, sw.nvars) = sw.Gpart;
  G.col(col_lz) = Z.c;
  G.col(col_lw) = W.c;

  const int rz = static_cast<int>(sz.Arows.rows());
  const int rw = static_cast<int>(sw.Arows.rows());
  Eigen::MatrixXd A = zeros(rz + rw + 1, nv);
  A.topLeftCorner(rz, sz.nvars) = sz.Arows;
  A.block(0, col_lz, rz, 1) = sz.lambda_col;
  A.block(rz, sz.nvars, rw, sw.nvars) = sw.Arows;
  A.block(rz, col_lw, rw, 1) = sw.lambda_col;
  A(rz + rw, col_lz) = 1.0;
  A(rz + rw, col_lw) = 1.0;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(rz + rw + 1);
  b(rz + rw) = 1.0;

  std::vector<ConeSpec> cones = sz.cones;
  cones.insert(cones.end(), sw.cones.begin(), sw.cones.end());
  cones.push_back(ConeSpec::nonnegative(2));
  return CCG(G, Eigen::VectorXd::Zero(n), A, b, cones);
}

CCG cartesian_product(const CCG& Z, const CCG& W) {
  const int n = Z.dim() + W.dim();
  const int ngz = Z.generators(), ngw = W.generators();
  Eigen::MatrixXd G = zeros(n, ngz + ngw);
  G.topLeftCorner(Z.dim(), ngz) = Z.G;
  G.bottomRightCorner(W.dim(), ngw) = W.G;
  Eigen::VectorXd c(n);
  c << Z.c, W.c;
  Eigen::MatrixXd A = zeros(Z.constraints() + W.constraints(), ngz + ngw);
  A.topLeftCorner(Z.constraints(), ngz) = Z.A;
  A.bottomRightCorner(W.constraints(), ngw) = W.A;
  Eigen::VectorXd b(Z.constraints() + W.constraints());
  b << Z.b, W.b;
  std::vector<ConeSpec> cones = Z.cones;
  cones.insert(cones.end(), W.cones.begin(), W.cones.end());
  return CCG(G, c, A, b, cones);
}

namespace {

// Drops latent factors that touch neither the generators nor the
// constraints; they contribute nothing but degrade solver conditioning.
CCG prune_unused_factors(const CCG& Z) {
  std::vector<int> keep_cols;
  std::vector<ConeSpec> cones;
  int off = 0;
  for (const auto& cn : Z.cones) {
    const bool used = Z.G.middleCols(off, cn.dim()).cwiseAbs().maxCoeff() > 0.0 ||
                      (Z.constraints() > 0 &&
                       Z.A.middleCols(off, cn.dim()).cwiseAbs().maxCoeff() > 0.0);
    if (used) {
      for (int j = 0; j < cn.dim(); ++j) keep_cols.push_back(off + j);
      cones.push_back(cn);
    }
    off += cn.dim();
  }
  if (static_cast<int>(keep_cols.size()) == Z.generators()) return Z;
  Eigen::MatrixXd G(Z.dim(), keep_cols.size());
  Eigen::MatrixXd A(Z.constraints(), keep_cols.size());
  for (size_t j = 0; j < keep_cols.size(); ++j) {
    G.col(j) = Z.G.col(keep_cols[j]);
    if (Z.constraints() > 0) A.col(j) = Z.A.col(keep_cols[j]);
  }
  return CCG(G, Z.c, A, Z.b, cones);
}

}  // namespace

CCG project(const CCG& Z, const std::vector<int>& idx) {
  Eigen::MatrixXd R = zeros(static_cast<int>(idx.size()), Z.dim());
  for (int i = 0; i < static_cast<int>(idx.size()); ++i) {
    if (idx[i] < 0 || idx[i] >= Z.dim()) throw std::out_of_range("project: index out of range");
    R(i, idx[i]) = 1.0;
  }
  return prune_unused_factors(
      linear_map(R, Eigen::VectorXd::Zero(static_cast<int>(idx.size())), Z));
}

CCG set_matrix_vector_product(const MatrixCCG& Bset, const CCG& U) {
  const int p = Bset.rows, q = Bset.cols;
  if (U.dim() != q)
    throw std::invalid_argument("set_matrix_vector_product: ambient(U) must equal matrix cols");
  for (const auto& cn : U.cones)
    if (cn.kind() != ConeSpec::Kind::Box && cn.kind() != ConeSpec::Kind::Ball2)
      throw std::invalid_argument(
          "set_matrix_vector_product: U must use box/ball latent factors only");

  const int nB = Bset.set.generators();
  const int ngu = U.generators();
  const Eigen::MatrixXd Cbar = Bset.center_matrix();

  // Norm bound on the matrix-set latent; the auxiliary blocks satisfy
  // ||zeta_a|| <= rho * u_a.
  double rho2 = 0.0;
  for (const auto& cn : Bset.set.cones) rho2 += cn.max_norm() * cn.max_norm();
  const double rho = std::sqrt(rho2);

  const int per_alpha = (nB > 0) ? nB + 1 : 0;
  const int nv = ngu + q * per_alpha;
  const int ncu = U.constraints();
  const int nrows = ncu + ((nB > 0) ? q : 0);

  Eigen::MatrixXd G = zeros(p + q, nv);
  Eigen::VectorXd c(p + q);
  Eigen::MatrixXd A = zeros(nrows, nv);
  Eigen::VectorXd b(nrows);
  std::vector<ConeSpec> cones = U.cones;

  G.topLeftCorner(p, ngu) = Cbar * U.G;
  G.bottomLeftCorner(q, ngu) = U.G;
  c.head(p) = Cbar * U.c;
  c.tail(q) = U.c;
  A.topLeftCorner(ncu, ngu) = U.A;
  b.head(ncu) = U.b;

  if (nB > 0) {
    for (int a = 0; a < q; ++a) {
      const int off = ngu + a * per_alpha;
      G.block(0, off, p, nB) = Bset.generator_slice(a);
      // s_a = rho * (G_u[a,:] xi_u + c_u[a])
      A.block(ncu + a, 0, 1, ngu) = -rho * U.G.row(a);
      A(ncu + a, off + nB) = 1.0;
      b(ncu + a) = rho * U.c(a);
      cones.push_back(ConeSpec::soc(nB + 1));
    }
  }
  return CCG(G, c, A, b, cones);
}

}  // namespace afdi
