#include "afdi/reachability.hpp"

#include <stdexcept>

#include "afdi/queries.hpp"

namespace afdi {

void LPVMode::validate() const {
  if (thetas.empty()) throw std::invalid_argument("LPVMode: vertex list is empty");
  const size_t nv = thetas.size();
  if (A.size() != nv || B.size() != nv || E.size() != nv || r.size() != nv)
    throw std::invalid_argument("LPVMode: per-vertex matrix lists have different lengths");
  const int nx = n_x(), nu = n_u(), nw = n_w();
  for (size_t v = 0; v < nv; ++v) {
    if (A[v].rows() != nx || A[v].cols() != nx)
      throw std::invalid_argument("LPVMode: A must be square and consistent across vertices");
    if (B[v].rows() != nx || B[v].cols() != nu)
      throw std::invalid_argument("LPVMode: B dimensions inconsistent");
    if (E[v].rows() != nx || E[v].cols() != nw)
      throw std::invalid_argument("LPVMode: E dimensions inconsistent");
    if (r[v].size() != nx) throw std::invalid_argument("LPVMode: r dimension inconsistent");
  }
  if (C.cols() != nx) throw std::invalid_argument("LPVMode: C column count != n_x");
  if (s.size() != C.rows()) throw std::invalid_argument("LPVMode: s length != n_y");
  if (F.rows() != C.rows()) throw std::invalid_argument("LPVMode: F row count != n_y");
}

void UncertaintySets::validate(int n_x, int n_u) const {
  if (X0.dim() != n_x) throw std::invalid_argument("UncertaintySets: ambient(X0) != n_x");
  if (U.dim() != n_u) throw std::invalid_argument("UncertaintySets: ambient(U) != n_u");
  for (int i = 0; i < n_u; ++i) {
    Eigen::VectorXd d = Eigen::VectorXd::Zero(n_u);
    d(i) = -1.0;
    const auto h = support(U, d);
    if (h.status == SolveStatus::Optimal && h.value > 1e-9)
      throw std::invalid_argument(
          "UncertaintySets: U reaches below zero in coordinate " + std::to_string(i));
  }
}

std::vector<int> LiftedReachSet::control_indices() const {
  std::vector<int> idx(N * n_u);
  for (int i = 0; i < N * n_u; ++i) idx[i] = n_x + i;
  return idx;
}

std::vector<int> LiftedReachSet::state_indices() const {
  std::vector<int> idx(n_x);
  for (int i = 0; i < n_x; ++i) idx[i] = i;
  return idx;
}

Eigen::MatrixXd controllability_matrix(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                       int N) {
  if (N < 1) throw std::invalid_argument("controllability_matrix: N must be >= 1");
  if (A.rows() != A.cols() || A.rows() != B.rows())
    throw std::invalid_argument("controllability_matrix: dimension mismatch");
  const int nx = static_cast<int>(A.rows());
  const int nu = static_cast<int>(B.cols());
  Eigen::MatrixXd C(nx, N * nu);
  // Layout [B  AB  ...  A^{N-1}B]: block j multiplies u_{N-1-j}, so the
  // stacked control vector runs backwards in time.
  Eigen::MatrixXd P = B;
  for (int j = 0; j < N; ++j) {
    C.middleCols(j * nu, nu) = P;
    if (j + 1 < N) P = A * P;
  }
  return C;
}

Eigen::VectorXd time_ordered(const Eigen::VectorXd& u, int N, int n_u) {
  if (u.size() != static_cast<Eigen::Index>(N) * n_u)
    throw std::invalid_argument("time_ordered: length != N*n_u");
  Eigen::VectorXd v(u.size());
  for (int k = 0; k < N; ++k) v.segment(k * n_u, n_u) = u.segment((N - 1 - k) * n_u, n_u);
  return v;
}

namespace {

// Embed a disturbance-space set into the lifted space: x-block rows get M,
// control rows stay zero.
CCG lift_into_state_block(const Eigen::MatrixXd& M, const CCG& W, int lifted_dim) {
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(lifted_dim, M.cols());
  L.topRows(M.rows()) = M;
  return linear_map(L, Eigen::VectorXd::Zero(lifted_dim), W);
}

CCG cartesian_power(const CCG& U, int N) {
  CCG P = U;
  for (int k = 1; k < N; ++k) P = cartesian_product(P, U);
  return P;
}

}  // namespace

LiftedReachSet lift_vertex(const LPVMode& mode, int vertex, int N,
                           const UncertaintySets& sets) {
  mode.validate();
  if (vertex < 0 || vertex >= mode.vertex_count())
    throw std::invalid_argument("lift_vertex: vertex index out of range");
  if (N < 1) throw std::invalid_argument("lift_vertex: N must be >= 1");
  const int nx = mode.n_x(), nu = mode.n_u();
  sets.validate(nx, nu);

  const Eigen::MatrixXd& A = mode.A[vertex];
  const Eigen::MatrixXd& B = mode.B[vertex];
  const Eigen::MatrixXd CN = controllability_matrix(A, B, N);
  Eigen::MatrixXd AN = Eigen::MatrixXd::Identity(nx, nx);
  for (int k = 0; k < N; ++k) AN = A * AN;

  const CCG UN = cartesian_power(sets.U, N);
  const CCG& X0 = sets.X0;
  const int ngx = X0.generators(), ngu = UN.generators();
  const int ncx = X0.constraints(), ncu = UN.constraints();
  const int dim = nx + N * nu;

  // Joint set over (x_N, u): the control latent drives both blocks, so the
  // x-u correlation is exact.
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(dim, ngx + ngu);
  G.topLeftCorner(nx, ngx) = AN * X0.G;
  G.topRightCorner(nx, ngu) = CN * UN.G;
  G.bottomRightCorner(N * nu, ngu) = UN.G;

  Eigen::VectorXd drift = Eigen::VectorXd::Zero(nx);
  Eigen::MatrixXd Ak = Eigen::MatrixXd::Identity(nx, nx);  // A^{N-1-k} built backwards
  for (int k = N - 1; k >= 0; --k) {
    drift += Ak * mode.r[vertex];
    Ak = A * Ak;
  }

  Eigen::VectorXd c(dim);
  c.head(nx) = AN * X0.c + CN * UN.c + drift;
  c.tail(N * nu) = UN.c;

  Eigen::MatrixXd Ac = Eigen::MatrixXd::Zero(ncx + ncu, ngx + ngu);
  Ac.topLeftCorner(ncx, ngx) = X0.A;
  Ac.bottomRightCorner(ncu, ngu) = UN.A;
  Eigen::VectorXd bc(ncx + ncu);
  bc << X0.b, UN.b;

  std::vector<ConeSpec> cones = X0.cones;
  cones.insert(cones.end(), UN.cones.begin(), UN.cones.end());

  CCG Z(G, c, Ac, bc, cones);

  // Accumulate the disturbance terms sum_k A^{N-1-k} E w_k.
  if (mode.n_w() > 0 && sets.W.dim() == mode.n_w()) {
    Eigen::MatrixXd Apow = Eigen::MatrixXd::Identity(nx, nx);
    for (int k = N - 1; k >= 0; --k) {
      Z = minkowski_sum(Z, lift_into_state_block(Apow * mode.E[vertex], sets.W, dim));
      Apow = A * Apow;
    }
  }

  LiftedReachSet rs;
  rs.set = std::move(Z);
  rs.N = N;
  rs.n_x = nx;
  rs.n_u = nu;
  rs.mode = mode.name;
  return rs;
}

LiftedReachSet reach_mode(const LPVMode& mode, int N, const UncertaintySets& sets,
                          SchedulePolicy policy) {
  mode.validate();
  const int nx = mode.n_x(), nu = mode.n_u();
  const int nv = mode.vertex_count();

  if (policy == SchedulePolicy::VertexConstant) {
    LiftedReachSet rs = lift_vertex(mode, 0, N, sets);
    for (int v = 1; v < nv; ++v)
      rs.set = convex_hull(rs.set, lift_vertex(mode, v, N, sets).set);
    rs.mode = mode.name;
    return rs;
  }

  // Per-step hull: propagate the joint (x_k, u) set one step at a time and
  // hull over vertices after every step, which is sound for time-varying
  // scheduling.
  sets.validate(nx, nu);
  const int dim = nx + N * nu;
  const CCG UN = cartesian_power(sets.U, N);
  CCG Z = cartesian_product(sets.X0, UN);
  for (int k = 0; k < N; ++k) {
    CCG next;
    for (int v = 0; v < nv; ++v) {
      Eigen::MatrixXd R = Eigen::MatrixXd::Identity(dim, dim);
      R.topLeftCorner(nx, nx) = mode.A[v];
      // Control blocks run backwards in time (see controllability_matrix).
      R.block(0, nx + (N - 1 - k) * nu, nx, nu) = mode.B[v];
      Eigen::VectorXd t = Eigen::VectorXd::Zero(dim);
      t.head(nx) = mode.r[v];
      CCG Zv = linear_map(R, t, Z);
      if (mode.n_w() > 0 && sets.W.dim() == mode.n_w())
        Zv = minkowski_sum(Zv, lift_into_state_block(mode.E[v], sets.W, dim));
      next = (v == 0) ? Zv : convex_hull(next, Zv);
    }
    Z = std::move(next);
  }

  LiftedReachSet rs;
  rs.set = std::move(Z);
  rs.N = N;
  rs.n_x = nx;
  rs.n_u = nu;
  rs.mode = mode.name;
  return rs;
}

LiftedReachSet apply_output_map(const LiftedReachSet& rs, const LPVMode& mode,
                                const UncertaintySets& sets) {
  const int nx = rs.n_x, nc = rs.N * rs.n_u;
  const int ny = mode.n_y();
  if (mode.C.cols() != nx)
    throw std::invalid_argument("apply_output_map: C column count != lifted state dim");

  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(ny + nc, nx + nc);
  R.topLeftCorner(ny, nx) = mode.C;
  R.bottomRightCorner(nc, nc).setIdentity();
  Eigen::VectorXd t = Eigen::VectorXd::Zero(ny + nc);
  t.head(ny) = mode.s;

  CCG Y = linear_map(R, t, rs.set);
  if (mode.F.cols() > 0 && sets.V.dim() == mode.F.cols())
    Y = minkowski_sum(Y, lift_into_state_block(mode.F, sets.V, ny + nc));

  LiftedReachSet out;
  out.set = std::move(Y);
  out.N = rs.N;
  out.n_x = ny;  // state block replaced by the output block
  out.n_u = rs.n_u;
  out.mode = rs.mode;
  return out;
}

}  // namespace afdi
