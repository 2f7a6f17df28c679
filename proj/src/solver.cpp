#include "afdi/solver.hpp"

#include <Eigen/SparseCholesky>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <limits>

namespace afdi {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::NumericalFailure: return "numerical_failure";
  }
  return "?";
}

void ConicProblem::validate() const {
  const int n = total_dim(cones);
  if (c.size() != n) throw std::invalid_argument("ConicProblem: objective length != cone dim");
  if (A.cols() != n && !(A.rows() == 0 && n >= 0))
    throw std::invalid_argument("ConicProblem: A column count != cone dim");
  if (A.rows() != b.size()) throw std::invalid_argument("ConicProblem: A rows != length of b");
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

// ---------------------------------------------------------------------------
// Canonical form: min c'v  s.t.  A v = b, v in R+^{n_lin} x SOC(q_1) x ...
// with SOC blocks ordered (t, u): t >= ||u||.  Original latent coordinates
// are recovered through xi = T v + t0.
// ---------------------------------------------------------------------------
struct Canonical {
  int n = 0, m = 0, n_lin = 0;
  std::vector<int> soc;
  SpMat A;
  Eigen::VectorXd b, c;
  SpMat T;
  Eigen::VectorXd t0;
  double c0 = 0.0;  // constant objective offset from the variable shift
};

Canonical canonicalize(const ConicProblem& p) {
  p.validate();
  const int nxi = p.vars();

  int n_lin = 0, n_soc = 0, extra_rows = 0;
  for (const auto& cn : p.cones) {
    switch (cn.kind()) {
      case ConeSpec::Kind::Free: n_lin += 2 * cn.dim(); break;
      case ConeSpec::Kind::NonNegative: n_lin += cn.dim(); break;
      case ConeSpec::Kind::Box: n_lin += 2 * cn.dim(); extra_rows += cn.dim(); break;
      case ConeSpec::Kind::Ball2: n_soc += cn.dim() + 1; extra_rows += 1; break;
      case ConeSpec::Kind::SOC: n_soc += cn.dim(); break;
    }
  }

  Canonical cf;
  cf.n_lin = n_lin;
  cf.n = n_lin + n_soc;
  cf.t0 = Eigen::VectorXd::Zero(nxi);

  std::vector<Triplet> tT, tE;
  Eigen::VectorXd e_extra = Eigen::VectorXd::Zero(extra_rows);
  int xi = 0, lin = 0, soc = n_lin, row = 0;
  for (const auto& cn : p.cones) {
    const int d = cn.dim();
    switch (cn.kind()) {
      case ConeSpec::Kind::Free:
        for (int i = 0; i < d; ++i) {
          tT.emplace_back(xi + i, lin + i, 1.0);
          tT.emplace_back(xi + i, lin + d + i, -1.0);
        }
        lin += 2 * d;
        break;
      case ConeSpec::Kind::NonNegative:
        for (int i = 0; i < d; ++i) tT.emplace_back(xi + i, lin + i, 1.0);
        lin += d;
        break;
      case ConeSpec::Kind::Box:
        // xi = lo + pp,  pp + q = hi - lo
        for (int i = 0; i < d; ++i) {
          tT.emplace_back(xi + i, lin + i, 1.0);
          cf.t0(xi + i) = cn.lo()(i);
          tE.emplace_back(row + i, lin + i, 1.0);
          tE.emplace_back(row + i, lin + d + i, 1.0);
          e_extra(row + i) = cn.hi()(i) - cn.lo()(i);
        }
        lin += 2 * d;
        row += d;
        break;
      case ConeSpec::Kind::Ball2:
        // block (t, xi) with t = radius
        tE.emplace_back(row, soc, 1.0);
        e_extra(row) = cn.radius();
        for (int i = 0; i < d; ++i) tT.emplace_back(xi + i, soc + 1 + i, 1.0);
        cf.soc.push_back(d + 1);
        soc += d + 1;
        row += 1;
        break;
      case ConeSpec::Kind::SOC:
        // external convention: ||head|| <= last; internal: (last, head)
        tT.emplace_back(xi + d - 1, soc, 1.0);
        for (int i = 0; i < d - 1; ++i) tT.emplace_back(xi + i, soc + 1 + i, 1.0);
        cf.soc.push_back(d);
        soc += d;
        break;
    }
    xi += d;
  }

  cf.T = SpMat(nxi, cf.n);
  cf.T.setFromTriplets(tT.begin(), tT.end());

  SpMat E(extra_rows, cf.n);
  E.setFromTriplets(tE.begin(), tE.end());

  const int m0 = static_cast<int>(p.A.rows());
  cf.m = m0 + extra_rows;
  SpMat Aorig = SpMat(p.A.sparseView()) * cf.T;
  std::vector<Triplet> tA;
  tA.reserve(Aorig.nonZeros() + E.nonZeros());
  for (int k = 0; k < Aorig.outerSize(); ++k)
    for (SpMat::InnerIterator it(Aorig, k); it; ++it)
      tA.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
  for (int k = 0; k < E.outerSize(); ++k)
    for (SpMat::InnerIterator it(E, k); it; ++it)
      tA.emplace_back(m0 + static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
  cf.A = SpMat(cf.m, cf.n);
  cf.A.setFromTriplets(tA.begin(), tA.end());

  cf.b.resize(cf.m);
  cf.b.head(m0) = p.b - p.A * cf.t0;
  cf.b.tail(extra_rows) = e_extra;
  cf.c = cf.T.transpose() * p.c;
  cf.c0 = p.c.dot(cf.t0);
  return cf;
}

// ---------------------------------------------------------------------------
// Cone algebra over the canonical layout.
// ---------------------------------------------------------------------------
struct ConeLayout {
  int n_lin = 0;
  std::vector<int> soc;
  int dim() const { return n_lin + total(); }
  int total() const {
    int s = 0;
    for (int d : soc) s += d;
    return s;
  }
  int degree() const { return n_lin + static_cast<int>(soc.size()); }
};

Eigen::VectorXd cone_e(const ConeLayout& L) {
  Eigen::VectorXd e = Eigen::VectorXd::Zero(L.dim());
  e.head(L.n_lin).setOnes();
  int off = L.n_lin;
  for (int d : L.soc) {
    e(off) = 1.0;
    off += d;
  }
  return e;
}

// Largest step with u + alpha*du staying in the cone; may return +inf.
double max_step(const ConeLayout& L, const Eigen::VectorXd& u, const Eigen::VectorXd& du) {
  double alpha = kInf;
  for (int i = 0; i < L.n_lin; ++i)
    if (du(i) < 0.0) alpha = std::min(alpha, -u(i) / du(i));
  int off = L.n_lin;
  for (int d : L.soc) {
    const double u0 = u(off), d0 = du(off);
    const auto u1 = u.segment(off + 1, d - 1);
    const auto d1 = du.segment(off + 1, d - 1);
    const double a = d0 * d0 - d1.squaredNorm();
    const double bq = u0 * d0 - u1.dot(d1);
    const double cq = u0 * u0 - u1.squaredNorm();
    double blk = kInf;
    if (std::abs(a) < 1e-14 * (1.0 + d1.squaredNorm())) {
      if (bq < 0.0) blk = -cq / (2.0 * bq);
    } else {
      const double disc = bq * bq - a * cq;
      if (a < 0.0 || disc > 0.0) {
        const double sq = std::sqrt(std::max(disc, 0.0));
        const double r1 = (-bq - sq) / a, r2 = (-bq + sq) / a;
        const double lo = std::min(r1, r2), hi = std::max(r1, r2);
        if (a < 0.0) {
          if (hi > 0.0) blk = hi;     // single positive crossing out of the cone
          if (lo > 0.0) blk = lo;
        } else if (lo > 0.0) {
          blk = lo;
        }
      }
    }
    alpha = std::min(alpha, blk);
    off += d;
  }
  return alpha;
}

Eigen::VectorXd jordan_mul(const ConeLayout& L, const Eigen::VectorXd& u,
                           const Eigen::VectorXd& v) {
  Eigen::VectorXd r(L.dim());
  r.head(L.n_lin) = u.head(L.n_lin).cwiseProduct(v.head(L.n_lin));
  int off = L.n_lin;
  for (int d : L.soc) {
    r(off) = u.segment(off, d).dot(v.segment(off, d));
    r.segment(off + 1, d - 1) =
        u(off) * v.segment(off + 1, d - 1) + v(off) * u.segment(off + 1, d - 1);
    off += d;
  }
  return r;
}

// Solve lambda o q = r.
Eigen::VectorXd jordan_solve(const ConeLayout& L, const Eigen::VectorXd& lam,
                             const Eigen::VectorXd& r) {
  Eigen::VectorXd q(L.dim());
  q.head(L.n_lin) = r.head(L.n_lin).cwiseQuotient(lam.head(L.n_lin));
  int off = L.n_lin;
  for (int d : L.soc) {
    const double l0 = lam(off);
    const auto l1 = lam.segment(off + 1, d - 1);
    const double det = l0 * l0 - l1.squaredNorm();
    const double q0 = (l0 * r(off) - l1.dot(r.segment(off + 1, d - 1))) / det;
    q(off) = q0;
    q.segment(off + 1, d - 1) = (r.segment(off + 1, d - 1) - q0 * l1) / l0;
    off += d;
  }
  return q;
}

// Nesterov-Todd scaling.  W satisfies W z = W^{-1} x = lambda; Wsq = W^2.
struct Scaling {
  Eigen::VectorXd d_lin;  // sqrt(x_i / z_i)
  std::vector<double> eta;
  std::vector<Eigen::VectorXd> wbar;
  Eigen::VectorXd lambda;
  bool ok = true;
};

Eigen::VectorXd apply_wbar(const Eigen::VectorXd& w, const Eigen::VectorXd& v, bool inverse) {
  const int d = static_cast<int>(w.size());
  const double s = inverse ? -1.0 : 1.0;
  const double w0 = w(0);
  const auto w1 = w.tail(d - 1);
  const auto v1 = v.tail(d - 1);
  Eigen::VectorXd r(d);
  r(0) = w0 * v(0) + s * w1.dot(v1);
  r.tail(d - 1) = v1 + (s * v(0) + w1.dot(v1) / (1.0 + w0)) * w1;
  return r;
}

Scaling nt_scaling(const ConeLayout& L, const Eigen::VectorXd& x, const Eigen::VectorXd& z) {
  Scaling sc;
  sc.d_lin = (x.head(L.n_lin).array() / z.head(L.n_lin).array()).sqrt();
  sc.lambda.resize(L.dim());
  sc.lambda.head(L.n_lin) =
      (x.head(L.n_lin).array() * z.head(L.n_lin).array()).sqrt();
  int off = L.n_lin;
  for (int d : L.soc) {
    const auto xb = x.segment(off, d);
    const auto zb = z.segment(off, d);
    const double rx2 = xb(0) * xb(0) - xb.tail(d - 1).squaredNorm();
    const double rz2 = zb(0) * zb(0) - zb.tail(d - 1).squaredNorm();
    if (rx2 <= 0.0 || rz2 <= 0.0) {
      sc.ok = false;
      return sc;
    }
    const double rx = std::sqrt(rx2), rz = std::sqrt(rz2);
    Eigen::VectorXd xbar = xb / rx, zbar = zb / rz;
    Eigen::VectorXd jz = zbar;
    jz.tail(d - 1) = -zbar.tail(d - 1);
    const double gamma = std::sqrt((1.0 + xbar.dot(zbar)) / 2.0);
    Eigen::VectorXd w = (xbar + jz) / (2.0 * gamma);
    const double eta = std::sqrt(rx / rz);
    sc.eta.push_back(eta);
    sc.wbar.push_back(w);
    sc.lambda.segment(off, d) = eta * apply_wbar(w, zb, false);
    off += d;
  }
  return sc;
}

Eigen::VectorXd apply_W(const ConeLayout& L, const Scaling& sc, const Eigen::VectorXd& v,
                        bool inverse) {
  Eigen::VectorXd r(L.dim());
  if (inverse)
    r.head(L.n_lin) = v.head(L.n_lin).cwiseQuotient(sc.d_lin);
  else
    r.head(L.n_lin) = v.head(L.n_lin).cwiseProduct(sc.d_lin);
  int off = L.n_lin;
  for (size_t k = 0; k < L.soc.size(); ++k) {
    const int d = L.soc[k];
    const double f = inverse ? 1.0 / sc.eta[k] : sc.eta[k];
    r.segment(off, d) = f * apply_wbar(sc.wbar[k], v.segment(off, d), inverse);
    off += d;
  }
  return r;
}

SpMat build_Wsq(const ConeLayout& L, const Scaling& sc) {
  std::vector<Triplet> t;
  for (int i = 0; i < L.n_lin; ++i) t.emplace_back(i, i, sc.d_lin(i) * sc.d_lin(i));
  int off = L.n_lin;
  for (size_t k = 0; k < L.soc.size(); ++k) {
    const int d = L.soc[k];
    const double e2 = sc.eta[k] * sc.eta[k];
    const Eigen::VectorXd& w = sc.wbar[k];
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        double v = 2.0 * w(i) * w(j);
        if (i == j) v += (i == 0) ? -1.0 : 1.0;
        t.emplace_back(off + i, off + j, e2 * v);
      }
    off += d;
  }
  SpMat W(L.dim(), L.dim());
  W.setFromTriplets(t.begin(), t.end());
  return W;
}

struct KktSolver {
  const Canonical& cf;
  const ConeLayout& L;
  SpMat Wsq;
  Eigen::SimplicialLDLT<SpMat> ldlt;
  SpMat Mreg;
  bool ok = true;

  KktSolver(const Canonical& cf_, const ConeLayout& L_, const Scaling& sc)
      : cf(cf_), L(L_), Wsq(build_Wsq(L_, sc)) {
    if (cf.m > 0) {
      SpMat M = cf.A * Wsq * SpMat(cf.A.transpose());
      SpMat I(cf.m, cf.m);
      I.setIdentity();
      double scale = 0.0;
      for (int i = 0; i < cf.m; ++i) scale = std::max(scale, std::abs(M.coeff(i, i)));
      // Proximal shift sized to the matrix; grown on factorization failure.
      double reg = 1e-14 * std::max(scale, 1.0);
      for (int attempt = 0; attempt < 8; ++attempt) {
        Mreg = M + reg * I;
        ldlt.compute(Mreg);
        ok = (ldlt.info() == Eigen::Success);
        if (ok) break;
        reg *= 100.0;
      }
    }
  }

  Eigen::VectorXd solveM(const Eigen::VectorXd& r) const {
    Eigen::VectorXd s = ldlt.solve(r);
    s += ldlt.solve(r - Mreg * s);  // one round of refinement
    return s;
  }

  // Solves the HSD Newton system for a given right-hand side.  r4 is the
  // complementarity target in the scaled (lambda) space.
  void newton(const Scaling& sc, const Eigen::VectorXd& r1, const Eigen::VectorXd& r2,
              double r3, const Eigen::VectorXd& r4, double r5, double tau, double kappa,
              Eigen::VectorXd& dx, Eigen::VectorXd& dy, Eigen::VectorXd& dz, double& dtau,
              double& dkappa) const {
    const Eigen::VectorXd r4p = jordan_solve(L, sc.lambda, r4);
    const Eigen::VectorXd r2p = r2 + apply_W(L, sc, r4p, true);
    const Eigen::VectorXd g1 = Wsq * r2p;
    const Eigen::VectorXd g2 = Wsq * cf.c;

    Eigen::VectorXd v1 = Eigen::VectorXd::Zero(cf.m), v2 = Eigen::VectorXd::Zero(cf.m);
    if (cf.m > 0) {
      v1 = solveM(r1 - cf.A * g1);
      v2 = solveM(cf.b + cf.A * g2);
    }
    const Eigen::VectorXd p1 = g1 + Wsq * (cf.A.transpose() * v1);
    const Eigen::VectorXd p2 = Wsq * (cf.A.transpose() * v2) - g2;

    const double denom = cf.b.dot(v2) - cf.c.dot(p2) + kappa / tau;
    const double num = r3 - cf.b.dot(v1) + cf.c.dot(p1) + r5 / tau;
    dtau = num / denom;
    dy = v1 + dtau * v2;
    dx = p1 + dtau * p2;
    // Recover dz from the dual-feasibility row; this keeps the dual residual
    // exact instead of amplifying W^{-2} round-off near the cone boundary.
    dz = -cf.A.transpose() * dy + cf.c * dtau - r2;
    dkappa = (r5 - kappa * dtau) / tau;
  }
};

SolveOutcome finish(const Canonical& cf, SolveStatus st, const Eigen::VectorXd& v, double value,
                    double pres, double dres, double gap, int iters) {
  SolveOutcome out;
  out.status = st;
  out.value = (st == SolveStatus::Optimal) ? value + cf.c0 : value;
  out.primal_res = pres;
  out.dual_res = dres;
  out.gap = gap;
  out.iterations = iters;
  if (v.size() == cf.n) out.x = cf.T * v + cf.t0;
  return out;
}

}  // namespace

SolveOutcome solve(const ConicProblem& problem, const SolveOptions& options) {
  const Canonical cf = canonicalize(problem);
  const bool verbose = options.verbose || std::getenv("AFDI_LOG") != nullptr;

  if (cf.n == 0) {
    // No latent freedom: feasible iff b vanishes.
    const double res = (cf.m > 0) ? cf.b.lpNorm<Eigen::Infinity>() : 0.0;
    SolveOutcome out;
    out.status = (res <= options.tol * 10.0 + 1e-12) ? SolveStatus::Optimal
                                                     : SolveStatus::Infeasible;
    out.x = cf.t0;
    out.value = (out.status == SolveStatus::Optimal) ? cf.c0 : 0.0;
    out.primal_res = res;
    return out;
  }

  ConeLayout L;
  L.n_lin = cf.n_lin;
  L.soc = cf.soc;

  const Eigen::VectorXd e = cone_e(L);
  const double nu = static_cast<double>(L.degree()) + 1.0;
  const double bnorm = 1.0 + cf.b.lpNorm<Eigen::Infinity>();
  const double cnorm = 1.0 + cf.c.lpNorm<Eigen::Infinity>();

  Eigen::VectorXd x = e, z = e, y = Eigen::VectorXd::Zero(cf.m);
  double tau = 1.0, kappa = 1.0;

  // Best nearly-feasible iterate so far; accepted at the reduced tolerance
  // when the iteration stalls before reaching full accuracy.
  struct Best {
    double metric = kInf;
    double value = 0.0, pres = 0.0, dres = 0.0, gap = 0.0;
    Eigen::VectorXd v;
    int iter = 0;
  } best;
  double mu_prev = kInf;
  int stall = 0, iter = 0;

  for (iter = 0; iter < options.max_iter; ++iter) {
    const Eigen::VectorXd rp = cf.A * x - cf.b * tau;
    const Eigen::VectorXd rd = -cf.A.transpose() * y + cf.c * tau - z;
    const double rg = cf.b.dot(y) - cf.c.dot(x) - kappa;
    const double mu = (x.dot(z) + tau * kappa) / nu;

    // Optimality of the de-homogenized point.
    {
      const double pres = (cf.A * (x / tau) - cf.b).lpNorm<Eigen::Infinity>() / bnorm;
      const double dres =
          (cf.c - cf.A.transpose() * (y / tau) - z / tau).lpNorm<Eigen::Infinity>() / cnorm;
      const double pcost = cf.c.dot(x) / tau, dcost = cf.b.dot(y) / tau;
      const double gap = x.dot(z) / (tau * tau);
      const double relgap = gap / std::max(1.0, std::abs(pcost));
      if (verbose)
        std::cerr << "afdi-ipm it=" << iter << " mu=" << mu << " pres=" << pres
                  << " dres=" << dres << " gap=" << gap << " tau=" << tau << " kappa=" << kappa
                  << "\n";
      if (pres <= options.tol && dres <= options.tol &&
          (gap <= options.tol || relgap <= options.tol))
        return finish(cf, SolveStatus::Optimal, x / tau, pcost, pres, dres, gap, iter);
      const double metric = std::max({pres, dres, std::min(gap, relgap)});
      if (metric < best.metric) {
        best = {metric, pcost, pres, dres, gap, x / tau, iter};
      }
      (void)dcost;
    }
    if (mu >= 0.95 * mu_prev) {
      if (++stall >= 4) break;
    } else {
      stall = 0;
    }
    mu_prev = mu;

    // Infeasibility certificates.
    if (cf.b.dot(y) > options.infeas_tol * bnorm) {
      const double cert =
          (cf.A.transpose() * y + z).lpNorm<Eigen::Infinity>() / cf.b.dot(y);
      if (cert <= options.infeas_tol)
        return finish(cf, SolveStatus::Infeasible, Eigen::VectorXd(), 0.0, 0.0, 0.0, 0.0, iter);
    }
    if (-cf.c.dot(x) > options.infeas_tol * cnorm) {
      const double cert = (cf.A * x).lpNorm<Eigen::Infinity>() / (-cf.c.dot(x));
      if (cert <= options.infeas_tol)
        return finish(cf, SolveStatus::Unbounded, Eigen::VectorXd(), 0.0, 0.0, 0.0, 0.0, iter);
    }

    const Scaling sc = nt_scaling(L, x, z);
    if (!sc.ok) break;
    const KktSolver kkt(cf, L, sc);
    if (!kkt.ok) break;

    // Predictor.
    Eigen::VectorXd dxa, dya, dza;
    double dtaua, dkappaa;
    kkt.newton(sc, -rp, -rd, -rg, -jordan_mul(L, sc.lambda, sc.lambda), -tau * kappa, tau,
               kappa, dxa, dya, dza, dtaua, dkappaa);

    double alpha = std::min({max_step(L, x, dxa), max_step(L, z, dza),
                             dtaua < 0 ? tau / -dtaua : kInf,
                             dkappaa < 0 ? kappa / -dkappaa : kInf});
    const double alpha_aff = std::min(1.0, alpha);
    const double sigma = std::pow(1.0 - alpha_aff, 3);

    // Corrector (Mehrotra).
    const Eigen::VectorXd corr =
        jordan_mul(L, apply_W(L, sc, dxa, true), apply_W(L, sc, dza, false));
    const Eigen::VectorXd r4 =
        sigma * mu * e - jordan_mul(L, sc.lambda, sc.lambda) - corr;
    const double r5 = sigma * mu - tau * kappa - dtaua * dkappaa;

    Eigen::VectorXd dx, dy, dz;
    double dtau, dkappa;
    kkt.newton(sc, -(1.0 - sigma) * rp, -(1.0 - sigma) * rd, -(1.0 - sigma) * rg, r4, r5, tau,
               kappa, dx, dy, dz, dtau, dkappa);

    alpha = std::min({max_step(L, x, dx), max_step(L, z, dz), dtau < 0 ? tau / -dtau : kInf,
                      dkappa < 0 ? kappa / -dkappa : kInf});
    alpha = std::min(1.0, 0.99 * alpha);
    if (!(alpha > 1e-10)) break;

    x += alpha * dx;
    y += alpha * dy;
    z += alpha * dz;
    tau += alpha * dtau;
    kappa += alpha * dkappa;
    if (!(tau > 0.0 && kappa > 0.0)) break;
  }

  if (best.metric <= options.reduced_tol)
    return finish(cf, SolveStatus::Optimal, best.v, best.value, best.pres, best.dres, best.gap,
                  iter);
  return finish(cf, SolveStatus::NumericalFailure, Eigen::VectorXd(), 0.0, best.pres, best.dres,
                best.gap, iter);
}

}  // namespace afdi
