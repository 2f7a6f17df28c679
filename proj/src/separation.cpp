#include "afdi/separation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <limits>
#include <cmath>
#include <optional>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "afdi/queries.hpp"

namespace afdi {

namespace {

double ms_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
      .count();
}

// Acklam's rational approximation of the standard normal quantile, accurate
// to ~1e-9; used to turn low-discrepancy uniforms into sphere directions.
double inverse_normal_cdf(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425, phigh = 1.0 - plow;
  double q, r;
  if (p < plow) {
    q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > phigh) {
    q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  q = p - 0.5;
  r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

double halton(long index, int base) {
  double f = 1.0, r = 0.0;
  long i = index;
  while (i > 0) {
    f /= base;
    r += f * (i % base);
    i /= base;
  }
  return r;
}

int nth_prime(int n) {
  static const int primes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37,
                               41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89};
  if (n < static_cast<int>(sizeof(primes) / sizeof(primes[0]))) return primes[n];
  throw std::invalid_argument("direction sequence: dimension too large");
}

// Deterministic low-discrepancy unit directions: Halton points mapped through
// the normal quantile and normalized.  The seed offsets the sequence start.
Eigen::VectorXd sphere_direction(long index, int dim) {
  Eigen::VectorXd v(dim);
  for (int j = 0; j < dim; ++j) {
    double u = halton(index, nth_prime(j));
    u = std::min(std::max(u, 1e-12), 1.0 - 1e-12);
    v(j) = inverse_normal_cdf(u);
  }
  const double n = v.norm();
  return (n > 1e-14) ? Eigen::VectorXd(v / n) : Eigen::VectorXd::Unit(dim, 0);
}

// Per-coordinate bounds of a CCG, via axis support solves.
struct AxisBounds {
  Eigen::VectorXd lo, hi;
};

AxisBounds axis_bounds(const CCG& Z, const SolveOptions& opts) {
  const int d = Z.dim();
  AxisBounds b{Eigen::VectorXd(d), Eigen::VectorXd(d)};
  for (int i = 0; i < d; ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(d);
    e(i) = 1.0;
    const auto hp = support(Z, e, opts);
    const auto hm = support(Z, -e, opts);
    if (hp.status != SolveStatus::Optimal || hm.status != SolveStatus::Optimal)
      throw std::runtime_error("boundary sampling: input set bounds could not be computed");
    b.hi(i) = hp.value;
    b.lo(i) = -hm.value;
  }
  return b;
}

Eigen::VectorXd clamp_to(const Eigen::VectorXd& u, const AxisBounds& b) {
  Eigen::VectorXd v = u;
  for (int i = 0; i < v.size(); ++i)
    v(i) = std::min(std::max(v(i), std::max(b.lo(i), 0.0)), b.hi(i));
  return v;
}

// Quadratic minimization over a coordinate box by projected gradient; used
// only for the everything-distinguishable fallback.
Eigen::VectorXd min_cost_over_box(const CostSpec& cost, const AxisBounds& b) {
  const int d = static_cast<int>(b.lo.size());
  Eigen::MatrixXd H = 2.0 * cost.gamma * cost.R1;
  if (cost.R2.size() > 0) H += 2.0 * (1.0 - cost.gamma) * cost.R2.transpose() * cost.R2;
  const double L = std::max(H.norm(), 1e-12);
  Eigen::VectorXd u = clamp_to(Eigen::VectorXd::Zero(d), b);
  for (int it = 0; it < 2000; ++it) {
    const Eigen::VectorXd g = H * u;
    const Eigen::VectorXd next = clamp_to(u - g / L, b);
    if ((next - u).lpNorm<Eigen::Infinity>() < 1e-12) return next;
    u = next;
  }
  return u;
}

std::vector<int> control_coords(const LiftedReachSet& R) { return R.control_indices(); }

// Evaluates the candidate produced by shooting a ray from `origin` along `d`:
// boundary point of I, inflated, clamped to the admissible box.  Returns an
// empty optional when the ray fails or the clamped point falls back inside I.
std::optional<Eigen::VectorXd> ray_candidate(const CCG& I, const AxisBounds& bounds,
                                             const Eigen::VectorXd& origin,
                                             const Eigen::VectorXd& d, double eps_inflate,
                                             std::atomic<int>& solves,
                                             const SolveOptions& opts) {
  RayResult r;
  try {
    r = ray_max(I, origin, d, opts);
  } catch (const std::exception&) {
    return std::nullopt;
  }
  solves.fetch_add(1);
  if (r.status != SolveStatus::Optimal) return std::nullopt;
  const Eigen::VectorXd cand = clamp_to(origin + (1.0 + eps_inflate) * r.t * d, bounds);
  if (!definitely_not(contains(I, cand, opts))) return std::nullopt;
  return cand;
}

// Local refinement of the best sampled ray: coordinate-wise pattern search
// over the unit direction, keeping the cheapest candidate that stays outside
// I.  The sampled directions only resolve the boundary up to the angular gap
// of the sequence; this closes most of the remaining cost overshoot.
Eigen::VectorXd polish_direction(const CCG& I, const AxisBounds& bounds,
                                 const Eigen::VectorXd& origin, const CostSpec& cost,
                                 const Eigen::VectorXd& u_best, double eps_inflate,
                                 std::atomic<int>& solves, const SolveOptions& opts) {
  const int dim = static_cast<int>(origin.size());
  Eigen::VectorXd d = u_best - origin;
  if (d.norm() < 1e-12) return u_best;
  d.normalize();
  Eigen::VectorXd best_u = u_best;
  double best_cost = cost.cost(u_best);

  double step = 0.25;
  while (step > 1e-3) {
    bool improved = false;
    for (int i = 0; i < dim; ++i)
      for (double s : {step, -step}) {
        Eigen::VectorXd trial = d;
        trial(i) += s;
        const double n = trial.norm();
        if (n < 1e-12) continue;
        trial /= n;
        const auto cand = ray_candidate(I, bounds, origin, trial, eps_inflate, solves, opts);
        if (!cand) continue;
        const double c = cost.cost(*cand);
        if (c < best_cost - 1e-12) {
          best_cost = c;
          best_u = *cand;
          d = trial;
          improved = true;
        }
      }
    if (!improved) step *= 0.5;
  }
  return best_u;
}

// Selector matrix picking the control block out of the lifted coordinates.
Eigen::MatrixXd control_selector(const LiftedReachSet& R) {
  const int nc = R.N * R.n_u;
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(nc, R.ambient());
  for (int i = 0; i < nc; ++i) S(i, R.n_x + i) = 1.0;
  return S;
}

}  // namespace

double CostSpec::cost(const Eigen::VectorXd& u) const {
  double v = gamma * u.dot(R1 * u);
  if (R2.size() > 0) v += (1.0 - gamma) * (R2 * u).squaredNorm();
  return v;
}

void CostSpec::validate(int dim) const {
  if (R1.rows() != dim || R1.cols() != dim)
    throw std::invalid_argument("CostSpec: R1 must be dim x dim");
  if (!R1.isApprox(R1.transpose(), 1e-10))
    throw std::invalid_argument("CostSpec: R1 must be symmetric");
  if (R2.size() > 0 && R2.cols() != dim)
    throw std::invalid_argument("CostSpec: R2 column count mismatch");
  if (gamma < 0.0 || gamma > 1.0) throw std::invalid_argument("CostSpec: gamma outside [0,1]");
}

CostSpec CostSpec::energy_with_variation(int N, int n_u, double gamma) {
  CostSpec c;
  c.gamma = gamma;
  const int d = N * n_u;
  c.R1 = Eigen::MatrixXd::Identity(d, d);
  c.R2 = Eigen::MatrixXd::Zero((N - 1) * n_u, d);
  for (int k = 0; k + 1 < N; ++k) {
    c.R2.block(k * n_u, k * n_u, n_u, n_u) = -Eigen::MatrixXd::Identity(n_u, n_u);
    c.R2.block(k * n_u, (k + 1) * n_u, n_u, n_u) = Eigen::MatrixXd::Identity(n_u, n_u);
  }
  return c;
}

CostSpec CostSpec::energy(int N, int n_u) {
  CostSpec c;
  c.gamma = 1.0;
  c.R1 = Eigen::MatrixXd::Identity(N * n_u, N * n_u);
  c.R2 = Eigen::MatrixXd(0, N * n_u);
  return c;
}

CCG indistinguishable_pair(const LiftedReachSet& Ri, const LiftedReachSet& Rj,
                           const SolveOptions& opts) {
  (void)opts;
  if (Ri.N != Rj.N || Ri.n_u != Rj.n_u || Ri.n_x != Rj.n_x)
    throw std::invalid_argument("indistinguishable_pair: lifting layouts differ");
  // Full-space intersection: the same u must drive both modes and the
  // terminal states must coincide.
  const CCG both = intersect(Ri.set, Rj.set);
  return project(both, control_coords(Ri));
}

IndistinguishableSet indistinguishable_union(const std::vector<CCG>& pair_sets,
                                             const std::vector<std::pair<int, int>>& ids,
                                             const SolveOptions& opts) {
  if (pair_sets.empty())
    throw std::invalid_argument("indistinguishable_union: needs at least one pair");
  if (ids.size() != pair_sets.size())
    throw std::invalid_argument("indistinguishable_union: ids/pair count mismatch");

  IndistinguishableSet I;
  bool have = false;
  for (size_t k = 0; k < pair_sets.size(); ++k) {
    if (definitely(is_empty(pair_sets[k], opts))) continue;
    I.pairs.push_back(ids[k]);
    I.set = have ? convex_hull(I.set, pair_sets[k]) : pair_sets[k];
    have = true;
  }
  I.all_empty = !have;
  return I;
}

std::vector<Eigen::VectorXd> boundary_candidates(const IndistinguishableSet& I, const CCG& U_N,
                                                 int n_rays, double eps_inflate, long seed,
                                                 int* ray_count, const SolveOptions& opts) {
  if (I.all_empty) throw std::invalid_argument("boundary_candidates: I is empty");
  const int dim = I.set.dim();
  if (U_N.dim() != dim)
    throw std::invalid_argument("boundary_candidates: input-set dimension mismatch");
  if (n_rays <= 0) n_rays = std::max(484, 2 * dim * dim);

  Eigen::VectorXd origin = I.set.c;
  if (!definitely(contains(I.set, origin, opts))) {
    const auto p = feasible_point(I.set, opts);
    if (!p) throw std::runtime_error("boundary_candidates: no interior anchor found");
    origin = *p;
  }

  const AxisBounds bounds = axis_bounds(U_N, opts);

  std::vector<Eigen::VectorXd> raw(n_rays);
  std::vector<char> ok(n_rays, 0);
  std::atomic<int> solves{0};

  const long start = 1 + (seed >= 0 ? seed : -seed);
  const unsigned n_threads =
      std::max(1u, std::min(std::thread::hardware_concurrency(), 16u));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next.fetch_add(1); i < n_rays; i = next.fetch_add(1)) {
      const Eigen::VectorXd d = sphere_direction(start + i, dim);
      RayResult r;
      try {
        r = ray_max(I.set, origin, d, opts);
      } catch (const std::exception&) {
        continue;
      }
      solves.fetch_add(1);
      if (r.status != SolveStatus::Optimal) continue;  // unbounded or failed ray
      raw[i] = origin + (1.0 + eps_inflate) * r.t * d;
      ok[i] = 1;
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 0; t + 1 < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (ray_count) *ray_count = solves.load();

  std::vector<Eigen::VectorXd> out;
  for (int i = 0; i < n_rays; ++i) {
    if (!ok[i]) continue;
    const Eigen::VectorXd cand = clamp_to(raw[i], bounds);
    // Clamping can push a candidate back inside I; discard those.
    if (!definitely_not(contains(I.set, cand, opts))) continue;
    if (!definitely(contains(U_N, cand, opts))) continue;
    out.push_back(cand);
  }
  if (out.empty())
    throw std::runtime_error(
        "boundary_candidates: no candidate survived clamping; increase n_rays or "
        "eps_inflate");
  return out;
}

PairCertificate certify_pair(const LiftedReachSet& Ri, const LiftedReachSet& Rj, int i, int j,
                             const Eigen::VectorXd& u, double eps, const SolveOptions& opts) {
  const Eigen::MatrixXd S = control_selector(Ri);
  const CCG point = CCG::point(u);
  const CCG slice_i = project(intersect(Ri.set, point, S), Ri.state_indices());
  const CCG slice_j = project(intersect(Rj.set, point, S), Rj.state_indices());
  const auto d = set_distance(slice_i, slice_j, opts);

  PairCertificate cert;
  cert.i = i;
  cert.j = j;
  if (d.either_empty) {
    // One mode cannot realize this input at all: trivially separated.
    cert.empty = true;
    cert.margin = std::numeric_limits<double>::infinity();
  } else if (d.status == SolveStatus::Optimal) {
    cert.margin = d.distance;
    cert.empty = d.distance > eps;
  } else {
    cert.empty = false;
    cert.margin = 0.0;
  }
  return cert;
}

SeparationResult separation_input(const std::vector<LPVMode>& modes,
                                  const UncertaintySets& sets, int N, const CostSpec& cost,
                                  const SamplingParams& sampling, SchedulePolicy policy,
                                  const SolveOptions& opts) {
  if (modes.size() < 2)
    throw std::invalid_argument("separation_input: needs at least two modes");
  const int n_u = modes[0].n_u();
  const int dim = N * n_u;
  cost.validate(dim);

  SeparationResult res;
  res.seed = sampling.seed;

  auto t0 = std::chrono::steady_clock::now();
  std::vector<LiftedReachSet> reach;
  reach.reserve(modes.size());
  for (const auto& m : modes) reach.push_back(reach_mode(m, N, sets, policy));
  res.timings.reach_ms = ms_since(t0);

  t0 = std::chrono::steady_clock::now();
  std::vector<CCG> pair_sets;
  std::vector<std::pair<int, int>> ids;
  for (size_t i = 0; i < modes.size(); ++i)
    for (size_t j = i + 1; j < modes.size(); ++j) {
      pair_sets.push_back(indistinguishable_pair(reach[i], reach[j], opts));
      ids.emplace_back(static_cast<int>(i), static_cast<int>(j));
    }
  const IndistinguishableSet I = indistinguishable_union(pair_sets, ids, opts);
  res.timings.intersect_ms = ms_since(t0);

  const CCG U_N = [&] {
    CCG P = sets.U;
    for (int k = 1; k < N; ++k) P = cartesian_product(P, sets.U);
    return P;
  }();

  if (I.all_empty) {
    // Any admissible input separates the modes; return the cheapest one.
    res.u_star = min_cost_over_box(cost, axis_bounds(U_N, opts));
    res.cost = cost.cost(res.u_star);
    t0 = std::chrono::steady_clock::now();
    for (size_t k = 0; k < pair_sets.size(); ++k)
      res.certificates.push_back(
          certify_pair(reach[ids[k].first], reach[ids[k].second], ids[k].first, ids[k].second,
                       res.u_star, 1e-7, opts));
    res.timings.certify_ms = ms_since(t0);
    res.certified = std::all_of(res.certificates.begin(), res.certificates.end(),
                                [](const PairCertificate& c) { return c.empty; });
    return res;
  }

  t0 = std::chrono::steady_clock::now();
  int rays = 0;
  std::vector<Eigen::VectorXd> candidates;
  try {
    candidates = boundary_candidates(I, U_N, sampling.n_rays, sampling.eps_inflate,
                                     sampling.seed, &rays, opts);
  } catch (const std::runtime_error&) {
    // The indistinguishable set swallows the whole admissible box: no input
    // separates the modes.  Report the cheapest admissible input, flagged.
    res.rays_used = (sampling.n_rays > 0) ? sampling.n_rays : std::max(484, 2 * dim * dim);
    res.control_ray_solves = rays;
    res.lifted_ray_solves = 0;
    res.timings.sample_ms = ms_since(t0);
    res.u_star = min_cost_over_box(cost, axis_bounds(U_N, opts));
    res.cost = cost.cost(res.u_star);
    t0 = std::chrono::steady_clock::now();
    for (size_t k = 0; k < ids.size(); ++k)
      res.certificates.push_back(certify_pair(reach[ids[k].first], reach[ids[k].second],
                                              ids[k].first, ids[k].second, res.u_star, 1e-7,
                                              opts));
    res.timings.certify_ms = ms_since(t0);
    res.certified = false;
    return res;
  }
  res.rays_used = (sampling.n_rays > 0) ? sampling.n_rays : std::max(484, 2 * dim * dim);
  res.control_ray_solves = rays;
  res.lifted_ray_solves = 0;  // rays are shot in control space only, by construction
  res.timings.sample_ms = ms_since(t0);

  // Cheapest certified candidate wins; ties keep the earliest ray.
  std::vector<int> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> costs(candidates.size());
  for (size_t k = 0; k < candidates.size(); ++k) costs[k] = cost.cost(candidates[k]);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return costs[a] < costs[b]; });

  t0 = std::chrono::steady_clock::now();
  for (int idx : order) {
    std::vector<PairCertificate> certs;
    bool all = true;
    for (size_t k = 0; k < ids.size(); ++k) {
      certs.push_back(certify_pair(reach[ids[k].first], reach[ids[k].second], ids[k].first,
                                   ids[k].second, candidates[idx], 1e-7, opts));
      if (!certs.back().empty) {
        all = false;
        break;
      }
    }
    if (all) {
      res.u_star = candidates[idx];
      res.cost = costs[idx];
      res.certificates = std::move(certs);
      res.certified = true;

      // Refine the winning ray direction locally and keep the cheaper input
      // if it certifies as well.
      Eigen::VectorXd origin = I.set.c;
      if (!definitely(contains(I.set, origin, opts)))
        if (const auto p = feasible_point(I.set, opts)) origin = *p;
      std::atomic<int> polish_solves{0};
      const Eigen::VectorXd refined =
          polish_direction(I.set, axis_bounds(U_N, opts), origin, cost, res.u_star,
                           sampling.eps_inflate, polish_solves, opts);
      res.control_ray_solves += polish_solves.load();
      if (cost.cost(refined) < res.cost && definitely(contains(U_N, refined, opts))) {
        std::vector<PairCertificate> rcerts;
        bool rall = true;
        for (size_t k = 0; k < ids.size(); ++k) {
          rcerts.push_back(certify_pair(reach[ids[k].first], reach[ids[k].second],
                                        ids[k].first, ids[k].second, refined, 1e-7, opts));
          if (!rcerts.back().empty) {
            rall = false;
            break;
          }
        }
        if (rall) {
          res.u_star = refined;
          res.cost = cost.cost(refined);
          res.certificates = std::move(rcerts);
        }
      }
      res.timings.certify_ms = ms_since(t0);
      return res;
    }
  }

  // Nothing certified: report the cheapest candidate, flagged.
  res.timings.certify_ms = ms_since(t0);
  res.u_star = candidates[order.front()];
  res.cost = costs[order.front()];
  for (size_t k = 0; k < ids.size(); ++k)
    res.certificates.push_back(certify_pair(reach[ids[k].first], reach[ids[k].second],
                                            ids[k].first, ids[k].second, res.u_star, 1e-7,
                                            opts));
  res.certified = false;
  return res;
}

}  // namespace afdi
