#include "afdi/runtime.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "afdi/svd_separation.hpp"

namespace afdi {

namespace {

Eigen::VectorXd mean_r(const LPVMode& m) {
  Eigen::VectorXd r = Eigen::VectorXd::Zero(m.n_x());
  for (const auto& rv : m.r) r += rv;
  return r / static_cast<double>(m.vertex_count());
}

/// Tight axis-aligned interval hull, centered per axis (reduce_order keeps
/// the set's own center, which over-inflates hulls whose offset lives in the
/// generators).  Falls back to reduce_order when a directional solve stalls.
CCG interval_hull(const CCG& Z, const SolveOptions& opts) {
  const int n = Z.dim();
  Eigen::VectorXd lo(n), hi(n);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    e(i) = 1.0;
    const SupportResult hp = support(Z, e, opts);
    const SupportResult hm = support(Z, -e, opts);
    if (hp.status != SolveStatus::Optimal || hm.status != SolveStatus::Optimal) {
      const OrderReduction red = reduce_order(Z, opts);
      return CCG(red.Phi, red.center, Eigen::MatrixXd(0, red.Phi.cols()), Eigen::VectorXd(0),
                 {ConeSpec::unit_box(static_cast<int>(red.Phi.cols()))});
    }
    hi(i) = hp.value;
    lo(i) = -hm.value;
  }
  return CCG::box(lo, hi);
}

/// Measurement-consistent set {x : C x in y - s - F V} folded into Z by
/// generalized intersection.
CCG measurement_slab_intersect(const CCG& Z, const LPVMode& m, const Eigen::VectorXd& y,
                               const CCG& V) {
  const Eigen::VectorXd shift = y - m.s;
  CCG slab = (m.F.cols() > 0 && V.dim() == m.F.cols())
                 ? linear_map(-m.F, shift, V)
                 : CCG::point(shift);
  return intersect(Z, slab, m.C);
}

}  // namespace

int ModeBank::active_count() const {
  return static_cast<int>(std::count(active.begin(), active.end(), true));
}

int ModeBank::sole_active() const {
  if (active_count() != 1) return -1;
  for (int i = 0; i < static_cast<int>(active.size()); ++i)
    if (active[i]) return i;
  return -1;
}

ModeBank make_bank(const std::vector<LPVMode>& modes, const CCG& X0) {
  if (modes.empty()) throw std::invalid_argument("make_bank: empty mode library");
  ModeBank bank;
  bank.modes = modes;
  bank.sets.assign(modes.size(), X0);
  bank.active.assign(modes.size(), true);
  return bank;
}

ModeBank propagate(const ModeBank& bank, const Eigen::VectorXd& u_applied,
                   const UncertaintySets& sets, const SolveOptions& opts) {
  (void)opts;
  ModeBank next = bank;
  for (std::size_t i = 0; i < bank.modes.size(); ++i) {
    if (!bank.active[i]) continue;
    const LPVMode& m = bank.modes[i];
    if (u_applied.size() != m.n_u())
      throw std::invalid_argument("propagate: input dimension mismatch");
    CCG hull;
    for (int v = 0; v < m.vertex_count(); ++v) {
      CCG Zv = linear_map(m.A[v], m.B[v] * u_applied + m.r[v], bank.sets[i]);
      if (m.n_w() > 0 && sets.W.dim() == m.n_w())
        Zv = minkowski_sum(Zv, linear_map(m.E[v], Eigen::VectorXd::Zero(m.n_x()), sets.W));
      hull = (v == 0) ? Zv : convex_hull(hull, Zv);
    }
    next.sets[i] = hull;
  }
  return next;
}

UpdateEvents measurement_update(ModeBank& bank, const Eigen::VectorXd& y,
                                const UncertaintySets& sets, int step,
                                const SolveOptions& opts) {
  UpdateEvents ev;
  for (std::size_t i = 0; i < bank.modes.size(); ++i) {
    if (!bank.active[i]) continue;
    const LPVMode& m = bank.modes[i];
    if (y.size() != m.n_y())
      throw std::invalid_argument("measurement_update: measurement dimension mismatch");
    bank.sets[i] = measurement_slab_intersect(bank.sets[i], m, y, sets.V);
    if (definitely(is_empty(bank.sets[i], opts))) {
      bank.active[i] = false;
      bank.eliminations.emplace_back(step, static_cast<int>(i));
      ev.eliminated.push_back(static_cast<int>(i));
      if (i == 0) ev.detection = true;
    }
  }
  if (bank.active_count() == 0)
    throw ModelInadequacyAlarm(
        "measurement_update: every candidate model contradicted by the data");
  ev.isolation = bank.active_count() == 1;
  return ev;
}

Eigen::VectorXd tracking_input(const LPVMode& mode, const Eigen::VectorXd& x_est,
                               const Eigen::VectorXd& x_ref, const Eigen::MatrixXd& Q,
                               const Eigen::MatrixXd& P, const Eigen::MatrixXd& R1, int N) {
  const int nx = mode.n_x(), nu = mode.n_u();
  if (N < 1) throw std::invalid_argument("tracking_input: horizon must be >= 1");
  const Eigen::MatrixXd& A = mode.A_nom;
  const Eigen::MatrixXd& B = mode.B_nom;
  const Eigen::VectorXd r = mean_r(mode);

  // Chronological stacked prediction x~_k = A^k x~_0 + drift_k + S_k u,
  // k = 1..N, with stage weight Q for k < N and P at the terminal step.
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(N * nx, N * nu);
  Eigen::VectorXd d = Eigen::VectorXd::Zero(N * nx);
  Eigen::VectorXd xk = x_est;
  for (int k = 0; k < N; ++k) {
    xk = A * xk + r;  // zero-input propagation; inputs enter through S
    d.segment(k * nx, nx) = xk - x_ref;
    Eigen::MatrixXd P_pow = B;
    for (int j = k; j >= 0; --j) {
      S.block(k * nx, j * nu, nx, nu) = P_pow;
      if (j > 0) P_pow = A * P_pow;
    }
  }
  Eigen::MatrixXd Wq = Eigen::MatrixXd::Zero(N * nx, N * nx);
  for (int k = 0; k < N; ++k)
    Wq.block(k * nx, k * nx, nx, nx) = (k == N - 1) ? P : Q;

  Eigen::MatrixXd H = S.transpose() * Wq * S;
  for (int k = 0; k < N; ++k) H.block(k * nu, k * nu, nu, nu) += R1;
  const Eigen::VectorXd f = S.transpose() * Wq * d;

  // Projected (onto u >= 0) coordinate descent on 0.5 u'Hu + f'u.
  Eigen::VectorXd u = Eigen::VectorXd::Zero(N * nu);
  for (int sweep = 0; sweep < 10000; ++sweep) {
    double delta = 0.0;
    for (int i = 0; i < u.size(); ++i) {
      if (H(i, i) <= 0.0) continue;
      const double grad_i = f(i) + H.row(i).dot(u) - H(i, i) * u(i);
      const double ui = std::max(0.0, -grad_i / H(i, i));
      delta = std::max(delta, std::abs(ui - u(i)));
      u(i) = ui;
    }
    if (delta <= 1e-8) break;
  }
  return u.head(nu);
}

Eigen::VectorXd sample_point(const CCG& Z, std::mt19937_64& rng) {
  if (Z.A.rows() > 0)
    throw std::invalid_argument("sample_point: equality-constrained sets not supported");
  Eigen::VectorXd xi(Z.G.cols());
  int at = 0;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (const auto& cone : Z.cones) {
    switch (cone.kind()) {
      case ConeSpec::Kind::Box:
        for (int i = 0; i < cone.dim(); ++i)
          xi(at + i) = cone.lo()(i) + unif(rng) * (cone.hi()(i) - cone.lo()(i));
        break;
      case ConeSpec::Kind::Ball2: {
        Eigen::VectorXd g(cone.dim());
        for (int i = 0; i < cone.dim(); ++i) g(i) = gauss(rng);
        const double nrm = std::max(g.norm(), 1e-300);
        const double scale =
            cone.radius() * std::pow(unif(rng), 1.0 / static_cast<double>(cone.dim()));
        xi.segment(at, cone.dim()) = g * (scale / nrm);
        break;
      }
      default:
        throw std::invalid_argument("sample_point: unbounded cone variant " + cone.name());
    }
    at += cone.dim();
  }
  return Z.c + Z.G * xi;
}

std::string episode_to_csv(const EpisodeLog& log) {
  std::ostringstream os;
  const int nu = log.steps.empty() ? 0 : static_cast<int>(log.steps.front().u.size());
  const int ny = log.steps.empty() ? 0 : static_cast<int>(log.steps.front().y.size());
  os << "t";
  for (int i = 0; i < nu; ++i) os << ",u" << i;
  for (int i = 0; i < ny; ++i) os << ",y" << i;
  os << ",active_modes,excited,event,tracking_error\n";
  os.precision(12);
  for (const auto& s : log.steps) {
    os << s.t;
    for (int i = 0; i < nu; ++i) os << "," << s.u(i);
    for (int i = 0; i < ny; ++i) os << "," << s.y(i);
    os << ",";
    for (std::size_t i = 0; i < s.active_modes.size(); ++i)
      os << (i ? "|" : "") << s.active_modes[i];
    os << "," << (s.excited ? 1 : 0) << "," << s.event << "," << s.tracking_error << "\n";
  }
  return os.str();
}

EpisodeLog run_episode(const ScenarioConfig& cfg, int plant_mode, long seed, int n_steps,
                       const Eigen::VectorXd* excitation, const SolveOptions& opts) {
  cfg.validate();
  if (plant_mode < 0 || plant_mode >= static_cast<int>(cfg.modes.size()))
    throw ConfigError("run_episode: plant_mode out of range");
  const LPVMode& plant = cfg.modes[plant_mode];
  const int nx = plant.n_x(), nu = plant.n_u();

  auto step_rng = [&](int t) {
    return std::mt19937_64(static_cast<std::uint64_t>(seed) * 0x9E3779B97F4A7C15ULL +
                           static_cast<std::uint64_t>(t) + 1ULL);
  };

  // Per-channel admissible input bounds for clamping the tracking input.
  Eigen::VectorXd u_hi(nu);
  for (int i = 0; i < nu; ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(nu);
    e(i) = 1.0;
    const auto h = support(cfg.sets.U, e, opts);
    if (h.status != SolveStatus::Optimal)
      throw std::runtime_error("run_episode: input set must be bounded");
    u_hi(i) = h.value;
  }

  EpisodeLog log;
  std::mt19937_64 rng0 = step_rng(0);
  Eigen::VectorXd x = sample_point(cfg.sets.X0, rng0);
  ModeBank bank = make_bank(cfg.modes, cfg.sets.X0);

  Eigen::VectorXd excite_seq;  // chronological, length N*nu
  if (excitation) excite_seq = *excitation;
  int excite_phase = 0;

  const Eigen::VectorXd x_ref = Eigen::VectorXd::Zero(nx);

  for (int t = 0; t < n_steps; ++t) {
    std::mt19937_64 rng = step_rng(t + 1);
    StepRecord rec;
    rec.t = t;

    Eigen::VectorXd u;
    if (bank.active_count() > 1) {
      if (excite_seq.size() == 0) {
        // Solve the separation problem once, on demand; apply even when the
        // result is uncertified (best effort against bounded actuation).
        if (cfg.method == "svd") {
          const SeparationResult r = svd_separation_input(
              cfg.modes[0], cfg.modes[1], cfg.sets, cfg.N, cfg.cost, 1e-3, 50, opts);
          excite_seq = r.u_star;  // already chronological
        } else {
          const SeparationResult r = separation_input(cfg.modes, cfg.sets, cfg.N, cfg.cost,
                                                      cfg.sampling, cfg.schedule, opts);
          excite_seq = time_ordered(r.u_star, cfg.N, nu);
        }
      }
      // Excite in bursts of N steps with N-step zero-input cool-downs in
      // between: the scheduling spread of the vertex hull grows with |x|, so
      // letting the stable dynamics pull the state back keeps the gain
      // difference visible to the measurement update on later attempts.
      const int slot = excite_phase % (2 * cfg.N);
      u = (slot < cfg.N) ? Eigen::VectorXd(excite_seq.segment(slot * nu, nu))
                         : Eigen::VectorXd(Eigen::VectorXd::Zero(nu));
      ++excite_phase;
      rec.excited = slot < cfg.N;
    } else {
      const int mode_id = bank.sole_active();
      Eigen::VectorXd x_est;
      {
        // Midpoint of the interval hull; any consistent point is an
        // acceptable estimate when a degenerate solve stalls.
        const CCG hull_box = interval_hull(bank.sets[mode_id], opts);
        if (hull_box.cones.size() == 1 && hull_box.cones[0].kind() == ConeSpec::Kind::Box)
          x_est = 0.5 * (hull_box.cones[0].lo() + hull_box.cones[0].hi());
        else {
          const auto p = feasible_point(bank.sets[mode_id], opts);
          x_est = p ? *p : bank.sets[mode_id].c;
        }
      }
      u = tracking_input(bank.modes[mode_id], x_est, x_ref, cfg.Q, cfg.P,
                         Eigen::MatrixXd::Identity(nu, nu), cfg.N);
      u = u.cwiseMin(u_hi).cwiseMax(0.0);
      rec.tracking_error = (x_est - x_ref).norm();
    }

    // True plant: a random convex combination of the vertex systems keeps the
    // realized dynamics inside the scheduling hull the bank propagates.
    std::exponential_distribution<double> expo(1.0);
    Eigen::VectorXd lambda(plant.vertex_count());
    for (int v = 0; v < plant.vertex_count(); ++v) lambda(v) = expo(rng);
    lambda /= lambda.sum();
    Eigen::VectorXd x_next = Eigen::VectorXd::Zero(nx);
    Eigen::MatrixXd E_mix = Eigen::MatrixXd::Zero(nx, plant.n_w());
    for (int v = 0; v < plant.vertex_count(); ++v) {
      x_next += lambda(v) * (plant.A[v] * x + plant.B[v] * u + plant.r[v]);
      if (plant.n_w() > 0) E_mix += lambda(v) * plant.E[v];
    }
    if (plant.n_w() > 0 && cfg.sets.W.dim() == plant.n_w())
      x_next += E_mix * sample_point(cfg.sets.W, rng);
    x = x_next;

    Eigen::VectorXd y = plant.C * x + plant.s;
    if (plant.F.cols() > 0 && cfg.sets.V.dim() == plant.F.cols())
      y += plant.F * sample_point(cfg.sets.V, rng);
    rec.u = u;
    rec.y = y;

    bank = propagate(bank, u, cfg.sets, opts);
    // Box over-approximation of each freshly propagated hull before the
    // measurement intersect: caps generator growth and keeps every conic
    // subproblem well conditioned (the intersected sets can be needle-thin,
    // which is exactly where directional support solves stall).
    for (std::size_t i = 0; i < bank.modes.size(); ++i) {
      if (!bank.active[i]) continue;
      bank.sets[i] = interval_hull(bank.sets[i], opts);
    }
    try {
      const UpdateEvents ev = measurement_update(bank, y, cfg.sets, t, opts);
      if (!bank.active[plant_mode]) log.true_mode_eliminated = true;
      if (ev.detection && !log.detection) {
        log.detection = true;
        log.detection_step = t;
        rec.event = "detection";
      }
      if (ev.isolation && !log.isolation) {
        log.isolation = true;
        log.isolation_step = t;
        log.isolated_mode = bank.sole_active();
        rec.event = rec.event.empty() ? "isolation" : rec.event + "+isolation";
      }
    } catch (const ModelInadequacyAlarm&) {
      log.alarm = true;
      rec.event = "alarm";
      for (std::size_t i = 0; i < bank.modes.size(); ++i)
        if (bank.active[i]) rec.active_modes.push_back(static_cast<int>(i));
      log.steps.push_back(rec);
      break;
    }

    for (std::size_t i = 0; i < bank.modes.size(); ++i)
      if (bank.active[i]) rec.active_modes.push_back(static_cast<int>(i));
    log.steps.push_back(rec);
  }
  return log;
}

}  // namespace afdi
