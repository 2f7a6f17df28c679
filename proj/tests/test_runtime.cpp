#include <doctest.h>

#include <cmath>
#include <random>

#include "afdi/queries.hpp"
#include "afdi/runtime.hpp"
#include "afdi/scenario.hpp"
#include "afdi/svd_separation.hpp"

using namespace afdi;

namespace {

Eigen::VectorXd scalar_vec(double v) { return Eigen::VectorXd::Constant(1, v); }

LPVMode scalar_mode(const std::vector<double>& As, double B, double r = 0.0, double s = 0.0) {
  LPVMode m;
  m.name = "scalar";
  for (double a : As) {
    m.thetas.push_back(scalar_vec(a));
    m.A.push_back(Eigen::MatrixXd::Constant(1, 1, a));
    m.B.push_back(Eigen::MatrixXd::Constant(1, 1, B));
    m.E.push_back(Eigen::MatrixXd::Identity(1, 1));
    m.r.push_back(scalar_vec(r));
  }
  m.A_nom = m.A[0];
  m.B_nom = m.B[0];
  m.C = Eigen::MatrixXd::Identity(1, 1);
  m.F = Eigen::MatrixXd::Identity(1, 1);
  m.s = scalar_vec(s);
  return m;
}

UncertaintySets scalar_sets(const CCG& X0, double vhalf = 0.1) {
  UncertaintySets s;
  s.X0 = X0;
  s.U = CCG::box(scalar_vec(0.0), scalar_vec(1.0));
  s.W = CCG::point(scalar_vec(0.0));
  s.V = CCG::box(scalar_vec(-vhalf), scalar_vec(vhalf));
  return s;
}

double hs(const CCG& Z, double dir) {
  const auto r = support(Z, scalar_vec(dir));
  REQUIRE(r.status == SolveStatus::Optimal);
  return r.value;
}

// Simulation cost of a stacked input sequence for a scalar mode: stage
// weight q up to the terminal step, p at it, plus unit input energy.
double rollout_cost(const LPVMode& m, double x0, double x_ref, double q, double p,
                    const Eigen::VectorXd& u) {
  const double a = m.A_nom(0, 0), b = m.B_nom(0, 0), r = m.r[0](0);
  const int N = static_cast<int>(u.size());
  double x = x0, cost = 0.0;
  for (int k = 0; k < N; ++k) {
    x = a * x + b * u(k) + r;
    const double w = (k == N - 1) ? p : q;
    cost += w * (x - x_ref) * (x - x_ref) + u(k) * u(k);
  }
  return cost;
}

// Independent QP oracle: recover the quadratic from rollout costs, then
// enumerate the 2^N sign patterns of the nonnegativity constraints.
Eigen::VectorXd qp_oracle(const LPVMode& m, double x0, double x_ref, double q, double p, int N) {
  auto cost = [&](const Eigen::VectorXd& u) { return rollout_cost(m, x0, x_ref, q, p, u); };
  const double c0 = cost(Eigen::VectorXd::Zero(N));
  Eigen::MatrixXd H(N, N);
  Eigen::VectorXd f(N);
  std::vector<double> ci(N);
  for (int i = 0; i < N; ++i) ci[i] = cost(Eigen::VectorXd::Unit(N, i));
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      if (i == j) continue;
      H(i, j) = cost(Eigen::VectorXd::Unit(N, i) + Eigen::VectorXd::Unit(N, j)) - ci[i] -
                ci[j] + c0;
    }
  for (int i = 0; i < N; ++i) {
    H(i, i) = 2.0 * (cost(2.0 * Eigen::VectorXd::Unit(N, i)) - 2.0 * ci[i] + c0) / 2.0;
    f(i) = ci[i] - c0 - 0.5 * H(i, i);
  }

  Eigen::VectorXd best = Eigen::VectorXd::Zero(N);
  double best_cost = c0;
  for (int mask = 1; mask < (1 << N); ++mask) {
    std::vector<int> free_idx;
    for (int i = 0; i < N; ++i)
      if (mask & (1 << i)) free_idx.push_back(i);
    const int nf = static_cast<int>(free_idx.size());
    Eigen::MatrixXd Hf(nf, nf);
    Eigen::VectorXd ff(nf);
    for (int i = 0; i < nf; ++i) {
      ff(i) = f(free_idx[i]);
      for (int j = 0; j < nf; ++j) Hf(i, j) = H(free_idx[i], free_idx[j]);
    }
    const Eigen::VectorXd uf = Hf.ldlt().solve(-ff);
    if (uf.minCoeff() < 0.0) continue;
    Eigen::VectorXd u = Eigen::VectorXd::Zero(N);
    for (int i = 0; i < nf; ++i) u(free_idx[i]) = uf(i);
    const double cu = cost(u);
    if (cu < best_cost) {
      best_cost = cu;
      best = u;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("propagate moves a singleton to A x + B u + r") {
  LPVMode m = scalar_mode({0.7}, 2.0, 0.3);
  const UncertaintySets sets = scalar_sets(CCG::point(scalar_vec(1.0)));
  ModeBank bank = make_bank({m}, sets.X0);
  REQUIRE(bank.active_count() == 1);

  const ModeBank next = propagate(bank, scalar_vec(0.5), sets);
  // 0.7 * 1 + 2 * 0.5 + 0.3 = 2.0
  CHECK(hs(next.sets[0], 1.0) == doctest::Approx(2.0).epsilon(1e-7));
  CHECK(hs(next.sets[0], -1.0) == doctest::Approx(-2.0).epsilon(1e-7));
}

TEST_CASE("propagate hulls the scheduling vertices") {
  LPVMode m = scalar_mode({0.5, 0.8}, 0.0);
  const UncertaintySets sets = scalar_sets(CCG::point(scalar_vec(1.0)));
  ModeBank bank = make_bank({m}, sets.X0);
  const ModeBank next = propagate(bank, scalar_vec(0.0), sets);
  CHECK(hs(next.sets[0], 1.0) == doctest::Approx(0.8).epsilon(1e-7));
  CHECK(hs(next.sets[0], -1.0) == doctest::Approx(-0.5).epsilon(1e-7));
}

TEST_CASE("propagate contains Monte Carlo vehicle trajectories") {
  const ScenarioConfig cfg = vehicle_scenario();
  const LPVMode& m = cfg.modes[1];
  // Three chronological steps of the published excitation.
  std::vector<Eigen::VectorXd> us;
  for (double v : {1.0458, 1.7442, 2.7253})
    us.push_back((Eigen::VectorXd(2) << 0.0, v).finished());

  ModeBank bank = make_bank({m}, cfg.sets.X0);
  std::vector<ModeBank> trail{bank};
  for (const auto& u : us) {
    bank = propagate(bank, u, cfg.sets);
    trail.push_back(bank);
  }

  std::mt19937_64 rng(2024);
  std::exponential_distribution<double> expo(1.0);
  for (int draw = 0; draw < 20; ++draw) {
    Eigen::VectorXd x = sample_point(cfg.sets.X0, rng);
    // One scheduling point per step (inside the per-step hull).
    for (size_t k = 0; k < us.size(); ++k) {
      Eigen::VectorXd lambda(m.vertex_count());
      for (int v = 0; v < m.vertex_count(); ++v) lambda(v) = expo(rng);
      lambda /= lambda.sum();
      const Eigen::VectorXd w = sample_point(cfg.sets.W, rng);
      Eigen::VectorXd xn = Eigen::VectorXd::Zero(m.n_x());
      for (int v = 0; v < m.vertex_count(); ++v)
        xn += lambda(v) * (m.A[v] * x + m.B[v] * us[k] + m.r[v] + m.E[v] * w);
      x = xn;
      CHECK(definitely(contains(trail[k + 1].sets[0], x, cfg.solver)));
    }
  }
}

TEST_CASE("measurement_update keeps a consistent mode") {
  LPVMode m = scalar_mode({1.0}, 1.0);
  const UncertaintySets sets = scalar_sets(CCG::point(scalar_vec(2.0)));
  ModeBank bank = make_bank({m}, sets.X0);
  const UpdateEvents ev = measurement_update(bank, scalar_vec(2.0), sets, 0);
  CHECK(bank.active[0]);
  CHECK(ev.eliminated.empty());
  CHECK_FALSE(ev.detection);
  CHECK(bank.eliminations.empty());
}

TEST_CASE("measurement_update eliminates the contradicted nominal") {
  // Nominal set [0, 1]; mode 2 reads through an output offset s = 5, so a
  // measurement y = 5 kills the nominal and isolates the alternative.
  LPVMode nominal = scalar_mode({1.0}, 1.0, 0.0, 0.0);
  LPVMode faulty = scalar_mode({1.0}, 1.0, 0.0, 5.0);
  const UncertaintySets sets = scalar_sets(CCG::box(scalar_vec(0.0), scalar_vec(1.0)));
  ModeBank bank = make_bank({nominal, faulty}, sets.X0);

  const UpdateEvents ev = measurement_update(bank, scalar_vec(5.0), sets, 3);
  CHECK_FALSE(bank.active[0]);
  CHECK(bank.active[1]);
  CHECK(ev.detection);
  CHECK(ev.isolation);
  REQUIRE(bank.eliminations.size() == 1);
  CHECK(bank.eliminations[0] == std::make_pair(3, 0));
  CHECK(bank.sole_active() == 1);
}

TEST_CASE("measurement_update raises the model-inadequacy alarm") {
  LPVMode m = scalar_mode({1.0}, 1.0);
  const UncertaintySets sets = scalar_sets(CCG::box(scalar_vec(0.0), scalar_vec(1.0)));
  ModeBank bank = make_bank({m}, sets.X0);
  CHECK_THROWS_AS(measurement_update(bank, scalar_vec(50.0), sets, 0), ModelInadequacyAlarm);
}

TEST_CASE("tracking_input basics") {
  const Eigen::MatrixXd I1 = Eigen::MatrixXd::Identity(1, 1);

  SUBCASE("at the reference the cheapest input is zero") {
    LPVMode m = scalar_mode({0.9}, 1.0);
    const Eigen::VectorXd u =
        tracking_input(m, scalar_vec(0.0), scalar_vec(0.0), I1, I1, I1, 4);
    CHECK(u.norm() == doctest::Approx(0.0).epsilon(1e-9));
  }

  SUBCASE("scalar one-step analytic solution") {
    // A = B = 1, Q = P = R1 = 1, N = 1, x~ = -1: minimize (u - 1)^2 + u^2
    // over u >= 0, giving u = 0.5.
    LPVMode m = scalar_mode({1.0}, 1.0);
    const Eigen::VectorXd u =
        tracking_input(m, scalar_vec(-1.0), scalar_vec(0.0), I1, I1, I1, 1);
    CHECK(u(0) == doctest::Approx(0.5).epsilon(1e-7));
  }

  SUBCASE("random scalar instances match the active-set oracle") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int trial = 0; trial < 25; ++trial) {
      const double a = 0.2 + 0.75 * unif(rng);  // stable
      const double b = 0.5 + unif(rng);
      const double r = 0.4 * unif(rng) - 0.2;
      const double x0 = 4.0 * unif(rng) - 2.0;
      const double xr = 2.0 * unif(rng) - 1.0;
      const double q = 0.5 + unif(rng);
      const double p = 0.5 + unif(rng);
      const int N = 1 + static_cast<int>(unif(rng) * 5.99);  // 1..6

      LPVMode m = scalar_mode({a}, b, r);
      const Eigen::MatrixXd Qm = Eigen::MatrixXd::Constant(1, 1, q);
      const Eigen::MatrixXd Pm = Eigen::MatrixXd::Constant(1, 1, p);
      const Eigen::VectorXd u =
          tracking_input(m, scalar_vec(x0), scalar_vec(xr), Qm, Pm, I1, N);
      const Eigen::VectorXd want = qp_oracle(m, x0, xr, q, p, N);
      CHECK(u(0) == doctest::Approx(want(0)).epsilon(1e-6).scale(1.0));
    }
  }
}

TEST_CASE("sample_point stays inside factory sets") {
  std::mt19937_64 rng(5);
  const CCG box = CCG::box((Eigen::VectorXd(2) << -1.0, 2.0).finished(),
                           (Eigen::VectorXd(2) << 0.5, 3.0).finished());
  const CCG ball = CCG::ball((Eigen::VectorXd(3) << 1.0, 0.0, -1.0).finished(), 0.7);
  for (int k = 0; k < 50; ++k) {
    const Eigen::VectorXd bx = sample_point(box, rng);
    CHECK(bx(0) >= -1.0);
    CHECK(bx(0) <= 0.5);
    CHECK(bx(1) >= 2.0);
    CHECK(bx(1) <= 3.0);
    const Eigen::VectorXd bl = sample_point(ball, rng);
    CHECK((bl - ball.c).norm() <= 0.7 + 1e-12);
  }
}

TEST_CASE("vehicle episodes: soundness, isolation, determinism") {
  ScenarioConfig cfg = vehicle_scenario();
  // Precompute a certified excitation once (chronological order).
  const SeparationResult sep = svd_separation_input(cfg.modes[0], cfg.modes[1], cfg.sets,
                                                    cfg.N, cfg.cost, 1e-3, 50, cfg.solver);
  REQUIRE(sep.certified);
  const Eigen::VectorXd excitation = sep.u_star;

  SUBCASE("nominal plant: no false detection over a long horizon") {
    const EpisodeLog log = run_episode(cfg, 0, 42, 50, &excitation);
    CHECK_FALSE(log.detection);
    CHECK_FALSE(log.alarm);
    CHECK_FALSE(log.true_mode_eliminated);
    CHECK(log.steps.size() == 50);
  }

  SUBCASE("faulty plant: detection and isolation, monotone bank, finite errors") {
    const EpisodeLog log = run_episode(cfg, 1, 7, 20, &excitation);
    CHECK(log.detection);
    CHECK(log.isolation);
    CHECK(log.isolated_mode == 1);
    CHECK_FALSE(log.true_mode_eliminated);
    CHECK(log.isolation_step >= 0);

    size_t prev_active = cfg.modes.size();
    int prev_t = -1;
    for (const auto& rec : log.steps) {
      CHECK(rec.t == prev_t + 1);  // time-monotone log
      prev_t = rec.t;
      CHECK(rec.active_modes.size() <= prev_active);  // eliminations are monotone
      prev_active = rec.active_modes.size();
      CHECK(std::isfinite(rec.tracking_error));
    }
  }

  SUBCASE("episodes are deterministic per seed") {
    const EpisodeLog a = run_episode(cfg, 1, 11, 12, &excitation);
    const EpisodeLog b = run_episode(cfg, 1, 11, 12, &excitation);
    CHECK(episode_to_csv(a) == episode_to_csv(b));
    const EpisodeLog c = run_episode(cfg, 1, 12, 12, &excitation);
    CHECK(episode_to_csv(a) != episode_to_csv(c));
  }
}

TEST_CASE("episode_to_csv is one row per step") {
  ScenarioConfig cfg = vehicle_scenario();
  const Eigen::VectorXd excitation = Eigen::VectorXd::Zero(cfg.N * cfg.n_u());
  const EpisodeLog log = run_episode(cfg, 0, 3, 5, &excitation);
  const std::string csv = episode_to_csv(log);
  const auto rows = static_cast<size_t>(std::count(csv.begin(), csv.end(), '\n'));
  CHECK(rows == log.steps.size() + 1);  // header + steps
  CHECK(csv.rfind("t,", 0) == 0);
}
