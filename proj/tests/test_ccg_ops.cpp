#include <doctest.h>

#include <random>

#include "afdi/ccg.hpp"
#include "afdi/queries.hpp"
#include "oracles.hpp"

using namespace afdi;
using namespace afdi::testing;

namespace {

// Random constraint-free CCG built from box and ball factors; its support
// function has a closed form, which makes it the workhorse oracle seed.
CCG random_free_ccg(std::mt19937_64& rng, int dim, int max_factors = 3) {
  std::uniform_int_distribution<int> nfac(1, max_factors);
  std::uniform_int_distribution<int> fdim(1, 2);
  std::uniform_int_distribution<int> kind(0, 1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<ConeSpec> cones;
  const int nf = nfac(rng);
  int ng = 0;
  for (int i = 0; i < nf; ++i) {
    const int d = fdim(rng);
    if (kind(rng) == 0) {
      Eigen::VectorXd lo(d), hi(d);
      for (int j = 0; j < d; ++j) {
        const double a = u(rng), b = u(rng);
        lo(j) = std::min(a, b);
        hi(j) = std::max(a, b) + 0.1;
      }
      cones.push_back(ConeSpec::box(lo, hi));
    } else {
      cones.push_back(ConeSpec::ball2(d, 0.2 + std::abs(u(rng))));
    }
    ng += d;
  }
  Eigen::MatrixXd G(dim, ng);
  Eigen::VectorXd c(dim);
  for (int i = 0; i < dim; ++i) {
    c(i) = u(rng);
    for (int j = 0; j < ng; ++j) G(i, j) = u(rng);
  }
  return CCG{G, c, Eigen::MatrixXd(0, ng), Eigen::VectorXd(0), cones};
}

double hsupp(const CCG& Z, const Eigen::VectorXd& d) {
  const auto r = support(Z, d);
  REQUIRE(r.status == SolveStatus::Optimal);
  return r.value;
}

}  // namespace

TEST_CASE("linear map matches the closed-form support transform") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int rep = 0; rep < 25; ++rep) {
    const CCG Z = random_free_ccg(rng, 3);
    Eigen::MatrixXd R(2, 3);
    Eigen::VectorXd t(2);
    for (int i = 0; i < 2; ++i) {
      t(i) = u(rng);
      for (int j = 0; j < 3; ++j) R(i, j) = u(rng);
    }
    const CCG Y = linear_map(R, t, Z);
    for (int k = 0; k < 6; ++k) {
      const Eigen::VectorXd d = random_unit(rng, 2);
      // h_Y(d) = h_Z(R'd) + d't
      CHECK(closed_form_support(Y, d) ==
            doctest::Approx(closed_form_support(Z, R.transpose() * d) + d.dot(t))
                .epsilon(1e-10));
    }
  }
}

TEST_CASE("Minkowski sum adds support functions") {
  std::mt19937_64 rng(12);
  for (int rep = 0; rep < 25; ++rep) {
    const CCG Z = random_free_ccg(rng, 3);
    const CCG W = random_free_ccg(rng, 3);
    const CCG S = minkowski_sum(Z, W);
    CHECK(S.dim() == 3);
    for (int k = 0; k < 6; ++k) {
      const Eigen::VectorXd d = random_unit(rng, 3);
      CHECK(hsupp(S, d) ==
            doctest::Approx(closed_form_support(Z, d) + closed_form_support(W, d))
                .epsilon(1e-7));
    }
  }
}

TEST_CASE("cartesian product stacks supports") {
  std::mt19937_64 rng(13);
  for (int rep = 0; rep < 15; ++rep) {
    const CCG Z = random_free_ccg(rng, 2);
    const CCG W = random_free_ccg(rng, 3);
    const CCG P = cartesian_product(Z, W);
    REQUIRE(P.dim() == 5);
    for (int k = 0; k < 6; ++k) {
      const Eigen::VectorXd d = random_unit(rng, 5);
      CHECK(hsupp(P, d) == doctest::Approx(closed_form_support(Z, d.head(2)) +
                                           closed_form_support(W, d.tail(3)))
                               .epsilon(1e-7));
    }
  }
}

TEST_CASE("projection drops coordinates") {
  std::mt19937_64 rng(14);
  for (int rep = 0; rep < 15; ++rep) {
    const CCG Z = random_free_ccg(rng, 4);
    const CCG P = project(Z, {3, 1});
    REQUIRE(P.dim() == 2);
    for (int k = 0; k < 6; ++k) {
      const Eigen::VectorXd d = random_unit(rng, 2);
      Eigen::VectorXd dl = Eigen::VectorXd::Zero(4);
      dl(3) = d(0);
      dl(1) = d(1);
      CHECK(closed_form_support(P, d) ==
            doctest::Approx(closed_form_support(Z, dl)).epsilon(1e-10));
    }
  }
}

TEST_CASE("intersection of two rotated boxes") {
  // Unit square intersected with itself rotated by 45 degrees: the support
  // in the axis directions drops from 1 to sqrt(2)/2 * ... ; use grid oracle.
  const CCG Z = CCG::box(Eigen::Vector2d(-1, -1), Eigen::Vector2d(1, 1));
  Eigen::Matrix2d Rot;
  const double s = std::sqrt(0.5);
  Rot << s, -s, s, s;
  const CCG Y = linear_map(Rot, Eigen::Vector2d::Zero(), Z);
  const CCG I = intersect(Z, Y);

  // Octagon support: h(d) = min over the two parents is not exact, but for
  // axis directions the rotated square binds: h = sqrt(2).
  CHECK(hsupp(I, Eigen::Vector2d(1, 0)) == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(hsupp(I, Eigen::Vector2d(0, 1)) == doctest::Approx(1.0).epsilon(1e-7));
  const Eigen::Vector2d diag = Eigen::Vector2d(1, 1).normalized();
  CHECK(hsupp(I, diag) == doctest::Approx(1.0).epsilon(1e-7));

  CHECK(definitely(contains(I, Eigen::Vector2d(0.0, 0.0))));
  CHECK(definitely(contains(I, Eigen::Vector2d(0.9, 0.1))));
  CHECK(definitely_not(contains(I, Eigen::Vector2d(0.95, 0.95))));
}

TEST_CASE("generalized intersection restricts through a map") {
  // { z in [-1,1]^2 : z0 + z1 in [0.5, 0.6] }
  const CCG Z = CCG::box(Eigen::Vector2d(-1, -1), Eigen::Vector2d(1, 1));
  const CCG Y = CCG::box(Eigen::VectorXd::Constant(1, 0.5), Eigen::VectorXd::Constant(1, 0.6));
  Eigen::MatrixXd R(1, 2);
  R << 1, 1;
  const CCG I = intersect(Z, Y, R);
  CHECK(definitely(contains(I, Eigen::Vector2d(0.25, 0.25))));
  CHECK(definitely_not(contains(I, Eigen::Vector2d(0.0, 0.0))));
  CHECK(hsupp(I, Eigen::Vector2d(1, 1)) == doctest::Approx(0.6).epsilon(1e-7));
  CHECK(hsupp(I, Eigen::Vector2d(-1, -1)) == doctest::Approx(-0.5).epsilon(1e-7));
}

TEST_CASE("empty intersection is detected") {
  const CCG Z = CCG::ball(Eigen::Vector2d(0, 0), 1.0);
  const CCG Y = CCG::ball(Eigen::Vector2d(5, 0), 1.0);
  CHECK(definitely(is_empty(intersect(Z, Y))));
  CHECK(definitely_not(is_empty(Z)));
}

TEST_CASE("convex hull support is the max of the parents") {
  std::mt19937_64 rng(15);
  for (int rep = 0; rep < 20; ++rep) {
    const CCG Z = random_free_ccg(rng, 3);
    const CCG W = random_free_ccg(rng, 3);
    const CCG H = convex_hull(Z, W);
    for (int k = 0; k < 6; ++k) {
      const Eigen::VectorXd d = random_unit(rng, 3);
      const double want = std::max(closed_form_support(Z, d), closed_form_support(W, d));
      CHECK(hsupp(H, d) == doctest::Approx(want).epsilon(1e-7));
    }
  }
}

TEST_CASE("convex hull contains both parents and their midpoints") {
  std::mt19937_64 rng(16);
  const CCG Z = random_free_ccg(rng, 2);
  const CCG W = random_free_ccg(rng, 2);
  const CCG H = convex_hull(Z, W);
  const auto pz = latent_grid_points(Z, 3);
  const auto pw = latent_grid_points(W, 3);
  for (size_t i = 0; i < std::min<size_t>(pz.size(), 8); ++i)
    for (size_t j = 0; j < std::min<size_t>(pw.size(), 8); ++j) {
      CHECK(definitely(contains(H, pz[i])));
      CHECK(definitely(contains(H, pw[j])));
      CHECK(definitely(contains(H, 0.5 * pz[i] + 0.5 * pw[j])));
    }
}

TEST_CASE("set-matrix-vector product over-approximates and is exact for singletons") {
  // Singleton matrix: product must match the plain linear map.
  Eigen::MatrixXd B(2, 2);
  B << 1, 2, -1, 0.5;
  const MatrixCCG Bset = MatrixCCG::singleton(B);
  const CCG U = CCG::box(Eigen::Vector2d(-1, -0.5), Eigen::Vector2d(0.5, 1));
  const CCG P = set_matrix_vector_product(Bset, U);
  REQUIRE(P.dim() == 4);  // product stacked with u
  const CCG prod = project(P, {0, 1});
  const CCG ref = linear_map(B, Eigen::Vector2d::Zero(), U);
  std::mt19937_64 rng(17);
  for (int k = 0; k < 10; ++k) {
    const Eigen::VectorXd d = random_unit(rng, 2);
    CHECK(hsupp(prod, d) == doctest::Approx(closed_form_support(ref, d)).epsilon(1e-6));
  }

  // Interval matrix over a nonnegative input set (the bilinear relaxation
  // requires u >= 0): every vertex product must be covered.
  Eigen::MatrixXd G(4, 1);
  G << 0.3, 0, 0, 0.2;  // column-major 2x2: perturbs B(0,0) and B(1,1)
  CCG mset{G, Eigen::Map<Eigen::VectorXd>(B.data(), 4), Eigen::MatrixXd(0, 1),
           Eigen::VectorXd(0), {ConeSpec::unit_box(1)}};
  const MatrixCCG Bint(mset, 2, 2);
  const CCG Upos = CCG::box(Eigen::Vector2d(0, 0), Eigen::Vector2d(0.5, 1));
  const CCG P2 = set_matrix_vector_product(Bint, Upos);
  const CCG prod2 = project(P2, {0, 1});
  for (double s : {-1.0, 0.0, 1.0}) {
    Eigen::MatrixXd Bs = B;
    Bs(0, 0) += 0.3 * s;
    Bs(1, 1) += 0.2 * s;
    for (const auto& u : latent_grid_points(Upos, 3))
      CHECK(definitely(contains(prod2, Bs * u, SolveOptions{1e-7})));
  }
}

TEST_CASE("set-matrix-vector product covers the spec interval example") {
  // [0.8, 1.2] * [0, 1]: x-block support along +1 at least 1.2 and 1.2*1 is
  // a member.
  Eigen::MatrixXd G(1, 1);
  G << 0.2;
  CCG mset{G, Eigen::VectorXd::Constant(1, 1.0), Eigen::MatrixXd(0, 1), Eigen::VectorXd(0),
           {ConeSpec::unit_box(1)}};
  const MatrixCCG Bint(mset, 1, 1);
  const CCG U = CCG::box(Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1));
  const CCG prod = project(set_matrix_vector_product(Bint, U), {0});
  const auto h = support(prod, Eigen::VectorXd::Ones(1));
  REQUIRE(h.status == SolveStatus::Optimal);
  CHECK(h.value >= 1.2 - 1e-7);
  CHECK(definitely(contains(prod, Eigen::VectorXd::Constant(1, 1.2), SolveOptions{1e-7})));
}

TEST_CASE("nonnegative ball factory clips the ball at zero") {
  const CCG Z = CCG::nonnegative_ball(Eigen::Vector2d(0.1, 0.1), 0.5);
  CHECK(definitely(contains(Z, Eigen::Vector2d(0.0, 0.0))));
  CHECK(definitely(contains(Z, Eigen::Vector2d(0.5, 0.1))));
  CHECK(definitely_not(contains(Z, Eigen::Vector2d(-0.05, 0.1))));
  CHECK(definitely_not(contains(Z, Eigen::Vector2d(0.7, 0.1))));
  CHECK(hsupp(Z, Eigen::Vector2d(-1, 0)) == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("validate rejects inconsistent shapes") {
  CCG bad;
  bad.G = Eigen::MatrixXd::Zero(2, 3);
  bad.c = Eigen::VectorXd::Zero(2);
  bad.A = Eigen::MatrixXd::Zero(1, 2);  // wrong generator count
  bad.b = Eigen::VectorXd::Zero(1);
  bad.cones = {ConeSpec::free(3)};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
