#include "doctest.h"
#include "helpers.hpp"

using namespace hones;
using hones::test::make_support;

TEST_CASE("solve_given_support on small closed forms") {
  SUBCASE("identity splits evenly") {
    const Problem p(Mat::Identity(2, 2), Vec::Zero(2));
    const Quadruple q = solve_given_support(p, Support::full(2));
    CHECK(q.mu0 == doctest::Approx(0.5));
    CHECK(q.x()(0) == doctest::Approx(0.5));
    CHECK(q.x()(1) == doctest::Approx(0.5));
  }
  SUBCASE("diag(2,1)") {
    Mat a = Mat::Zero(2, 2);
    a.diagonal() << 2.0, 1.0;
    const Quadruple q = solve_given_support(Problem(a, Vec::Zero(2)), Support::full(2));
    CHECK(q.mu0 == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK(q.x()(0) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(q.x()(1) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  }
  SUBCASE("random SPD against a bordered LU solve") {
    const Mat a = test::random_spd(3, 11);
    const Vec c = Rng(12).normal_vec(3);
    const Support s = make_support(3, {0, 2});
    const Quadruple q = solve_given_support(Problem(a, c), s);
    const auto ref = test::bordered_solve(a, c, s);
    CHECK((q.x() - ref.x).cwiseAbs().maxCoeff() < 1e-13);
    CHECK(q.mu0 == doctest::Approx(ref.mu0).epsilon(1e-13));
    CHECK(q.mu()(1) == doctest::Approx(ref.mu(1)).epsilon(1e-13));
  }
}

TEST_CASE("solve_given_support rejects a singular block") {
  Mat a = Mat::Ones(2, 2);
  const MatrixView view(a);
  CHECK_THROWS_AS(solve_given_support(view, Vec::Zero(2), Support::full(2)), SingularSubmatrix);
}

TEST_CASE("Problem validation") {
  Mat asym = Mat::Identity(2, 2);
  asym(0, 1) = 0.5;
  CHECK_THROWS_AS(Problem(asym, Vec::Zero(2)), InvalidProblem);
  Mat indefinite = Mat::Identity(2, 2);
  indefinite(1, 1) = -1.0;
  CHECK_THROWS_AS(Problem(indefinite, Vec::Zero(2)), InvalidProblem);
  CHECK_THROWS_AS(Problem(Mat::Identity(2, 2), Vec::Zero(3)), DimensionMismatch);
}

TEST_CASE("kkt_residual") {
  SUBCASE("zero at an optimum") {
    const Mat a = test::random_spd(6, 3);
    const Problem p(a, Rng(4).normal_vec(6));
    CHECK(kkt_residual(p, oracle_solve(p)) <= 1e-10);
  }
  SUBCASE("vertex of the identity problem") {
    const Problem p(Mat::Identity(2, 2), Vec::Zero(2));
    Quadruple q;
    q.support = make_support(2, {0});
    q.v = Vec(2);
    q.v << 1.0, 0.0;
    q.mu0 = 1.0;
    CHECK(kkt_residual(p, q) == doctest::Approx(1.0));
  }
  SUBCASE("grows linearly with a feasible perturbation") {
    const Problem p(Mat::Identity(2, 2), Vec::Zero(2));
    const Quadruple opt = oracle_solve(p);
    auto perturbed = [&](double delta) {
      Quadruple q = opt;
      q.v(0) += delta;
      q.v(1) -= delta;
      return kkt_residual(p, q);
    };
    const double r1 = perturbed(1e-4);
    const double r2 = perturbed(2e-4);
    CHECK(r1 == doctest::Approx(1e-4).epsilon(1e-6));
    CHECK(r2 / r1 == doctest::Approx(2.0).epsilon(1e-6));
  }
}

TEST_CASE("oracle_solve closed forms") {
  for (Index n : {1, 2, 5, 17}) {
    const Quadruple q = oracle_solve(Problem(Mat::Identity(n, n), Vec::Zero(n)));
    CHECK((q.x().array() - 1.0 / static_cast<double>(n)).abs().maxCoeff() < 1e-15);
  }
  Mat a = Mat::Zero(2, 2);
  a.diagonal() << 2.0, 1.0;
  const Quadruple q2 = oracle_solve(Problem(a, Vec::Zero(2)));
  CHECK(q2.x()(0) == doctest::Approx(1.0 / 3.0));

  Vec c = Vec::Zero(3);
  c(0) = 10.0;
  const Quadruple q3 = oracle_solve(Problem(Mat::Identity(3, 3), c));
  CHECK(q3.x()(0) == doctest::Approx(1.0));
  CHECK(q3.x()(1) == 0.0);
  CHECK(q3.mu0 == doctest::Approx(-9.0));
  CHECK(q3.mu()(1) == doctest::Approx(9.0));
  CHECK(q3.mu()(2) == doctest::Approx(9.0));
}

TEST_CASE("oracle_solve agrees with support enumeration") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const Index n = 2 + static_cast<Index>(seed % 9);
    const Mat a = test::random_spd(n, seed, 0.05);
    Vec c = Rng(seed + 1000).normal_vec(n);
    c *= (seed % 2 == 0) ? 0.3 : 3.0;
    const Problem p(a, c);
    const Quadruple fast = oracle_solve(p);
    const Quadruple slow = enumerate_solve(p);
    CHECK((fast.x() - slow.x()).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(fast.support == slow.support);
  }
}

TEST_CASE("kkt_residual_primal matches the certificate residual at an optimum") {
  const Mat a = test::random_spd(8, 21);
  const Problem p(a, Rng(22).normal_vec(8));
  const Quadruple q = oracle_solve(p);
  CHECK(kkt_residual_primal(p, q.x()) <= 1e-10);
  Vec off = q.x();
  off = project_simplex(off + Rng(1).normal_vec(8) * 0.1);
  CHECK(kkt_residual_primal(p, off) > 1e-4);
}

TEST_CASE("project_simplex") {
  Vec inside(3);
  inside << 0.2, 0.3, 0.5;
  CHECK((project_simplex(inside) - inside).cwiseAbs().maxCoeff() < 1e-15);
  const Vec zero = project_simplex(Vec::Zero(4));
  CHECK((zero.array() - 0.25).abs().maxCoeff() < 1e-15);
  Vec y(3);
  y << 1.0, 0.5, -0.5;
  const Vec p = project_simplex(y);
  CHECK(p(0) == doctest::Approx(0.75));
  CHECK(p(1) == doctest::Approx(0.25));
  CHECK(p(2) == 0.0);
}

TEST_CASE("project_simplex is the identity-matrix oracle") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Vec y = Rng(seed).normal_vec(7) * 2.0;
    const Quadruple q = oracle_solve(Problem(Mat::Identity(7, 7), y));
    CHECK((project_simplex(y) - q.x()).cwiseAbs().maxCoeff() < 1e-12);
  }
}
