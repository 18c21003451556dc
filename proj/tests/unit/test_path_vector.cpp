#include "doctest.h"
#include "helpers.hpp"
#include "hones/path_matrix.hpp"
#include "hones/path_vector.hpp"

using namespace hones;
using hones::test::make_support;

namespace {

struct LegState {
  Quadruple q;
  Par1 p1;
  Par3 p3;
};

LegState start(const Mat& a, const Vec& c, const Vec& l) {
  LegState st;
  st.q = oracle_solve(Problem(a, c));
  st.p1 = init_par1(MatrixView(a), st.q.support);
  st.p3 = direct_update_par3(st.q.support, st.p1, l);
  return st;
}

Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Index>(v.size()));
  Index k = 0;
  for (double x : v) out(k++) = x;
  return out;
}

std::vector<PathEvent> run(const Mat& a, LegState& st) {
  LegContext ctx;
  ctx.a = &a;
  LegCursor cursor;
  std::vector<PathEvent> events;
  run_utilde_leg(ctx, st.q, st.p1, st.p3, cursor, events);
  return events;
}

}  // namespace

TEST_CASE("find_utilde_lambda") {
  const Mat eye = Mat::Identity(2, 2);
  SUBCASE("no drift") {
    LegState st = start(test::random_spd(4, 1), Rng(2).normal_vec(4), Vec::Zero(4));
    PathScratch scratch;
    CHECK(find_utilde_lambda(st.q, st.p1, st.p3, scratch).inc == kInf);
  }
  SUBCASE("small antisymmetric drift stays interior") {
    LegState st = start(eye, Vec::Zero(2), vec({0.3, -0.3}));
    PathScratch scratch;
    CHECK(!(find_utilde_lambda(st.q, st.p1, st.p3, scratch).inc <= 1.0));
  }
  SUBCASE("second coordinate leaves at one half") {
    LegState st = start(eye, Vec::Zero(2), vec({2.0, 0.0}));
    PathScratch scratch;
    const FindResult hit = find_utilde_lambda(st.q, st.p1, st.p3, scratch);
    CHECK(hit.inc == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(hit.index == 1);
    CHECK_FALSE(hit.enter);
  }
}

TEST_CASE("update_by_utilde_lambda") {
  const Mat eye = Mat::Identity(2, 2);
  SUBCASE("zero increment") {
    LegState st = start(test::random_spd(4, 3), Rng(4).normal_vec(4), Rng(5).normal_vec(4));
    const Quadruple before = st.q;
    update_by_utilde_lambda(0.0, st.q, st.p1, st.p3);
    CHECK(st.q.v == before.v);
    CHECK(st.q.mu0 == before.mu0);
  }
  SUBCASE("no drift") {
    LegState st = start(test::random_spd(4, 3), Rng(4).normal_vec(4), Vec::Zero(4));
    const Quadruple before = st.q;
    update_by_utilde_lambda(0.8, st.q, st.p1, st.p3);
    CHECK(st.q.v == before.v);
    CHECK(st.q.mu0 == before.mu0);
  }
  SUBCASE("quarter step matches a direct solve") {
    const Vec l = vec({2.0, 0.0});
    LegState st = start(eye, Vec::Zero(2), l);
    update_by_utilde_lambda(0.25, st.q, st.p1, st.p3);
    CHECK(st.q.x()(0) == doctest::Approx(0.75).epsilon(1e-14));
    CHECK(st.q.x()(1) == doctest::Approx(0.25).epsilon(1e-14));
    const Quadruple ref = solve_given_support(Problem(eye, vec({0.5, 0.0})), Support::full(2));
    CHECK(st.q.mu0 == doctest::Approx(ref.mu0).epsilon(1e-14));
  }
}

TEST_CASE("expand_support_utilde") {
  const Mat eye = Mat::Identity(3, 3);
  SUBCASE("no drift") {
    Support s = make_support(3, {0});
    Par1 p1 = init_par1(MatrixView(eye), s);
    Par3 p3 = direct_update_par3(s, p1, Vec::Zero(3));
    PathScratch scratch;
    expand_support_utilde(s, 1, eye, p1, p3, scratch);
    CHECK(p3.xi.cwiseAbs().maxCoeff() == 0.0);
    CHECK(p3.dl == 0.0);
    CHECK(p1.m.to_dense()(1, 1) == 1.0);
  }
  SUBCASE("unit drift on the entering index") {
    Support s = make_support(3, {0});
    Par1 p1 = init_par1(MatrixView(eye), s);
    Par3 p3 = direct_update_par3(s, p1, vec({0.0, 1.0, 0.0}));
    PathScratch scratch;
    expand_support_utilde(s, 1, eye, p1, p3, scratch);
    CHECK(p3.xi(1) == doctest::Approx(-1.0));
    CHECK(p3.dl == doctest::Approx(-1.0));
  }
  SUBCASE("random instance against a fresh factorization") {
    const Index n = 10;
    const Mat a = test::random_spd(n, 11);
    const Vec l = Rng(12).normal_vec(n);
    Support s = make_support(n, {2, 6});
    Par1 p1 = init_par1(MatrixView(a), s);
    Par3 p3 = direct_update_par3(s, p1, l);
    PathScratch scratch;
    for (Index j : {0, 9, 4}) {
      expand_support_utilde(s, j, a, p1, p3, scratch);
      const Par3Check check{p3, l};
      CHECK(validate_state(MatrixView(a), s, p1, nullptr, &check) <=
            1e-10 * kappa_estimate(MatrixView(a), s, p1));
    }
  }
}

TEST_CASE("shrink_support_utilde") {
  const Index n = 10;
  const Mat a = test::random_spd(n, 21);
  const Vec l = Rng(22).normal_vec(n);
  SUBCASE("Par1 matches the matrix-leg shrink when there is no drift") {
    Support s1 = make_support(n, {1, 3, 5, 8});
    Support s2 = s1;
    Par1 p1a = init_par1(MatrixView(a), s1);
    Par1 p1b = p1a;
    Par3 p3 = direct_update_par3(s1, p1a, Vec::Zero(n));
    Par2 p2 = direct_update_par2(s2, p1b, Vec::Zero(n), Vec::Zero(n));
    PathScratch scratch;
    shrink_support_utilde(s1, 5, p1a, p3, scratch);
    shrink_support_lambda(s2, 5, Vec::Zero(n), p1b, p2, scratch);
    CHECK(p3.xi.cwiseAbs().maxCoeff() == 0.0);
    CHECK(p3.dl == 0.0);
    CHECK(p1a.m.to_dense() == p1b.m.to_dense());
    CHECK(p1a.eta_tilde == p1b.eta_tilde);
    CHECK(p1a.d == p1b.d);
  }
  SUBCASE("random instance against a fresh factorization") {
    Support s = make_support(n, {0, 1, 4, 6, 7, 9});
    Par1 p1 = init_par1(MatrixView(a), s);
    Par3 p3 = direct_update_par3(s, p1, l);
    PathScratch scratch;
    for (Index j : {6, 0, 9}) {
      shrink_support_utilde(s, j, p1, p3, scratch);
      const Par3Check check{p3, l};
      CHECK(validate_state(MatrixView(a), s, p1, nullptr, &check) <=
            1e-10 * kappa_estimate(MatrixView(a), s, p1));
    }
  }
  SUBCASE("expand then shrink restores the state") {
    Support s = make_support(n, {2, 3, 8});
    Par1 p1 = init_par1(MatrixView(a), s);
    Par3 p3 = direct_update_par3(s, p1, l);
    const Par1 p1_before = p1;
    const Par3 p3_before = p3;
    PathScratch scratch;
    expand_support_utilde(s, 5, a, p1, p3, scratch);
    shrink_support_utilde(s, 5, p1, p3, scratch);
    CHECK(test::max_abs_diff(p1.m.to_dense(), p1_before.m.to_dense()) <= 1e-12);
    CHECK((p1.eta_tilde - p1_before.eta_tilde).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(std::abs(p1.d - p1_before.d) <= 1e-12);
    CHECK((p3.xi - p3_before.xi).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(std::abs(p3.dl - p3_before.dl) <= 1e-12);
  }
}

TEST_CASE("run_utilde_leg") {
  SUBCASE("no drift") {
    const Mat a = test::random_spd(5, 31);
    LegState st = start(a, Rng(32).normal_vec(5), Vec::Zero(5));
    CHECK(run(a, st).empty());
  }
  SUBCASE("second coordinate leaves at one half") {
    const Mat eye = Mat::Identity(2, 2);
    LegState st = start(eye, Vec::Zero(2), vec({2.0, 0.0}));
    const auto events = run(eye, st);
    REQUIRE(events.size() == 1);
    CHECK(events[0].index == 1);
    CHECK(events[0].kind == EventKind::leave);
    CHECK(events[0].param == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(st.q.x()(0) == doctest::Approx(1.0));
    CHECK(st.q.x()(1) == 0.0);
  }
  SUBCASE("chained legs match the oracle") {
    const Index n = 8;
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
      Rng rng(seed + 100);
      const Mat a = test::random_spd(n, seed + 200, 0.2);
      Vec c = rng.normal_vec(n) * 0.1;
      LegState st = start(a, c, Vec::Zero(n));
      Index total = 0;
      for (int t = 0; t < 200; ++t) {
        const Vec l = rng.normal_vec(n) * 0.2;
        st.p3 = direct_update_par3(st.q.support, st.p1, l);
        total += static_cast<Index>(run(a, st).size());
        c += l;
        const Problem p(a, c, Problem::Check::none);
        CHECK((st.q.x() - oracle_solve(p).x()).cwiseAbs().maxCoeff() <= 1e-7);
        CHECK(kkt_residual(p, st.q) <= 1e-8);
      }
      CHECK(total > 0);
    }
  }
}
