#include "helpers.hpp"

#include "iaprox/solvers.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace iaprox;
using namespace iaprox::test;
using doctest::Approx;

TEST_SUITE("solvers")
{
  TEST_CASE("error schedules")
  {
    ErrorSchedule const p = ErrorSchedule::power(2.0, 1.5, 3.0, 2.0);
    CHECK(p.eps(0) == 2.0);
    CHECK(p.eps(3) == Approx(2.0 / std::pow(4.0, 1.5)));
    CHECK(p.tau(4) == Approx(3.0 / 25.0));
    for (std::size_t k = 1; k < 100; ++k) {
      CHECK(p.eps(k) <= p.eps(k - 1));
      CHECK(p.tau(k) <= p.tau(k - 1));
    }
    ErrorSchedule const e = ErrorSchedule::exp_damped(0.0, 1.0, 2.0, 0.5);
    CHECK(e.tau(6) == Approx(std::pow(7.0, -2.0) * std::pow(1.5, -3.0)));
    CHECK(e.eps(6) == 0.0);
    CHECK(ErrorSchedule::zero().eps(10) == 0.0);
  }

  TEST_CASE("config validation")
  {
    CompositeProblem p = make_box_qp_problem(gen_random_qp(5, 1));
    SolverConfig c;
    c.mu = 0.0;
    c.schedule = ErrorSchedule::exp_damped(0.0, 1.0, 2.0, 0.0);
    CHECK_THROWS_AS(resolve_config(p, c), ConfigError);
    SolverConfig a;
    a.algorithm = Algorithm::Aippa;
    CHECK_THROWS_AS(resolve_config(p, a), ConfigError);
  }

  TEST_CASE("Lyapunov function")
  {
    CompositeProblem const p = scalar_quadratic(1.0, 1.0);
    REQUIRE(p.reference);
    Vector const xs = p.reference->x_star;
    CHECK(lyapunov_value(p, xs, xs, 4.0) == Approx(0.0).scale(1.0));
    CHECK(lyapunov_value(p, vec({0.0}), vec({0.0}), 4.0) == Approx(2.5));
  }

  TEST_CASE("AIPPA convex on 1/2 x^2")
  {
    CompositeProblem const p = scalar_quadratic();
    SolverConfig c;
    c.algorithm = Algorithm::Aippa;
    c.scheme = Scheme::AippaConvex;
    c.mu = 0.0;
    c.budget = 200;
    c.stop_rel = 0.0;
    c.x0 = vec({3.0});
    RunResult const r = run(p, c);
    for (auto const &row : r.rows) {
      double const k1 = static_cast<double>(row.k) + 1.0;
      CHECK(row.obj_gap <= 2.0 * r.L0 / (k1 * k1) * (1.0 + 1e-12) + 1e-300);
    }
  }

  TEST_CASE("the minimizer is a fixed point")
  {
    CompositeProblem const p = make_separable_l1(vec({1.0, 2.0}), vec({1.0, -0.1}), 0.5);
    for (Algorithm alg : {Algorithm::Aippa, Algorithm::Aipgm}) {
      SolverConfig c;
      c.algorithm = alg;
      c.budget = 20;
      c.stop_rel = 0.0;
      c.x0 = p.reference->x_star;
      RunResult const r = run(p, c);
      CHECK((r.final_state.x - p.reference->x_star).norm() <= 1e-14);
      CHECK(r.L0 == Approx(0.0).scale(1.0));
    }
  }

  TEST_CASE("AIPPA strong with a constant step")
  {
    CompositeProblem const p = make_separable_l1(vec({1.0, 2.0, 5.0}), vec({1.0, -0.1, 2.0}), 0.5);
    SolverConfig c;
    c.algorithm = Algorithm::Aippa;
    c.scheme = Scheme::AippaStrong;
    c.alpha = 0.4;
    c.budget = 100;
    c.stop_rel = 0.0;
    c.x0 = vec({5.0, 5.0, 5.0});
    RunResult const r = run(p, c);
    for (auto const &row : r.rows) {
      CHECK(row.lyap <= 2.0 * r.L0 * std::pow(1.4, -static_cast<double>(row.k)) * (1.0 + 1e-9) + 1e-15);
    }
  }

  TEST_CASE("exact AIPGM rates")
  {
    CompositeProblem p = make_box_qp_problem(gen_random_qp(30, 4));
    compute_reference(p);
    SolverConfig c;
    c.mu = 0.0;
    c.budget = 500;
    c.stop_rel = 0.0;
    RunResult const r = run(p, c);
    for (auto const &row : r.rows) {
      double const d = static_cast<double>(row.k) + 2.0 * std::sqrt(2.0);
      CHECK(row.obj_gap <= 16.0 * r.L0 / (d * d));
    }
    CHECK(r.one_step.ok());
    CHECK(r.cumulative.ok());

    CompositeProblem q = make_box_qp_problem(gen_poisson_qp(8));
    compute_reference(q);
    SolverConfig s;
    s.budget = 400;
    s.stop_rel = 0.0;
    RunResult const rs = run(q, s);
    double const a = alpha_mu(rs.mu, rs.lip);
    double prev = kInf;
    for (auto const &row : rs.rows) {
      CHECK(row.lyap <= 2.0 * rs.L0 * std::pow(1.0 + a, -static_cast<double>(row.k)) * (1.0 + 1e-9) + 1e-14);
      CHECK(row.lyap <= prev * (1.0 + 1e-12) + 1e-14);
      CHECK(row.lyap >= row.obj_gap - 1e-14);
      prev = row.lyap;
    }
  }

  TEST_CASE("AIPGM with g = 0 is an accelerated gradient step")
  {
    CompositeProblem const p = scalar_quadratic(2.0, 1.0);
    SolverConfig c = resolve_config(p, [] {
      SolverConfig s;
      s.x0 = vec({4.0});
      s.v0 = vec({0.0});
      return s;
    }());
    SolverState st = initial_state(p, c);
    AipgmStepper stepper(p, c.schedule, 0);
    StepInfo const info = stepper.step(st);
    Vector const y = info.point;
    CHECK((st.x - (y - p.h.grad(y) / p.h.lip)).norm() <= 1e-14);
  }

  TEST_CASE("one exact AIPGM step contracts the Lyapunov function")
  {
    CompositeProblem p = make_box_qp_problem(gen_random_qp(15, 6));
    compute_reference(p);
    SolverConfig c;
    c.mu = 0.0;
    c.budget = 1;
    c.stop_rel = 0.0;
    RunResult const r = run(p, c);
    REQUIRE(r.rows.size() == 2);
    CHECK(r.rows[1].lyap * (1.0 + r.rows[0].alpha_k) <= r.rows[0].lyap * (1.0 + 1e-10));
  }

  TEST_CASE("identical seeds give identical traces")
  {
    CompositeProblem p = make_box_qp_problem(gen_random_qp(20, 2));
    compute_reference(p);
    SolverConfig c;
    c.schedule = ErrorSchedule::power(0.1, 2.0, 0.1, 2.0);
    c.budget = 100;
    c.seed = 5;
    std::ostringstream a;
    std::ostringstream b;
    write_trace_csv(a, run(p, c).rows);
    write_trace_csv(b, run(p, c).rows);
    CHECK(a.str() == b.str());
    CHECK(a.str().rfind("k,obj_gap", 0) == 0);
  }

  TEST_CASE("inexact runs satisfy the Lyapunov inequalities")
  {
    CompositeProblem p = make_box_qp_problem(gen_poisson_qp(6));
    compute_reference(p);
    for (double tau : {1e-3, 1.0}) {
      SolverConfig c;
      c.schedule = ErrorSchedule::power(tau, 2.0, tau, 2.0);
      c.budget = 300;
      c.stop_rel = 0.0;
      c.seed = 3;
      RunResult const r = run(p, c);
      CHECK(r.one_step.ok());
      CHECK(r.cumulative.ok());
      for (std::size_t k = 1; k < r.rows.size(); ++k) {
        CHECK(r.rows[k].upsilon >= r.rows[k - 1].upsilon);
        CHECK(r.rows[k].omega >= r.rows[k - 1].omega);
      }
    }
  }

  TEST_CASE("theorem envelopes")
  {
    BoundConfig c{Theorem::AippaConvex, 3.0};
    CHECK(first_term(0, c) == Approx(6.0));
    CHECK(first_term(9, c) == Approx(6.0 / 100.0));
    BoundConfig g{Theorem::AipgmConvex, 3.0, 2.0};
    CHECK(first_term(0, g) == Approx(6.0));
    CHECK(first_term(10, g) == Approx(48.0 / std::pow(10.0 + 2.0 * std::sqrt(2.0), 2.0)));
    CHECK(T_k(9, 2.0) == Approx((1.0 + std::pow(std::log(10.0), 2.0)) / 100.0));
    CHECK(T_k(9, 1.5) == Approx(0.01 + 0.1));
    BoundConfig e = c;
    e.p = 2.0;
    e.C_p = 1.0;
    CHECK(theorem_bound(9, e) >= first_term(9, e) + T_k(9, 2.0) * 0.999);
  }

  TEST_CASE("reference computation with polish")
  {
    CompositeProblem p = make_lasso_problem(gen_lasso(30, 60, 4, 0.01, 3));
    Reference const r = compute_reference(p);
    CHECK(std::isfinite(r.f_star));
    CHECK(p.value(r.x_star) == Approx(r.f_star));
  }
}
