#include "helpers.hpp"

#include "iaprox/flow.hpp"
#include "iaprox/sequences.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace iaprox;
using namespace iaprox::test;
using doctest::Approx;

namespace {

CompositeProblem separable()
{
  return make_separable_l1(vec({1.0, 2.0, 3.0, 4.0}), vec({1.0, -0.2, 0.3, -2.0}), 0.5);
}

FlowTrace harmonic(double T, double tol, double dt = 1e-2)
{
  FlowConfig c;
  c.x0 = vec({1.0});
  c.x1 = vec({0.5});
  c.T = T;
  c.tol = tol;
  c.report_dt = dt;
  return integrate(scalar_quadratic(), c);
}

double harmonic_error(FlowTrace const &tr)
{
  double err = 0.0;
  for (auto const &s : tr.states) {
    err = std::max(err, std::abs(s.x[0] - (1.0 + 1.5 * s.t) * std::exp(-s.t)));
  }
  return err;
}

} // namespace

TEST_SUITE("flow")
{
  TEST_CASE("perturbations")
  {
    Vector const d = vec({3.0, 4.0});
    Perturbation const p = Perturbation::power_decay(2.0, d);
    CHECK(p.at(1.0, 2).norm() == Approx(0.25));
    CHECK(p.norm_at(3.0) == Approx(1.0 / 16.0));
    Perturbation const e = Perturbation::exp_weighted(2.0, d, 3.0);
    CHECK(e.at(0.5, 2).norm() == Approx(3.0 * std::exp(-1.0)));
    CHECK(Perturbation::zero().at(2.0, 2).norm() == 0.0);
  }

  TEST_CASE("rhs equilibrium")
  {
    CompositeProblem const p = separable();
    RegularizedObjective const F(p, 1e-3, p.h.mu);
    FlowState s;
    s.x = p.reference->x_star;
    s.xdot = Vector::Zero(4);
    auto const [xdot, xddot] = rhs(s, F, 1.0, Perturbation::zero());
    CHECK(xdot.norm() == 0.0);
    CHECK(xddot.norm() <= 1e-12);
  }

  TEST_CASE("smooth problems use the gradient directly")
  {
    CompositeProblem const p = scalar_quadratic(2.0, 0.5);
    RegularizedObjective const F(p, 0.0, 2.0);
    CHECK((F.grad(vec({3.0})) - p.h.grad(vec({3.0}))).norm() <= 1e-14);
  }

  TEST_CASE("harmonic oscillator against the closed form")
  {
    FlowTrace const tr = harmonic(10.0, 1e-10);
    for (auto const &s : tr.states) CHECK(s.gamma == Approx(1.0));
    CHECK(harmonic_error(tr) <= 100.0 * 1e-10);
  }

  TEST_CASE("tightening the tolerance reduces the error")
  {
    double const coarse = harmonic_error(harmonic(10.0, 1e-6));
    double const fine = harmonic_error(harmonic(10.0, 1e-8));
    CHECK(fine <= 0.5 * coarse);
  }

  TEST_CASE("gamma follows its closed form")
  {
    CompositeProblem const p = separable();
    FlowConfig c;
    c.gamma0 = 5.0;
    c.x0 = Vector::Ones(4);
    c.T = 5.0;
    FlowTrace const tr = integrate(p, c);
    for (auto const &s : tr.states) {
      CHECK(s.gamma == Approx(gamma_continuous(s.t, 1.0, 5.0)).epsilon(1e-9));
    }
  }

  TEST_CASE("continuous Lyapunov function")
  {
    CompositeProblem const p = separable();
    RegularizedObjective const F(p, 1e-2, p.h.mu);
    FlowState s;
    s.x = p.reference->x_star;
    s.xdot = Vector::Zero(4);
    s.gamma = 1.0;
    CHECK(lyapunov_continuous(s, F, p.reference->x_star) == Approx(0.0).scale(1.0));
  }

  TEST_CASE("exact flow decays exponentially")
  {
    CompositeProblem const p = separable();
    for (double lambda : {1e-2, 1e-4}) {
      FlowConfig c;
      c.lambda = lambda;
      c.x0 = Vector::Ones(4);
      FlowTrace const tr = integrate(p, c);
      DecayReport const d = check_decay_theorem(tr, p, DecayTheorem::MuPos);
      CHECK(d.ok);
      CHECK(d.max_ratio <= 1.0 + 1e-3);
      FlowLyapunovReport const l = check_flow_lyapunov(tr, p);
      CHECK(l.monotone_ok);
      CHECK(l.bound_ok);
      RegularizedObjective const F(p, lambda, p.h.mu);
      FlowState s0 = tr.states.front();
      double const L0 = p.difference(s0.x, p.reference->x_star) +
                        0.5 * s0.gamma * (s0.x + s0.xdot - p.reference->x_star).squaredNorm();
      CHECK(lyapunov_continuous(s0, F, p.reference->x_star) <= (1.0 + lambda * p.h.mu) * L0 * (1.0 + 1e-12));
    }
  }

  TEST_CASE("perturbed flows")
  {
    CompositeProblem const p = separable();
    FlowConfig c;
    c.x0 = Vector::Ones(4);
    c.xi = Perturbation::power_decay(1.0, Vector::Ones(4));
    FlowTrace const tr = integrate(p, c);
    DecayReport const d = check_decay_theorem(tr, p, DecayTheorem::MuPos);
    CHECK(d.ok);
    CHECK(std::isfinite(d.fitted_C));

    FlowConfig z;
    z.mu = 0.0;
    z.gamma0 = 2.0;
    z.T = 10.0;
    z.x0 = Vector::Ones(4);
    z.xi = Perturbation::exp_weighted(2.0, Vector::Ones(4));
    FlowTrace const tz = integrate(p, z);
    CHECK(check_decay_theorem(tz, p, DecayTheorem::Mu0).ok);
  }

  TEST_CASE("energy residual")
  {
    FlowTrace const fine = harmonic(5.0, 1e-10, 1e-3);
    std::vector<double> const res = energy_residuals(fine, scalar_quadratic());
    CHECK(res.front() == 0.0);
    CHECK(energy_residual(fine, scalar_quadratic()) <= 1e-6);
    CompositeProblem const p = separable();
    FlowConfig c;
    c.x0 = Vector::Ones(4);
    c.T = 5.0;
    FlowTrace const tr = integrate(p, c);
    double const r1 = energy_residual(tr, p, 1);
    double const r2 = energy_residual(tr, p, 2);
    CHECK(std::log2(r2 / r1) >= 1.8);
  }

  TEST_CASE("weighted perturbation integrals")
  {
    Vector const d = vec({1.0});
    CHECK(weighted_xi_integral(Perturbation::zero(), XiWeight::Exp, 3.0) == 0.0);
    Perturbation constant;
    constant.kind = Perturbation::Kind::Custom;
    constant.custom = [](double) { return vec({0.0, 2.0}); };
    CHECK(weighted_xi_integral(constant, XiWeight::Exp, 2.5) == Approx(2.0 * (std::exp(2.5) - 1.0)));
    Perturbation const pw = Perturbation::power_decay(2.0, d);
    double const K = integral_estimate_constant(std::exp(0.5), 2.0);
    for (double t = 0.5; t <= 30.0; t += 0.5) {
      double const v = weighted_xi_integral(pw, XiWeight::HalfExp, t);
      CHECK(v <= K * std::exp(0.5 * t) / ((t + 1.0) * (t + 1.0)));
    }
  }

  TEST_CASE("initial data outside the domain is rejected")
  {
    CompositeProblem const p = make_box_qp_problem(gen_random_qp(3, 1));
    FlowConfig c;
    c.x0 = Vector::Constant(3, 5.0);
    CHECK_THROWS_AS(resolve_flow_config(p, c), ConfigError);
  }

  TEST_CASE("flow CSV")
  {
    CompositeProblem const p = separable();
    FlowConfig c;
    c.x0 = Vector::Ones(4);
    c.T = 1.0;
    FlowTrace const tr = integrate(p, c);
    std::ostringstream a;
    std::ostringstream b;
    write_flow_csv(a, flow_rows(tr, p));
    write_flow_csv(b, flow_rows(integrate(p, c), p), true);
    CHECK(a.str() == b.str());
    CHECK(a.str().rfind("t,obj_gap,lyap,bound,energy_residual,gamma,xi_integral\n", 0) == 0);
    std::ostringstream n;
    write_flow_csv(n, flow_rows(tr, p), false);
    CHECK(n.str().rfind("t,obj_gap,lyap,bound,energy_residual,gamma\n", 0) == 0);
  }
}
