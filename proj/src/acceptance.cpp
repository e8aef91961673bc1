#include "iaprox/acceptance.hpp"

#include "iaprox/bench.hpp"
#include "iaprox/flow.hpp"
#include "iaprox/moreau.hpp"
#include "iaprox/sequences.hpp"
#include "iaprox/solvers.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <sstream>

namespace iaprox::acceptance {

bool Report::all_pass() const
{
  for (auto const &c : criteria) {
    if (!c.pass) {
      return false;
    }
  }
  return !criteria.empty();
}

std::string format_line(CriterionResult const &r)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, " (%.2f s)", r.seconds);
  return std::string(r.pass ? "PASS" : "FAIL") + " " + (r.id < 10 ? " " : "") + std::to_string(r.id) +
         "  " + r.title + " | " + r.detail + buf;
}

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string num(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

// Lyapunov reports gathered from every solver run of the suite.
struct LyapunovLedger
{
  std::size_t runs = 0;
  std::size_t checked = 0;
  std::size_t violations = 0;
  double worst_one_step = 0.0;
  double worst_cumulative = 0.0;

  void add(RunResult const &r)
  {
    ++runs;
    checked += r.one_step.checked + r.cumulative.checked;
    violations += r.one_step.violations + r.cumulative.violations;
    worst_one_step = std::max(worst_one_step, r.one_step.worst_excess);
    worst_cumulative = std::max(worst_cumulative, r.cumulative.worst_excess);
  }
};

std::vector<double> column(std::vector<LyapunovRow> const &rows, double LyapunovRow::*field)
{
  std::vector<double> out;
  out.reserve(rows.size());
  for (auto const &r : rows) {
    out.push_back(r.*field);
  }
  return out;
}

std::vector<double> ks(std::vector<LyapunovRow> const &rows)
{
  std::vector<double> out;
  for (auto const &r : rows) {
    out.push_back(static_cast<double>(r.k));
  }
  return out;
}

CompositeProblem poisson15()
{
  CompositeProblem p = make_box_qp_problem(gen_poisson_qp(15));
  compute_reference(p);
  return p;
}

CompositeProblem quadratic50()
{
  BoxQP const qp = gen_random_qp(50, 7);
  return make_unconstrained_quadratic(qp.A, qp.b, 0.0, qp.lip);
}

CompositeProblem separable(Index n, std::uint64_t seed)
{
  ProblemSpec s;
  s.family = ProblemFamily::SeparableL1;
  s.n = n;
  s.seed = seed;
  return build_problem(s);
}

// ---------------------------------------------------------------------------
// 1-6: discrete schemes

CriterionResult crit1(LyapunovLedger &ledger)
{
  auto const t0 = Clock::now();
  CompositeProblem p = make_box_qp_problem(gen_random_qp(100, 1));
  compute_reference(p);
  SolverConfig c;
  c.algorithm = Algorithm::Aipgm;
  c.mu = 0.0;
  c.budget = 2000;
  c.stop_rel = 0.0;
  RunResult const r = run(p, c);
  ledger.add(r);
  BoundConfig b{Theorem::AipgmConvex, r.L0, r.lip};
  std::vector<double> bound;
  for (auto const &row : r.rows) {
    bound.push_back(first_term(row.k, b));
  }
  BoundComparison const cmp = compare_bound(column(r.rows, &LyapunovRow::obj_gap), bound);
  double const secs = since(t0);
  CriterionResult out;
  out.id = 1;
  out.title = "exact AIPGM, mu=0, box QP n=100: gap <= 16 L0/(k+2 sqrt2)^2, k <= 2000";
  out.pass = cmp.ok() && r.rows.back().k == 2000 && secs < 5.0;
  out.detail = "max gap/bound " + num(cmp.max_ratio) + " over " + std::to_string(cmp.checked) + " iterates";
  out.seconds = secs;
  return out;
}

CriterionResult crit2(CompositeProblem const &p, LyapunovLedger &ledger)
{
  auto const t0 = Clock::now();
  SolverConfig c;
  c.algorithm = Algorithm::Aipgm;
  c.budget = 20000;
  c.stop_rel = 1e-12;
  RunResult const r = run(p, c);
  ledger.add(r);
  BoundConfig b{Theorem::AipgmStrong, r.L0, r.lip, r.mu};
  std::vector<double> bound;
  for (auto const &row : r.rows) {
    bound.push_back(first_term(row.k, b));
  }
  BoundComparison const cmp = compare_bound(column(r.rows, &LyapunovRow::lyap), bound);
  double const secs = since(t0);
  CriterionResult out;
  out.id = 2;
  out.title = "exact AIPGM, mu>0, Poisson grid 15: L_k <= 2 L0 (1+alpha_mu)^-k until the 1e-12 floor";
  out.pass = cmp.ok() && r.stop_reason == "converged" && secs < 5.0;
  out.detail = "max L_k/bound " + num(cmp.max_ratio) + ", floor reached at k=" +
               std::to_string(r.rows.back().k) + " (" + r.stop_reason + ")";
  out.seconds = secs;
  return out;
}

CriterionResult crit3(CompositeProblem const &p, LyapunovLedger &ledger)
{
  CriterionResult out;
  out.id = 3;
  out.title = "AIPGM tau_k=(k+1)^-p, mu>0, p in {1,2}: power slope in [-2p-0.3,-2p+0.3], r^2 >= 0.95";
  out.pass = true;
  auto const t0 = Clock::now();
  for (double pp : {1.0, 2.0}) {
    auto const ti = Clock::now();
    SolverConfig c;
    c.algorithm = Algorithm::Aipgm;
    c.schedule = ErrorSchedule::power(0.0, pp, 1.0, pp);
    c.budget = 5000;
    c.stop_rel = 0.0;
    c.seed = 11;
    RunResult const r = run(p, c);
    ledger.add(r);
    RateFit const fit = fit_rate(ks(r.rows), column(r.rows, &LyapunovRow::obj_gap), FitModel::Power,
                                 p.reference->f_star);
    double const secs = since(ti);
    bool const ok = std::abs(fit.slope + 2.0 * pp) <= 0.3 && fit.r_squared >= 0.95 && secs < 10.0;
    out.pass = out.pass && ok;
    out.detail += (out.detail.empty() ? "" : "; ") + std::string("p=") + num(pp) + " slope " +
                  num(fit.slope) + " r2 " + num(fit.r_squared) + " window [" + std::to_string(fit.k_lo) +
                  "," + std::to_string(fit.k_hi) + "]";
  }
  out.seconds = since(t0);
  return out;
}

CriterionResult crit4(CompositeProblem const &p, LyapunovLedger &ledger)
{
  auto const t0 = Clock::now();
  SolverConfig c;
  c.algorithm = Algorithm::Aipgm;
  c.schedule = ErrorSchedule::exp_damped(0.0, 1.0, 2.0, 0.0);
  c.budget = 5000;
  c.stop_rel = 0.0;
  c.seed = 12;
  RunResult const r = run(p, c);
  ledger.add(r);
  RateFit const fit = fit_rate(ks(r.rows), column(r.rows, &LyapunovRow::obj_gap), FitModel::Linear,
                               p.reference->f_star);
  double const target = -0.8 * std::log1p(alpha_mu(r.mu, r.lip));
  double const secs = since(t0);
  CriterionResult out;
  out.id = 4;
  out.title = "AIPGM exp-damped schedule, mu>0, p=2: semi-log slope <= -0.8 ln(1+alpha_mu)";
  out.pass = fit.slope <= target && secs < 10.0;
  out.detail = "slope " + num(fit.slope) + " vs " + num(target) + ", r2 " + num(fit.r_squared) +
               " window [" + std::to_string(fit.k_lo) + "," + std::to_string(fit.k_hi) + "]";
  out.seconds = secs;
  return out;
}

CriterionResult crit5(CompositeProblem const &p, LyapunovLedger &ledger)
{
  auto const t0 = Clock::now();
  SolverConfig c;
  c.algorithm = Algorithm::Aippa;
  c.scheme = Scheme::AippaConvex;
  c.gamma0 = 4.0;
  c.budget = 2000;
  c.stop_rel = 0.0;
  RunResult const r = run(p, c);
  ledger.add(r);
  BoundConfig b{Theorem::AippaConvex, r.L0};
  std::vector<double> bound;
  bool unit_lambda = true;
  for (auto const &row : r.rows) {
    bound.push_back(first_term(row.k, b));
    unit_lambda = unit_lambda && std::abs(row.lambda_k - 1.0) <= 1e-12;
  }
  BoundComparison const cmp = compare_bound(column(r.rows, &LyapunovRow::obj_gap), bound);
  double const secs = since(t0);
  CriterionResult out;
  out.id = 5;
  out.title = "exact AIPPA-convex (gamma0=4, lambda_k=1), quadratic n=50: gap <= 2 L0/(k+1)^2, k <= 2000";
  out.pass = cmp.ok() && unit_lambda && r.rows.back().k == 2000 && secs < 5.0;
  out.detail = "max gap/bound " + num(cmp.max_ratio) + ", lambda_k = 1: " + (unit_lambda ? "yes" : "no");
  out.seconds = secs;
  return out;
}

CriterionResult crit6(CompositeProblem const &p, LyapunovLedger &ledger)
{
  auto const t0 = Clock::now();
  SolverConfig c;
  c.algorithm = Algorithm::Aippa;
  c.scheme = Scheme::AippaConvex;
  c.gamma0 = 4.0;
  c.schedule = ErrorSchedule::power(1.0, 2.0, 0.0, 1.0);
  c.budget = 5000;
  c.stop_rel = 0.0;
  c.seed = 13;
  RunResult const r = run(p, c);
  ledger.add(r);
  double C = 0.0;
  for (auto const &row : r.rows) {
    double const k1 = static_cast<double>(row.k) + 1.0;
    double const l = std::log(k1);
    C = std::max(C, k1 * k1 * row.obj_gap / (1.0 + l * l));
  }
  // 2 L0 from the exact part plus 9 pi^2/6 + 36 from the error sums.
  double const analytic = 2.0 * r.L0 + 1.5 * std::numbers::pi * std::numbers::pi + 36.0;
  CriterionResult out;
  out.id = 6;
  out.title = "AIPPA-convex, eps_k=(k+1)^-2: (k+1)^2 gap/(1+ln^2(k+1)) bounded over k <= 5000";
  out.pass = std::isfinite(C) && C <= analytic && r.rows.back().k == 5000;
  out.detail = "fitted C " + num(C) + " (analytic bound " + num(analytic) + ")";
  out.seconds = since(t0);
  return out;
}

// ---------------------------------------------------------------------------
// 7-8: flow

double harmonic_error(double T, double tol, double x0, double x1)
{
  ProblemSpec s;
  s.family = ProblemFamily::Harmonic;
  CompositeProblem const p = build_problem(s);
  FlowConfig c;
  c.x0 = Vector::Constant(1, x0);
  c.x1 = Vector::Constant(1, x1);
  c.T = T;
  c.tol = tol;
  FlowTrace const tr = integrate(p, c);
  double err = 0.0;
  for (auto const &st : tr.states) {
    double const exact = (x0 + (x1 + x0) * st.t) * std::exp(-st.t);
    err = std::max(err, std::abs(st.x[0] - exact));
  }
  return err;
}

CriterionResult crit7()
{
  auto const t0 = Clock::now();
  CompositeProblem const p = separable(5, 3);
  FlowConfig c;
  c.lambda = 1e-4;
  c.T = 20.0;
  c.tol = 1e-10;
  c.x0 = Vector::Constant(p.dim, 1.0);
  FlowTrace const tr = integrate(p, c);
  DecayReport const rep = check_decay_theorem(tr, p, DecayTheorem::MuPos);
  double const herr = harmonic_error(20.0, 1e-10, 1.0, 0.5);
  CriterionResult out;
  out.id = 7;
  out.title = "flow, mu>0, xi=0, lambda=1e-4, T=20: gap <= 2 L0 e^-t (+ envelope slack); harmonic error <= 1e-7";
  out.pass = rep.ok && rep.max_ratio <= 1.0 + 1e-3 && herr <= 1e-7;
  out.detail = "max ratio " + num(rep.max_ratio) + " (f(x) itself: " + num(rep.raw_max_ratio) +
               "), harmonic sup error " + num(herr);
  out.seconds = since(t0);
  return out;
}

CriterionResult crit8()
{
  auto const t0 = Clock::now();
  CompositeProblem const p = separable(5, 3);
  FlowConfig c;
  c.lambda = 1e-4;
  c.T = 20.0;
  c.tol = 1e-10;
  c.x0 = Vector::Constant(p.dim, 1.0);
  c.xi = Perturbation::power_decay(2.0, Vector::Ones(p.dim));
  FlowTrace const tr = integrate(p, c);
  DecayReport const rep = check_decay_theorem(tr, p, DecayTheorem::MuPos);
  double const K = integral_estimate_constant(std::exp(0.5), 2.0);
  double const analytic = K * K / std::min(tr.gamma0, tr.mu);
  CriterionResult out;
  out.id = 8;
  out.title = "flow, mu>0, |xi(t)|=(t+1)^-2: gap <= 2 L0 e^-t + C/(t+1)^4 with finite fitted C";
  out.pass = std::isfinite(rep.fitted_C) && rep.fitted_C <= analytic && rep.ok;
  out.detail = "fitted C " + num(rep.fitted_C) + " (analytic bound " + num(analytic) +
               "), ratio to the R(t) envelope " + num(rep.max_ratio);
  out.seconds = since(t0);
  return out;
}

// ---------------------------------------------------------------------------
// 9: Lyapunov inequalities across every run

CriterionResult crit9(LyapunovLedger &ledger)
{
  auto const t0 = Clock::now();
  // Further runs covering the remaining schemes and error kinds.
  {
    CompositeProblem p = make_box_qp_problem(gen_random_qp(100, 2));
    compute_reference(p);
    SolverConfig c;
    c.algorithm = Algorithm::Aipgm;
    c.mu = 0.0;
    c.schedule = ErrorSchedule::power(1e-2, 2.0, 1e-2, 2.0);
    c.budget = 2000;
    c.stop_rel = 0.0;
    c.seed = 21;
    ledger.add(run(p, c));
  }
  {
    CompositeProblem p = make_lasso_problem(gen_lasso(100, 400, 10, 0.01, 5));
    compute_reference(p);
    SolverConfig c;
    c.algorithm = Algorithm::Aipgm;
    c.schedule = ErrorSchedule::power(0.0, 2.0, 1e-2, 2.0);
    c.budget = 2000;
    c.stop_rel = 0.0;
    c.seed = 22;
    ledger.add(run(p, c));
  }
  {
    ProblemSpec s;
    s.family = ProblemFamily::Quadratic;
    s.n = 30;
    s.shift = 0.5;
    s.seed = 4;
    CompositeProblem p = build_problem(s);
    SolverConfig c;
    c.algorithm = Algorithm::Aippa;
    c.scheme = Scheme::AippaStrong;
    c.alpha = 0.2;
    c.schedule = ErrorSchedule::power(1e-2, 2.0, 0.0, 1.0);
    c.budget = 1000;
    c.stop_rel = 0.0;
    c.seed = 23;
    ledger.add(run(p, c));
  }
  {
    CompositeProblem p = separable(20, 8);
    SolverConfig c;
    c.algorithm = Algorithm::Aipgm;
    c.schedule = ErrorSchedule::power(1e-3, 1.5, 1e-3, 1.5);
    c.budget = 1000;
    c.stop_rel = 0.0;
    c.seed = 24;
    ledger.add(run(p, c));
  }
  CriterionResult out;
  out.id = 9;
  out.title = "one-step and cumulative Lyapunov inequalities at every iterate of every run";
  out.pass = ledger.violations == 0 && ledger.checked > 0;
  out.detail = std::to_string(ledger.runs) + " runs, " + std::to_string(ledger.checked) + " checks, " +
               std::to_string(ledger.violations) + " violations; worst relative excess one-step " +
               num(ledger.worst_one_step) + ", cumulative " + num(ledger.worst_cumulative);
  out.seconds = since(t0);
  return out;
}

// ---------------------------------------------------------------------------
// 10: inexact-prox implications

// Subdifferential of a separable oracle at w_i as an interval; lo > hi when
// w_i lies outside the domain.
struct Interval
{
  double lo;
  double hi;
};

struct CertCase
{
  std::string name;
  NonsmoothOracle f;
  std::function<Interval(Index, double)> subdiff;
};

CertCase make_case(int which, Index n, std::mt19937_64 &rng)
{
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  CertCase c;
  switch (which) {
  case 0: {
    double const rho = 0.1 + 2.0 * unif(rng);
    c.name = "l1";
    c.f = l1_norm(rho);
    c.subdiff = [rho](Index, double w) {
      return w == 0.0 ? Interval{-rho, rho} : Interval{std::copysign(rho, w), std::copysign(rho, w)};
    };
    break;
  }
  case 1: {
    Vector l(n);
    Vector u(n);
    for (Index i = 0; i < n; ++i) {
      l[i] = -0.2 - unif(rng);
      u[i] = 0.2 + unif(rng);
    }
    c.name = "box";
    c.f = box_indicator(l, u);
    c.subdiff = [l, u](Index i, double w) {
      if (w < l[i] || w > u[i]) return Interval{1.0, -1.0};
      if (w == l[i]) return Interval{-kInf, 0.0};
      if (w == u[i]) return Interval{0.0, kInf};
      return Interval{0.0, 0.0};
    };
    break;
  }
  case 2:
    c.name = "zero";
    c.f = zero_function();
    c.subdiff = [](Index, double) { return Interval{0.0, 0.0}; };
    break;
  default: {
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector d(n);
    Vector cc(n);
    for (Index i = 0; i < n; ++i) {
      d[i] = 0.5 + 2.0 * unif(rng);
      cc[i] = normal(rng);
    }
    double const rho = 0.5;
    CompositeProblem const p = make_separable_l1(d, cc, rho);
    c.name = "separable_l1";
    c.f = p.whole();
    c.subdiff = [d, cc, rho](Index i, double w) {
      double const g = d[i] * (w - cc[i]);
      return w == 0.0 ? Interval{g - rho, g + rho}
                      : Interval{g + std::copysign(rho, w), g + std::copysign(rho, w)};
    };
    break;
  }
  }
  return c;
}

CriterionResult crit10()
{
  auto const t0 = Clock::now();
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::size_t checks = 0;
  std::size_t violations = 0;
  std::size_t type2_accepted = 0;
  std::size_t type3_by_distance = 0;
  double worst_key = 0.0;
  std::string first;
  auto fail = [&](std::string const &what) {
    ++violations;
    if (first.empty()) first = what;
  };

  for (int trial = 0; trial < 1000; ++trial) {
    Index const n = 1 + static_cast<Index>(unif(rng) * 6.0);
    CertCase const cs = make_case(trial % 4, n, rng);
    NonsmoothOracle const &f = cs.f;
    double const lambda = 0.05 + 5.0 * unif(rng);
    double const eps = 1e-3 + unif(rng);
    Vector x(n);
    for (Index i = 0; i < n; ++i) x[i] = 2.0 * normal(rng);
    Vector const p = f.prox(lambda, x);

    // Type 3 by witness implies type 1 and the distance form.
    Type3Result const t3 = make_type3(f, lambda, x, eps, rng);
    ++checks;
    if (!certify(t3.cert, f).ok) fail(cs.name + ": type-3 witness certificate");
    ++checks;
    if (!certify_type1(t3.w, x, lambda, eps, f).ok) fail(cs.name + ": type-3 => type-1");
    ++checks;
    double dist = 0.0;
    for (Index i = 0; i < n; ++i) {
      Interval const I = cs.subdiff(i, t3.w[i]);
      double const t = (x[i] - t3.w[i]) / lambda;
      dist += std::pow(t - std::clamp(t, I.lo, I.hi), 2);
    }
    if (lambda * std::sqrt(dist) > eps * (1.0 + 1e-9) + 1e-12) fail(cs.name + ": type-3 => distance");

    // Distance form implies a witness e with |e| <= eps.
    Vector w = p + eps * unif(rng) * random_unit(n, rng);
    if (trial % 2 == 1) {
      for (Index i = 0; i < n; ++i) {
        Interval const I = cs.subdiff(i, p[i]);
        if (I.lo < I.hi) w[i] = p[i];
      }
    }
    Vector e(n);
    bool in_domain = true;
    for (Index i = 0; i < n; ++i) {
      Interval const I = cs.subdiff(i, w[i]);
      if (I.lo > I.hi) {
        in_domain = false;
        break;
      }
      double const t = (x[i] - w[i]) / lambda;
      e[i] = lambda * std::clamp(t, I.lo, I.hi) - (x[i] - w[i]);
    }
    if (in_domain && e.norm() <= eps) {
      ++type3_by_distance;
      ++checks;
      Vector const back = f.prox(lambda, x + e);
      if ((back - w).norm() > 1e-10 * (1.0 + w.norm())) fail(cs.name + ": distance => witness");
      ++checks;
      if (!certify_type1(w, x, lambda, eps, f).ok) fail(cs.name + ": distance => type-1");
    }

    // Type 2 implies type 1 (rejection sampling around the exact prox).
    if (f.has_conjugate()) {
      Vector w2 = p + 0.3 * eps * unif(rng) * random_unit(n, rng);
      if (certify_type2(w2, x, lambda, eps, f).ok) {
        ++type2_accepted;
        ++checks;
        if (!certify_type1(w2, x, lambda, eps, f).ok) fail(cs.name + ": type-2 => type-1");
      }
    }

    // Type-1 approximations: the key distance bound and the full inequality.
    Type1Result const t1 = make_type1(p, eps, random_unit(n, rng), f, lambda, x);
    ++checks;
    double const bound = eps / std::sqrt(1.0 + lambda * f.mu);
    double const d1 = (t1.w - p).norm();
    worst_key = std::max(worst_key, d1 / bound);
    if (d1 > bound * (1.0 + 1e-9)) fail(cs.name + ": key distance bound");
    Vector const sigma = (1.0 + lambda * f.mu) * (p - t1.w);
    for (int k = 0; k < 3; ++k) {
      Vector y = t1.w + normal(rng) * random_unit(n, rng);
      if (!std::isfinite(f.eval(y))) {
        y = p;
      }
      double const lhs = eps * eps / (2.0 * lambda) + f.difference(y, t1.w);
      double const rhs = (sigma + t1.w - x).dot(t1.w - y) / lambda + 0.5 * f.mu * (t1.w - y).squaredNorm() +
                         (1.0 + lambda * f.mu) / (2.0 * lambda) * (t1.w - p).squaredNorm();
      ++checks;
      if (lhs < rhs - 1e-9 * (1.0 + std::abs(lhs) + std::abs(rhs))) fail(cs.name + ": key inequality");
    }
  }
  CriterionResult out;
  out.id = 10;
  out.title = "inexact-prox implications and key distance bound eps/sqrt(1+lambda mu), 1000 random certificates";
  out.pass = violations == 0;
  out.detail = std::to_string(checks) + " checks (" + std::to_string(type2_accepted) + " type-2, " +
               std::to_string(type3_by_distance) + " distance-form type-3), " +
               std::to_string(violations) + " violations, max |w-prox|/bound " + num(worst_key) +
               (first.empty() ? "" : "; first: " + first);
  out.seconds = since(t0);
  return out;
}

// ---------------------------------------------------------------------------
// 11: Gronwall and integral estimates

std::size_t continuous_gronwall_trials(std::mt19937_64 &rng, std::size_t &applicable)
{
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::size_t violations = 0;
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t const N = 4000;
    double const T = 0.5 + 5.0 * unif(rng);
    double const h = T / static_cast<double>(N);
    double const c = 4.0 * unif(rng) - 2.0;
    double const a1 = 2.0 * unif(rng) - 0.5;
    double const a2 = unif(rng);
    double const om = 0.5 + 4.0 * unif(rng);
    double const shrink = unif(rng) < 0.3 ? 1.0 : 0.2 + 0.8 * unif(rng);
    double const wob = 0.3 * unif(rng);
    std::vector<double> w(N + 1);
    std::vector<double> y(N + 1);
    for (std::size_t i = 0; i <= N; ++i) {
      double const t = static_cast<double>(i) * h;
      w[i] = a1 + a2 * std::sin(om * t);
    }
    // y = shrink * (|c| + int w) (1 - wob sin^2 t): the extremal solution when
    // shrink = 1 and wob = 0, sub-extremal otherwise.
    double W = 0.0;
    for (std::size_t i = 0; i <= N; ++i) {
      if (i > 0) W += 0.5 * h * (w[i] + w[i - 1]);
      double const t = static_cast<double>(i) * h;
      y[i] = shrink * (std::abs(c) + W) * (1.0 - wob * std::sin(t) * std::sin(t));
    }
    double wy = 0.0;
    double absw = 0.0;
    bool hypothesis = true;
    bool conclusion = true;
    for (std::size_t i = 0; i <= N; ++i) {
      if (i > 0) {
        wy += 0.5 * h * (w[i] * y[i] + w[i - 1] * y[i - 1]);
        absw += 0.5 * h * (std::abs(w[i]) + std::abs(w[i - 1]));
      }
      double const scale = 1.0 + c * c + std::abs(wy);
      if (0.5 * y[i] * y[i] > 0.5 * c * c + wy + 1e-7 * scale) {
        hypothesis = false;
        break;
      }
      if (std::abs(y[i]) > std::abs(c) + absw + 1e-6 * (1.0 + std::abs(c) + absw)) {
        conclusion = false;
      }
    }
    if (hypothesis) {
      ++applicable;
      if (!conclusion) ++violations;
    }
  }
  return violations;
}

std::size_t discrete_gronwall_trials(std::mt19937_64 &rng, std::size_t &applicable)
{
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::size_t violations = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::size_t const K = 100;
    std::vector<double> a(K), b(K), c(K);
    std::vector<std::size_t> j(K);
    double cc = unif(rng);
    for (std::size_t k = 0; k < K; ++k) {
      cc += unif(rng) < 0.5 ? 0.0 : 0.1 * unif(rng);
      c[k] = cc;
      b[k] = 2.0 * unif(rng) - 0.7;
      j[k] = static_cast<std::size_t>(unif(rng) * static_cast<double>(k + 1));
      j[k] = std::min(j[k], k);
    }
    bool ok = true;
    for (std::size_t k = 0; k < K && ok; ++k) {
      double S = c[k] * c[k];
      for (std::size_t i = 0; i < std::min(j[k] + 1, k); ++i) S += a[i] * b[i];
      double amax = 0.0;
      if (j[k] == k) {
        double const disc = b[k] * b[k] + 4.0 * S;
        if (disc < 0.0) { ok = false; break; }
        amax = 0.5 * (b[k] + std::sqrt(disc));
      } else {
        if (S < 0.0) { ok = false; break; }
        amax = std::sqrt(S);
      }
      a[k] = (unif(rng) < 0.2 ? 1.0 : unif(rng)) * amax;
    }
    if (!ok) continue;
    // Hypothesis as generated, then the conclusion.
    bool hyp = true;
    bool concl = true;
    for (std::size_t k = 0; k < K; ++k) {
      double S = c[k] * c[k];
      double B = 0.0;
      for (std::size_t i = 0; i <= j[k]; ++i) {
        S += a[i] * b[i];
        B += std::abs(b[i]);
      }
      double const scale = 1.0 + c[k] * c[k] + B * B;
      if (a[k] * a[k] > S + 1e-12 * scale) hyp = false;
      if (std::abs(a[k]) > std::abs(c[k]) + B + 1e-12 * (1.0 + std::abs(c[k]) + B)) concl = false;
    }
    if (hyp) {
      ++applicable;
      if (!concl) ++violations;
    }
  }
  return violations;
}

CriterionResult crit11()
{
  auto const t0 = Clock::now();
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::size_t cont_applicable = 0;
  std::size_t disc_applicable = 0;
  std::size_t const cont = continuous_gronwall_trials(rng, cont_applicable);
  std::size_t const disc = discrete_gronwall_trials(rng, disc_applicable);
  std::size_t integral = 0;
  double worst = 0.0;
  int const trials = 60;
  for (int trial = 0; trial < trials; ++trial) {
    double const A = 1.0 + 1e-2 + 9.0 * unif(rng);
    double const p = trial % 3 == 0 ? std::floor(6.0 * unif(rng)) : 6.0 * unif(rng);
    std::vector<double> grid;
    double const T = 5.0 + 30.0 * unif(rng);
    for (int i = 1; i <= 60; ++i) grid.push_back(T * static_cast<double>(i) / 60.0);
    IntegralReport const rep = check_integral_estimate(A, p, grid, 100);
    worst = std::max({worst, rep.max_ratio / rep.K, rep.max_discrete_ratio / rep.K});
    if (!rep.ok) ++integral;
  }
  CriterionResult out;
  out.id = 11;
  out.title = "continuous and discrete Gronwall, integral estimate: randomized suites";
  out.pass = cont == 0 && disc == 0 && integral == 0 && cont_applicable > 0 && disc_applicable > 0;
  out.detail = "continuous " + std::to_string(cont) + "/" + std::to_string(cont_applicable) +
               ", discrete " + std::to_string(disc) + "/" + std::to_string(disc_applicable) +
               ", integral " + std::to_string(integral) + "/" + std::to_string(trials) +
               " violations; max ratio/K " + num(worst);
  out.seconds = since(t0);
  return out;
}

// ---------------------------------------------------------------------------
// 12: parameter sequences

CriterionResult crit12()
{
  auto const t0 = Clock::now();
  std::size_t tracks = 0;
  std::size_t checked = 0;
  std::size_t violations = 0;
  std::string first;
  auto check = [&](ParamTrack track) {
    for (int i = 0; i < 10000; ++i) track.step();
    BoundReport const r = check_sequence_bounds(track);
    ++tracks;
    checked += r.checked;
    violations += r.violations;
    if (!r.ok() && first.empty()) first = r.first_failure;
  };
  for (double mu : {0.0, 1e-4, 1e-2, 1.0}) {
    for (double lip : {1.0, 10.0, 1000.0}) {
      if (mu > lip) continue;
      for (double g0 : {1e-3, 0.1, 1.0, 4.0, 100.0}) {
        check(make_track(Scheme::Aipgm, mu, g0, lip));
      }
      if (mu > 0.0) check(make_track(Scheme::Aipgm, mu, mu, lip));
    }
    for (double g0 : {1e-3, 0.1, 1.0, 4.0, 100.0}) {
      check(make_track(Scheme::AippaConvex, mu, g0));
    }
    if (mu > 0.0) {
      check(make_track(Scheme::AippaConvex, mu, mu));
      for (double a : {0.01, 0.5, 2.0}) check(make_track(Scheme::AippaStrong, mu, mu, 1.0, a));
    }
  }
  CriterionResult out;
  out.id = 12;
  out.title = "sequence brackets on alpha_k, gamma_k, beta_k for k <= 1e4 over the (mu, L, gamma0) grid";
  out.pass = violations == 0;
  out.detail = std::to_string(tracks) + " tracks, " + std::to_string(checked) + " checks, " +
               std::to_string(violations) + " violations" + (first.empty() ? "" : "; first: " + first);
  out.seconds = since(t0);
  return out;
}

// ---------------------------------------------------------------------------
// 13: energy equality refinement

CriterionResult crit13()
{
  auto const t0 = Clock::now();
  struct Case
  {
    std::string name;
    CompositeProblem problem;
    FlowConfig cfg;
  };
  std::vector<Case> cases;
  {
    ProblemSpec s;
    s.family = ProblemFamily::Harmonic;
    FlowConfig c;
    c.x0 = Vector::Constant(1, 1.0);
    c.x1 = Vector::Constant(1, 0.5);
    c.T = 10.0;
    cases.push_back({"harmonic", build_problem(s), c});
  }
  for (double lam : {1e-2, 1e-4}) {
    CompositeProblem p = separable(5, 3);
    FlowConfig c;
    c.lambda = lam;
    c.x0 = Vector::Constant(p.dim, 1.0);
    cases.push_back({"separable_l1 lambda=" + num(lam), p, c});
  }
  {
    CompositeProblem p = separable(5, 3);
    FlowConfig c;
    c.x0 = Vector::Constant(p.dim, 1.0);
    c.xi = Perturbation::power_decay(2.0, Vector::Ones(p.dim));
    cases.push_back({"separable_l1 xi power", p, c});
  }
  {
    CompositeProblem p = separable(5, 3);
    FlowConfig c;
    c.mu = 0.0;
    c.gamma0 = 1.0;
    c.T = 8.0;
    c.x0 = Vector::Constant(p.dim, 1.0);
    c.xi = Perturbation::exp_weighted(2.0, Vector::Ones(p.dim));
    cases.push_back({"separable_l1 mu=0", p, c});
  }
  {
    ProblemSpec s;
    s.family = ProblemFamily::Quadratic;
    s.n = 10;
    s.shift = 0.5;
    s.seed = 9;
    CompositeProblem p = build_problem(s);
    FlowConfig c;
    c.x0 = Vector::Constant(p.dim, 1.0);
    c.T = 10.0;
    cases.push_back({"quadratic n=10", p, c});
  }
  double worst = kInf;
  std::string worst_name;
  bool pass = true;
  for (auto const &cs : cases) {
    FlowTrace const tr = integrate(cs.problem, cs.cfg);
    double const r1 = energy_residual(tr, cs.problem, 1);
    double const r2 = energy_residual(tr, cs.problem, 2);
    double const r4 = energy_residual(tr, cs.problem, 4);
    double const order = std::min(std::log2(r2 / r1), std::log2(r4 / r2));
    if (!(order >= 1.8)) pass = false;
    if (order < worst) {
      worst = order;
      worst_name = cs.name;
    }
  }
  CriterionResult out;
  out.id = 13;
  out.title = "energy-equality residual converges at second order under grid refinement";
  out.pass = pass;
  out.detail = std::to_string(cases.size()) + " flow problems, smallest observed order " + num(worst) +
               " (" + worst_name + ")";
  out.seconds = since(t0);
  return out;
}

} // namespace

Report run_all(std::function<void(CriterionResult const &)> const &on_result)
{
  Report rep;
  auto emit = [&](CriterionResult r) {
    if (on_result) on_result(r);
    rep.criteria.push_back(std::move(r));
  };
  auto guarded = [&](int id, std::function<CriterionResult()> const &fn) {
    auto const t0 = Clock::now();
    try {
      emit(fn());
    } catch (std::exception const &e) {
      CriterionResult r;
      r.id = id;
      r.title = "criterion " + std::to_string(id);
      r.detail = std::string("error: ") + e.what();
      r.seconds = since(t0);
      emit(r);
    }
  };
  LyapunovLedger ledger;
  guarded(1, [&] { return crit1(ledger); });
  CompositeProblem const poisson = poisson15();
  guarded(2, [&] { return crit2(poisson, ledger); });
  guarded(3, [&] { return crit3(poisson, ledger); });
  guarded(4, [&] { return crit4(poisson, ledger); });
  CompositeProblem const quad = quadratic50();
  guarded(5, [&] { return crit5(quad, ledger); });
  guarded(6, [&] { return crit6(quad, ledger); });
  guarded(7, crit7);
  guarded(8, crit8);
  guarded(9, [&] { return crit9(ledger); });
  guarded(10, crit10);
  guarded(11, crit11);
  guarded(12, crit12);
  guarded(13, crit13);
  return rep;
}

} // namespace iaprox::acceptance
