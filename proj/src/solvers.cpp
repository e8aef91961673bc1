#include "iaprox/solvers.hpp"

#include <cmath>
#include <cstdio>

namespace iaprox {

std::string to_string(Algorithm a) { return a == Algorithm::Aippa ? "aippa" : "aipgm"; }

std::string to_string(ScheduleKind k)
{
  switch (k) {
  case ScheduleKind::Power: return "power";
  case ScheduleKind::ExpDamped: return "exp";
  case ScheduleKind::Zero: return "zero";
  case ScheduleKind::Custom: return "custom";
  }
  return "unknown";
}

ScheduleKind schedule_kind_from_string(std::string const &s)
{
  if (s == "power") return ScheduleKind::Power;
  if (s == "exp" || s == "exp_damped") return ScheduleKind::ExpDamped;
  if (s == "zero") return ScheduleKind::Zero;
  throw ConfigError("unknown schedule '" + s + "' (expected power, exp or zero)");
}

std::string to_string(Theorem t)
{
  switch (t) {
  case Theorem::AippaConvex: return "aippa_convex";
  case Theorem::AippaStrong: return "aippa_strong";
  case Theorem::AipgmConvex: return "aipgm_convex";
  case Theorem::AipgmStrong: return "aipgm_strong";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Schedules

ErrorSchedule ErrorSchedule::zero() { return {}; }

ErrorSchedule ErrorSchedule::power(double eps_scale, double p, double tau_scale, double q)
{
  if (eps_scale < 0.0 || tau_scale < 0.0 || p <= 0.0 || q <= 0.0) {
    throw ConfigError("power schedule needs nonnegative scales and positive exponents");
  }
  ErrorSchedule s;
  s.kind = ScheduleKind::Power;
  s.eps_scale = eps_scale;
  s.tau_scale = tau_scale;
  s.p = p;
  s.q = q;
  return s;
}

ErrorSchedule ErrorSchedule::exp_damped(double eps_scale, double tau_scale, double p, double rate)
{
  if (eps_scale < 0.0 || tau_scale < 0.0 || p < 0.0) {
    throw ConfigError("exp schedule needs nonnegative scales and exponent");
  }
  ErrorSchedule s;
  s.kind = ScheduleKind::ExpDamped;
  s.eps_scale = eps_scale;
  s.tau_scale = tau_scale;
  s.p = p;
  s.q = p;
  s.rate = rate;
  return s;
}

namespace {

double damped(double scale, double p, double rate, std::size_t k)
{
  if (scale == 0.0) {
    return 0.0;
  }
  double const kk = static_cast<double>(k);
  return scale * std::pow(kk + 1.0, -p) * std::exp(-0.5 * kk * std::log1p(rate));
}

} // namespace

double ErrorSchedule::eps(std::size_t k) const
{
  switch (kind) {
  case ScheduleKind::Zero: return 0.0;
  case ScheduleKind::Power:
    return eps_scale == 0.0 ? 0.0 : eps_scale * std::pow(static_cast<double>(k) + 1.0, -p);
  case ScheduleKind::ExpDamped: return damped(eps_scale, p, rate, k);
  case ScheduleKind::Custom: return custom_eps ? custom_eps(k) : 0.0;
  }
  return 0.0;
}

double ErrorSchedule::tau(std::size_t k) const
{
  switch (kind) {
  case ScheduleKind::Zero: return 0.0;
  case ScheduleKind::Power:
    return tau_scale == 0.0 ? 0.0 : tau_scale * std::pow(static_cast<double>(k) + 1.0, -q);
  case ScheduleKind::ExpDamped: return damped(tau_scale, p, rate, k);
  case ScheduleKind::Custom: return custom_tau ? custom_tau(k) : 0.0;
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// Steppers

AippaStepper::AippaStepper(CompositeProblem const &problem, ErrorSchedule schedule, std::uint64_t seed)
  : problem_{problem}
  , f_{problem.whole()}
  , schedule_{std::move(schedule)}
  , rng_{seed}
{
}

StepInfo AippaStepper::step(SolverState &state)
{
  ParamTrack &P = state.params;
  StepInfo info;
  info.gamma = P.gamma.back();
  info.alpha = P.next_alpha();
  info.lambda = P.next_lambda(info.alpha);
  info.eps = schedule_.eps(state.k);
  double const g = info.gamma;
  double const a = info.alpha;
  double const mu = P.mu;
  double const eta = g * a + g + mu * a;
  info.x_prev = state.x;
  info.v_prev = state.v;
  info.point = (g * a * state.v + (g + mu * a) * state.x) / eta;

  if (info.lambda != cached_lambda_) {
    cached_prox_ = f_.prox_for(info.lambda);
    cached_lambda_ = info.lambda;
  }
  info.exact = cached_prox_(info.point);
  Vector x1 = info.exact;
  if (info.eps > 0.0) {
    Vector const d = random_unit(x1.size(), rng_);
    x1 = make_type1(info.exact, info.eps, d, f_, info.lambda, info.point).w;
  }
  info.xi = (1.0 + info.lambda * mu) * (info.exact - x1);
  state.v = x1 + (x1 - state.x) / a;
  state.x = std::move(x1);
  state.last_xi = info.xi;
  P.step();
  ++state.k;
  return info;
}

AipgmStepper::AipgmStepper(CompositeProblem const &problem, ErrorSchedule schedule, std::uint64_t seed)
  : problem_{problem}
  , schedule_{std::move(schedule)}
  , rng_{seed}
{
}

StepInfo AipgmStepper::step(SolverState &state)
{
  ParamTrack &P = state.params;
  StepInfo info;
  info.gamma = P.gamma.back();
  info.alpha = P.next_alpha();
  info.lambda = P.next_lambda(info.alpha);
  info.eps = schedule_.eps(state.k);
  info.tau = schedule_.tau(state.k);
  double const g = info.gamma;
  double const a = info.alpha;
  double const mu = P.mu;
  info.x_prev = state.x;
  info.v_prev = state.v;
  info.point = (state.x + a * state.v) / (1.0 + a);
  GradMapResult gm = gradient_mapping(problem_, info.lambda, info.point, info.tau, info.eps, rng_);
  info.exact = std::move(gm.exact_forward);
  info.xi = gm.sigma + gm.e;
  state.v = (g * state.v + mu * a * info.point - a * gm.mapping) / (g + mu * a);
  state.x = std::move(gm.forward_point);
  state.last_xi = info.xi;
  P.step();
  ++state.k;
  return info;
}

// ---------------------------------------------------------------------------
// Configuration

SolverConfig resolve_config(CompositeProblem const &problem, SolverConfig config)
{
  double const mu = config.mu.value_or(problem.h.mu);
  if (mu < 0.0) {
    throw ConfigError("mu must be nonnegative");
  }
  config.mu = mu;
  if (config.algorithm == Algorithm::Aipgm) {
    config.scheme = Scheme::Aipgm;
    if (!(problem.h.lip > 0.0)) {
      throw ConfigError("aipgm needs a positive Lipschitz constant");
    }
    if (mu > problem.h.lip * (1.0 + 1e-12)) {
      throw ConfigError("mu exceeds L");
    }
    if (!config.gamma0) {
      config.gamma0 = mu > 0.0 ? mu : problem.h.lip;
    }
  } else {
    if (!problem.full_prox && !problem.full_prox_factory) {
      throw ConfigError("aippa needs a closed-form prox of the whole objective; problem '" +
                        problem.name + "' only has a prox of its nonsmooth part");
    }
    if (config.scheme == Scheme::Aipgm) {
      config.scheme = Scheme::AippaConvex;
    }
    if (!config.gamma0) {
      config.gamma0 = config.scheme == Scheme::AippaStrong ? mu : 4.0;
    }
  }
  if (config.schedule.kind == ScheduleKind::ExpDamped) {
    if (mu == 0.0) {
      throw ConfigError("exp schedule requires mu > 0");
    }
    if (config.algorithm == Algorithm::Aipgm) {
      config.schedule.rate = alpha_mu(mu, problem.h.lip);
    } else if (config.scheme == Scheme::AippaStrong) {
      config.schedule.rate = config.alpha;
    } else {
      config.schedule.rate = solve_alpha(mu, 1.0);
    }
  }
  if (config.algorithm == Algorithm::Aippa && config.schedule.kind != ScheduleKind::Custom) {
    config.schedule.tau_scale = 0.0;
  }
  return config;
}

SolverState initial_state(CompositeProblem const &problem, SolverConfig const &config)
{
  SolverState s;
  s.x = config.x0.size() ? config.x0 : Vector::Zero(problem.dim);
  s.v = config.v0.size() ? config.v0 : s.x;
  if (s.x.size() != problem.dim || s.v.size() != problem.dim) {
    throw ConfigError("initial point has the wrong dimension");
  }
  if (!std::isfinite(problem.value(s.x))) {
    throw ConfigError("initial point lies outside the domain of f");
  }
  s.params = make_track(config.scheme, *config.mu, *config.gamma0, problem.h.lip, config.alpha);
  s.last_xi = Vector::Zero(problem.dim);
  return s;
}

double lyapunov_value(CompositeProblem const &problem, Vector const &x, Vector const &v, double gamma)
{
  return problem.gap(x) + 0.5 * gamma * (v - problem.reference->x_star).squaredNorm();
}

namespace {

bool finite(Vector const &x) { return x.allFinite(); }

void record(InequalityReport &rep, double excess, double tol, std::size_t k, double scale)
{
  ++rep.checked;
  double const rel = excess / scale;
  rep.worst_excess = std::max(rep.worst_excess, rel);
  if (excess > tol) {
    ++rep.violations;
    if (!rep.first_violation) {
      rep.first_violation = k;
    }
  }
}

} // namespace

RunResult run(CompositeProblem const &problem, SolverConfig config)
{
  if (!problem.reference) {
    throw ConfigError("run: problem '" + problem.name + "' has no reference solution");
  }
  config = resolve_config(problem, config);
  SolverState state = initial_state(problem, config);
  Vector const &xs = problem.reference->x_star;
  double const f_star = problem.reference->f_star;
  double const lip = problem.h.lip;
  bool const pgm = config.algorithm == Algorithm::Aipgm;

  RunResult res;
  res.algorithm = config.algorithm;
  res.scheme = config.scheme;
  res.mu = *config.mu;
  res.lip = lip;
  res.L0 = lyapunov_value(problem, state.x, state.v, state.params.gamma.back());
  double const L0 = res.L0;
  double const step_tol = 1e-9 * (1.0 + L0);
  double const floor_abs = config.stop_rel * (1.0 + std::abs(f_star));
  double const stop_at = config.stop_rel > 0.0 ? floor_abs : -1.0;

  auto make_row = [&](double gap, double lyap, double ups, double om, double xi_norm) {
    ParamTrack const &P = state.params;
    LyapunovRow r;
    r.k = state.k;
    r.obj_gap = gap;
    r.lyap = lyap;
    r.upsilon = ups;
    r.omega = om;
    r.bound = 2.0 * P.beta.back() * (L0 + ups + om * om);
    r.eps_k = config.schedule.eps(state.k);
    r.tau_k = pgm ? config.schedule.tau(state.k) : 0.0;
    r.xi_norm = xi_norm;
    r.gamma_k = P.gamma.back();
    r.alpha_k = P.next_alpha();
    r.beta_k = P.beta.back();
    r.lambda_k = P.next_lambda(r.alpha_k);
    return r;
  };

  double upsilon = 0.0;
  double omega = 0.0;
  double lyap = L0;
  double gap = problem.gap(state.x);
  res.rows.push_back(make_row(gap, lyap, 0.0, 0.0, 0.0));

  std::optional<AippaStepper> aippa;
  std::optional<AipgmStepper> aipgm;
  if (pgm) {
    aipgm.emplace(problem, config.schedule, config.seed);
  } else {
    aippa.emplace(problem, config.schedule, config.seed);
  }

  res.stop_reason = "budget";
  if (gap < stop_at) {
    res.stop_reason = "converged";
  }
  while (res.stop_reason == "budget" && state.k < config.budget) {
    StepInfo const info = pgm ? aipgm->step(state) : aippa->step(state);
    if (!finite(state.x) || !finite(state.v)) {
      throw NumericalError("non-finite iterate at k=" + std::to_string(state.k), kInf);
    }
    ParamTrack const &P = state.params;
    std::size_t const k = state.k - 1;
    double const a = info.alpha;
    double const lam = info.lambda;
    double const beta_k = P.beta[k];
    double const beta_k1 = P.beta[k + 1];
    double const xi = info.xi.norm();
    double const eps2 = info.eps * info.eps;

    double const lyap_new = lyapunov_value(problem, state.x, state.v, P.gamma.back());
    double rhs = 0.0;
    if (pgm) {
      double const L = 1.0 / lam;
      upsilon += 2.0 * L / beta_k1 * (eps2 + info.tau * info.tau);
      omega += L * a / std::sqrt(beta_k * info.gamma) * xi;
      rhs = -a * lyap_new + a / lam * xi * (info.v_prev - xs).norm() + (1.0 + a) / lam * (eps2 + xi * xi);
    } else {
      upsilon += eps2 / (2.0 * lam * beta_k1);
      omega += a / (lam * beta_k) * std::sqrt(beta_k1 / P.gamma[k + 1]) * xi;
      rhs = -a * lyap_new + (1.0 + a) / (2.0 * lam) * eps2 + a / lam * xi * (state.v - xs).norm();
    }
    double const excess = (lyap_new - lyap) - rhs;
    record(res.one_step, excess, step_tol, state.k, 1.0 + L0);

    gap = problem.gap(state.x);
    lyap = lyap_new;
    LyapunovRow row = make_row(gap, lyap, upsilon, omega, xi);
    row.one_step_excess = excess;
    record(res.cumulative, lyap - row.bound, 1e-8 * row.bound + floor_abs, state.k,
           std::max(row.bound, 1e-300));
    res.rows.push_back(row);
    if (gap < stop_at) {
      res.stop_reason = "converged";
    }
  }
  res.final_state = std::move(state);
  return res;
}

void write_trace_csv(std::ostream &os, std::vector<LyapunovRow> const &rows)
{
  os << "k,obj_gap,lyap,bound,eps_k,tau_k,xi_norm,gamma_k,alpha_k\n";
  char buf[512];
  for (auto const &r : rows) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.k,
                  r.obj_gap, r.lyap, r.bound, r.eps_k, r.tau_k, r.xi_norm, r.gamma_k, r.alpha_k);
    os << buf;
  }
}

// ---------------------------------------------------------------------------
// Theorem envelopes

double T_k(std::size_t k, double r)
{
  double const k1 = static_cast<double>(k) + 1.0;
  if (r == 2.0) {
    double const l = std::log(k1);
    return (1.0 + l * l) / (k1 * k1);
  }
  return 1.0 / (k1 * k1) + std::pow(k1, 2.0 - 2.0 * r);
}

double first_term(std::size_t k, BoundConfig const &cfg)
{
  double const kk = static_cast<double>(k);
  // 2 L_0 times the upper bracket beta_k <= 4Q/(sqrt(gamma0) k + 2 sqrt(Q))^2.
  auto convex = [&](double Q, double g0) {
    double const d = std::sqrt(g0) * kk + 2.0 * std::sqrt(Q);
    return 8.0 * Q * cfg.L0 / (d * d);
  };
  switch (cfg.theorem) {
  case Theorem::AippaConvex: return convex(1.0, cfg.gamma0 > 0.0 ? cfg.gamma0 : 4.0);
  case Theorem::AippaStrong: return 2.0 * cfg.L0 * std::exp(-kk * std::log1p(cfg.alpha));
  case Theorem::AipgmConvex: return convex(2.0 * cfg.lip, cfg.gamma0 > 0.0 ? cfg.gamma0 : cfg.lip);
  case Theorem::AipgmStrong:
    return 2.0 * cfg.L0 * std::exp(-kk * std::log1p(alpha_mu(cfg.mu, cfg.lip)));
  }
  return 0.0;
}

double theorem_bound(std::size_t k, BoundConfig const &cfg)
{
  double const k1 = static_cast<double>(k) + 1.0;
  double const head = first_term(k, cfg);
  switch (cfg.theorem) {
  case Theorem::AippaConvex: return head + cfg.C_p * T_k(k, cfg.p);
  case Theorem::AippaStrong: return head + cfg.C_p * std::pow(k1, -2.0 * cfg.p);
  case Theorem::AipgmConvex: return head + cfg.lip * (cfg.C_p * T_k(k, cfg.p) + cfg.C_q * T_k(k, cfg.q));
  case Theorem::AipgmStrong: {
    double const ratio = cfg.lip / cfg.mu;
    return head + cfg.lip * ratio * ratio *
                      (cfg.C_p * std::pow(k1, -2.0 * cfg.p) + cfg.C_q * std::pow(k1, -2.0 * cfg.q));
  }
  }
  return head;
}

// ---------------------------------------------------------------------------
// Reference minimum

Reference compute_reference(CompositeProblem &problem, ReferenceOptions const &opts)
{
  if (problem.exact_solve) {
    if (auto x = problem.exact_solve()) {
      problem.set_reference(std::move(*x));
      return *problem.reference;
    }
  }
  SolverConfig cfg;
  cfg.algorithm = Algorithm::Aipgm;
  cfg = resolve_config(problem, cfg);
  SolverState state = initial_state(problem, cfg);
  AipgmStepper stepper(problem, ErrorSchedule::zero(), 0);

  Vector best = state.x;
  std::size_t still = 0;
  constexpr std::size_t kPolishEvery = 500;
  for (std::size_t it = 1; it <= opts.max_iterations; ++it) {
    Vector const prev = state.x;
    stepper.step(state);
    if (!finite(state.x)) {
      throw NumericalError("reference run produced a non-finite iterate", kInf);
    }
    if (problem.difference(state.x, best) < 0.0) {
      best = state.x;
    }
    double const moved = (state.x - prev).norm();
    still = moved <= opts.step_tol * (1.0 + state.x.norm()) ? still + 1 : 0;
    bool const stagnated = still >= opts.stagnation_window;
    if (problem.polish && (it % kPolishEvery == 0 || stagnated)) {
      if (auto x = problem.polish(best)) {
        if (problem.difference(*x, best) <= 1e-14 * (1.0 + std::abs(problem.value(best)))) {
          problem.set_reference(std::move(*x));
          return *problem.reference;
        }
      }
    }
    if (stagnated) {
      break;
    }
  }
  problem.set_reference(best);
  return *problem.reference;
}

} // namespace iaprox
