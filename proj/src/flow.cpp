#include "iaprox/flow.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace iaprox {

namespace odeint = boost::numeric::odeint;

// ---------------------------------------------------------------------------
// Perturbations

Perturbation Perturbation::zero() { return {}; }

Perturbation Perturbation::power_decay(double p, Vector direction, double scale)
{
  if (!(p > 0.0)) {
    throw ConfigError("power perturbation needs p > 0");
  }
  Perturbation xi;
  xi.kind = Kind::PowerDecay;
  xi.p = p;
  xi.scale = scale;
  xi.direction = direction.normalized();
  return xi;
}

Perturbation Perturbation::exp_weighted(double rate, Vector direction, double scale)
{
  Perturbation xi;
  xi.kind = Kind::ExpWeighted;
  xi.rate = rate;
  xi.scale = scale;
  xi.direction = direction.normalized();
  return xi;
}

double Perturbation::norm_at(double t) const
{
  switch (kind) {
  case Kind::Zero: return 0.0;
  case Kind::PowerDecay: return scale * std::pow(t + 1.0, -p);
  case Kind::ExpWeighted: return scale * std::exp(-rate * t);
  case Kind::Custom: return custom ? custom(t).norm() : 0.0;
  }
  return 0.0;
}

Vector Perturbation::at(double t, Index n) const
{
  switch (kind) {
  case Kind::Zero: return Vector::Zero(n);
  case Kind::Custom: return custom ? custom(t) : Vector::Zero(n);
  default: break;
  }
  if (direction.size() != n) {
    throw ConfigError("perturbation direction has the wrong dimension");
  }
  return norm_at(t) * direction;
}

// ---------------------------------------------------------------------------
// F_lambda

RegularizedObjective::RegularizedObjective(CompositeProblem const &problem, double lambda, double mu)
  : problem_{problem}
  , lambda_{lambda}
  , mu_{mu}
{
  if (lambda < 0.0) {
    throw ConfigError("lambda must be nonnegative");
  }
  if (lambda > 0.0) {
    if (!problem.full_prox && !problem.full_prox_factory) {
      throw ConfigError("flow needs a closed-form prox of the whole objective; problem '" +
                        problem.name + "' only has a prox of its nonsmooth part");
    }
    f_ = problem.whole();
    prox_ = f_.prox_for(lambda);
  }
}

Vector RegularizedObjective::prox(Vector const &x) const { return lambda_ > 0.0 ? prox_(x) : x; }

Vector RegularizedObjective::envelope_grad(Vector const &x) const
{
  if (lambda_ == 0.0) {
    return problem_.h.grad(x);
  }
  return (x - prox_(x)) / lambda_;
}

Vector RegularizedObjective::grad(Vector const &x) const
{
  return (1.0 + lambda_ * mu_) * envelope_grad(x);
}

double RegularizedObjective::envelope_gap(Vector const &x, Vector const &y) const
{
  if (lambda_ == 0.0) {
    return problem_.h.difference(x, y);
  }
  Vector const p = prox_(x);
  return f_.difference(p, y) + (x - p).squaredNorm() / (2.0 * lambda_);
}

double RegularizedObjective::difference(Vector const &x, Vector const &y) const
{
  if (lambda_ == 0.0) {
    return problem_.h.difference(x, y);
  }
  Vector const px = prox_(x);
  Vector const py = prox_(y);
  double const d = f_.difference(px, py) +
                   ((x - px).squaredNorm() - (y - py).squaredNorm()) / (2.0 * lambda_);
  return (1.0 + lambda_ * mu_) * d;
}

// ---------------------------------------------------------------------------
// Integration

namespace {

double gamma_at(double t, double mu, double gamma0) { return mu + (gamma0 - mu) * std::exp(-t); }

std::vector<double> report_times(double T, double dt)
{
  auto const steps = static_cast<std::size_t>(std::llround(T / dt));
  std::vector<double> out(std::max<std::size_t>(steps, 1) + 1);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::min(T, static_cast<double>(i) * dt);
  }
  out.back() = T;
  return out;
}

} // namespace

std::pair<Vector, Vector> rhs(FlowState const &s, RegularizedObjective const &F, double gamma0,
                              Perturbation const &xi)
{
  double const g = gamma_at(s.t, F.mu(), gamma0);
  return {s.xdot, (xi.at(s.t, s.x.size()) - (F.mu() + g) * s.xdot - F.grad(s.x)) / g};
}

FlowConfig resolve_flow_config(CompositeProblem const &problem, FlowConfig cfg)
{
  double const mu = cfg.mu.value_or(problem.h.mu);
  if (mu < 0.0) {
    throw ConfigError("mu must be nonnegative");
  }
  cfg.mu = mu;
  if (!cfg.gamma0) {
    cfg.gamma0 = mu > 0.0 ? mu : 1.0;
  }
  if (!(*cfg.gamma0 > 0.0)) {
    throw ConfigError("gamma0 must be positive");
  }
  if (!(cfg.T > 0.0) || !(cfg.report_dt > 0.0) || !(cfg.tol > 0.0)) {
    throw ConfigError("flow needs positive T, report_dt and tol");
  }
  if (cfg.x0.size() == 0) {
    cfg.x0 = Vector::Zero(problem.dim);
  }
  if (cfg.x1.size() == 0) {
    cfg.x1 = Vector::Zero(problem.dim);
  }
  if (cfg.x0.size() != problem.dim || cfg.x1.size() != problem.dim) {
    throw ConfigError("flow initial data has the wrong dimension");
  }
  if (!std::isfinite(problem.value(cfg.x0))) {
    throw ConfigError("flow initial point lies outside the domain of f");
  }
  if (!problem.g.full_domain && cfg.x1.squaredNorm() != 0.0) {
    throw ConfigError("flow on a restricted domain requires zero initial velocity");
  }
  return cfg;
}

FlowTrace integrate(CompositeProblem const &problem, FlowConfig cfg)
{
  cfg = resolve_flow_config(problem, cfg);
  double const mu = *cfg.mu;
  double const gamma0 = *cfg.gamma0;
  RegularizedObjective const F(problem, cfg.lambda, mu);
  Index const n = problem.dim;

  using State = std::vector<double>;
  auto system = [&](State const &y, State &dy, double t) {
    FlowState s;
    s.t = t;
    s.x = Eigen::Map<Vector const>(y.data(), n);
    s.xdot = Eigen::Map<Vector const>(y.data() + n, n);
    Vector const acc = rhs(s, F, gamma0, cfg.xi).second;
    std::copy(y.begin() + n, y.end(), dy.begin());
    std::copy(acc.data(), acc.data() + n, dy.begin() + n);
  };

  FlowTrace trace;
  trace.lambda = cfg.lambda;
  trace.mu = mu;
  trace.gamma0 = gamma0;
  trace.xi = cfg.xi;
  auto observer = [&](State const &y, double t) {
    FlowState s;
    s.t = t;
    s.x = Eigen::Map<Vector const>(y.data(), n);
    s.xdot = Eigen::Map<Vector const>(y.data() + n, n);
    s.gamma = gamma_at(t, mu, gamma0);
    if (!s.x.allFinite() || !s.xdot.allFinite()) {
      throw NumericalError("flow state became non-finite at t=" + std::to_string(t), kInf);
    }
    trace.states.push_back(std::move(s));
  };

  State y(2 * static_cast<std::size_t>(n));
  std::copy(cfg.x0.data(), cfg.x0.data() + n, y.begin());
  std::copy(cfg.x1.data(), cfg.x1.data() + n, y.begin() + n);
  std::vector<double> const times = report_times(cfg.T, cfg.report_dt);
  auto stepper = odeint::make_dense_output(cfg.abs_tol, cfg.tol, odeint::runge_kutta_dopri5<State>());
  try {
    odeint::integrate_times(stepper, system, y, times.begin(), times.end(),
                            std::min(1e-3, cfg.report_dt), observer,
                            odeint::max_step_checker(1000000));
  } catch (NumericalError const &) {
    throw;
  } catch (std::exception const &e) {
    double const t = trace.states.empty() ? 0.0 : trace.states.back().t;
    throw NumericalError("flow integration failed after t=" + std::to_string(t) + ": " + e.what(), t);
  }
  return trace;
}

double lyapunov_continuous(FlowState const &s, RegularizedObjective const &F, Vector const &x_star)
{
  return F.difference(s.x, x_star) + 0.5 * s.gamma * (s.x + s.xdot - x_star).squaredNorm();
}

// ---------------------------------------------------------------------------
// Energy equality

namespace {

Vector const &reference_point(CompositeProblem const &problem)
{
  if (!problem.reference) {
    throw ConfigError("flow diagnostics need a reference solution on problem '" + problem.name + "'");
  }
  return problem.reference->x_star;
}

// Cumulative trapezoid of values v over times t.
std::vector<double> cumtrapz(std::vector<double> const &t, std::vector<double> const &v)
{
  std::vector<double> out(t.size(), 0.0);
  for (std::size_t i = 1; i < t.size(); ++i) {
    out[i] = out[i - 1] + 0.5 * (t[i] - t[i - 1]) * (v[i] + v[i - 1]);
  }
  return out;
}

std::vector<double> residuals_on(FlowTrace const &trace, CompositeProblem const &problem,
                                 std::size_t stride)
{
  RegularizedObjective const F(problem, trace.lambda, trace.mu);
  std::vector<double> t;
  std::vector<double> diss;
  std::vector<double> work;
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < trace.states.size(); i += stride) {
    idx.push_back(i);
  }
  Index const n = problem.dim;
  for (std::size_t i : idx) {
    FlowState const &s = trace.states[i];
    t.push_back(s.t);
    diss.push_back(0.5 * (trace.mu + 3.0 * s.gamma) * s.xdot.squaredNorm());
    work.push_back(trace.xi.at(s.t, n).dot(s.xdot));
  }
  std::vector<double> const D = cumtrapz(t, diss);
  std::vector<double> const W = cumtrapz(t, work);
  FlowState const &s0 = trace.states.front();
  double const e0 = 0.5 * s0.gamma * s0.xdot.squaredNorm();
  std::vector<double> out;
  out.reserve(idx.size());
  for (std::size_t j = 0; j < idx.size(); ++j) {
    FlowState const &s = trace.states[idx[j]];
    double const lhs = F.difference(s.x, s0.x) + 0.5 * s.gamma * s.xdot.squaredNorm() - e0 + D[j];
    out.push_back(std::abs(lhs - W[j]));
  }
  return out;
}

} // namespace

std::vector<double> energy_residuals(FlowTrace const &trace, CompositeProblem const &problem)
{
  if (trace.states.empty()) {
    return {};
  }
  return residuals_on(trace, problem, 1);
}

double energy_residual(FlowTrace const &trace, CompositeProblem const &problem, std::size_t stride)
{
  if (trace.states.empty()) {
    return 0.0;
  }
  if (stride == 0) {
    throw std::invalid_argument("energy_residual: stride must be positive");
  }
  auto const r = residuals_on(trace, problem, stride);
  return *std::max_element(r.begin(), r.end());
}

double energy_residual(FlowTrace const &trace, CompositeProblem const &problem)
{
  return energy_residual(trace, problem, 1);
}

// ---------------------------------------------------------------------------
// Perturbation integrals

namespace {

double weight_at(XiWeight w, double s, double mu, double gamma0)
{
  switch (w) {
  case XiWeight::Exp: return std::exp(s);
  case XiWeight::HalfExp: return std::exp(0.5 * s);
  case XiWeight::HalfExpOverSqrtGamma: return std::exp(0.5 * s) / std::sqrt(gamma_at(s, mu, gamma0));
  }
  return 0.0;
}

double xi_integral_between(Perturbation const &xi, XiWeight weight, double a, double b, double mu,
                           double gamma0)
{
  if (xi.kind == Perturbation::Kind::Zero || b <= a) {
    return 0.0;
  }
  auto f = [&](double s) { return xi.norm_at(s) * weight_at(weight, s, mu, gamma0); };
  double total = 0.0;
  double lo = a;
  while (lo < b) {
    double const hi = std::min(b, std::floor(lo) + 1.0);
    double err = 0.0;
    double const v =
      boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, lo, hi, 15, 1e-12, &err);
    if (!std::isfinite(v) || err > 1e-8 * std::abs(v) + 1e-15) {
      throw NumericalError("perturbation integral did not converge", err);
    }
    total += v;
    lo = hi;
  }
  return total;
}

std::vector<double> cumulative_xi_integral(FlowTrace const &trace, XiWeight weight)
{
  std::vector<double> out(trace.states.size(), 0.0);
  for (std::size_t i = 1; i < out.size(); ++i) {
    out[i] = out[i - 1] + xi_integral_between(trace.xi, weight, trace.states[i - 1].t,
                                               trace.states[i].t, trace.mu, trace.gamma0);
  }
  return out;
}

} // namespace

double weighted_xi_integral(Perturbation const &xi, XiWeight weight, double t, double mu, double gamma0)
{
  return xi_integral_between(xi, weight, 0.0, t, mu, gamma0);
}

// ---------------------------------------------------------------------------
// Decay theorems

DecayReport check_decay_theorem(FlowTrace const &trace, CompositeProblem const &problem,
                                DecayTheorem theorem, double rel_tol)
{
  Vector const &xs = reference_point(problem);
  if (theorem == DecayTheorem::Mu0 && trace.mu != 0.0) {
    throw ConfigError("the mu = 0 decay check needs a flow with mu = 0");
  }
  if (theorem == DecayTheorem::MuPos && !(trace.mu > 0.0)) {
    throw ConfigError("the strongly convex decay check needs mu > 0");
  }
  RegularizedObjective const F(problem, trace.lambda, trace.mu);
  bool const pos = theorem == DecayTheorem::MuPos;
  double const gamma_min = std::min(trace.gamma0, trace.mu);
  XiWeight const weight = pos ? XiWeight::HalfExp : XiWeight::Exp;
  std::vector<double> const I = cumulative_xi_integral(trace, weight);

  DecayReport rep;
  FlowState const &s0 = trace.states.front();
  rep.L0 = problem.difference(s0.x, xs) + 0.5 * trace.gamma0 * (s0.x + s0.xdot - xs).squaredNorm();
  bool const power = trace.xi.kind == Perturbation::Kind::PowerDecay;
  rep.ok = true;
  for (std::size_t i = 0; i < trace.states.size(); ++i) {
    FlowState const &s = trace.states[i];
    double const decay = std::exp(-s.t);
    double const vel = pos ? 0.5 * s.gamma * (s.x + s.xdot - xs).squaredNorm() : 0.0;
    double const left = F.envelope_gap(s.x, xs) + vel;
    double const raw = problem.difference(s.x, xs) + vel;
    double const head = 2.0 * rep.L0 * decay;
    double const right = head + decay * I[i] * I[i] / (pos ? gamma_min : trace.gamma0);
    double const ratio = right > 0.0 ? left / right : (left > 0.0 ? kInf : 0.0);
    rep.max_ratio = std::max(rep.max_ratio, ratio);
    rep.raw_max_ratio = std::max(rep.raw_max_ratio, right > 0.0 ? raw / right : kInf);
    if (power) {
      rep.fitted_C = std::max(rep.fitted_C, (left - head) * std::pow(s.t + 1.0, 2.0 * trace.xi.p));
    }
    if (left > right * (1.0 + rel_tol) && !rep.first_violation_t) {
      rep.first_violation_t = s.t;
      rep.ok = false;
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Lyapunov function along the flow

namespace {

struct LyapunovSeries
{
  std::vector<double> lyap;     // L_lambda(t)
  std::vector<double> xi_term;  // e^t Xi_lambda(t)
  std::vector<double> kinetic;  // int_0^t e^s |x'|^2
  std::vector<double> R;        // int_0^t |xi| e^{s/2} / sqrt(gamma)
};

LyapunovSeries lyapunov_series(FlowTrace const &trace, CompositeProblem const &problem)
{
  Vector const &xs = reference_point(problem);
  RegularizedObjective const F(problem, trace.lambda, trace.mu);
  Index const n = problem.dim;
  std::vector<double> t;
  std::vector<double> inner;
  std::vector<double> kin;
  LyapunovSeries out;
  for (FlowState const &s : trace.states) {
    t.push_back(s.t);
    out.lyap.push_back(lyapunov_continuous(s, F, xs));
    inner.push_back(std::exp(s.t) * trace.xi.at(s.t, n).dot(s.x + s.xdot - xs));
    kin.push_back(std::exp(s.t) * s.xdot.squaredNorm());
  }
  out.xi_term = cumtrapz(t, inner);
  out.kinetic = cumtrapz(t, kin);
  out.R = cumulative_xi_integral(trace, XiWeight::HalfExpOverSqrtGamma);
  return out;
}

} // namespace

FlowLyapunovReport check_flow_lyapunov(FlowTrace const &trace, CompositeProblem const &problem,
                                       double monotone_slack, double bound_rel_tol)
{
  LyapunovSeries const S = lyapunov_series(trace, problem);
  FlowLyapunovReport rep;
  double const L00 = S.lyap.front();
  double prev = L00;
  double const slack = monotone_slack * (1.0 + std::abs(L00));
  for (std::size_t i = 0; i < trace.states.size(); ++i) {
    double const t = trace.states[i].t;
    double const et = std::exp(t);
    double const M = et * S.lyap[i] - S.xi_term[i] + 0.5 * trace.mu * S.kinetic[i];
    if (i > 0) {
      rep.max_monotone_increase = std::max(rep.max_monotone_increase, M - prev);
    }
    prev = M;
    double const left = S.lyap[i] + 0.5 * trace.mu * S.kinetic[i] / et;
    double const right = (2.0 * L00 + S.R[i] * S.R[i]) / et;
    rep.max_bound_ratio = std::max(rep.max_bound_ratio, right > 0.0 ? left / right : 0.0);
  }
  rep.monotone_ok = rep.max_monotone_increase <= slack;
  rep.bound_ok = rep.max_bound_ratio <= 1.0 + bound_rel_tol;
  return rep;
}

std::vector<FlowRow> flow_rows(FlowTrace const &trace, CompositeProblem const &problem)
{
  Vector const &xs = reference_point(problem);
  LyapunovSeries const S = lyapunov_series(trace, problem);
  std::vector<double> const res = energy_residuals(trace, problem);
  double const L00 = S.lyap.front();
  std::vector<FlowRow> rows;
  rows.reserve(trace.states.size());
  for (std::size_t i = 0; i < trace.states.size(); ++i) {
    FlowState const &s = trace.states[i];
    double const et = std::exp(s.t);
    FlowRow r;
    r.t = s.t;
    r.obj_gap = problem.difference(s.x, xs);
    r.lyap = S.lyap[i];
    r.bound = (2.0 * L00 + S.R[i] * S.R[i]) / et;
    r.energy_residual = res[i];
    r.gamma = s.gamma;
    r.xi_integral = S.xi_term[i] / et;
    rows.push_back(r);
  }
  return rows;
}

void write_flow_csv(std::ostream &os, std::vector<FlowRow> const &rows, bool log_xi)
{
  os << "t,obj_gap,lyap,bound,energy_residual,gamma" << (log_xi ? ",xi_integral\n" : "\n");
  char buf[512];
  for (auto const &r : rows) {
    int const len = std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g", r.t,
                                  r.obj_gap, r.lyap, r.bound, r.energy_residual, r.gamma);
    os.write(buf, len);
    if (log_xi) {
      std::snprintf(buf, sizeof buf, ",%.17g", r.xi_integral);
      os << buf;
    }
    os << '\n';
  }
}

} // namespace iaprox
