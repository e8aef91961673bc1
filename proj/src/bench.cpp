#include "iaprox/bench.hpp"
#include "iaprox/matrix_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <limits>
#include <random>
#include <sstream>

namespace iaprox {

using nlohmann::json;

std::string to_string(ProblemFamily f)
{
  switch (f) {
  case ProblemFamily::RandomQp: return "qp";
  case ProblemFamily::PoissonQp: return "poisson";
  case ProblemFamily::Lasso: return "lasso";
  case ProblemFamily::Quadratic: return "quadratic";
  case ProblemFamily::SeparableL1: return "separable_l1";
  case ProblemFamily::Harmonic: return "harmonic";
  }
  return "unknown";
}

ProblemFamily problem_family_from_string(std::string const &s)
{
  if (s == "qp" || s == "random_qp") return ProblemFamily::RandomQp;
  if (s == "poisson" || s == "poisson_qp") return ProblemFamily::PoissonQp;
  if (s == "lasso") return ProblemFamily::Lasso;
  if (s == "quadratic") return ProblemFamily::Quadratic;
  if (s == "separable_l1") return ProblemFamily::SeparableL1;
  if (s == "harmonic") return ProblemFamily::Harmonic;
  throw ConfigError("unknown problem family '" + s + "'");
}

std::string to_string(RunKind k)
{
  switch (k) {
  case RunKind::Aippa: return "aippa";
  case RunKind::Aipgm: return "aipgm";
  case RunKind::Flow: return "flow";
  }
  return "unknown";
}

RunKind run_kind_from_string(std::string const &s)
{
  if (s == "aippa") return RunKind::Aippa;
  if (s == "aipgm") return RunKind::Aipgm;
  if (s == "flow") return RunKind::Flow;
  throw ConfigError("unknown algorithm '" + s + "' (expected aippa, aipgm or flow)");
}

std::string to_string(FitModel m) { return m == FitModel::Power ? "power" : "linear"; }

FitModel fit_model_from_string(std::string const &s)
{
  if (s == "power") return FitModel::Power;
  if (s == "linear") return FitModel::Linear;
  throw ConfigError("unknown fit model '" + s + "' (expected power or linear)");
}

// ---------------------------------------------------------------------------
// Config

json to_json(ExperimentConfig const &c)
{
  json j;
  j["family"] = to_string(c.problem.family);
  j["n"] = c.problem.n;
  j["grid"] = c.problem.grid;
  j["m"] = c.problem.m;
  j["s"] = c.problem.s;
  j["noise"] = c.problem.noise;
  j["shift"] = c.problem.shift;
  j["rho"] = c.problem.rho;
  j["seed"] = c.problem.seed;
  j["lower"] = c.problem.bounds.lower;
  j["upper"] = c.problem.bounds.upper;
  j["data_dir"] = c.problem.data_dir;
  j["algorithm"] = to_string(c.algorithm);
  j["scheme"] = to_string(c.scheme);
  j["mu"] = c.mu ? json(*c.mu) : json(nullptr);
  j["gamma0"] = c.gamma0 ? json(*c.gamma0) : json(nullptr);
  j["alpha"] = c.alpha;
  j["schedule"] = to_string(c.schedule);
  j["p"] = c.p;
  j["q"] = c.q;
  j["tau"] = c.tau;
  j["eps"] = c.eps;
  j["budget"] = c.budget;
  j["solver_seed"] = c.seed;
  j["stop_rel"] = c.stop_rel;
  j["out"] = c.out;
  j["reference"] = c.reference;
  j["f_star"] = c.f_star ? json(*c.f_star) : json(nullptr);
  j["x_star"] = c.x_star_file;
  j["lambda"] = c.lambda;
  j["T"] = c.T;
  j["tol"] = c.tol;
  j["dt"] = c.dt;
  j["xi"] = c.xi;
  j["xi_p"] = c.xi_p;
  j["xi_scale"] = c.xi_scale;
  j["x0_scale"] = c.x0_scale;
  j["log_xi"] = c.log_xi;
  j["fit_lo"] = c.fit_lo;
  j["fit_hi"] = c.fit_hi;
  return j;
}

ExperimentConfig config_from_json(json const &j)
{
  if (!j.is_object()) {
    throw ConfigError("experiment config must be a JSON object");
  }
  ExperimentConfig c;
  bool solver_seed_set = false;
  try {
    for (auto const &[key, v] : j.items()) {
      if (key == "family") c.problem.family = problem_family_from_string(v.get<std::string>());
      else if (key == "n") c.problem.n = v.get<Index>();
      else if (key == "grid") c.problem.grid = v.get<Index>();
      else if (key == "m") c.problem.m = v.get<Index>();
      else if (key == "s") c.problem.s = v.get<Index>();
      else if (key == "noise") c.problem.noise = v.get<double>();
      else if (key == "shift") c.problem.shift = v.get<double>();
      else if (key == "rho") c.problem.rho = v.get<double>();
      else if (key == "seed") c.problem.seed = v.get<std::uint64_t>();
      else if (key == "lower") c.problem.bounds.lower = v.get<double>();
      else if (key == "upper") c.problem.bounds.upper = v.get<double>();
      else if (key == "data_dir") c.problem.data_dir = v.get<std::string>();
      else if (key == "algorithm") c.algorithm = run_kind_from_string(v.get<std::string>());
      else if (key == "scheme") c.scheme = scheme_from_string(v.get<std::string>());
      else if (key == "mu") c.mu = v.is_null() ? std::nullopt : std::optional<double>(v.get<double>());
      else if (key == "gamma0") c.gamma0 = v.is_null() ? std::nullopt : std::optional<double>(v.get<double>());
      else if (key == "alpha") c.alpha = v.get<double>();
      else if (key == "schedule") c.schedule = schedule_kind_from_string(v.get<std::string>());
      else if (key == "p") c.p = v.get<double>();
      else if (key == "q") c.q = v.get<double>();
      else if (key == "tau") c.tau = v.get<double>();
      else if (key == "eps") c.eps = v.get<double>();
      else if (key == "budget") c.budget = v.get<std::size_t>();
      else if (key == "solver_seed") { c.seed = v.get<std::uint64_t>(); solver_seed_set = true; }
      else if (key == "stop_rel") c.stop_rel = v.get<double>();
      else if (key == "out") c.out = v.get<std::string>();
      else if (key == "reference") c.reference = v.get<std::string>();
      else if (key == "f_star") c.f_star = v.is_null() ? std::nullopt : std::optional<double>(v.get<double>());
      else if (key == "x_star") c.x_star_file = v.get<std::string>();
      else if (key == "lambda") c.lambda = v.get<double>();
      else if (key == "T") c.T = v.get<double>();
      else if (key == "tol") c.tol = v.get<double>();
      else if (key == "dt") c.dt = v.get<double>();
      else if (key == "xi") c.xi = v.get<std::string>();
      else if (key == "xi_p") c.xi_p = v.get<double>();
      else if (key == "xi_scale") c.xi_scale = v.get<double>();
      else if (key == "x0_scale") c.x0_scale = v.get<double>();
      else if (key == "log_xi") c.log_xi = v.get<bool>();
      else if (key == "fit_lo") c.fit_lo = v.get<std::size_t>();
      else if (key == "fit_hi") c.fit_hi = v.get<std::size_t>();
      else throw ConfigError("unknown config key '" + key + "'");
    }
  } catch (json::exception const &e) {
    throw ConfigError(std::string("config value has the wrong type: ") + e.what());
  }
  if (!solver_seed_set) {
    c.seed = c.problem.seed;
  }
  return c;
}

namespace {

bool has_full_prox(ProblemFamily f)
{
  return f == ProblemFamily::Quadratic || f == ProblemFamily::SeparableL1 ||
         f == ProblemFamily::Harmonic;
}

double family_mu(ProblemSpec const &s)
{
  switch (s.family) {
  case ProblemFamily::RandomQp:
  case ProblemFamily::Lasso: return 0.0;
  case ProblemFamily::PoissonQp: return 1.0; // positive
  case ProblemFamily::Quadratic: return s.shift;
  case ProblemFamily::SeparableL1:
  case ProblemFamily::Harmonic: return 1.0;
  }
  return 0.0;
}

} // namespace

void validate(ExperimentConfig const &c)
{
  ProblemSpec const &ps = c.problem;
  if (ps.n < 1 || ps.grid < 2 || ps.m < 1) {
    throw ConfigError("problem sizes must satisfy n >= 1, grid >= 2, m >= 1");
  }
  if (ps.family == ProblemFamily::Lasso && (ps.s < 1 || ps.s > ps.n)) {
    throw ConfigError("lasso sparsity must satisfy 1 <= s <= n");
  }
  if (ps.noise < 0.0 || ps.shift < 0.0 || ps.rho < 0.0) {
    throw ConfigError("noise, shift and rho must be nonnegative");
  }
  if (ps.bounds.lower > ps.bounds.upper) {
    throw ConfigError("lower bound exceeds upper bound");
  }
  double const mu = c.mu.value_or(family_mu(ps));
  if (c.schedule == ScheduleKind::ExpDamped && c.algorithm != RunKind::Flow && mu == 0.0) {
    throw ConfigError("the exp schedule requires mu > 0");
  }
  if (c.algorithm == RunKind::Aippa && !has_full_prox(ps.family)) {
    throw ConfigError("aippa needs a closed-form prox of the whole objective; family '" +
                      to_string(ps.family) + "' only has a prox of its nonsmooth part");
  }
  if (c.algorithm == RunKind::Flow && !has_full_prox(ps.family)) {
    throw ConfigError("flow needs a closed-form prox of the whole objective; family '" +
                      to_string(ps.family) + "' is not supported");
  }
  if (c.algorithm == RunKind::Aippa && c.scheme == Scheme::AippaStrong && !(c.alpha > 0.0)) {
    throw ConfigError("the strongly convex aippa scheme needs alpha > 0");
  }
  if (c.algorithm != RunKind::Flow && c.budget == 0) {
    throw ConfigError("budget must be positive");
  }
  if (c.schedule == ScheduleKind::Power && (!(c.p > 0.0) || !(c.q > 0.0))) {
    throw ConfigError("power schedule needs p > 0 and q > 0");
  }
  if (c.tau < 0.0 || c.eps < 0.0) {
    throw ConfigError("tau and eps must be nonnegative");
  }
  if (c.reference != "compute" && c.reference != "supplied") {
    throw ConfigError("reference must be 'compute' or 'supplied'");
  }
  if (c.reference == "supplied" && (!c.f_star || c.x_star_file.empty())) {
    throw ConfigError("a supplied reference needs f_star and an x_star file");
  }
  if (c.algorithm == RunKind::Flow) {
    if (c.xi != "zero" && c.xi != "power" && c.xi != "exp") {
      throw ConfigError("xi must be zero, power or exp");
    }
    if (!(c.T > 0.0) || !(c.dt > 0.0) || !(c.tol > 0.0) || c.lambda < 0.0) {
      throw ConfigError("flow needs T, dt, tol > 0 and lambda >= 0");
    }
  }
  if (c.fit_hi != 0 && c.fit_lo > c.fit_hi) {
    throw ConfigError("fit window has fit_lo > fit_hi");
  }
}

// ---------------------------------------------------------------------------
// Problems

CompositeProblem build_problem(ProblemSpec const &spec)
{
  switch (spec.family) {
  case ProblemFamily::RandomQp: {
    BoxQP qp = spec.data_dir.empty() ? gen_random_qp(spec.n, spec.seed, spec.bounds)
                                     : io::load_box_qp(spec.data_dir);
    return make_box_qp_problem(qp);
  }
  case ProblemFamily::PoissonQp:
    return make_box_qp_problem(spec.data_dir.empty() ? gen_poisson_qp(spec.grid, spec.bounds)
                                                     : io::load_box_qp(spec.data_dir));
  case ProblemFamily::Lasso: {
    LassoData d = spec.data_dir.empty() ? gen_lasso(spec.m, spec.n, spec.s, spec.noise, spec.seed)
                                        : io::load_lasso(spec.data_dir, spec.rho);
    d.rho = spec.rho;
    return make_lasso_problem(d);
  }
  case ProblemFamily::Quadratic: {
    BoxQP qp = spec.data_dir.empty() ? gen_random_qp(spec.n, spec.seed) : io::load_box_qp(spec.data_dir);
    auto A = qp.A;
    double lip = qp.lip;
    if (spec.shift > 0.0) {
      Index const n = qp.A->size();
      if (qp.A->is_sparse()) {
        kernels::SparseRowMajor I(n, n);
        I.setIdentity();
        A = std::make_shared<SymMatrix const>(SymMatrix::sparse(qp.A->sparse_data() + spec.shift * I));
      } else {
        A = std::make_shared<SymMatrix const>(
          SymMatrix::dense(qp.A->dense_data() + spec.shift * Matrix::Identity(n, n)));
      }
      lip += static_cast<double>(n) * spec.shift;
    }
    return make_unconstrained_quadratic(A, qp.b, spec.shift, lip);
  }
  case ProblemFamily::SeparableL1: {
    Index const n = spec.n;
    Vector d(n);
    Vector c(n);
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Index i = 0; i < n; ++i) {
      d[i] = n > 1 ? 1.0 + 3.0 * static_cast<double>(i) / static_cast<double>(n - 1) : 1.0;
      c[i] = normal(rng);
    }
    return make_separable_l1(d, c, spec.rho);
  }
  case ProblemFamily::Harmonic: {
    auto A = std::make_shared<SymMatrix const>(SymMatrix::dense(Matrix::Identity(1, 1)));
    CompositeProblem p = make_unconstrained_quadratic(A, Vector::Zero(1), 1.0, 1.0);
    p.name = "harmonic";
    return p;
  }
  }
  throw ConfigError("unknown problem family");
}

SolverConfig solver_config(ExperimentConfig const &c)
{
  SolverConfig s;
  s.algorithm = c.algorithm == RunKind::Aippa ? Algorithm::Aippa : Algorithm::Aipgm;
  s.scheme = c.algorithm == RunKind::Aippa ? c.scheme : Scheme::Aipgm;
  s.mu = c.mu;
  s.gamma0 = c.gamma0;
  s.alpha = c.alpha;
  switch (c.schedule) {
  case ScheduleKind::Zero: s.schedule = ErrorSchedule::zero(); break;
  case ScheduleKind::Power: s.schedule = ErrorSchedule::power(c.eps, c.p, c.tau, c.q); break;
  case ScheduleKind::ExpDamped: s.schedule = ErrorSchedule::exp_damped(c.eps, c.tau, c.p, 0.0); break;
  case ScheduleKind::Custom: throw ConfigError("custom schedules are not configurable from files");
  }
  s.budget = c.budget;
  s.seed = c.seed;
  s.stop_rel = c.stop_rel;
  return s;
}

FlowConfig flow_config(ExperimentConfig const &c, CompositeProblem const &problem)
{
  FlowConfig f;
  f.lambda = c.lambda;
  f.mu = c.mu;
  f.gamma0 = c.gamma0;
  f.T = c.T;
  f.tol = c.tol;
  f.report_dt = c.dt;
  f.x0 = Vector::Constant(problem.dim, c.x0_scale);
  Vector const dir = Vector::Ones(problem.dim);
  if (c.xi == "power") {
    f.xi = Perturbation::power_decay(c.xi_p, dir, c.xi_scale);
  } else if (c.xi == "exp") {
    f.xi = Perturbation::exp_weighted(c.xi_p, dir, c.xi_scale);
  }
  return f;
}

// ---------------------------------------------------------------------------
// Rate fits and bound comparison

std::pair<std::size_t, std::size_t> default_window(std::vector<double> const &values, double f_star)
{
  double const floor = 1e2 * std::numeric_limits<double>::epsilon() * std::abs(f_star);
  std::size_t last = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] > floor) {
      last = i;
    }
  }
  std::size_t const lo = std::max<std::size_t>(1, (last + 1) / 2);
  return {std::min(lo, last), last};
}

RateFit fit_rate(std::vector<double> const &x, std::vector<double> const &values, std::size_t lo,
                 std::size_t hi, FitModel model)
{
  if (x.size() != values.size()) {
    throw ConfigError("fit_rate: x and values differ in length");
  }
  if (values.empty() || lo > hi || hi >= values.size()) {
    throw ConfigError("fit_rate: empty window");
  }
  RateFit fit;
  fit.k_lo = lo;
  fit.k_hi = hi;
  fit.model = model;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, syy = 0.0;
  std::size_t n = 0;
  for (std::size_t i = lo; i <= hi; ++i) {
    if (!(values[i] > 0.0) || !std::isfinite(values[i])) {
      continue;
    }
    if (model == FitModel::Power && !(x[i] > 0.0)) {
      continue;
    }
    double const u = model == FitModel::Power ? std::log(x[i]) : x[i];
    double const v = std::log(values[i]);
    sx += u;
    sy += v;
    sxx += u * u;
    sxy += u * v;
    syy += v * v;
    ++n;
  }
  double const nn = static_cast<double>(n);
  double const dxx = sxx - sx * sx / nn;
  if (n < 2 || !(dxx > 0.0)) {
    throw ConfigError("fit_rate: degenerate window (fewer than two distinct positive points)");
  }
  double const dxy = sxy - sx * sy / nn;
  double const dyy = syy - sy * sy / nn;
  fit.points = n;
  fit.slope = dxy / dxx;
  fit.intercept = (sy - fit.slope * sx) / nn;
  double const ss_res = std::max(0.0, dyy - fit.slope * dxy);
  fit.r_squared = dyy > 0.0 ? std::clamp(1.0 - ss_res / dyy, 0.0, 1.0) : 1.0;
  return fit;
}

RateFit fit_rate(std::vector<double> const &x, std::vector<double> const &values, FitModel model,
                 double f_star)
{
  auto const [lo, hi] = default_window(values, f_star);
  RateFit fit = fit_rate(x, values, lo, hi, model);
  fit.default_window = true;
  return fit;
}

BoundComparison compare_bound(std::vector<double> const &values, std::vector<double> const &bounds,
                              double rel_tol)
{
  if (values.size() != bounds.size()) {
    throw std::invalid_argument("compare_bound: trace and bound lengths differ");
  }
  BoundComparison out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    ++out.checked;
    double const ratio = bounds[i] > 0.0 ? values[i] / bounds[i] : (values[i] > 0.0 ? kInf : 0.0);
    out.max_ratio = std::max(out.max_ratio, ratio);
    if (values[i] > bounds[i] * (1.0 + rel_tol) && !out.first_violation) {
      out.first_violation = i;
    }
  }
  return out;
}

CsvColumn read_csv_column(std::filesystem::path const &file, std::string const &column)
{
  std::ifstream is(file);
  if (!is) {
    throw ConfigError("cannot open " + file.string());
  }
  std::string line;
  if (!std::getline(is, line)) {
    throw ConfigError(file.string() + " is empty");
  }
  std::vector<std::string> header;
  {
    std::istringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      header.push_back(cell);
    }
  }
  auto const it = std::find(header.begin(), header.end(), column);
  if (it == header.end()) {
    throw ConfigError("column '" + column + "' not in " + file.string());
  }
  auto const col = static_cast<std::size_t>(it - header.begin());
  CsvColumn out;
  while (std::getline(is, line)) {
    if (line.empty()) {
      continue;
    }
    std::istringstream ss(line);
    std::string cell;
    std::size_t i = 0;
    while (std::getline(ss, cell, ',')) {
      if (i == 0) out.x.push_back(std::stod(cell));
      if (i == col) out.values.push_back(std::stod(cell));
      ++i;
    }
    if (i <= col) {
      throw ConfigError("short row in " + file.string());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Experiments

namespace {

json fit_json(RateFit const &f, std::string const &column)
{
  return json{{"column", column},
              {"model", to_string(f.model)},
              {"window", {f.k_lo, f.k_hi}},
              {"window_policy", f.default_window ? "default" : "user"},
              {"slope", f.slope},
              {"intercept", f.intercept},
              {"r_squared", f.r_squared},
              {"points", f.points}};
}

json inequality_json(std::string const &name, InequalityReport const &r)
{
  json j{{"name", name},
         {"checked", r.checked},
         {"violations", r.violations},
         {"worst_excess", r.worst_excess},
         {"pass", r.ok()}};
  j["first_violation"] = r.first_violation ? json(*r.first_violation) : json(nullptr);
  return j;
}

json comparison_json(std::string const &name, BoundComparison const &b)
{
  json j{{"name", name}, {"checked", b.checked}, {"max_ratio", b.max_ratio}, {"pass", b.ok()}};
  j["first_violation"] = b.first_violation ? json(*b.first_violation) : json(nullptr);
  return j;
}

void install_reference(CompositeProblem &problem, ExperimentConfig const &cfg)
{
  if (cfg.reference == "supplied") {
    std::ifstream is(cfg.x_star_file);
    if (!is) {
      throw ConfigError("cannot open " + cfg.x_star_file);
    }
    Vector x = io::read_vector(is);
    if (x.size() != problem.dim) {
      throw ConfigError("supplied x_star has the wrong dimension");
    }
    double const f = problem.value(x);
    if (std::abs(f - *cfg.f_star) > 1e-10 * (1.0 + std::abs(f))) {
      throw ConfigError("supplied f_star does not match f(x_star)");
    }
    problem.set_reference(std::move(x));
    return;
  }
  if (!problem.reference) {
    compute_reference(problem);
  }
}

void add_fits(json &summary, std::vector<double> const &x, std::vector<double> const &gap,
              ExperimentConfig const &cfg, double f_star)
{
  summary["fits"] = json::array();
  for (FitModel m : {FitModel::Power, FitModel::Linear}) {
    try {
      RateFit const f = cfg.fit_hi > 0 ? fit_rate(x, gap, cfg.fit_lo, std::min(cfg.fit_hi, gap.size() - 1), m)
                                       : fit_rate(x, gap, m, f_star);
      summary["fits"].push_back(fit_json(f, "obj_gap"));
    } catch (ConfigError const &e) {
      summary["fits"].push_back(json{{"column", "obj_gap"}, {"model", to_string(m)}, {"error", e.what()}});
    }
  }
}

bool exact_schedule(ExperimentConfig const &c)
{
  return c.schedule == ScheduleKind::Zero || (c.eps == 0.0 && c.tau == 0.0);
}

void solver_bounds(ExperimentResult &res, RunResult const &run, ExperimentConfig const &cfg,
                   double gamma0)
{
  json &checks = res.summary["bound_checks"];
  checks.push_back(inequality_json("one_step_lyapunov", run.one_step));
  checks.push_back(inequality_json("cumulative_lyapunov", run.cumulative));
  res.bounds_ok = run.one_step.ok() && run.cumulative.ok();

  BoundConfig b;
  b.L0 = run.L0;
  b.lip = run.lip;
  b.mu = run.mu;
  b.alpha = cfg.alpha;
  b.p = cfg.p;
  b.q = cfg.q;
  b.gamma0 = gamma0;
  bool strong = false;
  if (run.algorithm == Algorithm::Aipgm) {
    strong = run.mu > 0.0;
    b.theorem = strong ? Theorem::AipgmStrong : Theorem::AipgmConvex;
  } else {
    strong = run.scheme == Scheme::AippaStrong;
    b.theorem = strong ? Theorem::AippaStrong : Theorem::AippaConvex;
  }
  // The strongly convex envelopes assume gamma_0 = mu.
  if (strong && std::abs(gamma0 - run.mu) > 1e-12 * run.mu) {
    return;
  }
  std::vector<double> vals;
  std::vector<double> head;
  for (auto const &r : run.rows) {
    vals.push_back(strong ? r.lyap : r.obj_gap);
    head.push_back(first_term(r.k, b));
  }
  std::string const name = to_string(b.theorem);
  if (exact_schedule(cfg)) {
    BoundComparison const cmp = compare_bound(vals, head, 1e-9);
    checks.push_back(comparison_json(name + "_first_term", cmp));
    res.bounds_ok = res.bounds_ok && cmp.ok();
    return;
  }
  if (cfg.schedule != ScheduleKind::Power) {
    return;
  }
  // Fitted constant of the error term: sup (value - first term) / shape(k).
  double C = 0.0;
  for (std::size_t i = 0; i < vals.size(); ++i) {
    std::size_t const k = run.rows[i].k;
    double const k1 = static_cast<double>(k) + 1.0;
    double shape = 0.0;
    switch (b.theorem) {
    case Theorem::AippaConvex: shape = T_k(k, b.p); break;
    case Theorem::AippaStrong: shape = std::pow(k1, -2.0 * b.p); break;
    case Theorem::AipgmConvex: shape = b.lip * (T_k(k, b.p) + T_k(k, b.q)); break;
    case Theorem::AipgmStrong: {
      double const r = b.lip / b.mu;
      shape = b.lip * r * r * (std::pow(k1, -2.0 * b.p) + std::pow(k1, -2.0 * b.q));
      break;
    }
    }
    C = std::max(C, (vals[i] - head[i]) / shape);
  }
  checks.push_back(json{{"name", name + "_error_constant"}, {"fitted_C", C}, {"pass", std::isfinite(C)}});
  res.bounds_ok = res.bounds_ok && std::isfinite(C);
}

void write_outputs(ExperimentConfig const &cfg, ExperimentResult const &res)
{
  if (cfg.out.empty()) {
    return;
  }
  std::filesystem::path const dir(cfg.out);
  std::filesystem::create_directories(dir);
  std::ofstream trace(dir / "trace.csv");
  if (!trace) {
    throw ConfigError("cannot write " + (dir / "trace.csv").string());
  }
  if (cfg.algorithm == RunKind::Flow) {
    write_flow_csv(trace, res.flow_rows, cfg.log_xi);
  } else {
    write_trace_csv(trace, res.rows);
  }
  std::ofstream summary(dir / "summary.json");
  summary << res.summary.dump(2) << '\n';
}

} // namespace

ExperimentResult run_experiment(ExperimentConfig const &cfg)
{
  validate(cfg);
  CompositeProblem problem = build_problem(cfg.problem);
  install_reference(problem, cfg);
  double const f_star = problem.reference->f_star;

  ExperimentResult res;
  json &s = res.summary;
  s["config"] = to_json(cfg);
  s["f_star"] = f_star;
  s["problem"] = json{{"name", problem.name}, {"dim", problem.dim}, {"mu", problem.h.mu}, {"lip", problem.h.lip}};
  s["bound_checks"] = json::array();

  if (cfg.algorithm == RunKind::Flow) {
    FlowConfig const fc = resolve_flow_config(problem, flow_config(cfg, problem));
    FlowTrace const trace = integrate(problem, fc);
    res.flow_rows = flow_rows(trace, problem);
    std::vector<double> t;
    std::vector<double> gap;
    for (auto const &r : res.flow_rows) {
      t.push_back(r.t);
      gap.push_back(r.obj_gap);
    }
    add_fits(s, t, gap, cfg, f_star);
    DecayTheorem const th = trace.mu > 0.0 ? DecayTheorem::MuPos : DecayTheorem::Mu0;
    DecayReport const dec = check_decay_theorem(trace, problem, th);
    json dj{{"name", trace.mu > 0.0 ? "flow_decay_mu_pos" : "flow_decay_mu0"},
            {"L0", dec.L0},
            {"max_ratio", dec.max_ratio},
            {"raw_max_ratio", dec.raw_max_ratio},
            {"pass", dec.ok}};
    if (trace.xi.kind == Perturbation::Kind::PowerDecay) {
      dj["fitted_C"] = dec.fitted_C;
    }
    s["bound_checks"].push_back(dj);
    FlowLyapunovReport const ly = check_flow_lyapunov(trace, problem);
    s["bound_checks"].push_back(json{{"name", "flow_lyapunov_monotone"},
                                     {"max_increase", ly.max_monotone_increase},
                                     {"pass", ly.monotone_ok}});
    s["bound_checks"].push_back(json{{"name", "flow_lyapunov_bound"},
                                     {"max_ratio", ly.max_bound_ratio},
                                     {"pass", ly.bound_ok}});
    double const r1 = energy_residual(trace, problem, 1);
    double const r2 = energy_residual(trace, problem, 2);
    s["energy_residual"] = json{{"max", r1}, {"max_double_step", r2},
                                {"observed_order", r1 > 0.0 ? std::log2(r2 / r1) : 0.0}};
    s["gamma0"] = trace.gamma0;
    s["mu"] = trace.mu;
    res.bounds_ok = dec.ok && ly.monotone_ok && ly.bound_ok;
  } else {
    SolverConfig const sc = resolve_config(problem, solver_config(cfg));
    RunResult const result = run(problem, sc);
    res.rows = result.rows;
    std::vector<double> k;
    std::vector<double> gap;
    for (auto const &r : result.rows) {
      k.push_back(static_cast<double>(r.k));
      gap.push_back(r.obj_gap);
    }
    add_fits(s, k, gap, cfg, f_star);
    s["L0"] = result.L0;
    s["iterations"] = result.rows.back().k;
    s["stop_reason"] = result.stop_reason;
    s["gamma0"] = *sc.gamma0;
    s["mu"] = result.mu;
    if (result.algorithm == Algorithm::Aipgm && result.mu > 0.0) {
      s["alpha_mu"] = alpha_mu(result.mu, result.lip);
    }
    solver_bounds(res, result, cfg, *sc.gamma0);
  }
  s["pass"] = res.bounds_ok;
  write_outputs(cfg, res);
  return res;
}

std::vector<ExperimentResult> run_batch(std::vector<ExperimentConfig> const &cfgs)
{
  for (std::size_t i = 0; i < cfgs.size(); ++i) {
    for (std::size_t j = i + 1; j < cfgs.size(); ++j) {
      if (!cfgs[i].out.empty() && cfgs[i].out == cfgs[j].out) {
        throw ConfigError("batch entries " + std::to_string(i) + " and " + std::to_string(j) +
                          " share the output directory " + cfgs[i].out);
      }
    }
  }
  std::vector<std::future<ExperimentResult>> jobs;
  jobs.reserve(cfgs.size());
  for (auto const &c : cfgs) {
    jobs.push_back(std::async(std::launch::async, [c] { return run_experiment(c); }));
  }
  std::vector<ExperimentResult> out;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    try {
      out.push_back(jobs[i].get());
    } catch (std::exception const &e) {
      ExperimentResult r;
      r.summary = json{{"config", to_json(cfgs[i])}, {"error", e.what()}, {"pass", false}};
      r.bounds_ok = false;
      out.push_back(std::move(r));
    }
  }
  return out;
}

} // namespace iaprox
