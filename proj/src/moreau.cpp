#include "iaprox/moreau.hpp"

#include <cmath>
#include <sstream>

namespace iaprox {

namespace {

// f(w) + |w-x|^2/(2 lambda) - f_lambda(x), evaluated from differences so that
// errors far below |f| stay visible.
double type1_excess(NonsmoothOracle const &f, double lambda, Vector const &x, Vector const &w,
                    Vector const &p)
{
  double const df = f.difference(w, p);
  if (std::isinf(df)) {
    return df;
  }
  Vector const d = w - p;
  return df + d.dot(d + 2.0 * (p - x)) / (2.0 * lambda);
}

std::string describe(CertCheck const &c)
{
  std::ostringstream os;
  os.precision(6);
  os << (c.ok ? "ok" : "violated") << ": lhs=" << c.lhs << " rhs=" << c.rhs << " slack=" << c.slack;
  return os.str();
}

void check_lambda(double lambda)
{
  if (!(lambda > 0.0)) {
    throw std::invalid_argument("lambda must be positive");
  }
}

CertCheck certify_type1_at(Vector const &w, Vector const &x, double lambda, double epsilon,
                           NonsmoothOracle const &f, Vector const &p)
{
  EnvelopeValue const env = envelope_at(f, lambda, x, p);
  CertCheck c;
  c.lhs = type1_excess(f, lambda, x, w, p);
  c.rhs = epsilon * epsilon / (2.0 * lambda);
  c.slack = certification_slack(env.value);
  c.ok = c.lhs <= c.rhs + c.slack;
  c.message = describe(c);
  return c;
}

} // namespace

std::string to_string(ProxKind k)
{
  switch (k) {
  case ProxKind::Type1: return "type1";
  case ProxKind::Type2: return "type2";
  case ProxKind::Type3: return "type3";
  }
  return "unknown";
}

double certification_slack(double envelope_value) { return 1e-10 * (1.0 + std::abs(envelope_value)); }

EnvelopeValue envelope_at(NonsmoothOracle const &f, double lambda, Vector const &x, Vector prox_point)
{
  check_lambda(lambda);
  EnvelopeValue out;
  out.lambda = lambda;
  out.grad = (x - prox_point) / lambda;
  out.value = f.eval(prox_point) + (x - prox_point).squaredNorm() / (2.0 * lambda);
  out.prox_point = std::move(prox_point);
  return out;
}

EnvelopeValue envelope(NonsmoothOracle const &f, double lambda, Vector const &x)
{
  check_lambda(lambda);
  if (!f.has_prox() && !f.prox_factory) {
    throw std::invalid_argument("envelope: oracle has no proximal map");
  }
  return envelope_at(f, lambda, x, f.prox ? f.prox(lambda, x) : f.prox_for(lambda)(x));
}

EnvelopeValue envelope(CompositeProblem const &problem, double lambda, Vector const &x)
{
  return envelope(problem.whole(), lambda, x);
}

Vector random_unit(Index n, Rng &rng)
{
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector d(n);
  double nrm = 0.0;
  do {
    for (Index i = 0; i < n; ++i) {
      d[i] = normal(rng);
    }
    nrm = d.norm();
  } while (nrm == 0.0);
  return d / nrm;
}

Type1Result make_type1(Vector const &exact_prox, double epsilon, Vector const &direction,
                       NonsmoothOracle const &f, double lambda, Vector const &x)
{
  check_lambda(lambda);
  if (epsilon < 0.0) {
    throw std::invalid_argument("make_type1: epsilon must be nonnegative");
  }
  Type1Result out;
  out.cert.kind = ProxKind::Type1;
  out.cert.epsilon = epsilon;
  out.cert.base_point = x;
  out.cert.lambda = lambda;
  out.cert.witness = exact_prox;
  if (epsilon == 0.0) {
    out.w = exact_prox;
    out.cert.candidate = out.w;
    return out;
  }
  double const budget = epsilon * epsilon / (2.0 * lambda);
  auto admissible = [&](double t) {
    Vector const w = exact_prox + t * direction;
    return type1_excess(f, lambda, x, w, exact_prox) <= budget;
  };
  double lo = 0.0;
  double hi = epsilon;
  if (admissible(hi)) {
    lo = hi;
  } else {
    for (int i = 0; i < 40; ++i) {
      double const mid = 0.5 * (lo + hi);
      if (admissible(mid)) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
  }
  out.t = lo;
  out.w = exact_prox + lo * direction;
  out.cert.candidate = out.w;
  return out;
}

Type3Result make_type3(NonsmoothOracle const &f, double lambda, Vector const &x, double epsilon,
                       Rng &rng)
{
  check_lambda(lambda);
  if (epsilon < 0.0) {
    throw std::invalid_argument("make_type3: epsilon must be nonnegative");
  }
  Type3Result out;
  out.e = Vector::Zero(x.size());
  if (epsilon > 0.0) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Vector const d = random_unit(x.size(), rng);
    double const r = epsilon * std::pow(unif(rng), 1.0 / static_cast<double>(x.size()));
    out.e = r * d;
  }
  out.w = f.prox(lambda, x + out.e);
  out.cert.kind = ProxKind::Type3;
  out.cert.epsilon = epsilon;
  out.cert.candidate = out.w;
  out.cert.base_point = x;
  out.cert.lambda = lambda;
  out.cert.witness = out.e;
  return out;
}

CertCheck certify_type1(Vector const &w, Vector const &x, double lambda, double epsilon,
                        NonsmoothOracle const &f)
{
  check_lambda(lambda);
  return certify_type1_at(w, x, lambda, epsilon, f, f.prox(lambda, x));
}

CertCheck certify_type2(Vector const &w, Vector const &x, double lambda, double epsilon,
                        NonsmoothOracle const &f)
{
  check_lambda(lambda);
  CertCheck c;
  if (!f.has_conjugate()) {
    c.message = "conjugate unavailable";
    return c;
  }
  EnvelopeValue const env = envelope(f, lambda, x);
  Vector const p = (x - w) / lambda;
  double const fw = f.eval(w);
  double const fc = f.conjugate(p);
  c.lhs = std::isinf(fw) || std::isinf(fc) ? kInf : fw + fc - p.dot(w);
  c.rhs = epsilon * epsilon / (2.0 * lambda);
  c.slack = certification_slack(env.value);
  c.ok = c.lhs <= c.rhs + c.slack;
  c.message = describe(c);
  return c;
}

CertCheck certify_type3(ProxCertificate const &cert, NonsmoothOracle const &f)
{
  CertCheck c;
  c.rhs = cert.epsilon;
  if (cert.witness) {
    Vector const &e = *cert.witness;
    Vector const w = f.prox(cert.lambda, cert.base_point + e);
    double const mismatch = (w - cert.candidate).norm();
    c.lhs = e.norm();
    c.slack = 1e-12 * (1.0 + cert.epsilon);
    c.ok = c.lhs <= c.rhs + c.slack && mismatch <= 1e-12 * (1.0 + cert.candidate.norm());
    c.message = describe(c);
    return c;
  }
  auto const dist = prox_residual_distance(cert.candidate, cert.base_point, cert.lambda, f);
  if (!dist) {
    c.message = "subdifferential unavailable";
    return c;
  }
  c.lhs = *dist * cert.lambda;
  c.slack = 1e-12 * (1.0 + cert.epsilon);
  c.ok = c.lhs <= c.rhs + c.slack;
  c.message = describe(c);
  return c;
}

CertCheck certify(ProxCertificate const &cert, NonsmoothOracle const &f)
{
  switch (cert.kind) {
  case ProxKind::Type1:
    if (cert.witness) {
      return certify_type1_at(cert.candidate, cert.base_point, cert.lambda, cert.epsilon, f,
                              *cert.witness);
    }
    return certify_type1(cert.candidate, cert.base_point, cert.lambda, cert.epsilon, f);
  case ProxKind::Type2:
    return certify_type2(cert.candidate, cert.base_point, cert.lambda, cert.epsilon, f);
  case ProxKind::Type3:
    return certify_type3(cert, f);
  }
  return {};
}

std::optional<double> prox_residual_distance(Vector const &w, Vector const &x, double lambda,
                                             NonsmoothOracle const &f)
{
  check_lambda(lambda);
  if (!f.subdiff_dist) {
    return std::nullopt;
  }
  return f.subdiff_dist(w, (w - x) / lambda);
}

PerturbedGradient perturb_gradient(Vector const &grad, double bound, Rng &rng)
{
  if (bound < 0.0) {
    throw std::invalid_argument("perturb_gradient: bound must be nonnegative");
  }
  PerturbedGradient out;
  if (bound == 0.0) {
    out.e = Vector::Zero(grad.size());
    out.ghat = grad;
    return out;
  }
  out.e = bound * random_unit(grad.size(), rng);
  out.ghat = grad + out.e;
  return out;
}

GradMapResult gradient_mapping(CompositeProblem const &problem, double lambda, Vector const &x,
                               double tau, double epsilon, Rng &rng)
{
  check_lambda(lambda);
  if (tau < 0.0 || epsilon < 0.0) {
    throw std::invalid_argument("gradient_mapping: tau and epsilon must be nonnegative");
  }
  GradMapResult out;
  out.tau = tau;
  out.epsilon = epsilon;
  Vector const grad = problem.h.grad(x);
  PerturbedGradient const pg = perturb_gradient(grad, tau / lambda, rng);
  out.e = -lambda * pg.e;
  Vector const z = x - lambda * pg.ghat;
  out.exact_forward = problem.g.prox(lambda, z);
  if (epsilon > 0.0) {
    Vector const d = random_unit(x.size(), rng);
    out.forward_point = make_type1(out.exact_forward, epsilon, d, problem.g, lambda, z).w;
  } else {
    out.forward_point = out.exact_forward;
  }
  out.sigma = out.forward_point - out.exact_forward;
  out.mapping = (x - out.forward_point) / lambda;
  return out;
}

} // namespace iaprox
