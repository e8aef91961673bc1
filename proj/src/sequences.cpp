#include "iaprox/sequences.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace iaprox {

std::string to_string(Scheme s)
{
  switch (s) {
  case Scheme::AippaConvex: return "aippa_convex";
  case Scheme::AippaStrong: return "aippa_strong";
  case Scheme::Aipgm: return "aipgm";
  }
  return "unknown";
}

Scheme scheme_from_string(std::string const &s)
{
  if (s == "aippa_convex" || s == "convex") return Scheme::AippaConvex;
  if (s == "aippa_strong" || s == "strong") return Scheme::AippaStrong;
  if (s == "aipgm") return Scheme::Aipgm;
  throw ConfigError("unknown scheme '" + s + "'");
}

double gamma_continuous(double t, double mu, double gamma0)
{
  if (!(gamma0 > 0.0)) {
    throw std::invalid_argument("gamma_continuous: gamma0 must be positive");
  }
  return mu + (gamma0 - mu) * std::exp(-t);
}

double solve_alpha(double gamma, double Q)
{
  if (!(Q > 0.0) || gamma < 0.0) {
    throw std::invalid_argument("solve_alpha: need gamma >= 0 and Q > 0");
  }
  // Rationalized form 2 gamma / (sqrt(gamma^2 + 4 Q gamma) - gamma) loses
  // accuracy for large gamma; the direct form is stable since both terms are
  // nonnegative.
  return (gamma + std::sqrt(gamma * gamma + 4.0 * Q * gamma)) / (2.0 * Q);
}

double alpha_mu(double mu, double L)
{
  if (!(L > 0.0) || mu < 0.0 || mu > L * (1.0 + 1e-12)) {
    throw std::invalid_argument("alpha_mu: need 0 <= mu <= L and L > 0");
  }
  return (mu + std::sqrt(mu * mu + 8.0 * mu * L)) / (4.0 * L);
}

double ParamTrack::Q() const
{
  switch (scheme) {
  case Scheme::AippaConvex: return 1.0;
  case Scheme::AippaStrong: return 1.0;
  case Scheme::Aipgm: return 2.0 * lip;
  }
  return 1.0;
}

double ParamTrack::next_alpha() const
{
  if (scheme == Scheme::AippaStrong) {
    return alpha_const;
  }
  return solve_alpha(gamma.back(), Q());
}

double ParamTrack::next_lambda(double a) const
{
  if (scheme == Scheme::Aipgm) {
    return 1.0 / lip;
  }
  double const g = gamma.back();
  double const eta = g * a + g + mu * a;
  return a * a / eta;
}

void ParamTrack::step()
{
  double const a = next_alpha();
  double const g = gamma.back();
  lambda.push_back(next_lambda(a));
  alpha.push_back(a);
  gamma.push_back((g + mu * a) / (1.0 + a));
  beta.push_back(beta.back() / (1.0 + a));
}

ParamTrack make_track(Scheme scheme, double mu, double gamma0, double lip, double alpha_const)
{
  if (!(gamma0 > 0.0)) {
    throw ConfigError("gamma0 must be positive");
  }
  if (mu < 0.0) {
    throw ConfigError("mu must be nonnegative");
  }
  if (scheme == Scheme::Aipgm && !(lip > 0.0)) {
    throw ConfigError("aipgm needs L > 0");
  }
  if (scheme == Scheme::AippaStrong) {
    if (!(mu > 0.0)) {
      throw ConfigError("aippa_strong needs mu > 0");
    }
    if (!(alpha_const > 0.0)) {
      throw ConfigError("aippa_strong needs a positive constant alpha");
    }
  }
  ParamTrack t;
  t.scheme = scheme;
  t.mu = mu;
  t.lip = lip;
  t.alpha_const = alpha_const;
  t.gamma.push_back(gamma0);
  t.beta.push_back(1.0);
  return t;
}

ParamTrack advance(ParamTrack track)
{
  track.step();
  return track;
}

namespace {

struct Checker
{
  BoundReport &rep;
  double tol;

  // Records lhs <= rhs with relative tolerance.
  void le(double lhs, double rhs, std::size_t k, char const *what)
  {
    ++rep.checked;
    double const excess = (lhs - rhs) / std::max(std::abs(rhs), 1e-300);
    if (!(lhs <= rhs) && excess > tol) {
      ++rep.violations;
      rep.max_violation = std::max(rep.max_violation, excess);
      if (rep.first_failure.empty()) {
        std::ostringstream os;
        os.precision(17);
        os << what << " at k=" << k << ": " << lhs << " > " << rhs;
        rep.first_failure = os.str();
      }
    }
  }

  void eq(double lhs, double rhs, std::size_t k, char const *what)
  {
    le(lhs, rhs, k, what);
    le(rhs, lhs, k, what);
  }
};

} // namespace

BoundReport check_sequence_bounds(ParamTrack const &track, double rel_tol)
{
  BoundReport rep;
  Checker c{rep, rel_tol};
  double const g0 = track.gamma.front();
  double const mu = track.mu;
  double const Q = track.Q();
  double const glo = std::min(g0, mu);
  double const ghi = std::max(g0, mu);
  bool const strong = track.scheme == Scheme::AippaStrong;
  double const a0 = track.alpha.empty() ? 0.0 : track.alpha.front();
  double const aq = strong ? track.alpha_const : (mu > 0.0 ? solve_alpha(mu, Q) : 0.0);
  double const alo = std::min(a0, aq);
  double const ahi = std::max(a0, aq);

  for (std::size_t k = 0; k < track.gamma.size(); ++k) {
    double const g = track.gamma[k];
    c.le(glo, g, k, "gamma lower bracket");
    c.le(g, ghi, k, "gamma upper bracket");
    if (k < track.alpha.size()) {
      double const a = track.alpha[k];
      c.eq(track.gamma[k + 1] * (1.0 + a), g + mu * a, k, "gamma recursion");
      c.eq(track.beta[k + 1] * (1.0 + a), track.beta[k], k, "beta recursion");
      if (!strong) {
        c.eq(Q * a * a, g * (1.0 + a), k, "alpha quadratic");
        c.le(alo, a, k, "alpha lower bracket");
        c.le(a, ahi, k, "alpha upper bracket");
        if (mu == 0.0) {
          double const kk = static_cast<double>(k);
          double const sg = std::sqrt(g0);
          double const sq = std::sqrt(Q);
          c.le(sg / (sg * kk + sq), a, k, "alpha lower rate");
          c.le(a, 2.0 * sq * a0 / (sg * kk + 2.0 * sq), k, "alpha upper rate");
        }
      }
    }
    if (mu == 0.0 && !strong) {
      c.eq(track.beta[k], g / g0, k, "beta = gamma/gamma0");
      if (k >= 1) {
        double const kk = static_cast<double>(k);
        double const sg = std::sqrt(g0);
        double const sq = std::sqrt(Q);
        c.le(Q / ((sg * kk + sq) * (sg * kk + sq)), track.beta[k], k, "beta lower bound");
        c.le(track.beta[k], 4.0 * Q / ((sg * kk + 2.0 * sq) * (sg * kk + 2.0 * sq)), k,
             "beta upper bound");
      }
    }
  }
  return rep;
}

double integral_estimate_constant(double A, double p)
{
  if (!(A > 1.0) || p < 0.0) {
    throw std::invalid_argument("integral estimate: need A > 1 and p >= 0");
  }
  double const lnA = std::log(A);
  if (p == 0.0) {
    return 1.0 / lnA;
  }
  // Series in n of (ln A)^n/n! int_0^t (s+1)^{n-p} ds. Terms with n + 1 > p
  // sum to at most (n+1)/(n+1-p) A^t/(t+1)^p / ln A.
  double const ip = std::floor(p);
  bool const integer = ip == p;
  double K = integer ? (1.0 + p) / lnA : (1.0 + ip) / ((1.0 + ip - p) * lnA);
  // Terms with n + 1 < p are positive and bounded by (ln A)^n/(n! (p-n-1));
  // scale by the minimum of A^u/u^p over u >= 1.
  double head = 0.0;
  double term = 1.0; // (ln A)^n/n!
  for (int n = 0; n + 1 < p; ++n) {
    head += term / (p - n - 1.0);
    term *= lnA / (n + 1.0);
  }
  if (head > 0.0) {
    double const u = std::max(1.0, p / lnA);
    double const env_min = std::exp(u * lnA - p * std::log(u));
    K += head / env_min;
  }
  if (integer) {
    // n = p - 1 gives (ln A)^{p-1}/(p-1)! ln(t+1), with
    // ln u <= u/e <= (p+1)^{p+1}/(e (e ln A)^{p+1}) A^u/u^p.
    K += std::pow(lnA, p - 1.0) / std::tgamma(p) * std::pow(p + 1.0, p + 1.0) /
         (std::numbers::e * std::pow(std::numbers::e * lnA, p + 1.0));
  }
  return K;
}

double integral_estimate_value(double A, double p, double t)
{
  if (t <= 0.0) {
    return 0.0;
  }
  double const lnA = std::log(A);
  auto f = [lnA, p](double s) { return std::exp(s * lnA) / std::pow(s + 1.0, p); };
  // Split into unit pieces so each panel sees a nearly polynomial integrand.
  double total = 0.0;
  double a = 0.0;
  while (a < t) {
    double const b = std::min(t, a + 1.0);
    double err = 0.0;
    double const v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 15, 1e-12, &err);
    if (!std::isfinite(v) || err > 1e-9 * (total + std::abs(v)) + 1e-300) {
      throw NumericalError("integral estimate quadrature did not converge", err);
    }
    total += v;
    a = b;
  }
  return total;
}

IntegralReport check_integral_estimate(double A, double p, std::vector<double> const &t_grid,
                                       int discrete_terms)
{
  IntegralReport rep;
  rep.K = integral_estimate_constant(A, p);
  double const lnA = std::log(A);
  std::vector<double> ts = t_grid;
  std::sort(ts.begin(), ts.end());
  auto f = [lnA, p](double s) { return std::exp(s * lnA) / std::pow(s + 1.0, p); };
  for (double t : ts) {
    if (t <= 0.0) {
      continue;
    }
    double const ratio = integral_estimate_value(A, p, t) / f(t);
    rep.max_ratio = std::max(rep.max_ratio, ratio);
    rep.last_ratio = ratio;
  }
  double sum = 0.0;
  for (int i = 1; i <= discrete_terms; ++i) {
    double const di = static_cast<double>(i);
    sum += std::exp(di * lnA) / std::pow(di + 1.0, p);
    double const env = std::exp((di + 1.0) * lnA) / std::pow(di + 1.0, p);
    rep.max_discrete_ratio = std::max(rep.max_discrete_ratio, sum / env);
  }
  // Quadrature is accurate to a relative 1e-9.
  rep.ok = rep.max_ratio <= rep.K * (1.0 + 1e-8) && rep.max_discrete_ratio <= rep.K * (1.0 + 1e-8);
  return rep;
}

} // namespace iaprox
