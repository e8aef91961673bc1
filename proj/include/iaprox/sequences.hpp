#pragma once

// Scalar parameter recursions shared by the discrete schemes:
//   Q a_k^2 = g_k (1 + a_k),  g_{k+1} = (g_k + mu a_k) / (1 + a_k),
//   b_{k+1} = b_k / (1 + a_k),  l_k = a_k^2 / (g_k a_k + g_k + mu a_k),
// plus numeric checks of the appendix estimates.

#include "iaprox/types.hpp"

#include <string>
#include <vector>

namespace iaprox {

enum class Scheme
{
  AippaConvex, // Q = 1, step from the quadratic
  AippaStrong, // constant alpha, gamma_0 = mu
  Aipgm,       // Q = 2L, lambda = 1/L
};

std::string to_string(Scheme s);
Scheme scheme_from_string(std::string const &s);

/// gamma(t) = mu + (gamma0 - mu) e^{-t}.
double gamma_continuous(double t, double mu, double gamma0);

/// Positive root of Q a^2 = gamma (1 + a).
double solve_alpha(double gamma, double Q);

/// Positive root of 2L a^2 = mu (1 + a).
double alpha_mu(double mu, double L);

/// Value-semantic record of the parameter sequences. gamma and beta hold
/// entries 0..k; alpha and lambda hold entries 0..k-1 (the steps taken so far).
struct ParamTrack
{
  Scheme scheme = Scheme::AippaConvex;
  double mu = 0.0;
  double lip = 1.0;      // only used by Aipgm
  double alpha_const = 0.0; // only used by AippaStrong
  std::vector<double> gamma;
  std::vector<double> alpha;
  std::vector<double> beta;
  std::vector<double> lambda;

  std::size_t k() const { return alpha.size(); }
  double Q() const;
  /// alpha_k and lambda_k for the next step, without committing it.
  double next_alpha() const;
  double next_lambda(double a) const;
  /// Appends one step.
  void step();
};

ParamTrack make_track(Scheme scheme, double mu, double gamma0, double lip = 1.0,
                      double alpha_const = 0.0);
ParamTrack advance(ParamTrack track);

struct BoundReport
{
  std::size_t checked = 0;
  std::size_t violations = 0;
  double max_violation = 0.0; // largest relative excess over a bound
  std::string first_failure;

  bool ok() const { return violations == 0; }
};

/// Checks the gamma/alpha brackets, the gamma recursion identity, and, when
/// mu = 0, the two-sided product bound on beta_k and the alpha_k bracket.
BoundReport check_sequence_bounds(ParamTrack const &track, double rel_tol = 1e-12);

/// Explicit constant K with  int_0^t A^s/(s+1)^p ds <= K A^t/(t+1)^p  for all t > 0,
/// and  sum_{i=1}^k A^i/(i+1)^p <= K A^{k+1}/(k+1)^p.
double integral_estimate_constant(double A, double p);

/// int_0^t A^s/(s+1)^p ds by adaptive Gauss-Kronrod (relative tol 1e-9).
double integral_estimate_value(double A, double p, double t);

struct IntegralReport
{
  double K = 0.0;
  double max_ratio = 0.0;          // sup over grid of integral / (A^t/(t+1)^p)
  double max_discrete_ratio = 0.0; // sup over k of sum / (A^{k+1}/(k+1)^p)
  double last_ratio = 0.0;
  bool ok = false;
};

IntegralReport check_integral_estimate(double A, double p, std::vector<double> const &t_grid,
                                       int discrete_terms = 200);

} // namespace iaprox
