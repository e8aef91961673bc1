#pragma once

// Moreau-Yosida envelope, inexact proximal points of type 1/2/3 with
// certificates, and the perturbed forward-backward (gradient) mapping.

#include "iaprox/problems.hpp"

#include <optional>
#include <random>
#include <string>

namespace iaprox {

using Rng = std::mt19937_64;

struct EnvelopeValue
{
  double value = 0.0;  // f_lambda(x)
  Vector grad;         // (x - prox_point) / lambda
  Vector prox_point;   // prox_{lambda f}(x)
  double lambda = 0.0;
};

EnvelopeValue envelope(NonsmoothOracle const &f, double lambda, Vector const &x);
/// Envelope of the full f = h + g; needs the problem's closed-form prox.
EnvelopeValue envelope(CompositeProblem const &problem, double lambda, Vector const &x);
/// Envelope from an already computed prox point.
EnvelopeValue envelope_at(NonsmoothOracle const &f, double lambda, Vector const &x, Vector prox_point);

enum class ProxKind { Type1, Type2, Type3 };
std::string to_string(ProxKind k);

struct ProxCertificate
{
  ProxKind kind = ProxKind::Type1;
  double epsilon = 0.0;
  Vector candidate;  // w
  Vector base_point; // x
  double lambda = 0.0;
  /// Type 3: the shift e with w = prox(x + e). Types 1/2: the exact prox point.
  std::optional<Vector> witness;
};

struct CertCheck
{
  bool ok = false;
  double lhs = 0.0;   // left side minus the envelope terms it is compared against
  double rhs = 0.0;   // allowed value before slack
  double slack = 0.0;
  std::string message;
};

/// Absolute slack on certificate inequalities.
double certification_slack(double envelope_value);

struct Type1Result
{
  Vector w;
  double t = 0.0; // displacement along the direction
  ProxCertificate cert;
};

/// Largest t in [0, eps] (bisection, 40 steps) with w = exact_prox + t d a
/// type-1 approximation of prox_{lambda f}(x).
Type1Result make_type1(Vector const &exact_prox, double epsilon, Vector const &direction,
                       NonsmoothOracle const &f, double lambda, Vector const &x);

struct Type3Result
{
  Vector w;
  Vector e;
  ProxCertificate cert;
};

/// w = prox_{lambda f}(x + e), e uniform in the eps-ball.
Type3Result make_type3(NonsmoothOracle const &f, double lambda, Vector const &x, double epsilon,
                       Rng &rng);

CertCheck certify_type1(Vector const &w, Vector const &x, double lambda, double epsilon,
                        NonsmoothOracle const &f);
/// Needs f.conjugate; reports "conjugate unavailable" otherwise.
CertCheck certify_type2(Vector const &w, Vector const &x, double lambda, double epsilon,
                        NonsmoothOracle const &f);
/// Witness form: w = prox(x + e) with ||e|| <= eps.
CertCheck certify_type3(ProxCertificate const &cert, NonsmoothOracle const &f);
CertCheck certify(ProxCertificate const &cert, NonsmoothOracle const &f);

/// dist(0, d phi(w)) with phi = f + ||. - x||^2/(2 lambda), for oracles whose
/// subdifferential is known in closed form (l1, box, zero). Empty otherwise.
std::optional<double> prox_residual_distance(Vector const &w, Vector const &x, double lambda,
                                             NonsmoothOracle const &f);

/// Random unit vector (uniform on the sphere).
Vector random_unit(Index n, Rng &rng);

struct PerturbedGradient
{
  Vector ghat;
  Vector e; // ghat - grad
};

/// e uniform on the sphere of radius `bound`.
PerturbedGradient perturb_gradient(Vector const &grad, double bound, Rng &rng);

struct GradMapResult
{
  Vector mapping;       // (x - forward_point) / lambda
  Vector forward_point; // S(x, tau, eps)
  Vector exact_forward; // S(x, tau, 0) = prox_{lambda g}(x - lambda ghat)
  Vector sigma;         // S(x, tau, eps) - S(x, tau, 0)
  Vector e;             // lambda (grad h - ghat)
  double tau = 0.0;
  double epsilon = 0.0;
};

/// Perturbed gradient mapping at x.
GradMapResult gradient_mapping(CompositeProblem const &problem, double lambda, Vector const &x,
                               double tau, double epsilon, Rng &rng);

} // namespace iaprox
