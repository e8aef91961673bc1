#pragma once

// Second-order flow on the Moreau-Yosida regularization
//   gamma x'' + (mu + gamma) x' + grad F_lambda(x) = xi(t),
//   F_lambda = (1 + lambda mu) f_lambda,  gamma(t) = mu + (gamma0 - mu) e^{-t},
// integrated with an embedded 4/5 Runge-Kutta pair, plus energy and decay
// diagnostics along the trajectory.

#include "iaprox/problems.hpp"

#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace iaprox {

struct Perturbation
{
  enum class Kind { Zero, PowerDecay, ExpWeighted, Custom };
  Kind kind = Kind::Zero;
  double p = 2.0;     // PowerDecay: |xi(t)| = scale (t+1)^{-p}
  double rate = 1.0;  // ExpWeighted: |xi(t)| = scale e^{-rate t}
  double scale = 1.0;
  Vector direction;   // unit vector
  std::function<Vector(double)> custom;

  static Perturbation zero();
  static Perturbation power_decay(double p, Vector direction, double scale = 1.0);
  static Perturbation exp_weighted(double rate, Vector direction, double scale = 1.0);

  Vector at(double t, Index n) const;
  double norm_at(double t) const;
};

struct FlowConfig
{
  /// lambda > 0 regularizes f; lambda = 0 integrates the smooth part h
  /// directly (only meaningful when g = 0).
  double lambda = 1e-4;
  std::optional<double> mu;     // defaults to h.mu
  std::optional<double> gamma0; // defaults to mu when mu > 0, else 1
  Perturbation xi;
  Vector x0;
  Vector x1; // initial velocity; empty -> 0
  double T = 20.0;
  double tol = 1e-10;
  double abs_tol = 1e-12;
  double report_dt = 1e-2;
};

struct FlowState
{
  double t = 0.0;
  Vector x;
  Vector xdot;
  double gamma = 0.0;
};

/// F_lambda and its gradient for one problem and lambda.
class RegularizedObjective
{
public:
  RegularizedObjective(CompositeProblem const &problem, double lambda, double mu);

  double lambda() const { return lambda_; }
  double mu() const { return mu_; }
  Vector prox(Vector const &x) const;
  Vector grad(Vector const &x) const;         // grad F_lambda
  Vector envelope_grad(Vector const &x) const; // grad f_lambda
  /// f_lambda(x) - f(y) for a point y with prox(y) = y (e.g. a minimizer).
  double envelope_gap(Vector const &x, Vector const &y) const;
  /// F_lambda(x) - F_lambda(y).
  double difference(Vector const &x, Vector const &y) const;

private:
  CompositeProblem const &problem_;
  NonsmoothOracle f_;
  VectorFn prox_;
  double lambda_;
  double mu_;
};

struct FlowTrace
{
  std::vector<FlowState> states;
  double lambda = 0.0;
  double mu = 0.0;
  double gamma0 = 0.0;
  Perturbation xi;
};

/// (xdot, xddot) with xddot = [xi(t) - (mu + gamma) xdot - grad F_lambda(x)] / gamma.
std::pair<Vector, Vector> rhs(FlowState const &state, RegularizedObjective const &F, double gamma0,
                              Perturbation const &xi);

FlowConfig resolve_flow_config(CompositeProblem const &problem, FlowConfig cfg);
FlowTrace integrate(CompositeProblem const &problem, FlowConfig cfg);

/// L_lambda(t) = F_lambda(x) - F_lambda(x*) + gamma/2 |x + x' - x*|^2.
double lyapunov_continuous(FlowState const &s, RegularizedObjective const &F, Vector const &x_star);

/// Discrepancy of the energy equality at every report time (trapezoidal
/// quadrature on the report grid).
std::vector<double> energy_residuals(FlowTrace const &trace, CompositeProblem const &problem);
double energy_residual(FlowTrace const &trace, CompositeProblem const &problem);
/// Same, using every `stride`-th report time.
double energy_residual(FlowTrace const &trace, CompositeProblem const &problem, std::size_t stride);

enum class XiWeight { Exp, HalfExp, HalfExpOverSqrtGamma };

/// int_0^t |xi(s)| w(s) ds by adaptive Gauss-Kronrod.
double weighted_xi_integral(Perturbation const &xi, XiWeight weight, double t, double mu = 0.0,
                            double gamma0 = 1.0);

enum class DecayTheorem { Mu0, MuPos };

struct DecayReport
{
  double L0 = 0.0;
  double max_ratio = 0.0;     // sup left / right
  double raw_max_ratio = 0.0; // same with the true gap f(x) - f* on the left
  double fitted_C = 0.0;      // sup (left - 2 L0 e^{-t}) (t+1)^{2p} for power perturbations
  std::optional<double> first_violation_t;
  bool ok = false;
};

/// Left side: f(prox x) - f* + lambda/2 |grad f_lambda(x)|^2 (= f_lambda(x) - f*),
/// plus gamma/2 |x + x' - x*|^2 for MuPos.
DecayReport check_decay_theorem(FlowTrace const &trace, CompositeProblem const &problem,
                                DecayTheorem theorem, double rel_tol = 1e-3);

struct FlowLyapunovReport
{
  double max_monotone_increase = 0.0; // of e^t E_lambda + mu/2 int e^s |x'|^2
  double max_bound_ratio = 0.0;       // of L_lambda + ... against e^{-t}(2 L(0) + R^2)
  bool monotone_ok = false;
  bool bound_ok = false;
};

FlowLyapunovReport check_flow_lyapunov(FlowTrace const &trace, CompositeProblem const &problem,
                                       double monotone_slack = 1e-6, double bound_rel_tol = 1e-3);

struct FlowRow
{
  double t = 0.0;
  double obj_gap = 0.0;
  double lyap = 0.0;
  double bound = 0.0;
  double energy_residual = 0.0;
  double gamma = 0.0;
  double xi_integral = 0.0; // Xi_lambda(t)
};

std::vector<FlowRow> flow_rows(FlowTrace const &trace, CompositeProblem const &problem);
/// Columns t, obj_gap, lyap, bound, energy_residual, gamma [, xi_integral].
void write_flow_csv(std::ostream &os, std::vector<FlowRow> const &rows, bool log_xi = true);

} // namespace iaprox
