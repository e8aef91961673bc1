#pragma once

// The inexact accelerated proximal point (AIPPA) and proximal gradient
// (AIPGM) iterations with Lyapunov tracking and theorem envelopes.

#include "iaprox/moreau.hpp"
#include "iaprox/sequences.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace iaprox {

enum class Algorithm { Aippa, Aipgm };
std::string to_string(Algorithm a);

enum class ScheduleKind { Power, ExpDamped, Zero, Custom };
std::string to_string(ScheduleKind k);
ScheduleKind schedule_kind_from_string(std::string const &s);

/// Per-iteration tolerances (eps_k, tau_k).
struct ErrorSchedule
{
  ScheduleKind kind = ScheduleKind::Zero;
  double p = 1.0;
  double q = 1.0;
  double eps_scale = 0.0;
  double tau_scale = 0.0;
  /// Geometric damping base for ExpDamped: values carry (1 + rate)^{-k/2}.
  double rate = 0.0;
  std::function<double(std::size_t)> custom_eps;
  std::function<double(std::size_t)> custom_tau;

  static ErrorSchedule zero();
  /// eps_k = eps_scale/(k+1)^p, tau_k = tau_scale/(k+1)^q.
  static ErrorSchedule power(double eps_scale, double p, double tau_scale, double q);
  /// eps_k = eps_scale (k+1)^{-p} (1+rate)^{-k/2}, tau_k likewise with tau_scale.
  static ErrorSchedule exp_damped(double eps_scale, double tau_scale, double p, double rate);

  double eps(std::size_t k) const;
  double tau(std::size_t k) const;
};

struct SolverConfig
{
  Algorithm algorithm = Algorithm::Aipgm;
  /// AippaConvex / AippaStrong for AIPPA; Aipgm is implied for AIPGM.
  Scheme scheme = Scheme::Aipgm;
  /// Strong-convexity modulus used by the scheme; defaults to h.mu.
  std::optional<double> mu;
  /// Defaults: AIPGM -> mu if mu > 0 else L; AippaConvex -> 4; AippaStrong -> mu.
  std::optional<double> gamma0;
  double alpha = 0.0; // AippaStrong constant step
  ErrorSchedule schedule;
  std::size_t budget = 10000;
  std::uint64_t seed = 0;
  /// Stop once obj_gap < stop_rel * (1 + |f*|); 0 disables.
  double stop_rel = 1e-14;
  Vector x0; // empty -> zeros
  Vector v0; // empty -> x0
};

struct SolverState
{
  std::size_t k = 0;
  Vector x;
  Vector v;
  ParamTrack params;
  Vector last_xi; // realized error of the step that produced x
};

/// Quantities of one executed step k -> k+1.
struct StepInfo
{
  double eps = 0.0;
  double tau = 0.0;
  double alpha = 0.0;
  double lambda = 0.0;
  double gamma = 0.0;      // gamma_k
  Vector xi;               // realized error entering the one-step inequality
  Vector point;            // w_k (AIPPA) or y_k (AIPGM)
  Vector exact;            // exact prox / forward point at `point`
  Vector x_prev, v_prev;   // x_k, v_k
};

struct LyapunovRow
{
  std::size_t k = 0;
  double obj_gap = 0.0;
  double lyap = 0.0;
  double bound = 0.0;    // 2 beta_k (L_0 + Upsilon_k + Omega_k^2)
  double upsilon = 0.0;
  double omega = 0.0;
  double eps_k = 0.0;    // tolerances of step k -> k+1
  double tau_k = 0.0;
  double xi_norm = 0.0;  // realized error of the step that produced x_k
  double gamma_k = 0.0;
  double alpha_k = 0.0;  // step k -> k+1
  double beta_k = 0.0;
  double lambda_k = 0.0;
  double one_step_excess = 0.0; // lhs - rhs of the one-step inequality ending at k
};

struct InequalityReport
{
  std::size_t checked = 0;
  std::size_t violations = 0;
  double worst_excess = 0.0; // largest (lhs - rhs) / scale
  std::optional<std::size_t> first_violation;

  bool ok() const { return violations == 0; }
};

struct RunResult
{
  std::vector<LyapunovRow> rows;
  SolverState final_state;
  double L0 = 0.0;
  InequalityReport one_step;
  InequalityReport cumulative;
  std::string stop_reason;
  Algorithm algorithm = Algorithm::Aipgm;
  Scheme scheme = Scheme::Aipgm;
  double mu = 0.0;
  double lip = 0.0;
};

/// Step contexts own the RNG stream and any cached factorization.
class AippaStepper
{
public:
  AippaStepper(CompositeProblem const &problem, ErrorSchedule schedule, std::uint64_t seed);
  StepInfo step(SolverState &state);

private:
  CompositeProblem const &problem_;
  NonsmoothOracle f_;
  ErrorSchedule schedule_;
  Rng rng_;
  double cached_lambda_ = -1.0;
  VectorFn cached_prox_;
};

class AipgmStepper
{
public:
  AipgmStepper(CompositeProblem const &problem, ErrorSchedule schedule, std::uint64_t seed);
  StepInfo step(SolverState &state);

private:
  CompositeProblem const &problem_;
  ErrorSchedule schedule_;
  Rng rng_;
};

/// Resolves defaults (mu, gamma0, scheme, schedule rate) and validates.
SolverConfig resolve_config(CompositeProblem const &problem, SolverConfig config);
SolverState initial_state(CompositeProblem const &problem, SolverConfig const &config);

/// L_k = f(x_k) - f* + gamma_k/2 |v_k - x*|^2.
double lyapunov_value(CompositeProblem const &problem, Vector const &x, Vector const &v, double gamma);

RunResult run(CompositeProblem const &problem, SolverConfig config);

void write_trace_csv(std::ostream &os, std::vector<LyapunovRow> const &rows);

enum class Theorem { AippaConvex, AippaStrong, AipgmConvex, AipgmStrong };
std::string to_string(Theorem t);

struct BoundConfig
{
  Theorem theorem = Theorem::AipgmConvex;
  double L0 = 0.0;
  double lip = 1.0;   // AIPGM L
  double mu = 0.0;
  double gamma0 = 0.0; // convex cases; 0 -> 4 (AIPPA) or L (AIPGM)
  double alpha = 0.0; // AippaStrong constant step
  double p = 2.0;
  double q = 2.0;
  double C_p = 0.0;
  double C_q = 0.0;
};

/// T_k(r) = (1 + ln^2(k+1))/(k+1)^2 for r = 2, else (k+1)^{-2} + (k+1)^{2-2r}.
double T_k(std::size_t k, double r);

/// First term of the theorem envelope (exact-schedule part).
double first_term(std::size_t k, BoundConfig const &cfg);
/// First term plus the error terms scaled by the supplied constants.
double theorem_bound(std::size_t k, BoundConfig const &cfg);

struct ReferenceOptions
{
  std::size_t max_iterations = 200000;
  std::size_t stagnation_window = 50;
  double step_tol = 1e-15;
};

/// Installs a reference (x*, f*) on the problem: an exact solve when
/// available, else a long exact AIPGM run refined by the problem's polish.
Reference compute_reference(CompositeProblem &problem, ReferenceOptions const &opts = {});

} // namespace iaprox
