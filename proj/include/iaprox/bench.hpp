#pragma once

// Config-driven experiments: problem construction, solver or flow run, rate
// fits and theorem-bound checks, written as trace.csv plus summary.json.

#include "iaprox/flow.hpp"
#include "iaprox/solvers.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace iaprox {

enum class ProblemFamily { RandomQp, PoissonQp, Lasso, Quadratic, SeparableL1, Harmonic };
std::string to_string(ProblemFamily f);
ProblemFamily problem_family_from_string(std::string const &s);

struct ProblemSpec
{
  ProblemFamily family = ProblemFamily::RandomQp;
  Index n = 100;     // dimension (random QP, quadratic, separable l1, lasso columns)
  Index grid = 15;   // Poisson interior grid
  Index m = 100;     // lasso rows
  Index s = 10;      // lasso sparsity
  double noise = 0.01;
  double shift = 0.0; // quadratic: A + shift I, giving mu = shift
  double rho = kLassoRho;
  std::uint64_t seed = 0;
  BoxBounds bounds;
  std::string data_dir; // load A/b from files instead of generating
};

enum class RunKind { Aippa, Aipgm, Flow };
std::string to_string(RunKind k);
RunKind run_kind_from_string(std::string const &s);

enum class FitModel { Power, Linear };
std::string to_string(FitModel m);
FitModel fit_model_from_string(std::string const &s);

struct ExperimentConfig
{
  ProblemSpec problem;
  RunKind algorithm = RunKind::Aipgm;
  Scheme scheme = Scheme::AippaConvex; // AIPPA only
  std::optional<double> mu;
  std::optional<double> gamma0;
  double alpha = 0.0;

  ScheduleKind schedule = ScheduleKind::Zero;
  double p = 1.0;
  double q = 1.0;
  double tau = 0.0;
  double eps = 0.0;

  std::size_t budget = 2000;
  std::uint64_t seed = 0; // solver RNG
  double stop_rel = 1e-14;
  std::string out;

  // Reference minimum: "compute" or "supplied" (f_star and x_star file).
  std::string reference = "compute";
  std::optional<double> f_star;
  std::string x_star_file;

  // Flow.
  double lambda = 1e-4;
  double T = 20.0;
  double tol = 1e-10;
  double dt = 1e-2;
  std::string xi = "zero"; // zero | power | exp
  double xi_p = 2.0;
  double xi_scale = 1.0;
  double x0_scale = 1.0;   // x0 = x0_scale * 1
  bool log_xi = true;      // write the Xi_lambda column

  // Rate fit; k_lo = k_hi = 0 selects the default window.
  std::size_t fit_lo = 0;
  std::size_t fit_hi = 0;
};

nlohmann::json to_json(ExperimentConfig const &cfg);
/// Flat keys mirroring the CLI flags; unknown keys are rejected.
ExperimentConfig config_from_json(nlohmann::json const &j);
/// Throws ConfigError on invalid combinations.
void validate(ExperimentConfig const &cfg);

CompositeProblem build_problem(ProblemSpec const &spec);
SolverConfig solver_config(ExperimentConfig const &cfg);
FlowConfig flow_config(ExperimentConfig const &cfg, CompositeProblem const &problem);

struct RateFit
{
  std::size_t k_lo = 0;
  std::size_t k_hi = 0;
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  FitModel model = FitModel::Power;
  std::size_t points = 0;
  bool default_window = false;
};

/// Default window: last 50% of the indices whose value exceeds
/// 1e2 * machine epsilon * |f*|.
std::pair<std::size_t, std::size_t> default_window(std::vector<double> const &values, double f_star);

/// Least squares on (log x, log value) [power] or (x, log value) [linear]
/// over the indices [lo, hi]. Points with x <= 0 (power) or value <= 0 are
/// dropped.
RateFit fit_rate(std::vector<double> const &x, std::vector<double> const &values, std::size_t lo,
                 std::size_t hi, FitModel model);
RateFit fit_rate(std::vector<double> const &x, std::vector<double> const &values, FitModel model,
                 double f_star);

struct BoundComparison
{
  std::size_t checked = 0;
  double max_ratio = 0.0;
  std::optional<std::size_t> first_violation;
  bool ok() const { return !first_violation; }
};

BoundComparison compare_bound(std::vector<double> const &values, std::vector<double> const &bounds,
                              double rel_tol = 0.0);

/// Reads a trace CSV and returns the named column (plus the first column as x).
struct CsvColumn
{
  std::vector<double> x;
  std::vector<double> values;
};
CsvColumn read_csv_column(std::filesystem::path const &file, std::string const &column);

struct ExperimentResult
{
  nlohmann::json summary;
  std::vector<LyapunovRow> rows;    // solver runs
  std::vector<FlowRow> flow_rows;   // flow runs
  bool bounds_ok = true;
};

/// Runs one experiment; writes trace.csv and summary.json when cfg.out is set.
ExperimentResult run_experiment(ExperimentConfig const &cfg);
/// One worker thread per config; each must have its own output directory.
std::vector<ExperimentResult> run_batch(std::vector<ExperimentConfig> const &cfgs);

} // namespace iaprox
