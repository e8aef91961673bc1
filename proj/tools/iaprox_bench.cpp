// Command-line front end: experiment runs, rate fits, instance generation and
// the acceptance suite.

#include "iaprox/acceptance.hpp"
#include "iaprox/bench.hpp"
#include "iaprox/matrix_io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

using nlohmann::json;

namespace {

// Config keys whose values stay strings; every other key is parsed as JSON.
std::set<std::string> const kStringKeys = {"family", "data_dir", "algorithm", "scheme", "schedule",
                                           "out", "reference", "x_star", "xi"};

struct FlagSet
{
  std::map<std::string, std::string> values;
  std::vector<std::pair<CLI::Option *, std::string>> options;
  bool no_log_xi = false;
  CLI::Option *no_log_xi_opt = nullptr;
  std::string config_file;

  void add(CLI::App *app, std::string const &flag, std::string const &key, std::string const &help)
  {
    options.emplace_back(app->add_option(flag, values[key], help), key);
  }

  json overrides() const
  {
    json j = json::object();
    for (auto const &[opt, key] : options) {
      if (opt->count() == 0) {
        continue;
      }
      std::string const &v = values.at(key);
      if (kStringKeys.count(key)) {
        j[key] = v;
        continue;
      }
      json parsed = json::parse(v, nullptr, false);
      if (parsed.is_discarded() || !(parsed.is_number() || parsed.is_boolean() || parsed.is_null())) {
        throw iaprox::ConfigError("--" + key + ": expected a number, got '" + v + "'");
      }
      j[key] = parsed;
    }
    if (no_log_xi_opt && no_log_xi_opt->count() > 0) {
      j["log_xi"] = false;
    }
    return j;
  }
};

void add_experiment_flags(CLI::App *app, FlagSet &f)
{
  app->add_option("--config", f.config_file, "JSON config file (object, or array for a batch)");
  f.add(app, "--family", "family", "qp | poisson | lasso | quadratic | separable_l1 | harmonic");
  f.add(app, "--n", "n", "dimension");
  f.add(app, "--grid", "grid", "Poisson interior grid size");
  f.add(app, "--m", "m", "lasso rows");
  f.add(app, "--s", "s", "lasso sparsity");
  f.add(app, "--noise", "noise", "lasso noise level");
  f.add(app, "--shift", "shift", "quadratic: A + shift I");
  f.add(app, "--rho", "rho", "l1 weight");
  f.add(app, "--seed", "seed", "problem seed (also the solver seed unless --solver-seed)");
  f.add(app, "--solver-seed", "solver_seed", "solver RNG seed");
  f.add(app, "--lower", "lower", "box lower bound");
  f.add(app, "--upper", "upper", "box upper bound");
  f.add(app, "--data-dir", "data_dir", "load the instance from files written by 'gen'");
  f.add(app, "--scheme", "scheme", "aippa_convex | aippa_strong");
  f.add(app, "--mu", "mu", "strong-convexity modulus used by the scheme");
  f.add(app, "--gamma0", "gamma0", "initial gamma");
  f.add(app, "--alpha", "alpha", "constant step for aippa_strong");
  f.add(app, "--schedule", "schedule", "power | exp | zero");
  f.add(app, "--p", "p", "eps exponent");
  f.add(app, "--q", "q", "tau exponent");
  f.add(app, "--tau", "tau", "gradient error scale");
  f.add(app, "--eps", "eps", "prox error scale");
  f.add(app, "--budget", "budget", "iterations");
  f.add(app, "--stop-rel", "stop_rel", "stop once gap < stop_rel (1 + |f*|); 0 disables");
  f.add(app, "--out", "out", "output directory for trace.csv and summary.json");
  f.add(app, "--reference", "reference", "compute | supplied");
  f.add(app, "--f-star", "f_star", "supplied minimum value");
  f.add(app, "--x-star", "x_star", "supplied minimizer file");
  f.add(app, "--lambda", "lambda", "flow: envelope parameter");
  f.add(app, "--T", "T", "flow: final time");
  f.add(app, "--tol", "tol", "flow: relative tolerance");
  f.add(app, "--dt", "dt", "flow: report spacing");
  f.add(app, "--xi", "xi", "flow perturbation: zero | power | exp");
  f.add(app, "--xi-p", "xi_p", "flow perturbation exponent");
  f.add(app, "--xi-scale", "xi_scale", "flow perturbation scale");
  f.add(app, "--x0-scale", "x0_scale", "flow: x0 = x0_scale * ones");
  f.add(app, "--fit-lo", "fit_lo", "rate-fit window start");
  f.add(app, "--fit-hi", "fit_hi", "rate-fit window end");
  f.no_log_xi_opt = app->add_flag("--no-log-xi", f.no_log_xi, "flow: omit the xi_integral column");
}

json read_json_file(std::string const &path)
{
  std::ifstream is(path);
  if (!is) {
    throw iaprox::ConfigError("cannot open " + path);
  }
  json j = json::parse(is, nullptr, false);
  if (j.is_discarded()) {
    throw iaprox::ConfigError(path + ": not valid JSON");
  }
  return j;
}

// Layering: subcommand preset < config file < explicit flags.
int run_experiments(FlagSet const &flags, json const &preset)
{
  json const over = flags.overrides();
  std::vector<json> layers;
  if (flags.config_file.empty()) {
    layers.push_back(json::object());
  } else {
    json file = read_json_file(flags.config_file);
    if (file.is_array()) {
      for (auto const &e : file) {
        layers.push_back(e);
      }
    } else {
      layers.push_back(file);
    }
  }
  std::vector<iaprox::ExperimentConfig> cfgs;
  for (auto const &layer : layers) {
    if (!layer.is_object()) {
      throw iaprox::ConfigError("each config entry must be a JSON object");
    }
    json merged = preset;
    merged.update(layer);
    merged.update(over);
    cfgs.push_back(iaprox::config_from_json(merged));
  }
  bool ok = true;
  if (cfgs.size() == 1) {
    auto const res = iaprox::run_experiment(cfgs.front());
    std::cout << res.summary.dump(2) << '\n';
    ok = res.bounds_ok;
  } else {
    json all = json::array();
    for (auto const &res : iaprox::run_batch(cfgs)) {
      all.push_back(res.summary);
      ok = ok && res.bounds_ok && !res.summary.contains("error");
    }
    std::cout << all.dump(2) << '\n';
  }
  return ok ? 0 : 3;
}

} // namespace

int main(int argc, char **argv)
{
  CLI::App app{"Inexact accelerated proximal methods: experiments and checks"};
  app.require_subcommand(1);

  struct Sub
  {
    std::string name;
    std::string help;
    json preset;
  };
  std::vector<Sub> const subs = {
      {"run-qp", "AIPGM on a box-constrained QP (random or Poisson)",
       {{"family", "qp"}, {"algorithm", "aipgm"}}},
      {"run-lasso", "AIPGM on a Lasso instance",
       {{"family", "lasso"}, {"algorithm", "aipgm"}, {"n", 400}, {"m", 100}, {"s", 10}}},
      {"run-aippa", "AIPPA on a problem with a closed-form full prox",
       {{"family", "separable_l1"}, {"algorithm", "aippa"}}},
      {"run-flow", "integrate the regularized second-order flow",
       {{"family", "separable_l1"}, {"algorithm", "flow"}}},
  };
  std::vector<FlagSet> flagsets(subs.size());
  std::vector<CLI::App *> subapps;
  for (std::size_t i = 0; i < subs.size(); ++i) {
    CLI::App *s = app.add_subcommand(subs[i].name, subs[i].help);
    add_experiment_flags(s, flagsets[i]);
    subapps.push_back(s);
  }

  CLI::App *fit = app.add_subcommand("fit-rate", "fit a power or linear rate to a trace column");
  std::string csv;
  std::string column = "obj_gap";
  std::string model = "power";
  std::size_t lo = 0;
  std::size_t hi = 0;
  double f_star = 0.0;
  fit->add_option("--csv", csv, "trace CSV")->required();
  fit->add_option("--column", column, "column name");
  fit->add_option("--model", model, "power | linear");
  fit->add_option("--lo", lo, "window start (first column value)");
  fit->add_option("--hi", hi, "window end");
  fit->add_option("--f-star", f_star, "minimum value, for the default window");

  CLI::App *gen = app.add_subcommand("gen", "write a generated instance to files");
  std::string gen_family = "qp";
  std::string gen_out;
  iaprox::ProblemSpec spec;
  gen->add_option("--family", gen_family, "qp | poisson | lasso");
  gen->add_option("--n", spec.n, "dimension");
  gen->add_option("--grid", spec.grid, "Poisson interior grid size");
  gen->add_option("--m", spec.m, "lasso rows");
  gen->add_option("--s", spec.s, "lasso sparsity");
  gen->add_option("--noise", spec.noise, "lasso noise level");
  gen->add_option("--seed", spec.seed, "seed");
  gen->add_option("--lower", spec.bounds.lower, "box lower bound");
  gen->add_option("--upper", spec.bounds.upper, "box upper bound");
  gen->add_option("--out", gen_out, "output directory")->required();

  CLI::App *verify = app.add_subcommand("verify", "run the acceptance suite");

  CLI11_PARSE(app, argc, argv);

  try {
    for (std::size_t i = 0; i < subs.size(); ++i) {
      if (subapps[i]->parsed()) {
        json preset = subs[i].preset;
        if (subs[i].name == "run-qp" && flagsets[i].values.count("grid") &&
            subapps[i]->count("--grid") > 0) {
          preset["family"] = "poisson";
        }
        return run_experiments(flagsets[i], preset);
      }
    }
    if (fit->parsed()) {
      auto const col = iaprox::read_csv_column(csv, column);
      iaprox::FitModel const m = iaprox::fit_model_from_string(model);
      iaprox::RateFit r;
      if (lo == 0 && hi == 0) {
        r = iaprox::fit_rate(col.x, col.values, m, f_star);
      } else {
        std::size_t ilo = 0;
        std::size_t ihi = 0;
        for (std::size_t k = 0; k < col.x.size(); ++k) {
          if (col.x[k] <= static_cast<double>(lo)) ilo = k;
          if (col.x[k] <= static_cast<double>(hi)) ihi = k;
        }
        r = iaprox::fit_rate(col.x, col.values, ilo, ihi, m);
      }
      json out = {{"column", column}, {"model", iaprox::to_string(r.model)},
                  {"window", {r.k_lo, r.k_hi}}, {"default_window", r.default_window},
                  {"slope", r.slope}, {"intercept", r.intercept}, {"r_squared", r.r_squared},
                  {"points", r.points}};
      std::cout << out.dump(2) << '\n';
      return 0;
    }
    if (gen->parsed()) {
      spec.family = iaprox::problem_family_from_string(gen_family);
      switch (spec.family) {
      case iaprox::ProblemFamily::RandomQp:
        iaprox::io::save_box_qp(gen_out, iaprox::gen_random_qp(spec.n, spec.seed, spec.bounds));
        break;
      case iaprox::ProblemFamily::PoissonQp:
        iaprox::io::save_box_qp(gen_out, iaprox::gen_poisson_qp(spec.grid, spec.bounds));
        break;
      case iaprox::ProblemFamily::Lasso:
        if (gen->count("--n") == 0) {
          spec.n = 400;
        }
        iaprox::io::save_lasso(gen_out, iaprox::gen_lasso(spec.m, spec.n, spec.s, spec.noise, spec.seed));
        break;
      default:
        throw iaprox::ConfigError("gen supports qp, poisson and lasso");
      }
      std::cout << "wrote " << gen_family << " instance to " << gen_out << '\n';
      return 0;
    }
    if (verify->parsed()) {
      auto const rep = iaprox::acceptance::run_all([](iaprox::acceptance::CriterionResult const &r) {
        std::printf("%s\n", iaprox::acceptance::format_line(r).c_str());
        std::fflush(stdout);
      });
      return rep.all_pass() ? 0 : 1;
    }
  } catch (std::exception const &e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
