#include "helpers.hpp"

#include "iaprox/bench.hpp"
#include "iaprox/matrix_io.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace iaprox;
using namespace iaprox::test;
using doctest::Approx;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(std::string const &name)
{
  fs::path const p = fs::temp_directory_path() / ("iaprox_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(fs::path const &p)
{
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

} // namespace

TEST_SUITE("bench")
{
  TEST_CASE("power-law fit")
  {
    std::vector<double> k;
    std::vector<double> v;
    for (int i = 1; i <= 1000; ++i) {
      k.push_back(i);
      v.push_back(3.0 / (static_cast<double>(i) * i));
    }
    RateFit const r = fit_rate(k, v, 0, k.size() - 1, FitModel::Power);
    CHECK(r.slope == Approx(-2.0).epsilon(0.01));
    CHECK(r.r_squared > 0.999);
    CHECK(r.r_squared <= 1.0);
  }

  TEST_CASE("geometric fit")
  {
    std::vector<double> k;
    std::vector<double> v;
    for (int i = 0; i <= 200; ++i) {
      k.push_back(i);
      v.push_back(5.0 * std::pow(0.9, i));
    }
    RateFit const r = fit_rate(k, v, 0, k.size() - 1, FitModel::Linear);
    CHECK(std::abs(r.slope - std::log(0.9)) <= 1e-3);
  }

  TEST_CASE("noisy power law")
  {
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> noise(-0.1, 0.1);
      std::vector<double> k;
      std::vector<double> v;
      for (int i = 1; i <= 500; ++i) {
        k.push_back(i);
        v.push_back(std::pow(i, -1.5) * (1.0 + noise(rng)));
      }
      worst = std::max(worst, std::abs(fit_rate(k, v, 0, k.size() - 1, FitModel::Power).slope + 1.5));
    }
    CHECK(worst <= 0.1);
  }

  TEST_CASE("default window and degenerate windows")
  {
    std::vector<double> v(100, 1.0);
    auto const [lo, hi] = default_window(v, 0.0);
    CHECK(lo == 50);
    CHECK(hi == 99);
    for (std::size_t i = 80; i < 100; ++i) v[i] = 1e-20;
    auto const w = default_window(v, 1.0);
    CHECK(w.second == 79);
    std::vector<double> k(100);
    for (std::size_t i = 0; i < 100; ++i) k[i] = static_cast<double>(i);
    RateFit const r = fit_rate(k, std::vector<double>(100, 1.0), FitModel::Power, 0.0);
    CHECK(r.k_lo >= 1);
    CHECK(r.default_window);
    CHECK_THROWS(fit_rate(k, std::vector<double>(100, 1.0), 5, 5, FitModel::Power));
  }

  TEST_CASE("bound comparison")
  {
    BoundComparison const empty = compare_bound({}, {});
    CHECK(empty.checked == 0);
    CHECK(empty.ok());
    BoundComparison const c = compare_bound({1.0, 2.0, 0.5}, {2.0, 1.0, 1.0});
    CHECK(c.max_ratio == Approx(2.0));
    REQUIRE(c.first_violation);
    CHECK(*c.first_violation == 1);
  }

  TEST_CASE("config JSON round trip and validation")
  {
    ExperimentConfig c;
    c.problem.family = ProblemFamily::PoissonQp;
    c.problem.grid = 9;
    c.schedule = ScheduleKind::Power;
    c.tau = 0.5;
    c.budget = 77;
    ExperimentConfig const back = config_from_json(to_json(c));
    CHECK(to_json(back) == to_json(c));
    CHECK_THROWS_AS(config_from_json(nlohmann::json{{"bogus", 1}}), ConfigError);
    CHECK_THROWS_AS(config_from_json(nlohmann::json{{"n", "ten"}}), ConfigError);

    ExperimentConfig e;
    e.schedule = ScheduleKind::ExpDamped;
    e.mu = 0.0;
    CHECK_THROWS_AS(validate(e), ConfigError);
    ExperimentConfig a;
    a.algorithm = RunKind::Aippa;
    a.problem.family = ProblemFamily::RandomQp;
    CHECK_THROWS_AS(validate(a), ConfigError);
  }

  TEST_CASE("experiments write deterministic artifacts")
  {
    fs::path const d1 = scratch_dir("run1");
    fs::path const d2 = scratch_dir("run2");
    ExperimentConfig c;
    c.problem.family = ProblemFamily::PoissonQp;
    c.problem.grid = 8;
    c.schedule = ScheduleKind::Power;
    c.tau = 1.0;
    c.p = 2.0;
    c.q = 2.0;
    c.budget = 300;
    c.seed = 4;
    c.out = d1.string();
    ExperimentResult const r = run_experiment(c);
    c.out = d2.string();
    run_experiment(c);
    CHECK(slurp(d1 / "trace.csv") == slurp(d2 / "trace.csv"));
    CHECK(r.bounds_ok);
    for (char const *key : {"config", "f_star", "fits", "bound_checks"}) {
      CHECK(r.summary.contains(key));
    }
    auto const summary = nlohmann::json::parse(slurp(d1 / "summary.json"));
    CHECK(summary["f_star"] == r.summary["f_star"]);
    CsvColumn const col = read_csv_column(d1 / "trace.csv", "obj_gap");
    CHECK(col.values.size() == r.rows.size());
    fs::remove_all(d1);
    fs::remove_all(d2);
  }

  TEST_CASE("flow experiment")
  {
    ExperimentConfig c;
    c.algorithm = RunKind::Flow;
    c.problem.family = ProblemFamily::SeparableL1;
    c.problem.n = 4;
    c.T = 5.0;
    ExperimentResult const r = run_experiment(c);
    CHECK(r.bounds_ok);
    CHECK_FALSE(r.flow_rows.empty());
  }

  TEST_CASE("batches run concurrently and reject shared outputs")
  {
    std::vector<ExperimentConfig> cfgs(3);
    for (std::size_t i = 0; i < cfgs.size(); ++i) {
      cfgs[i].problem.n = 20;
      cfgs[i].problem.seed = i;
      cfgs[i].budget = 50;
    }
    auto const res = run_batch(cfgs);
    CHECK(res.size() == 3);
    for (auto const &r : res) CHECK_FALSE(r.summary.contains("error"));
    cfgs[0].out = cfgs[1].out = scratch_dir("shared").string();
    CHECK_THROWS_AS(run_batch(cfgs), ConfigError);
  }

  TEST_CASE("Matrix Market round trip")
  {
    fs::path const d = scratch_dir("io");
    BoxQP const sparse = gen_poisson_qp(5);
    io::save_box_qp(d / "p", sparse);
    BoxQP const sp = io::load_box_qp(d / "p");
    CHECK(sp.A->is_sparse());
    CHECK((sp.A->to_dense() - sparse.A->to_dense()).norm() == 0.0);
    CHECK((sp.b - sparse.b).norm() == 0.0);
    BoxQP const dense = gen_random_qp(7, 3);
    io::save_box_qp(d / "q", dense);
    BoxQP const dq = io::load_box_qp(d / "q");
    CHECK((dq.A->to_dense() - dense.A->to_dense()).norm() == 0.0);
    CHECK((dq.l - dense.l).norm() == 0.0);
    LassoData const l = gen_lasso(6, 9, 2, 0.0, 1);
    io::save_lasso(d / "l", l);
    LassoData const ll = io::load_lasso(d / "l");
    CHECK((*ll.A - *l.A).norm() == 0.0);
    CHECK((ll.y_true - l.y_true).norm() == 0.0);
    fs::remove_all(d);
  }

  TEST_CASE("Matrix Market parsing errors")
  {
    std::istringstream bad("not a banner\n");
    CHECK_THROWS_AS(io::read_sym_matrix(bad), ConfigError);
    std::istringstream asym("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 2 1.0\n");
    CHECK_THROWS_AS(io::read_sym_matrix(asym), ConfigError);
    std::istringstream sym("%%MatrixMarket matrix coordinate real symmetric\n% c\n2 2 2\n1 1 2.0\n2 1 -1.0\n");
    SymMatrix const A = io::read_sym_matrix(sym);
    CHECK(A.to_dense()(0, 1) == -1.0);
    std::istringstream v("# header\n1.5 2\n-3e-1\n");
    Vector const x = io::read_vector(v);
    CHECK(x.size() == 3);
    CHECK(x[2] == Approx(-0.3));
  }
}
