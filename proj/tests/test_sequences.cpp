#include "iaprox/sequences.hpp"

#include <doctest.h>

#include <cmath>

using namespace iaprox;
using doctest::Approx;

TEST_SUITE("sequences")
{
  TEST_CASE("continuous gamma")
  {
    CHECK(gamma_continuous(0.0, 1.0, 4.0) == 4.0);
    CHECK(gamma_continuous(std::log(2.0), 1.0, 3.0) == Approx(2.0));
    CHECK(gamma_continuous(60.0, 0.3, 5.0) == Approx(0.3).epsilon(1e-15));
  }

  TEST_CASE("alpha roots")
  {
    CHECK(solve_alpha(4.0, 1.0) == Approx(2.0 + 2.0 * std::sqrt(2.0)).epsilon(1e-15));
    for (double Q : {0.5, 1.0, 8.0}) {
      for (double c : {1e-3, 0.2, 3.0}) {
        double const g = 2.0 * Q * c;
        double const a = solve_alpha(g, Q);
        CHECK(std::abs(Q * a * a - g * (1.0 + a)) <= 1e-12 * (1.0 + g * (1.0 + a)));
      }
    }
    CHECK(solve_alpha(3.0, 6.0) == Approx(1.0));
    CHECK(alpha_mu(0.0, 1.0) == 0.0);
    CHECK(alpha_mu(2.0, 2.0) == Approx(1.0));
    double const a = alpha_mu(0.5, 1.0);
    CHECK(a == Approx((0.5 + std::sqrt(4.25)) / 4.0));
    CHECK(a == Approx(0.640388).epsilon(1e-6));
    CHECK(a >= 0.5);
    CHECK(a <= std::sqrt(0.5));
  }

  TEST_CASE("recursion invariants")
  {
    for (Scheme s : {Scheme::AippaConvex, Scheme::Aipgm}) {
      for (double mu : {0.0, 0.1}) {
        ParamTrack t = make_track(s, mu, 2.0, 4.0);
        for (int k = 0; k < 500; ++k) t = advance(t);
        for (std::size_t k = 0; k < t.k(); ++k) {
          double const lhs = t.gamma[k + 1] * (1.0 + t.alpha[k]);
          CHECK(lhs == Approx(t.gamma[k] + mu * t.alpha[k]).epsilon(1e-13));
          CHECK(t.gamma[k + 1] >= std::min(2.0, mu) * (1.0 - 1e-14));
          CHECK(t.gamma[k + 1] <= std::max(2.0, mu) * (1.0 + 1e-14));
          CHECK(t.beta[k + 1] == Approx(t.beta[k] / (1.0 + t.alpha[k])).epsilon(1e-14));
        }
      }
    }
  }

  TEST_CASE("gamma0 = mu keeps gamma fixed")
  {
    for (Scheme s : {Scheme::AippaConvex, Scheme::Aipgm, Scheme::AippaStrong}) {
      ParamTrack t = make_track(s, 0.4, 0.4, 2.0, 0.3);
      for (int k = 0; k < 200; ++k) t.step();
      for (double g : t.gamma) CHECK(g == Approx(0.4).epsilon(1e-14));
    }
    ParamTrack t = make_track(Scheme::Aipgm, 0.4, 0.4, 2.0);
    t.step();
    CHECK(t.alpha[0] == Approx(alpha_mu(0.4, 2.0)));
  }

  TEST_CASE("AIPPA with gamma0 = 4 starts at lambda = 1")
  {
    ParamTrack t = make_track(Scheme::AippaConvex, 0.0, 4.0);
    t.step();
    CHECK(t.alpha[0] == Approx(2.0 + 2.0 * std::sqrt(2.0)));
    CHECK(t.lambda[0] == Approx(1.0).epsilon(1e-14));
  }

  TEST_CASE("mu = 0 gives beta = gamma / gamma0")
  {
    ParamTrack t = make_track(Scheme::AippaConvex, 0.0, 3.0);
    for (int k = 0; k < 300; ++k) t.step();
    for (std::size_t k = 0; k <= t.k(); ++k) {
      CHECK(t.beta[k] == Approx(t.gamma[k] / 3.0).epsilon(1e-13));
    }
    CHECK(t.beta[0] == 1.0);
  }

  TEST_CASE("bracket checks")
  {
    ParamTrack t = make_track(Scheme::AippaConvex, 0.0, 4.0);
    for (int k = 0; k < 100; ++k) t.step();
    BoundReport const r = check_sequence_bounds(t);
    CHECK(r.ok());
    CHECK(r.checked > 0);

    double const L = 3.0;
    ParamTrack a = make_track(Scheme::Aipgm, 0.0, L, L);
    for (int k = 0; k < 1000; ++k) a.step();
    CHECK(check_sequence_bounds(a).ok());
    for (std::size_t k = 1; k <= a.k(); ++k) {
      double const kk = static_cast<double>(k);
      CHECK(a.beta[k] >= 2.0 / ((kk + std::sqrt(2.0)) * (kk + std::sqrt(2.0))) * (1.0 - 1e-12));
      CHECK(a.beta[k] <= 8.0 / ((kk + 2.0 * std::sqrt(2.0)) * (kk + 2.0 * std::sqrt(2.0))) * (1.0 + 1e-12));
    }
  }

  TEST_CASE("bracket checks catch a corrupted track")
  {
    ParamTrack t = make_track(Scheme::AippaConvex, 0.0, 4.0);
    for (int k = 0; k < 20; ++k) t.step();
    t.gamma[10] *= 1.5;
    BoundReport const r = check_sequence_bounds(t);
    CHECK_FALSE(r.ok());
    CHECK_FALSE(r.first_failure.empty());
  }

  TEST_CASE("convergence of alpha and gamma when gamma0 != mu")
  {
    double const mu = 0.05;
    double const L = 1.0;
    ParamTrack t = make_track(Scheme::Aipgm, mu, 1.0, L);
    for (int k = 0; k < 200; ++k) t.step();
    CHECK(std::abs(t.gamma.back() - mu) <= 1e-8);
    CHECK(std::abs(t.alpha.back() - alpha_mu(mu, L)) <= 1e-8);
    for (std::size_t k = 1; k < t.gamma.size(); ++k) CHECK(t.gamma[k] <= t.gamma[k - 1]);
  }

  TEST_CASE("integral estimate")
  {
    std::vector<double> grid;
    for (int i = 1; i <= 400; ++i) grid.push_back(0.1 * i);
    for (double A : {1.5, 3.0}) {
      IntegralReport const r = check_integral_estimate(A, 0.0, grid);
      CHECK(r.ok);
      CHECK(r.last_ratio == Approx(1.0 / std::log(A)).epsilon(1e-6));
      CHECK(integral_estimate_value(A, 0.0, 2.0) == Approx((std::pow(A, 2.0) - 1.0) / std::log(A)).epsilon(1e-10));
    }
    IntegralReport const r = check_integral_estimate(1.5, 2.0, grid);
    CHECK(r.ok);
    CHECK(std::isfinite(r.max_ratio));
    CHECK(r.max_ratio <= r.K);
  }

  TEST_CASE("discrete integral estimate with A = 1 + alpha_mu")
  {
    for (double p : {1.0, 2.0, 3.0, 4.5}) {
      double const A = 1.0 + alpha_mu(0.1, 1.0);
      double const K = integral_estimate_constant(A, p);
      double sum = 0.0;
      for (int i = 1; i <= 2000; ++i) {
        sum += std::pow(A, i) / std::pow(i + 1.0, p);
        CHECK(sum <= K * std::pow(A, i + 1.0) / std::pow(i + 1.0, p) * (1.0 + 1e-12));
      }
    }
  }
}
