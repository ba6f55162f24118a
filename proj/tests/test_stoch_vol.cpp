#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "wildpost/stoch_vol.hpp"

using namespace wildpost;

TEST_CASE("single time step density") {
  const SVData data{{0.0}};
  const double lpdf0 = -0.5 * std::log(2.0 * std::numbers::pi);
  // Half-Cauchy(5) evaluated at sigma = 1 carries the 1 / (1 + 1/25) factor.
  const double expected = 2.0 * lpdf0 + std::log(0.5) + std::log(2.0 / (5.0 * std::numbers::pi * (1.0 + 1.0 / 25.0))) +
                          std::log(1.0 / (10.0 * std::numbers::pi));
  CHECK(sv_log_density(data, {0.0, 0.0, 1.0, {0.0}}) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("phi = 0 decouples the latent path") {
  const SVData data{{0.3, -0.2}};
  const double a = sv_log_density(data, {0.4, 0.0, 0.7, {1.0, -0.5}});
  const double b = sv_log_density(SVData{{-0.2, 0.3}}, {0.4, 0.0, 0.7, {-0.5, 1.0}});
  CHECK(a == doctest::Approx(b).epsilon(1e-14));
  CHECK(sv_initial_sd(0.0, 0.7) == 0.7);
}

TEST_CASE("transition mean rewrite") {
  for (double mu : {-1.02, 0.0, 3.3})
    for (double phi : {-0.95, 0.2, 0.999})
      for (double h : {-2.0, 0.1}) CHECK(sv_transition_mean(mu, phi, h) == doctest::Approx(mu + phi * (h - mu)).epsilon(1e-15));
}

TEST_CASE("initial sd grows without bound as phi approaches 1") {
  double previous = 0.0;
  for (double phi : {0.0, 0.9, 0.99, 0.999, 0.9999}) {
    const double sd = sv_initial_sd(phi, 0.1);
    CHECK(sd > previous);
    previous = sd;
  }
  CHECK(previous > 7.0);
}

TEST_CASE("support boundaries") {
  const SVData data{{0.1, 0.2}};
  CHECK(sv_log_density(data, {0.0, 1.0, 0.5, {0.0, 0.0}}) == -kInf);
  CHECK(sv_log_density(data, {0.0, 0.5, 0.0, {0.0, 0.0}}) == -kInf);
  CHECK(sv_log_density(data, {0.0, 0.5, 1e300, {0.0, 0.0}}) == -kInf);
  CHECK(sv_log_density(data, {0.0, 0.5, 1e-300, {0.0, 0.0}}) == -kInf);
  CHECK_THROWS_AS(sv_log_density(data, {0.0, 0.5, 0.5, {0.0}}), DomainError);
}

TEST_CASE("simulate_sv") {
  const auto still = simulate_sv(2, 20, -1.0, 0.5, 0.0);
  for (double h : still.h_true) CHECK(h == -1.0);

  const auto ref = simulate_sv(1, 5, -1.02, -0.95, 0.1);
  CHECK(ref.data.returns.size() == 5);
  CHECK(ref.h_true.size() == 5);

  const int T = 100000;
  const auto long_run = simulate_sv(9, T, 0.0, 0.6, 0.5);
  double m = 0, v = 0;
  for (double h : long_run.h_true) m += h / T;
  for (double h : long_run.h_true) v += (h - m) * (h - m) / (T - 1);
  CHECK(v == doctest::Approx(0.25 / (1.0 - 0.36)).epsilon(0.05));
}

TEST_CASE("stoch_vol target") {
  const StochVolTarget target(simulate_sv(1, 5, -1.02, -0.95, 0.1).data);
  CHECK(target.space().column_names() ==
        std::vector<std::string>{"mu", "phi", "sigma", "h1", "h2", "h3", "h4", "h5"});
  CHECK(target.grid_space() == nullptr);
}
