#include <doctest.h>

#include <cmath>
#include <vector>

#include "wildpost/catalog.hpp"
#include "wildpost/grid.hpp"
#include "wildpost/lasso.hpp"

using namespace wildpost;

TEST_CASE("lasso prior terms without data") {
  const LassoData empty{{}, {}, 8.0};
  CHECK(lasso_log_density(empty, {0.0, 1.0}, LaplaceConvention::scale) ==
        doctest::Approx(std::log(0.5) + std::log(1.0 / 9.999)).epsilon(1e-14));
  const double uniform = -std::log(9.999);
  CHECK(lasso_log_density(empty, {1.0, 2.0}, LaplaceConvention::scale) ==
        doctest::Approx(-std::log(4.0) - 0.5 + uniform).epsilon(1e-14));
  CHECK(lasso_log_density(empty, {1.0, 2.0}, LaplaceConvention::rate) ==
        doctest::Approx(std::log(2.0 / 2.0) - 2.0 + uniform).epsilon(1e-14));
}

TEST_CASE("lasso outside the lambda interval") {
  const LassoData empty{{}, {}, 8.0};
  CHECK(lasso_log_density(empty, {0.0, 0.0005}, LaplaceConvention::scale) == -kInf);
  CHECK(lasso_log_density(empty, {0.0, 10.5}, LaplaceConvention::scale) == -kInf);
}

TEST_CASE("lasso likelihood term") {
  const LassoData data{{1.0, 1.0}, {3.0, 5.0}, 8.0};
  const double lik = -2.0 * std::log(8.0) - kLogTwoPi - (4.0 + 0.0) / 128.0;
  CHECK(lasso_log_density(data, {5.0, 2.0}, LaplaceConvention::scale) ==
        doctest::Approx(lik - std::log(4.0) - 2.5 - std::log(9.999)).epsilon(1e-13));
}

TEST_CASE("lasso gradient at beta = 0 uses the zero subgradient") {
  const LassoData data{{1.0}, {2.0}, 8.0};
  std::vector<double> grad(2);
  const double lp = lasso_log_density(data, {0.0, 1.0}, LaplaceConvention::scale, grad);
  CHECK(std::isfinite(lp));
  CHECK(grad[0] == doctest::Approx(2.0 / 64.0));
  CHECK(std::isfinite(grad[1]));
}

TEST_CASE("simulate_lasso") {
  for (double y : simulate_lasso(3, 7, 5.0, 0.0).y) CHECK(y == 5.0);
  const auto big = simulate_lasso(3, 10000, 5.0, 8.0);
  double m = 0;
  for (double y : big.y) m += y / 10000.0;
  CHECK(std::abs(m - 5.0) < 0.25);
  for (double x : big.x) CHECK(x == 1.0);
  const auto ref = simulate_lasso(1, 5, 5.0, 8.0);
  CHECK(ref.y.size() == 5);
  CHECK(ref.sigma == 8.0);
}

TEST_CASE("lasso target") {
  const LassoTarget target(simulate_lasso(1, 5, 5.0, 8.0), LaplaceConvention::rate);
  CHECK(target.space().column_names() == std::vector<std::string>{"beta", "lambda"});
  const std::vector<double> c{1.0, 2.0};
  CHECK(target.log_density(c) == lasso_log_density(target.data(), {1.0, 2.0}, LaplaceConvention::rate));
  CHECK(to_string(LaplaceConvention::scale) == "scale");
  CHECK(to_string(LaplaceConvention::rate) == "rate");
}

TEST_CASE("lasso interior mode appears only past the profile threshold") {
  // Profile over lambda is L(beta)/|beta|; its stationary points solve beta (ybar - beta) = sigma^2 / n.
  const auto spec = default_grid_spec("adaptive_lasso");
  const double cell = (spec.x_range.hi - spec.x_range.lo) / spec.nx;
  auto modes = [&](double ybar, LaplaceConvention c) {
    const LassoTarget t(LassoData{std::vector<double>(5, 1.0), std::vector<double>(5, ybar), 8.0}, c);
    return find_local_maxima(evaluate_grid(t, spec), 5);
  };
  CHECK(modes(3.75, LaplaceConvention::scale).empty());
  CHECK(modes(3.75, LaplaceConvention::rate).empty());

  const auto above = modes(8.0, LaplaceConvention::scale);
  REQUIRE(above.size() == 1);
  const double beta = 0.5 * (8.0 + std::sqrt(64.0 - 4.0 * 64.0 / 5.0));
  CHECK(std::abs(cell_center(spec.x_range, spec.nx, above[0].i) - beta) <= cell);
}
