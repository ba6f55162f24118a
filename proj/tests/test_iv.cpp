#include <doctest.h>

#include <cmath>
#include <vector>

#include "wildpost/instrumental.hpp"

using namespace wildpost;

namespace {

IVData reference() { return simulate_iv(1, 50, 0.1, 0.1, {1.0, 0.0, 1.0}, 0.75); }

// Per-observation bivariate normal plus the -(3/2) log|Sigma| prior.
double joint_by_rows(const IVData& d, double beta, double pi, const Sym2& sig) {
  const double det = sig.det();
  double lp = -1.5 * std::log(det);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double e = d.y[i] - d.x[i] * beta;
    const double v = d.x[i] - d.z[i] * pi;
    const double q = (sig.s22 * e * e - 2.0 * sig.s21 * e * v + sig.s11 * v * v) / det;
    lp += -kLogTwoPi - 0.5 * std::log(det) - 0.5 * q;
  }
  return lp;
}

}  // namespace

TEST_CASE("residual outer product") {
  IVData exact{{1.0, 2.0, 3.0}, {2.0, 4.0, 6.0}, {4.0, 8.0, 12.0}};
  const Sym2 zero = iv_residual_outer(exact, 0.5, 0.5);
  CHECK(zero.s11 == 0.0);
  CHECK(zero.s21 == 0.0);
  CHECK(zero.s22 == 0.0);

  IVData one{{1.0}, {1.0}, {0.0}};
  const Sym2 rank1 = iv_residual_outer(one, 0.0, 0.3);
  CHECK(rank1.s11 == 1.0);
  CHECK(rank1.s21 == 1.0);
  CHECK(rank1.s22 == 1.0);
  CHECK(rank1.det() == 0.0);
}

TEST_CASE("joint density special cases") {
  IVData exact{{1.0, 2.0, 3.0}, {2.0, 4.0, 6.0}, {4.0, 8.0, 12.0}};
  const double n = 3.0;
  const double at_identity = iv_joint_log_density(exact, {0.5, 0.5, {1.0, 0.0, 1.0}});
  CHECK(at_identity == doctest::Approx(-n * kLogTwoPi).epsilon(1e-14));
  const double at_two = iv_joint_log_density(exact, {0.5, 0.5, {2.0, 0.0, 2.0}});
  CHECK(at_two - at_identity == doctest::Approx(-((n + 3.0) / 2.0) * std::log(4.0)).epsilon(1e-13));
  CHECK_THROWS_AS(iv_joint_log_density(exact, {0.5, 0.5, {1.0, 1.0, 1.0}}), DomainError);
}

TEST_CASE("joint density matches row-by-row arithmetic") {
  const auto d = reference();
  CHECK(iv_joint_log_density(d, {0.1, 0.1, {1.0, 0.0, 1.0}}) ==
        doctest::Approx(joint_by_rows(d, 0.1, 0.1, {1.0, 0.0, 1.0})).epsilon(1e-13));
  const Sym2 sig{1.7, -0.4, 0.6};
  CHECK(iv_joint_log_density(d, {-0.3, 0.8, sig}) == doctest::Approx(joint_by_rows(d, -0.3, 0.8, sig)).epsilon(1e-13));
}

TEST_CASE("marginal density") {
  // Residuals (1,0) and (0,1) give S = I.
  IVData unit{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 0.0}};
  CHECK(std::abs(iv_marginal_log_density(unit, 0.0, 0.0)) < 1e-15);
  IVData exact{{1.0, 2.0, 3.0}, {2.0, 4.0, 6.0}, {4.0, 8.0, 12.0}};
  CHECK(iv_marginal_log_density(exact, 0.5, 0.5) == kInf);
  const auto d = reference();
  const Sym2 s = iv_residual_outer(d, 0.3, -0.2);
  CHECK(iv_marginal_log_density(d, 0.3, -0.2) == doctest::Approx(-25.0 * std::log(s.det())).epsilon(1e-14));
}

TEST_CASE("simulate_iv") {
  const auto d = reference();
  CHECK(d.size() == 50);
  const auto again = reference();
  CHECK(d.y == again.y);

  const int n = 10000;
  const auto disconnected = simulate_iv(2, n, 0.5, 0.0, {1.0, 0.0, 1.0}, 0.75);
  double mx = 0, mz = 0;
  for (int i = 0; i < n; ++i) {
    mx += disconnected.x[i] / n;
    mz += disconnected.z[i] / n;
  }
  double sxz = 0, sxx = 0, szz = 0;
  for (int i = 0; i < n; ++i) {
    sxz += (disconnected.x[i] - mx) * (disconnected.z[i] - mz);
    sxx += (disconnected.x[i] - mx) * (disconnected.x[i] - mx);
    szz += (disconnected.z[i] - mz) * (disconnected.z[i] - mz);
  }
  CHECK(std::abs(sxz / std::sqrt(sxx * szz)) < 3.0 / std::sqrt(n));

  const auto big = simulate_iv(3, n, 0.1, 0.1, {1.0, 0.0, 1.0}, 0.75);
  const Sym2 s = iv_residual_outer(big, 0.1, 0.1);
  CHECK(std::abs(s.s11 / n - 1.0) < 0.05);
  CHECK(std::abs(s.s21 / n) < 0.05);
  CHECK(std::abs(s.s22 / n - 1.0) < 0.05);

  CHECK_THROWS_AS(simulate_iv(1, 10, 0.1, 0.1, {1.0, 2.0, 1.0}, 0.75), DomainError);
}

TEST_CASE("iv target spaces") {
  const IVTarget target(reference());
  CHECK(target.space().column_names() == std::vector<std::string>{"beta", "pi", "sigma11", "sigma21", "sigma22"});
  REQUIRE(target.grid_space() != nullptr);
  CHECK(target.grid_space()->column_names() == std::vector<std::string>{"beta", "pi"});
  const std::vector<double> bad{0.1, 0.1, 1.0, 2.0, 1.0};
  CHECK(target.log_density(bad) == -kInf);
  CHECK_THROWS_AS(IVTarget(IVData{{1.0}, {1.0}, {1.0}}), DomainError);
}
