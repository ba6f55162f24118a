#include <doctest.h>

#include <cmath>
#include <vector>

#include "wildpost/banana.hpp"
#include "wildpost/oracle.hpp"

using namespace wildpost;

namespace {

// Brute-force sum over N = ymax..bound, written without the ratio recurrence.
double direct_site_sum(const std::vector<int>& y, double p, double lambda, int bound) {
  int ymax = 0;
  for (int v : y) ymax = std::max(ymax, v);
  std::vector<double> terms;
  for (int n = ymax; n <= bound; ++n) {
    double t = n * std::log(lambda) - lambda - std::lgamma(n + 1.0);
    for (int v : y)
      t += std::lgamma(n + 1.0) - std::lgamma(v + 1.0) - std::lgamma(n - v + 1.0) + v * std::log(p) +
           (n - v) * std::log1p(-p);
    terms.push_back(t);
  }
  return logsumexp(terms);
}

}  // namespace

TEST_CASE("nmixture single repeat reduces to a thinned Poisson") {
  const std::vector<int> y{3};
  const double expected = -3.0 + 3.0 * std::log(3.0) - std::log(6.0);
  CHECK(nmixture_site_loglik(y, 0.1, 30.0) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(expected == doctest::Approx(-1.4961).epsilon(1e-4));
}

TEST_CASE("nmixture perfect detection with unequal counts is impossible") {
  const std::vector<int> y{2, 3};
  CHECK(nmixture_site_loglik(y, 1.0, 5.0) == -kInf);
}

TEST_CASE("nmixture two repeats match a direct sum") {
  const std::vector<int> y{2, 2};
  CHECK(nmixture_site_loglik(y, 0.5, 4.0) == doctest::Approx(direct_site_sum(y, 0.5, 4.0, 500)).epsilon(1e-12));
  const std::vector<int> z{0, 5, 1, 2};
  CHECK(nmixture_site_loglik(z, 0.2, 25.0) == doctest::Approx(direct_site_sum(z, 0.2, 25.0, 500)).epsilon(1e-12));
}

TEST_CASE("nmixture all-zero site at p = 0") {
  const std::vector<int> y{0, 0, 0};
  CHECK(std::abs(nmixture_site_loglik(y, 0.0, 12.0)) < 1e-14);
}

TEST_CASE("nmixture log density adds the priors") {
  NMixtureData data{{{3}}};
  const double expected = -3.0 + 3.0 * std::log(3.0) - std::log(6.0) + std::log(0.01) - 0.01 * 30.0;
  CHECK(nmixture_log_density(data, {0.1, 30.0}) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("nmixture at p = 0 with positive counts has no mass") {
  NMixtureData data{{{0, 1}, {0, 0}}};
  CHECK(nmixture_log_density(data, {0.0, 10.0}) == -kInf);
}

TEST_CASE("nmixture gradient at p = 0 on zero data is finite") {
  NMixtureData data{{{0, 0}}};
  std::array<double, 2> grad{};
  const double lp = nmixture_log_density(data, {0.0, 10.0}, &grad);
  CHECK(std::isfinite(lp));
  CHECK(std::isfinite(grad[0]));
  CHECK(std::isfinite(grad[1]));
}

TEST_CASE("nmixture truncation bound covers the tail") {
  const std::vector<int> y{4, 7, 2};
  const auto site = nmixture_site_sum(y, 0.1, 30.0);
  CHECK(site.upper_bound >= 7);
  const std::vector<long long> bounds{site.upper_bound, site.upper_bound + 50, 2000};
  const auto scan = oracle::nmixture_truncation_scan(y, 0.1, 30.0, bounds);
  CHECK(std::abs(scan[1] - scan[0]) < 1e-10);
  CHECK(std::abs(site.value - scan[2]) < 1e-10);
}

TEST_CASE("nmixture validation") {
  const std::vector<int> neg{-1};
  CHECK_THROWS_AS(nmixture_site_loglik(neg, 0.5, 1.0), DomainError);
  const std::vector<int> y{1};
  CHECK_THROWS_AS(nmixture_site_loglik(y, 1.5, 1.0), DomainError);
  CHECK_THROWS_AS(nmixture_site_loglik(y, 0.5, -1.0), DomainError);
  CHECK_THROWS_AS(NMixtureTarget(NMixtureData{}), DomainError);
}

TEST_CASE("simulate_nmixture") {
  const auto data = simulate_nmixture(3, 20, 5, 30.0, 0.1, 1.0, 0.01);
  REQUIRE(data.counts.size() == 20);
  double total = 0.0;
  for (const auto& row : data.counts) {
    REQUIRE(row.size() == 5);
    for (int v : row) total += v;
  }
  // Mean 3, sd of the mean well below 0.5 for 100 draws.
  CHECK(total / 100.0 == doctest::Approx(3.0).epsilon(0.25));

  for (const auto& row : simulate_nmixture(3, 10, 4, 30.0, 0.0, 1.0, 0.01).counts)
    for (int v : row) CHECK(v == 0);
  const auto perfect = simulate_nmixture(5, 1, 6, 30.0, 1.0, 1.0, 0.01);
  for (int v : perfect.counts[0]) CHECK(v == perfect.counts[0][0]);

  const auto again = simulate_nmixture(3, 20, 5, 30.0, 0.1, 1.0, 0.01);
  CHECK(again.counts == data.counts);
}

TEST_CASE("occupancy site likelihood") {
  CHECK(occupancy_site_loglik(0, 1, 0.5, 0.5) == doctest::Approx(std::log(0.75)).epsilon(1e-15));
  CHECK(occupancy_site_loglik(1, 1, 1.0, 0.3) == doctest::Approx(std::log(0.3)).epsilon(1e-15));
  // Occupied branch times Binomial(2; 8, 0.1) coefficient-free form.
  const double direct = std::log(0.1 * std::pow(0.1, 2) * std::pow(0.9, 6));
  CHECK(occupancy_site_loglik(2, 8, 0.1, 0.1) == doctest::Approx(direct).epsilon(1e-14));
  CHECK(occupancy_site_loglik(1, 3, 0.0, 0.5) == -kInf);
}

TEST_CASE("occupancy log density") {
  OccupancyData one{{{0, 1}}};
  CHECK(occupancy_log_density(one, {0.5, 0.5}) == doctest::Approx(std::log(0.75)).epsilon(1e-14));
  OccupancyData two{{{0, 1}, {0, 1}}};
  CHECK(occupancy_log_density(two, {0.5, 0.5}) == 2.0 * occupancy_log_density(one, {0.5, 0.5}));
  OccupancyData mixed{{{0, 8}, {3, 8}, {1, 4}}};
  CHECK(occupancy_log_density(mixed, {0.3, 0.2}) ==
        doctest::Approx(oracle::occupancy_enumerate(mixed, 0.3, 0.2)).epsilon(1e-13));
}

TEST_CASE("occupancy gradients at the boundary stay finite") {
  OccupancyData all_zero{{{0, 8}, {0, 8}}};
  std::array<double, 2> grad{};
  CHECK(std::isfinite(occupancy_log_density(all_zero, {0.3, 0.0}, &grad)));
  CHECK(std::isfinite(grad[0]));
  CHECK(std::isfinite(grad[1]));
}

TEST_CASE("simulate_occupancy") {
  for (const auto& s : simulate_occupancy(1, 50, 8, 0.0, 0.4).sites) CHECK(s.s == 0);
  for (const auto& s : simulate_occupancy(1, 50, 8, 1.0, 1.0).sites) CHECK(s.s == 8);
  // P(all-zero history) = 1 - psi (1 - (1-p)^8) ~= 0.943; averaged over 200 seeds.
  int zero = 0, total = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed)
    for (const auto& s : simulate_occupancy(seed, 100, 8, 0.1, 0.1).sites) {
      zero += s.s == 0;
      ++total;
    }
  const double expected = 1.0 - 0.1 * (1.0 - std::pow(0.9, 8));
  CHECK(static_cast<double>(zero) / total == doctest::Approx(expected).epsilon(0.005));
}

TEST_CASE("banana targets expose their parameters") {
  const NMixtureTarget nm(simulate_nmixture(1, 20, 5, 30.0, 0.1, 1.0, 0.01));
  CHECK(nm.space().column_names() == std::vector<std::string>{"p", "lambda"});
  const OccupancyTarget occ(simulate_occupancy(1, 100, 8, 0.1, 0.1));
  CHECK(occ.space().column_names() == std::vector<std::string>{"psi", "p"});
  const std::vector<double> c{0.1, 0.1};
  CHECK(occ.log_density(c) == occupancy_log_density(occ.data(), {0.1, 0.1}));
}
