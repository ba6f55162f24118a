#include "wildpost/banana.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace wildpost {

namespace {

double xlogy(double x, double y) { return x == 0.0 ? 0.0 : x * std::log(y); }

double xlog1my(double x, double y) { return x == 0.0 ? 0.0 : x * std::log1p(-y); }

// Log-terms of the abundance sum for N in [first, last], appended to `out`.
// `prev` holds the log-term at first - 1 when first > n0.
struct TermWalker {
  std::span<const int> y;
  double log_lambda;
  double repeat_log_miss;  // R * log(1 - p)

  double next(double prev, long long n) const {
    // log t_N - log t_{N-1}
    const double nd = static_cast<double>(n);
    double step = log_lambda - std::log(nd) + repeat_log_miss;
    for (int yn : y) step += std::log(nd) - std::log(nd - yn);
    return prev + step;
  }
};

}  // namespace

void NMixtureData::validate() const {
  if (counts.empty() || counts.front().empty()) throw DomainError("nmixture: need at least one site and repeat");
  for (const auto& row : counts) {
    if (row.empty()) throw DomainError("nmixture: every site needs at least one repeat");
    for (int v : row)
      if (v < 0) throw DomainError("nmixture: counts must be nonnegative");
  }
  if (!(prior_shape > 0.0) || !(prior_rate > 0.0)) throw DomainError("nmixture: gamma prior needs shape, rate > 0");
}

NMixtureSiteSum nmixture_site_sum(std::span<const int> y_row, double p, double lambda, double tol) {
  if (y_row.empty()) throw DomainError("nmixture: empty count row");
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("nmixture: p must lie in [0,1]");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("nmixture: lambda must be positive");
  if (!(tol > 0.0 && tol < 1.0)) throw DomainError("nmixture: tol must lie in (0,1)");
  long long ymax = 0;
  double ysum = 0.0;
  for (int v : y_row) {
    if (v < 0) throw DomainError("nmixture: counts must be nonnegative");
    ymax = std::max<long long>(ymax, v);
    ysum += v;
  }
  const double repeats = static_cast<double>(y_row.size());

  // First term evaluated directly, the rest by the ratio recurrence.
  double first = dist::poisson_lpmf(ymax, lambda);
  for (int v : y_row) first += dist::binomial_lpmf(v, ymax, p);

  const TermWalker walk{y_row, std::log(lambda), p == 1.0 ? -kInf : repeats * std::log1p(-p)};

  long long upper = std::max<long long>(ymax, static_cast<long long>(std::ceil(lambda))) +
                    static_cast<long long>(std::ceil(10.0 * std::sqrt(lambda + 1.0))) + 20;

  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(upper - ymax + 101));
  terms.push_back(first);
  for (long long n = ymax + 1; n <= upper; ++n) terms.push_back(walk.next(terms.back(), n));
  double total = logsumexp(terms);

  const double log_tol = std::log(tol);
  if (total > -kInf) {
    std::vector<double> block(50);
    for (;;) {
      for (std::size_t b = 0; b < block.size(); ++b) {
        const double prev = b == 0 ? terms.back() : block[b - 1];
        block[b] = walk.next(prev, upper + 1 + static_cast<long long>(b));
      }
      const double block_mass = logsumexp(block);
      terms.insert(terms.end(), block.begin(), block.end());
      upper += static_cast<long long>(block.size());
      total = logsumexp(total, block_mass);
      if (block_mass - total < log_tol) break;
    }
  }

  NMixtureSiteSum out;
  out.value = total;
  out.upper_bound = upper;
  if (total == -kInf) return out;

  // Posterior mean of N under the normalized terms.
  double mean_n = 0.0;
  for (std::size_t i = 0; i < terms.size(); ++i)
    mean_n += std::exp(terms[i] - total) * static_cast<double>(ymax + static_cast<long long>(i));
  out.d_lambda = mean_n / lambda - 1.0;
  out.d_p = (ysum > 0.0 ? ysum / p : 0.0) - (repeats * mean_n - ysum) / (1.0 - p);
  return out;
}

double nmixture_site_loglik(std::span<const int> y_row, double p, double lambda, double tol) {
  return nmixture_site_sum(y_row, p, lambda, tol).value;
}

double nmixture_log_density(const NMixtureData& data, NMixtureParams params, std::array<double, 2>* grad) {
  double lp = dist::uniform_lpdf(params.p, 0.0, 1.0) +
              dist::gamma_lpdf(params.lambda, data.prior_shape, data.prior_rate);
  double gp = 0.0;
  double gl = (data.prior_shape - 1.0) / params.lambda - data.prior_rate;
  if (lp == -kInf) {
    if (grad) *grad = {0.0, 0.0};
    return -kInf;
  }
  for (const auto& row : data.counts) {
    const auto site = nmixture_site_sum(row, params.p, params.lambda);
    lp += site.value;
    gp += site.d_p;
    gl += site.d_lambda;
  }
  if (grad) *grad = {gp, gl};
  return lp;
}

NMixtureData simulate_nmixture(std::uint64_t seed, int n_sites, int n_repeats, double lambda, double p,
                               double prior_shape, double prior_rate) {
  if (n_sites < 1 || n_repeats < 1) throw DomainError("simulate_nmixture: sizes must be positive");
  if (!(lambda > 0.0) || !(p >= 0.0 && p <= 1.0)) throw DomainError("simulate_nmixture: invalid parameters");
  std::mt19937_64 rng(seed);
  std::poisson_distribution<int> abundance(lambda);
  NMixtureData data;
  data.prior_shape = prior_shape;
  data.prior_rate = prior_rate;
  data.counts.resize(static_cast<std::size_t>(n_sites));
  for (auto& row : data.counts) {
    const int n = abundance(rng);
    std::binomial_distribution<int> detect(n, p);
    row.resize(static_cast<std::size_t>(n_repeats));
    for (auto& v : row) v = detect(rng);
  }
  data.validate();
  return data;
}

void OccupancyData::validate() const {
  if (sites.empty()) throw DomainError("occupancy: need at least one site");
  for (const auto& site : sites)
    if (site.s < 0 || site.k < 1 || site.s > site.k) throw DomainError("occupancy: need 0 <= s <= K and K >= 1");
}

namespace {

struct OccupancyTerms {
  double occupied;
  double empty;
};

OccupancyTerms occupancy_terms(int s, int k, double psi, double p) {
  if (s < 0 || s > k) throw DomainError("occupancy: need 0 <= s <= K");
  const double occupied = std::log(psi) + xlogy(s, p) + xlog1my(k - s, p);
  const double empty = s == 0 ? std::log1p(-psi) : -kInf;
  return {occupied, empty};
}

}  // namespace

double occupancy_site_loglik(int s, int k, double psi, double p) {
  const auto t = occupancy_terms(s, k, psi, p);
  return logsumexp(t.occupied, t.empty);
}

double occupancy_log_density(const OccupancyData& data, OccupancyParams params, std::array<double, 2>* grad) {
  const auto [psi, p] = params;
  if (!(psi >= 0.0 && psi <= 1.0 && p >= 0.0 && p <= 1.0)) {
    if (grad) *grad = {0.0, 0.0};
    return -kInf;
  }
  double lp = 0.0, g_psi = 0.0, g_p = 0.0;
  for (const auto& site : data.sites) {
    const auto t = occupancy_terms(site.s, site.k, psi, p);
    const double total = logsumexp(t.occupied, t.empty);
    lp += total;
    if (grad && total > -kInf) {
      const double w_occ = std::exp(t.occupied - total);
      const double w_empty = std::exp(t.empty - total);
      g_psi += w_occ / psi - w_empty / (1.0 - psi);
      const double hits = site.s > 0 ? site.s / p : 0.0;
      const double misses = site.k > site.s ? (site.k - site.s) / (1.0 - p) : 0.0;
      g_p += w_occ * (hits - misses);
    }
  }
  if (grad) *grad = {g_psi, g_p};
  return lp;
}

OccupancyData simulate_occupancy(std::uint64_t seed, int n_sites, int n_repeats, double psi, double p) {
  if (n_sites < 1 || n_repeats < 1) throw DomainError("simulate_occupancy: sizes must be positive");
  if (!(psi >= 0.0 && psi <= 1.0 && p >= 0.0 && p <= 1.0))
    throw DomainError("simulate_occupancy: psi and p must lie in [0,1]");
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution occupied(psi);
  std::bernoulli_distribution detected(p);
  OccupancyData data;
  data.sites.reserve(static_cast<std::size_t>(n_sites));
  for (int i = 0; i < n_sites; ++i) {
    const bool z = occupied(rng);
    int s = 0;
    for (int n = 0; n < n_repeats; ++n) {
      const bool y = detected(rng);
      s += (z && y) ? 1 : 0;
    }
    data.sites.push_back({s, n_repeats});
  }
  return data;
}

NMixtureTarget::NMixtureTarget(NMixtureData data)
    : data_(std::move(data)),
      space_({{"p", Support::unit_interval()}, {"lambda", Support::positive()}}) {
  data_.validate();
}

double NMixtureTarget::log_density(std::span<const double> c, std::span<double> grad) const {
  if (!(c[0] >= 0.0 && c[0] <= 1.0) || !(c[1] > 0.0)) {
    if (!grad.empty()) std::fill(grad.begin(), grad.end(), 0.0);
    return -kInf;
  }
  std::array<double, 2> g{};
  const double lp = nmixture_log_density(data_, {c[0], c[1]}, grad.empty() ? nullptr : &g);
  if (!grad.empty()) std::copy(g.begin(), g.end(), grad.begin());
  return lp;
}

OccupancyTarget::OccupancyTarget(OccupancyData data)
    : data_(std::move(data)),
      space_({{"psi", Support::unit_interval()}, {"p", Support::unit_interval()}}) {
  data_.validate();
}

double OccupancyTarget::log_density(std::span<const double> c, std::span<double> grad) const {
  std::array<double, 2> g{};
  const double lp = occupancy_log_density(data_, {c[0], c[1]}, grad.empty() ? nullptr : &g);
  if (!grad.empty()) std::copy(g.begin(), g.end(), grad.begin());
  return lp;
}

}  // namespace wildpost
