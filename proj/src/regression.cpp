#include "wildpost/regression.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace wildpost {

void RegressionData::validate() const {
  if (y.empty()) throw DomainError("regression: need at least one observation");
  if (X.size() != y.size()) throw DomainError("regression: X and y have different row counts");
  const auto d = cols();
  if (d == 0) throw DomainError("regression: design matrix has no columns");
  for (const auto& row : X)
    if (row.size() != d) throw DomainError("regression: ragged design matrix");
  if (!(noise_sd > 0.0)) throw DomainError("regression: noise_sd must be positive");
}

void SpikeSlabPrior::validate() const {
  if (!(spike > 0.0) || !(slab > 0.0)) throw DomainError("spike_slab: mixture scales must be positive");
  if (!(spike_var() < slab_var())) throw DomainError("spike_slab: spike must be narrower than slab");
  if (!(spike_prob > 0.0 && spike_prob < 1.0)) throw DomainError("spike_slab: spike_prob must lie in (0,1)");
}

double regression_loglik(const RegressionData& data, std::span<const double> beta, std::span<double> grad) {
  const auto d = data.cols();
  if (beta.size() != d) throw DomainError("regression: coefficient vector does not match design columns");
  if (!grad.empty() && grad.size() != d) throw DomainError("regression: gradient buffer has wrong size");
  const double var = data.noise_sd * data.noise_sd;
  double ll = 0.0;
  for (std::size_t i = 0; i < data.rows(); ++i) {
    const auto& x = data.X[i];
    double fit = 0.0;
    for (std::size_t j = 0; j < d; ++j) fit += x[j] * beta[j];
    const double r = data.y[i] - fit;
    ll += -0.5 * kLogTwoPi - std::log(data.noise_sd) - 0.5 * r * r / var;
    if (!grad.empty())
      for (std::size_t j = 0; j < d; ++j) grad[j] += x[j] * r / var;
  }
  return ll;
}

double collinear_log_density(const RegressionData& data, const CollinearPrior& prior, std::span<const double> beta,
                             std::span<double> grad) {
  if (!grad.empty()) std::fill(grad.begin(), grad.end(), 0.0);
  double lp = regression_loglik(data, beta, grad);
  const double var = prior.prior_sd * prior.prior_sd;
  for (std::size_t j = 0; j < beta.size(); ++j) {
    lp += dist::normal_lpdf(beta[j], 0.0, prior.prior_sd);
    if (!grad.empty()) grad[j] -= beta[j] / var;
  }
  return lp;
}

double spike_slab_log_prior(double beta_j, const SpikeSlabPrior& prior, double* derivative) {
  const double v_spike = prior.spike_var();
  const double v_slab = prior.slab_var();
  const double spike = std::log(prior.spike_prob) + dist::normal_lpdf(beta_j, 0.0, std::sqrt(v_spike));
  const double slab = std::log1p(-prior.spike_prob) + dist::normal_lpdf(beta_j, 0.0, std::sqrt(v_slab));
  const double total = logsumexp(spike, slab);
  if (derivative) {
    const double w_spike = std::exp(spike - total);
    const double w_slab = std::exp(slab - total);
    *derivative = -beta_j * (w_spike / v_spike + w_slab / v_slab);
  }
  return total;
}

double spike_slab_log_density(const RegressionData& data, const SpikeSlabPrior& prior, std::span<const double> beta,
                              std::span<double> grad) {
  if (!grad.empty()) std::fill(grad.begin(), grad.end(), 0.0);
  double lp = regression_loglik(data, beta, grad);
  for (std::size_t j = 0; j < beta.size(); ++j) {
    double d = 0.0;
    lp += spike_slab_log_prior(beta[j], prior, grad.empty() ? nullptr : &d);
    if (!grad.empty()) grad[j] += d;
  }
  return lp;
}

RegressionData simulate_collinear(std::uint64_t seed, int n, double rho, std::array<double, 2> beta_true) {
  if (!(std::abs(rho) < 1.0)) throw DomainError("simulate_collinear: |rho| must be below 1");
  if (n < 1) throw DomainError("simulate_collinear: n must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double tail = std::sqrt(1.0 - rho * rho);
  RegressionData data;
  for (int i = 0; i < n; ++i) {
    const double z1 = normal(rng);
    const double z2 = normal(rng);
    const double x1 = z1;
    const double x2 = rho * z1 + tail * z2;
    const double noise = normal(rng);
    data.X.push_back({x1, x2});
    data.y.push_back(x1 * beta_true[0] + x2 * beta_true[1] + noise);
  }
  return data;
}

RegressionData simulate_spike_slab(std::uint64_t seed, int n, std::array<double, 2> beta_true) {
  if (n < 1) throw DomainError("simulate_spike_slab: n must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(-2.0, 2.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  RegressionData data;
  for (int i = 0; i < n; ++i) {
    const double x1 = uniform(rng);
    const double x2 = uniform(rng);
    data.X.push_back({x1, x2});
    data.y.push_back(x1 * beta_true[0] + x2 * beta_true[1] + normal(rng));
  }
  return data;
}

CollinearTarget::CollinearTarget(RegressionData data, CollinearPrior prior)
    : data_(std::move(data)),
      prior_(prior),
      space_({{"beta1", Support::real()}, {"beta2", Support::real()}}) {
  data_.validate();
  if (data_.cols() != 2) throw DomainError("collinear: design must have two columns");
  if (!(prior_.prior_sd > 0.0)) throw DomainError("collinear: prior_sd must be positive");
}

double CollinearTarget::log_density(std::span<const double> c, std::span<double> grad) const {
  return collinear_log_density(data_, prior_, c, grad);
}

SpikeSlabTarget::SpikeSlabTarget(RegressionData data, SpikeSlabPrior prior)
    : data_(std::move(data)),
      prior_(prior),
      space_({{"beta1", Support::real()}, {"beta2", Support::real()}}) {
  data_.validate();
  prior_.validate();
  if (data_.cols() != 2) throw DomainError("spike_slab: design must have two columns");
}

double SpikeSlabTarget::log_density(std::span<const double> c, std::span<double> grad) const {
  return spike_slab_log_density(data_, prior_, c, grad);
}

}  // namespace wildpost
