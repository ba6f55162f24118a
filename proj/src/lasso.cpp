#include "wildpost/lasso.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace wildpost {

void LassoData::validate() const {
  if (y.empty()) throw DomainError("lasso: need at least one observation");
  if (x.size() != y.size()) throw DomainError("lasso: x and y differ in length");
  if (!(sigma > 0.0)) throw DomainError("lasso: sigma must be positive");
}

std::string to_string(LaplaceConvention convention) {
  return convention == LaplaceConvention::scale ? "scale" : "rate";
}

double lasso_log_density(const LassoData& data, LassoParams params, LaplaceConvention convention,
                         std::span<double> grad) {
  const auto [beta, lambda] = params;
  if (!grad.empty()) std::fill(grad.begin(), grad.end(), 0.0);
  const double hyper = dist::uniform_lpdf(lambda, kLassoLambdaLo, kLassoLambdaHi);
  if (hyper == -kInf || lambda <= kLassoLambdaLo || lambda >= kLassoLambdaHi) return -kInf;

  const double var = data.sigma * data.sigma;
  double lp = hyper;
  double d_beta = 0.0;
  for (std::size_t i = 0; i < data.y.size(); ++i) {
    const double r = data.y[i] - data.x[i] * beta;
    lp += dist::normal_lpdf(data.y[i], data.x[i] * beta, data.sigma);
    d_beta += data.x[i] * r / var;
  }

  const double a = std::abs(beta);
  const double sign = beta > 0.0 ? 1.0 : (beta < 0.0 ? -1.0 : 0.0);
  double d_lambda = 0.0;
  if (convention == LaplaceConvention::scale) {
    lp += dist::laplace_lpdf(beta, 0.0, lambda);
    d_beta -= sign / lambda;
    d_lambda = -1.0 / lambda + a / (lambda * lambda);
  } else {
    lp += dist::laplace_lpdf(beta, 0.0, 1.0 / lambda);
    d_beta -= sign * lambda;
    d_lambda = 1.0 / lambda - a;
  }
  if (!grad.empty()) {
    grad[0] = d_beta;
    grad[1] = d_lambda;
  }
  return lp;
}

LassoData simulate_lasso(std::uint64_t seed, int n, double beta_true, double sigma) {
  if (n < 1) throw DomainError("simulate_lasso: n must be positive");
  if (sigma < 0.0) throw DomainError("simulate_lasso: sigma must be nonnegative");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  LassoData data;
  data.sigma = sigma;
  for (int i = 0; i < n; ++i) {
    data.x.push_back(1.0);
    data.y.push_back(beta_true + sigma * normal(rng));
  }
  return data;
}

LassoTarget::LassoTarget(LassoData data, LaplaceConvention convention)
    : data_(std::move(data)),
      convention_(convention),
      space_({{"beta", Support::real()}, {"lambda", Support::interval(kLassoLambdaLo, kLassoLambdaHi)}}) {
  data_.validate();
}

double LassoTarget::log_density(std::span<const double> c, std::span<double> grad) const {
  return lasso_log_density(data_, {c[0], c[1]}, convention_, grad);
}

}  // namespace wildpost
