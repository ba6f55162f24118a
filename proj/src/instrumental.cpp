#include "wildpost/instrumental.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace wildpost {

void IVData::validate() const {
  if (x.size() != y.size() || z.size() != y.size()) throw DomainError("iv: y, x and z must have equal length");
  if (y.size() < 3) throw DomainError("iv: need at least 3 observations");
}

Sym2 iv_residual_outer(const IVData& data, double beta, double pi) {
  Sym2 s;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double e = data.y[i] - data.x[i] * beta;
    const double v = data.x[i] - data.z[i] * pi;
    s.s11 += e * e;
    s.s21 += e * v;
    s.s22 += v * v;
  }
  return s;
}

double iv_joint_log_density(const IVData& data, const IVParams& params, std::span<double> grad) {
  const auto& sig = params.sigma;
  if (!sig.is_spd()) throw DomainError("iv: Sigma must be symmetric positive definite");
  const double n = static_cast<double>(data.size());
  const double a = sig.s11, b = sig.s21, c = sig.s22;
  const double det = sig.det();
  const Sym2 s = iv_residual_outer(data, params.beta, params.pi);
  const double quad = c * s.s11 - 2.0 * b * s.s21 + a * s.s22;  // det * tr(Sigma^-1 S)
  const double k = 0.5 * (n + 3.0);
  const double lp = -k * std::log(det) - 0.5 * quad / det - n * kLogTwoPi;

  if (!grad.empty()) {
    double d_beta = 0.0, d_pi = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double e = data.y[i] - data.x[i] * params.beta;
      const double v = data.x[i] - data.z[i] * params.pi;
      d_beta += data.x[i] * (c * e - b * v) / det;
      d_pi += data.z[i] * (a * v - b * e) / det;
    }
    const double det2 = det * det;
    grad[0] = d_beta;
    grad[1] = d_pi;
    grad[2] = -k * c / det - (s.s22 * det - quad * c) / (2.0 * det2);
    grad[3] = 2.0 * k * b / det + (s.s21 * det - quad * b) / det2;
    grad[4] = -k * a / det - (s.s11 * det - quad * a) / (2.0 * det2);
  }
  return lp;
}

double iv_marginal_log_density(const IVData& data, double beta, double pi) {
  const double det = iv_residual_outer(data, beta, pi).det();
  if (!(det > 0.0)) return kInf;
  return -0.5 * static_cast<double>(data.size()) * std::log(det);
}

IVData simulate_iv(std::uint64_t seed, int n, double beta, double pi, const Sym2& sigma, double instrument_prob) {
  if (n < 1) throw DomainError("simulate_iv: n must be positive");
  if (!sigma.is_spd()) throw DomainError("simulate_iv: Sigma must be positive definite");
  if (!(instrument_prob > 0.0 && instrument_prob < 1.0))
    throw DomainError("simulate_iv: instrument_prob must lie in (0,1)");
  const double l11 = std::sqrt(sigma.s11);
  const double l21 = sigma.s21 / l11;
  const double l22 = std::sqrt(sigma.s22 - l21 * l21);

  std::mt19937_64 rng(seed);
  std::bernoulli_distribution instrument(instrument_prob);
  std::normal_distribution<double> normal(0.0, 1.0);
  IVData data;
  for (int i = 0; i < n; ++i) {
    const double z = instrument(rng) ? 1.0 : 0.0;
    const double e1 = normal(rng);
    const double e2 = normal(rng);
    const double eps = l11 * e1;
    const double v = l21 * e1 + l22 * e2;
    const double x = z * pi + v;
    data.z.push_back(z);
    data.x.push_back(x);
    data.y.push_back(x * beta + eps);
  }
  return data;
}

IVTarget::IVTarget(IVData data)
    : data_(std::move(data)),
      space_({{"beta", Support::real()}, {"pi", Support::real()}, {"sigma", Support::spd2x2()}}),
      marginal_space_({{"beta", Support::real()}, {"pi", Support::real()}}) {
  data_.validate();
}

double IVTarget::log_density(std::span<const double> c, std::span<double> grad) const {
  const Sym2 sigma{c[2], c[3], c[4]};
  if (!sigma.is_spd()) {
    if (!grad.empty()) std::fill(grad.begin(), grad.end(), 0.0);
    return -kInf;
  }
  return iv_joint_log_density(data_, {c[0], c[1], sigma}, grad);
}

double IVTarget::grid_log_density(std::span<const double> c) const {
  return iv_marginal_log_density(data_, c[0], c[1]);
}

}  // namespace wildpost
