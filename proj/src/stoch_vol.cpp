#include "wildpost/stoch_vol.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace wildpost {

void SVData::validate() const {
  if (returns.empty()) throw DomainError("stoch_vol: need at least one return");
}

double sv_initial_sd(double phi, double sigma) { return sigma / std::sqrt(1.0 - phi * phi); }

double sv_transition_mean(double mu, double phi, double h_prev) { return (1.0 - phi) * mu + phi * h_prev; }

double sv_log_density(const SVData& data, const SVParams& params, std::span<double> grad) {
  const auto& y = data.returns;
  const auto& h = params.h;
  const std::size_t T = y.size();
  if (h.size() != T) throw DomainError("stoch_vol: latent path length must match the data");
  if (!grad.empty()) std::fill(grad.begin(), grad.end(), 0.0);
  const double mu = params.mu, phi = params.phi, sigma = params.sigma;
  if (!(std::abs(phi) < 1.0) || !(sigma > 0.0)) return -kInf;
  // Over- or underflowed scales carry no mass.
  const double sd0 = sv_initial_sd(phi, sigma);
  if (!std::isfinite(sd0) || !(sigma * sigma > 0.0) || !std::isfinite(sigma * sigma)) return -kInf;

  double lp = dist::uniform_lpdf(phi, -1.0, 1.0) + dist::half_cauchy_lpdf(sigma, kSigmaPriorScale) +
              dist::cauchy_lpdf(mu, 0.0, kMuPriorScale);
  double g_mu = -2.0 * mu / (kMuPriorScale * kMuPriorScale + mu * mu);
  double g_phi = 0.0;
  double g_sigma = -2.0 * sigma / (kSigmaPriorScale * kSigmaPriorScale + sigma * sigma);
  std::vector<double> g_h(grad.empty() ? 0 : T, 0.0);

  const double var = sigma * sigma;
  const double one_minus_phi2 = 1.0 - phi * phi;

  // Stationary start.
  const double d0 = h[0] - mu;
  lp += dist::normal_lpdf(h[0], mu, sd0);
  if (!grad.empty()) {
    g_h[0] -= d0 * one_minus_phi2 / var;
    g_mu += d0 * one_minus_phi2 / var;
    g_phi += -phi / one_minus_phi2 + d0 * d0 * phi / var;
    g_sigma += -1.0 / sigma + d0 * d0 * one_minus_phi2 / (var * sigma);
  }

  for (std::size_t t = 1; t < T; ++t) {
    const double r = h[t] - sv_transition_mean(mu, phi, h[t - 1]);
    lp += -0.5 * kLogTwoPi - std::log(sigma) - 0.5 * r * r / var;
    if (!grad.empty()) {
      const double dr = -r / var;
      g_h[t] += dr;
      g_h[t - 1] -= dr * phi;
      g_mu -= dr * (1.0 - phi);
      g_phi -= dr * (h[t - 1] - mu);
      g_sigma += -1.0 / sigma + r * r / (var * sigma);
    }
  }

  for (std::size_t t = 0; t < T; ++t) {
    const double scaled = y[t] * y[t] * std::exp(-h[t]);
    lp += -0.5 * kLogTwoPi - 0.5 * h[t] - 0.5 * scaled;
    if (!grad.empty()) g_h[t] += -0.5 + 0.5 * scaled;
  }

  if (!grad.empty()) {
    grad[0] = g_mu;
    grad[1] = g_phi;
    grad[2] = g_sigma;
    std::copy(g_h.begin(), g_h.end(), grad.begin() + 3);
  }
  return lp;
}

SVSimulation simulate_sv(std::uint64_t seed, int T, double mu, double phi, double sigma) {
  if (T < 1) throw DomainError("simulate_sv: T must be positive");
  if (!(std::abs(phi) < 1.0)) throw DomainError("simulate_sv: |phi| must be below 1");
  if (!(sigma >= 0.0)) throw DomainError("simulate_sv: sigma must be nonnegative");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  SVSimulation sim;
  sim.h_true.reserve(static_cast<std::size_t>(T));
  double h = mu + sv_initial_sd(phi, sigma) * normal(rng);
  for (int t = 0; t < T; ++t) {
    if (t > 0) h = mu + phi * (h - mu) + sigma * normal(rng);
    sim.h_true.push_back(h);
  }
  for (double ht : sim.h_true) sim.data.returns.push_back(normal(rng) * std::exp(0.5 * ht));
  return sim;
}

namespace {

ParamSpace sv_space(std::size_t T) {
  std::vector<ParamDescriptor> d{{"mu", Support::real()},
                                 {"phi", Support::interval(-1.0, 1.0)},
                                 {"sigma", Support::positive()}};
  for (std::size_t t = 1; t <= T; ++t) d.push_back({"h" + std::to_string(t), Support::real()});
  return ParamSpace(std::move(d));
}

}  // namespace

StochVolTarget::StochVolTarget(SVData data) : data_(std::move(data)), space_(sv_space(data_.returns.size())) {
  data_.validate();
}

double StochVolTarget::log_density(std::span<const double> c, std::span<double> grad) const {
  SVParams params{c[0], c[1], c[2], std::vector<double>(c.begin() + 3, c.end())};
  return sv_log_density(data_, params, grad);
}

}  // namespace wildpost
