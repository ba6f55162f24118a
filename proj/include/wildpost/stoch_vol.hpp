#pragma once

// Stochastic volatility with an AR(1) log-variance:
//   y_t = eps_t exp(h_t / 2),  h_{t+1} = mu + phi (h_t - mu) + sigma delta_t,
//   h_1 ~ N(mu, sd = sigma / sqrt(1 - phi^2)).
// Priors: phi ~ U(-1, 1), sigma ~ half-Cauchy(0, 5), mu ~ Cauchy(0, 10).

#include <cstdint>
#include <span>
#include <vector>

#include "wildpost/core.hpp"

namespace wildpost {

inline constexpr double kSigmaPriorScale = 5.0;
inline constexpr double kMuPriorScale = 10.0;

struct SVData {
  std::vector<double> returns;

  void validate() const;
};

struct SVParams {
  double mu;
  double phi;
  double sigma;
  std::vector<double> h;
};

/// Standard deviation of the stationary h_1 prior.
double sv_initial_sd(double phi, double sigma);

/// Conditional mean of h_{t+1} given h_t, written as (1 - phi) mu + phi h_t.
double sv_transition_mean(double mu, double phi, double h_prev);

/// Joint log density over (mu, phi, sigma, h_1..h_T). Returns -inf when
/// |phi| >= 1 or sigma <= 0. The optional gradient follows the same order.
double sv_log_density(const SVData& data, const SVParams& params, std::span<double> grad = {});

struct SVSimulation {
  SVData data;
  std::vector<double> h_true;
};

SVSimulation simulate_sv(std::uint64_t seed, int T, double mu, double phi, double sigma);

class StochVolTarget final : public Target {
 public:
  explicit StochVolTarget(SVData data);

  std::string name() const override { return "stoch_vol"; }
  const ParamSpace& space() const override { return space_; }
  double log_density(std::span<const double> c, std::span<double> grad = {}) const override;

  /// No two-parameter surface exists; the (phi, mu) picture comes from draws.
  const ParamSpace* grid_space() const override { return nullptr; }

  const SVData& data() const { return data_; }

 private:
  SVData data_;
  ParamSpace space_;
};

}  // namespace wildpost
