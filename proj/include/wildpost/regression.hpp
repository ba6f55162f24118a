#pragma once

// Two-coefficient Gaussian linear regressions: a collinear design (needle)
// and a spike-and-slab prior with the indicators summed out (cross).

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "wildpost/core.hpp"

namespace wildpost {

struct RegressionData {
  std::vector<std::vector<double>> X;  // n rows of d covariates
  std::vector<double> y;
  double noise_sd = 1.0;

  std::size_t rows() const { return y.size(); }
  std::size_t cols() const { return X.empty() ? 0 : X.front().size(); }
  void validate() const;
};

struct CollinearPrior {
  double prior_sd = 100.0;
};

/// How the second argument of Normal(0, .) in the mixture prior is read.
enum class NormalArg { variance, sd };

struct SpikeSlabPrior {
  double spike = 0.1;
  double slab = 100.0;
  double spike_prob = 0.1;
  NormalArg normal_arg = NormalArg::variance;

  double spike_var() const { return normal_arg == NormalArg::variance ? spike : spike * spike; }
  double slab_var() const { return normal_arg == NormalArg::variance ? slab : slab * slab; }
  void validate() const;
};

/// Gaussian log-likelihood sum_i log N(y_i; x_i . beta, noise_sd^2); gradient
/// is accumulated into `grad` when nonempty.
double regression_loglik(const RegressionData& data, std::span<const double> beta, std::span<double> grad = {});

double collinear_log_density(const RegressionData& data, const CollinearPrior& prior, std::span<const double> beta,
                             std::span<double> grad = {});

/// log[q N(b; 0, v_spike) + (1 - q) N(b; 0, v_slab)]
double spike_slab_log_prior(double beta_j, const SpikeSlabPrior& prior, double* derivative = nullptr);

double spike_slab_log_density(const RegressionData& data, const SpikeSlabPrior& prior, std::span<const double> beta,
                              std::span<double> grad = {});

RegressionData simulate_collinear(std::uint64_t seed, int n, double rho, std::array<double, 2> beta_true);
RegressionData simulate_spike_slab(std::uint64_t seed, int n, std::array<double, 2> beta_true);

class CollinearTarget final : public Target {
 public:
  CollinearTarget(RegressionData data, CollinearPrior prior);

  std::string name() const override { return "collinear"; }
  const ParamSpace& space() const override { return space_; }
  double log_density(std::span<const double> c, std::span<double> grad = {}) const override;

  const RegressionData& data() const { return data_; }
  const CollinearPrior& prior() const { return prior_; }

 private:
  RegressionData data_;
  CollinearPrior prior_;
  ParamSpace space_;
};

class SpikeSlabTarget final : public Target {
 public:
  SpikeSlabTarget(RegressionData data, SpikeSlabPrior prior);

  std::string name() const override { return "spike_slab"; }
  const ParamSpace& space() const override { return space_; }
  double log_density(std::span<const double> c, std::span<double> grad = {}) const override;

  const RegressionData& data() const { return data_; }
  const SpikeSlabPrior& prior() const { return prior_; }

 private:
  RegressionData data_;
  SpikeSlabPrior prior_;
  ParamSpace space_;
};

}  // namespace wildpost
