#pragma once

// N-mixture and occupancy models: latent abundance / occupancy is summed out,
// leaving a two-parameter posterior that only pins down a product of the two.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "wildpost/core.hpp"

namespace wildpost {

inline constexpr double kTruncationTol = 1e-12;

/// Counts y[i][n] at site i, repeat n, with a Gamma(shape, rate) prior on lambda.
struct NMixtureData {
  std::vector<std::vector<int>> counts;
  double prior_shape = 1.0;
  double prior_rate = 0.01;

  void validate() const;
};

struct NMixtureParams {
  double p;
  double lambda;
};

/// Result of the marginal sum over latent abundance at one site.
struct NMixtureSiteSum {
  double value = 0.0;
  double d_p = 0.0;
  double d_lambda = 0.0;
  /// Largest abundance included in the sum.
  long long upper_bound = 0;
};

/// Sums Poisson(N; lambda) * prod_n Binomial(y_n; N, p) for N from max(y) up
/// to an adaptive bound. The bound starts at
/// max(y_max, ceil(lambda)) + ceil(10 sqrt(lambda + 1)) + 20 and grows in
/// blocks of 50 until a block adds less than `tol` relative mass.
NMixtureSiteSum nmixture_site_sum(std::span<const int> y_row, double p, double lambda,
                                  double tol = kTruncationTol);

double nmixture_site_loglik(std::span<const int> y_row, double p, double lambda, double tol = kTruncationTol);

double nmixture_log_density(const NMixtureData& data, NMixtureParams params,
                            std::array<double, 2>* grad = nullptr);

NMixtureData simulate_nmixture(std::uint64_t seed, int n_sites, int n_repeats, double lambda, double p,
                               double prior_shape = 1.0, double prior_rate = 0.01);

/// Detection histories reduced to (detections, visits) per site.
struct OccupancySite {
  int s;
  int k;
};

struct OccupancyData {
  std::vector<OccupancySite> sites;

  void validate() const;
};

struct OccupancyParams {
  double psi;
  double p;
};

/// log[psi p^s (1-p)^(K-s) + (1 - psi) 1{s = 0}]
double occupancy_site_loglik(int s, int k, double psi, double p);

double occupancy_log_density(const OccupancyData& data, OccupancyParams params,
                             std::array<double, 2>* grad = nullptr);

OccupancyData simulate_occupancy(std::uint64_t seed, int n_sites, int n_repeats, double psi, double p);

class NMixtureTarget final : public Target {
 public:
  explicit NMixtureTarget(NMixtureData data);

  std::string name() const override { return "nmixture"; }
  const ParamSpace& space() const override { return space_; }
  double log_density(std::span<const double> c, std::span<double> grad = {}) const override;

  const NMixtureData& data() const { return data_; }

 private:
  NMixtureData data_;
  ParamSpace space_;
};

class OccupancyTarget final : public Target {
 public:
  explicit OccupancyTarget(OccupancyData data);

  std::string name() const override { return "occupancy"; }
  const ParamSpace& space() const override { return space_; }
  double log_density(std::span<const double> c, std::span<double> grad = {}) const override;

  const OccupancyData& data() const { return data_; }

 private:
  OccupancyData data_;
  ParamSpace space_;
};

}  // namespace wildpost
