#pragma once

// Brute-force reference computations. None of these call the routine they
// are used to validate; they share only the scalar log-densities.

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "wildpost/banana.hpp"
#include "wildpost/core.hpp"
#include "wildpost/instrumental.hpp"
#include "wildpost/regression.hpp"

namespace wildpost::oracle {

struct FdGradient {
  std::vector<double> grad;
  /// True where a stencil value was not finite; grad is NaN there.
  std::vector<bool> nan_flag;
};

/// Central differences (f(x + h e_i) - f(x - h e_i)) / 2h.
FdGradient fd_gradient(const std::function<double(std::span<const double>)>& f, std::span<const double> x, double h);

/// Central differences of a target's unconstrained log density.
FdGradient fd_gradient(const Target& target, std::span<const double> theta_u, double h);

inline constexpr std::size_t kMaxEnumeratedSites = 20;

/// Occupancy log-likelihood by summing over all 2^sites occupancy patterns.
double occupancy_enumerate(const OccupancyData& data, double psi, double p);

/// log sum_{N = max(y)}^{B} Poisson(N; lambda) prod_n Binomial(y_n; N, p) for
/// every bound B in `bounds` (-inf when B < max(y)).
std::vector<double> nmixture_truncation_scan(std::span<const int> y_row, double p, double lambda,
                                             std::span<const long long> bounds);

struct QuadratureResult {
  double log_value = 0.0;
  bool converged = false;
  /// Relative change from the last box expansion plus the cubature error.
  double achieved_rel_err = 0.0;
  std::string note;
};

/// log of the IV joint density integrated over Sigma, computed by nested
/// adaptive Gauss-Kronrod in Cholesky coordinates (log l11, l21, log l22).
QuadratureResult iv_sigma_quadrature(const IVData& data, double beta, double pi);

/// Spike-and-slab log posterior from the explicit sum over z in {0,1}^2.
double spike_slab_enumerate(const RegressionData& data, const SpikeSlabPrior& prior, std::span<const double> beta);

}  // namespace wildpost::oracle
