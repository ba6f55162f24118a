#pragma once

// Reference MCMC on unconstrained space: adaptive random-walk Metropolis and
// static-path HMC with dual-averaging step size. Draws are reported in
// constrained space.

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "wildpost/core.hpp"

namespace wildpost {

enum class Algorithm { rwm, hmc };

std::string to_string(Algorithm algorithm);

struct SamplerConfig {
  Algorithm algorithm = Algorithm::hmc;
  int chains = 4;
  int warmup = 1000;
  int iters = 1000;
  std::uint64_t seed = 0;
  double target_accept = 0.8;
  int leapfrog_steps = 32;
  double leapfrog_jitter = 0.5;

  /// Config with the per-algorithm default acceptance target (0.8 hmc, 0.3 rwm).
  static SamplerConfig defaults(Algorithm algorithm);
  void validate() const;
};

class InitializationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ParamDiagnostics {
  std::string name;
  double rhat;
  double ess;
};

struct ChainSet {
  std::vector<std::string> names;
  std::size_t dim = 0;
  std::size_t iters = 0;
  /// draws[chain][iter * dim + k]
  std::vector<std::vector<double>> draws;
  std::vector<double> accept_rate;
  std::vector<double> step_size;
  std::vector<int> divergences;
  /// Step size / proposal scale used at each post-warmup iteration.
  std::vector<std::vector<double>> step_trace;
  std::vector<ParamDiagnostics> diagnostics;

  double draw(std::size_t chain, std::size_t iter, std::size_t k) const { return draws[chain][iter * dim + k]; }
  /// Per-chain series of one parameter.
  std::vector<std::vector<double>> series(std::size_t k) const;
};

ChainSet rwm_sample(const Target& target, const SamplerConfig& config);
ChainSet hmc_sample(const Target& target, const SamplerConfig& config);
ChainSet sample(const Target& target, const SamplerConfig& config);

struct PhasePoint {
  std::vector<double> q;
  std::vector<double> p;
  double log_density = 0.0;
  bool finite = true;
};

/// `steps` leapfrog steps of size `eps` on the unconstrained log density
/// with identity mass matrix. Stops early and sets finite = false on a
/// non-finite density or gradient.
PhasePoint leapfrog(const Target& target, std::vector<double> q, std::vector<double> p, double eps, int steps);

/// Split-chain potential scale reduction. Returns +inf when the within-chain
/// variance is zero.
double split_rhat(const std::vector<std::vector<double>>& chains);

/// Multi-chain effective sample size from autocovariances, truncated at the
/// first negative sum of adjacent-lag pairs; capped at 1.05 x total draws.
/// Constant input gives 0.
double ess(const std::vector<std::vector<double>>& chains);

void compute_diagnostics(ChainSet& set);

/// Draws CSV (`chain,iter,<params>`) and the diagnostics JSON sidecar.
void write_draws(const ChainSet& set, const std::filesystem::path& csv_path);
void write_diagnostics(const ChainSet& set, const std::filesystem::path& json_path);

/// Isotropic standard normal on R^dim, used to calibrate the samplers.
class StandardNormalTarget final : public Target {
 public:
  explicit StandardNormalTarget(std::size_t dim);

  std::string name() const override { return "std_normal"; }
  const ParamSpace& space() const override { return space_; }
  double log_density(std::span<const double> c, std::span<double> grad = {}) const override;

 private:
  ParamSpace space_;
};

}  // namespace wildpost
