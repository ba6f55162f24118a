#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wildpost/core.hpp"

namespace wildpost {

inline constexpr double kLassoLambdaLo = 0.001;
inline constexpr double kLassoLambdaHi = 10.0;

/// Single-covariate Gaussian regression with known noise sd.
struct LassoData {
  std::vector<double> x;
  std::vector<double> y;
  double sigma = 8.0;

  void validate() const;
};

struct LassoParams {
  double beta;
  double lambda;
};

/// scale: (1 / 2 lambda) exp(-|b| / lambda); rate: (lambda / 2) exp(-lambda |b|).
enum class LaplaceConvention { scale, rate };

std::string to_string(LaplaceConvention convention);

/// Joint log posterior of (beta, lambda) under a uniform hyperprior on
/// lambda over (0.001, 10). Outside that interval the result is -inf. At
/// beta = 0 the prior's derivative uses the zero subgradient.
double lasso_log_density(const LassoData& data, LassoParams params, LaplaceConvention convention,
                         std::span<double> grad = {});

LassoData simulate_lasso(std::uint64_t seed, int n, double beta_true, double sigma);

class LassoTarget final : public Target {
 public:
  LassoTarget(LassoData data, LaplaceConvention convention);

  std::string name() const override { return "adaptive_lasso"; }
  const ParamSpace& space() const override { return space_; }
  double log_density(std::span<const double> c, std::span<double> grad = {}) const override;

  LaplaceConvention convention() const { return convention_; }
  const LassoData& data() const { return data_; }

 private:
  LassoData data_;
  LaplaceConvention convention_;
  ParamSpace space_;
};

}  // namespace wildpost
