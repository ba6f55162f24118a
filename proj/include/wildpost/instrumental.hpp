#pragma once

// Just-identified instrumental-variable regression with a |Sigma|^(-3/2)
// prior. Integrating Sigma out leaves -(n/2) log det S(beta, pi), which is
// unbounded on the set where the residual matrix S is singular.

#include <cstdint>
#include <span>
#include <vector>

#include "wildpost/core.hpp"

namespace wildpost {

struct IVData {
  std::vector<double> y;
  std::vector<double> x;
  std::vector<double> z;

  std::size_t size() const { return y.size(); }
  void validate() const;
};

/// Symmetric 2x2 matrix stored by its lower triangle.
struct Sym2 {
  double s11 = 0.0;
  double s21 = 0.0;
  double s22 = 0.0;

  double det() const { return s11 * s22 - s21 * s21; }
  bool is_spd() const { return s11 > 0.0 && det() > 0.0; }
};

struct IVParams {
  double beta;
  double pi;
  Sym2 sigma;
};

/// S = sum_i u_i u_i^T with u_i = (y_i - x_i beta, x_i - z_i pi).
Sym2 iv_residual_outer(const IVData& data, double beta, double pi);

/// -((n+3)/2) log|Sigma| - tr(Sigma^-1 S)/2 - n log(2 pi). The optional
/// gradient is ordered (beta, pi, s11, s21, s22). Throws DomainError for a
/// Sigma that is not positive definite.
double iv_joint_log_density(const IVData& data, const IVParams& params, std::span<double> grad = {});

/// -(n/2) log det S(beta, pi), with the (beta, pi)-free constant dropped.
/// Returns +inf where det S = 0.
double iv_marginal_log_density(const IVData& data, double beta, double pi);

IVData simulate_iv(std::uint64_t seed, int n, double beta, double pi, const Sym2& sigma, double instrument_prob);

class IVTarget final : public Target {
 public:
  explicit IVTarget(IVData data);

  std::string name() const override { return "iv"; }
  const ParamSpace& space() const override { return space_; }
  double log_density(std::span<const double> c, std::span<double> grad = {}) const override;

  const ParamSpace* grid_space() const override { return &marginal_space_; }
  double grid_log_density(std::span<const double> c) const override;

  const IVData& data() const { return data_; }

 private:
  IVData data_;
  ParamSpace space_;
  ParamSpace marginal_space_;
};

}  // namespace wildpost
