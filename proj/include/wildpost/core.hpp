#pragma once

// Shared building blocks: parameter supports and their transforms, scalar
// log-densities, and the Target interface every posterior implements.

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace wildpost {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kLogTwoPi = 1.8378770664093454835606594728112;

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised when an input is too large for an exhaustive routine.
class SizeError : public std::length_error {
 public:
  using std::length_error::length_error;
};

enum class SupportKind { real, positive, unit_interval, interval, spd2x2 };

struct Support {
  SupportKind kind = SupportKind::real;
  double lo = -kInf;
  double hi = kInf;

  static Support real() { return {SupportKind::real}; }
  static Support positive() { return {SupportKind::positive, 0.0, kInf}; }
  static Support unit_interval() { return {SupportKind::unit_interval, 0.0, 1.0}; }
  static Support interval(double a, double b);
  static Support spd2x2() { return {SupportKind::spd2x2}; }

  /// Number of scalar slots (constrained and unconstrained alike).
  std::size_t size() const { return kind == SupportKind::spd2x2 ? 3 : 1; }
  std::string describe() const;
};

struct ParamDescriptor {
  std::string name;
  Support support;
};

/// Ordered parameter list. An spd2x2 block is stored as (s11, s21, s22) in
/// constrained space and as (log l11, l21, log l22) of its Cholesky factor in
/// unconstrained space.
class ParamSpace {
 public:
  ParamSpace() = default;
  explicit ParamSpace(std::vector<ParamDescriptor> descriptors);

  const std::vector<ParamDescriptor>& descriptors() const { return descriptors_; }
  std::size_t dim_constrained() const { return dim_; }
  std::size_t dim_unconstrained() const { return dim_; }

  /// Flattened column names; an spd2x2 block `S` expands to S11, S21, S22.
  std::vector<std::string> column_names() const;
  /// Offset of a scalar parameter (or of the first slot of a block).
  std::optional<std::size_t> offset_of(std::string_view name) const;
  /// True when `c` lies strictly inside every support.
  bool contains(std::span<const double> c) const;

 private:
  std::vector<ParamDescriptor> descriptors_;
  std::size_t dim_ = 0;
};

struct ConstrainedPoint {
  std::vector<double> values;
  double log_jac = 0.0;
};

ConstrainedPoint to_constrained(const ParamSpace& space, std::span<const double> u);
std::vector<double> to_unconstrained(const ParamSpace& space, std::span<const double> c);

/// Maps a constrained-space gradient to unconstrained space and adds the
/// gradient of the log-Jacobian: grad_u = J^T grad_c + d log|J| / du.
void pullback_gradient(const ParamSpace& space, std::span<const double> u,
                       std::span<const double> grad_c, std::span<double> grad_u);

/// 17 significant digits; "inf", "-inf" and "nan" spelled out.
std::string format_real(double v);

double logsumexp(std::span<const double> v);
double logsumexp(double a, double b);

// Scalar log-densities. Invalid parameters throw DomainError; points outside
// the support give -inf.
namespace dist {
double normal_lpdf(double x, double mean, double sd);
double poisson_lpmf(long long k, double mean);
double binomial_lpmf(long long k, long long n, double p);
double bernoulli_lpmf(int k, double p);
double gamma_lpdf(double x, double shape, double rate);
double uniform_lpdf(double x, double lo, double hi);
double laplace_lpdf(double x, double loc, double scale);
double cauchy_lpdf(double x, double loc, double scale);
/// Cauchy(0, scale) restricted to x >= 0.
double half_cauchy_lpdf(double x, double scale);

double normal_cdf(double x, double mean, double sd);
double cauchy_cdf(double x, double loc, double scale);
}  // namespace dist

/// An unnormalized posterior. Implementations are immutable and safe to
/// evaluate concurrently.
class Target {
 public:
  virtual ~Target() = default;

  virtual std::string name() const = 0;
  virtual const ParamSpace& space() const = 0;

  /// Log posterior at constrained point `c`, no transform Jacobian. When
  /// `grad` is nonempty it receives d/dc.
  virtual double log_density(std::span<const double> c, std::span<double> grad = {}) const = 0;

  /// Parameters of the 2-D contour surface, or nullptr if the target has none.
  virtual const ParamSpace* grid_space() const { return &space(); }
  virtual double grid_log_density(std::span<const double> c) const { return log_density(c); }

  /// Log density on unconstrained space including the log-Jacobian.
  double log_density_unconstrained(std::span<const double> u, std::span<double> grad = {}) const;
};

}  // namespace wildpost
