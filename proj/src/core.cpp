#include "wildpost/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <set>
#include <sstream>

namespace wildpost {

namespace {

// Logistic with its two logs, stable for large |u|.
struct Logistic {
  double value;
  double log_value;
  double log_complement;
};

Logistic logistic(double u) {
  if (u >= 0.0) {
    const double t = std::log1p(std::exp(-u));
    return {1.0 / (1.0 + std::exp(-u)), -t, -u - t};
  }
  const double t = std::log1p(std::exp(u));
  const double e = std::exp(u);
  return {e / (1.0 + e), u - t, -t};
}

double logit(double s) { return std::log(s) - std::log1p(-s); }

// Keeps a mapped value strictly inside (lo, hi) when the logistic saturates.
double clamp_open(double c, double lo, double hi) {
  return std::clamp(c, std::nextafter(lo, hi), std::nextafter(hi, lo));
}

}  // namespace

Support Support::interval(double a, double b) {
  if (!(a < b)) throw DomainError("interval support requires lo < hi");
  return {SupportKind::interval, a, b};
}

std::string Support::describe() const {
  switch (kind) {
    case SupportKind::real: return "real";
    case SupportKind::positive: return "positive";
    case SupportKind::unit_interval: return "unit_interval";
    case SupportKind::spd2x2: return "spd2x2";
    case SupportKind::interval: {
      std::ostringstream os;
      os << "interval(" << lo << "," << hi << ")";
      return os.str();
    }
  }
  return "?";
}

ParamSpace::ParamSpace(std::vector<ParamDescriptor> descriptors) : descriptors_(std::move(descriptors)) {
  std::set<std::string> seen;
  for (const auto& d : descriptors_) {
    if (!seen.insert(d.name).second) throw DomainError("duplicate parameter name: " + d.name);
    if (d.support.kind == SupportKind::interval && !(d.support.lo < d.support.hi))
      throw DomainError("interval support requires lo < hi: " + d.name);
    dim_ += d.support.size();
  }
}

std::vector<std::string> ParamSpace::column_names() const {
  std::vector<std::string> names;
  names.reserve(dim_);
  for (const auto& d : descriptors_) {
    if (d.support.kind == SupportKind::spd2x2) {
      names.push_back(d.name + "11");
      names.push_back(d.name + "21");
      names.push_back(d.name + "22");
    } else {
      names.push_back(d.name);
    }
  }
  return names;
}

std::optional<std::size_t> ParamSpace::offset_of(std::string_view name) const {
  std::size_t offset = 0;
  for (const auto& d : descriptors_) {
    if (d.name == name) return offset;
    offset += d.support.size();
  }
  return std::nullopt;
}

bool ParamSpace::contains(std::span<const double> c) const {
  if (c.size() != dim_) return false;
  std::size_t k = 0;
  for (const auto& d : descriptors_) {
    const auto& s = d.support;
    switch (s.kind) {
      case SupportKind::real:
        if (!std::isfinite(c[k])) return false;
        break;
      case SupportKind::positive:
        if (!(c[k] > 0.0) || !std::isfinite(c[k])) return false;
        break;
      case SupportKind::unit_interval:
      case SupportKind::interval:
        if (!(c[k] > s.lo && c[k] < s.hi)) return false;
        break;
      case SupportKind::spd2x2: {
        const double a = c[k], b = c[k + 1], e = c[k + 2];
        if (!(a > 0.0) || !(a * e - b * b > 0.0)) return false;
        break;
      }
    }
    k += s.size();
  }
  return true;
}

ConstrainedPoint to_constrained(const ParamSpace& space, std::span<const double> u) {
  if (u.size() != space.dim_unconstrained())
    throw DomainError("to_constrained: expected " + std::to_string(space.dim_unconstrained()) +
                      " coordinates, got " + std::to_string(u.size()));
  ConstrainedPoint out;
  out.values.resize(space.dim_constrained());
  std::size_t k = 0;
  for (const auto& d : space.descriptors()) {
    const auto& s = d.support;
    switch (s.kind) {
      case SupportKind::real:
        out.values[k] = u[k];
        break;
      case SupportKind::positive:
        out.values[k] = std::exp(u[k]);
        out.log_jac += u[k];
        break;
      case SupportKind::unit_interval:
      case SupportKind::interval: {
        const auto l = logistic(u[k]);
        const double width = s.hi - s.lo;
        out.values[k] = clamp_open(s.lo + width * l.value, s.lo, s.hi);
        out.log_jac += std::log(width) + l.log_value + l.log_complement;
        break;
      }
      case SupportKind::spd2x2: {
        const double l11 = std::exp(u[k]);
        const double l21 = u[k + 1];
        const double l22 = std::exp(u[k + 2]);
        out.values[k] = l11 * l11;
        out.values[k + 1] = l11 * l21;
        out.values[k + 2] = l21 * l21 + l22 * l22;
        out.log_jac += std::numbers::ln2 * 2.0 + 3.0 * u[k] + 2.0 * u[k + 2];
        break;
      }
    }
    k += s.size();
  }
  return out;
}

std::vector<double> to_unconstrained(const ParamSpace& space, std::span<const double> c) {
  if (c.size() != space.dim_constrained())
    throw DomainError("to_unconstrained: expected " + std::to_string(space.dim_constrained()) +
                      " values, got " + std::to_string(c.size()));
  std::vector<double> u(space.dim_unconstrained());
  std::size_t k = 0;
  for (const auto& d : space.descriptors()) {
    const auto& s = d.support;
    const auto outside = [&] { return DomainError("value outside support of parameter " + d.name); };
    switch (s.kind) {
      case SupportKind::real:
        if (!std::isfinite(c[k])) throw outside();
        u[k] = c[k];
        break;
      case SupportKind::positive:
        if (!(c[k] > 0.0) || !std::isfinite(c[k])) throw outside();
        u[k] = std::log(c[k]);
        break;
      case SupportKind::unit_interval:
      case SupportKind::interval:
        if (!(c[k] > s.lo && c[k] < s.hi)) throw outside();
        u[k] = logit((c[k] - s.lo) / (s.hi - s.lo));
        break;
      case SupportKind::spd2x2: {
        const double a = c[k], b = c[k + 1], e = c[k + 2];
        if (!(a > 0.0) || !(a * e - b * b > 0.0)) throw outside();
        const double l11 = std::sqrt(a);
        const double l21 = b / l11;
        const double l22 = std::sqrt(e - l21 * l21);
        u[k] = std::log(l11);
        u[k + 1] = l21;
        u[k + 2] = std::log(l22);
        break;
      }
    }
    k += s.size();
  }
  return u;
}

void pullback_gradient(const ParamSpace& space, std::span<const double> u,
                       std::span<const double> grad_c, std::span<double> grad_u) {
  std::size_t k = 0;
  for (const auto& d : space.descriptors()) {
    const auto& s = d.support;
    switch (s.kind) {
      case SupportKind::real:
        grad_u[k] = grad_c[k];
        break;
      case SupportKind::positive:
        grad_u[k] = grad_c[k] * std::exp(u[k]) + 1.0;
        break;
      case SupportKind::unit_interval:
      case SupportKind::interval: {
        const auto l = logistic(u[k]);
        const double slope = (s.hi - s.lo) * std::exp(l.log_value + l.log_complement);
        grad_u[k] = grad_c[k] * slope + (1.0 - 2.0 * l.value);
        break;
      }
      case SupportKind::spd2x2: {
        const double l11 = std::exp(u[k]);
        const double l21 = u[k + 1];
        const double l22 = std::exp(u[k + 2]);
        const double g0 = grad_c[k], g1 = grad_c[k + 1], g2 = grad_c[k + 2];
        grad_u[k] = g0 * 2.0 * l11 * l11 + g1 * l11 * l21 + 3.0;
        grad_u[k + 1] = g1 * l11 + g2 * 2.0 * l21;
        grad_u[k + 2] = g2 * 2.0 * l22 * l22 + 2.0;
        break;
      }
    }
    k += s.size();
  }
}

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double logsumexp(std::span<const double> v) {
  if (v.empty()) throw DomainError("logsumexp of an empty vector");
  const double m = *std::max_element(v.begin(), v.end());
  if (m == -kInf || m == kInf) return m;
  double acc = 0.0;
  for (double x : v) acc += std::exp(x - m);
  return m + std::log(acc);
}

double logsumexp(double a, double b) {
  const double m = std::max(a, b);
  if (m == -kInf || m == kInf) return m;
  return m + std::log1p(std::exp(std::min(a, b) - m));
}

namespace dist {

namespace {
void require(bool ok, const char* what) {
  if (!ok) throw DomainError(what);
}
}  // namespace

double normal_lpdf(double x, double mean, double sd) {
  require(sd > 0.0 && std::isfinite(sd), "normal: sd must be positive");
  const double z = (x - mean) / sd;
  return -0.5 * kLogTwoPi - std::log(sd) - 0.5 * z * z;
}

double poisson_lpmf(long long k, double mean) {
  require(mean >= 0.0 && std::isfinite(mean), "poisson: mean must be nonnegative");
  if (k < 0) return -kInf;
  if (mean == 0.0) return k == 0 ? 0.0 : -kInf;
  const auto kd = static_cast<double>(k);
  return kd * std::log(mean) - mean - std::lgamma(kd + 1.0);
}

double binomial_lpmf(long long k, long long n, double p) {
  require(n >= 0, "binomial: size must be nonnegative");
  require(p >= 0.0 && p <= 1.0, "binomial: p must lie in [0,1]");
  if (k < 0 || k > n) return -kInf;
  if (p == 0.0) return k == 0 ? 0.0 : -kInf;
  if (p == 1.0) return k == n ? 0.0 : -kInf;
  const auto kd = static_cast<double>(k);
  const auto nd = static_cast<double>(n);
  return std::lgamma(nd + 1.0) - std::lgamma(kd + 1.0) - std::lgamma(nd - kd + 1.0) + kd * std::log(p) +
         (nd - kd) * std::log1p(-p);
}

double bernoulli_lpmf(int k, double p) { return binomial_lpmf(k, 1, p); }

double gamma_lpdf(double x, double shape, double rate) {
  require(shape > 0.0 && rate > 0.0, "gamma: shape and rate must be positive");
  if (!(x > 0.0)) return -kInf;
  return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

double uniform_lpdf(double x, double lo, double hi) {
  require(lo < hi, "uniform: lo must be below hi");
  if (x < lo || x > hi) return -kInf;
  return -std::log(hi - lo);
}

double laplace_lpdf(double x, double loc, double scale) {
  require(scale > 0.0, "laplace: scale must be positive");
  return -std::log(2.0 * scale) - std::abs(x - loc) / scale;
}

double cauchy_lpdf(double x, double loc, double scale) {
  require(scale > 0.0, "cauchy: scale must be positive");
  const double z = (x - loc) / scale;
  return -std::log(std::numbers::pi * scale) - std::log1p(z * z);
}

double half_cauchy_lpdf(double x, double scale) {
  if (x < 0.0) return -kInf;
  return std::numbers::ln2 + cauchy_lpdf(x, 0.0, scale);
}

double normal_cdf(double x, double mean, double sd) {
  require(sd > 0.0, "normal: sd must be positive");
  return 0.5 * std::erfc(-(x - mean) / (sd * std::numbers::sqrt2));
}

double cauchy_cdf(double x, double loc, double scale) {
  require(scale > 0.0, "cauchy: scale must be positive");
  return 0.5 + std::atan((x - loc) / scale) / std::numbers::pi;
}

}  // namespace dist

double Target::log_density_unconstrained(std::span<const double> u, std::span<double> grad) const {
  const auto point = to_constrained(space(), u);
  if (grad.empty()) return log_density(point.values) + point.log_jac;
  std::vector<double> grad_c(point.values.size(), 0.0);
  const double lp = log_density(point.values, grad_c);
  pullback_gradient(space(), u, grad_c, grad);
  return lp + point.log_jac;
}

}  // namespace wildpost
