#include "wildpost/oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace wildpost::oracle {

FdGradient fd_gradient(const std::function<double(std::span<const double>)>& f, std::span<const double> x, double h) {
  FdGradient out;
  out.grad.resize(x.size());
  out.nan_flag.assign(x.size(), false);
  std::vector<double> probe(x.begin(), x.end());
  for (std::size_t i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double up = f(probe);
    probe[i] = x[i] - h;
    const double down = f(probe);
    probe[i] = x[i];
    if (!std::isfinite(up) || !std::isfinite(down)) {
      out.grad[i] = std::numeric_limits<double>::quiet_NaN();
      out.nan_flag[i] = true;
    } else {
      out.grad[i] = (up - down) / (2.0 * h);
    }
  }
  return out;
}

FdGradient fd_gradient(const Target& target, std::span<const double> theta_u, double h) {
  return fd_gradient([&](std::span<const double> u) { return target.log_density_unconstrained(u); }, theta_u, h);
}

double occupancy_enumerate(const OccupancyData& data, double psi, double p) {
  const std::size_t n = data.sites.size();
  if (n > kMaxEnumeratedSites) throw SizeError("occupancy_enumerate: at most 20 sites");
  // Per-site log weight of each branch.
  std::vector<std::array<double, 2>> branch(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto [s, k] = data.sites[i];
    double history = 0.0;
    for (int visit = 0; visit < k; ++visit) history += dist::bernoulli_lpmf(visit < s ? 1 : 0, p);
    double unoccupied = 0.0;
    for (int visit = 0; visit < k; ++visit) unoccupied += dist::bernoulli_lpmf(visit < s ? 1 : 0, 0.0);
    branch[i] = {std::log1p(-psi) + unoccupied, std::log(psi) + history};
  }
  const std::size_t patterns = std::size_t{1} << n;
  std::vector<double> terms;
  terms.reserve(std::min<std::size_t>(patterns, 4096));
  double total = -kInf;
  for (std::size_t z = 0; z < patterns; ++z) {
    double t = 0.0;
    for (std::size_t i = 0; i < n; ++i) t += branch[i][(z >> i) & 1U];
    terms.push_back(t);
    if (terms.size() == 4096) {
      total = logsumexp(total, logsumexp(terms));
      terms.clear();
    }
  }
  if (!terms.empty()) total = logsumexp(total, logsumexp(terms));
  return total;
}

std::vector<double> nmixture_truncation_scan(std::span<const int> y_row, double p, double lambda,
                                             std::span<const long long> bounds) {
  const long long ymax = y_row.empty() ? 0 : *std::max_element(y_row.begin(), y_row.end());
  std::vector<double> out;
  out.reserve(bounds.size());
  for (long long bound : bounds) {
    if (bound < ymax) {
      out.push_back(-kInf);
      continue;
    }
    std::vector<double> terms;
    for (long long n = ymax; n <= bound; ++n) {
      double t = dist::poisson_lpmf(n, lambda);
      for (int y : y_row) t += dist::binomial_lpmf(y, n, p);
      terms.push_back(t);
    }
    out.push_back(logsumexp(terms));
  }
  return out;
}

namespace {

using boost::math::quadrature::gauss_kronrod;

constexpr double kInnerTol = 1e-8;
constexpr unsigned kMaxDepth = 12;

struct CholeskyCoords {
  std::array<double, 3> v;  // log l11, l21, log l22
};

Sym2 sigma_from(const std::array<double, 3>& v) {
  const double l11 = std::exp(v[0]), l21 = v[1], l22 = std::exp(v[2]);
  return {l11 * l11, l11 * l21, l21 * l21 + l22 * l22};
}

}  // namespace

QuadratureResult iv_sigma_quadrature(const IVData& data, double beta, double pi) {
  QuadratureResult result;
  // Residual matrix by direct summation for the box placement.
  double s11 = 0.0, s21 = 0.0, s22 = 0.0;
  for (std::size_t i = 0; i < data.y.size(); ++i) {
    const double e = data.y[i] - data.x[i] * beta;
    const double v = data.x[i] - data.z[i] * pi;
    s11 += e * e;
    s21 += e * v;
    s22 += v * v;
  }
  const double det = s11 * s22 - s21 * s21;
  if (!(det > 0.0)) {
    result.log_value = kInf;
    result.note = "singular residual matrix";
    return result;
  }

  // Box centre: Cholesky of the inverse-Wishart mode S / (n + 3).
  const double n = static_cast<double>(data.y.size());
  const double m11 = s11 / (n + 3.0), m21 = s21 / (n + 3.0), m22 = s22 / (n + 3.0);
  const double c11 = std::sqrt(m11), c21 = m21 / c11, c22 = std::sqrt(m22 - c21 * c21);
  const std::array<double, 3> centre{std::log(c11), c21, std::log(c22)};

  auto log_integrand = [&](const std::array<double, 3>& v) {
    const double log_jac = std::log(4.0) + 3.0 * v[0] + 2.0 * v[2];
    return iv_joint_log_density(data, {beta, pi, sigma_from(v)}) + log_jac;
  };
  const double ref = log_integrand(centre);

  // Per-axis scale from the diagonal of a finite-difference Hessian.
  std::array<double, 3> scale{};
  for (int k = 0; k < 3; ++k) {
    const double h = 1e-3 * std::max(1.0, std::abs(centre[k]));
    auto up = centre, down = centre;
    up[k] += h;
    down[k] -= h;
    const double curv = (log_integrand(up) - 2.0 * ref + log_integrand(down)) / (h * h);
    scale[k] = curv < 0.0 ? 1.0 / std::sqrt(-curv) : 1.0;
  }

  double cubature_err = 0.0;
  auto integrate_box = [&](double width) {
    cubature_err = 0.0;
    auto inner = [&](double v0, double v1) {
      double err = 0.0;
      const double r = gauss_kronrod<double, 15>::integrate(
          [&](double v2) { return std::exp(log_integrand({v0, v1, v2}) - ref); }, centre[2] - width * scale[2],
          centre[2] + width * scale[2], kMaxDepth, kInnerTol, &err);
      return r;
    };
    auto middle = [&](double v0) {
      double err = 0.0;
      return gauss_kronrod<double, 15>::integrate([&](double v1) { return inner(v0, v1); },
                                                  centre[1] - width * scale[1], centre[1] + width * scale[1],
                                                  kMaxDepth, kInnerTol, &err);
    };
    double err = 0.0;
    const double total = gauss_kronrod<double, 15>::integrate(
        middle, centre[0] - width * scale[0], centre[0] + width * scale[0], kMaxDepth, kInnerTol, &err);
    cubature_err = total > 0.0 ? err / total : kInf;
    return total;
  };

  // Expand the box until the added shell changes the integral by < 1e-6.
  constexpr double kBoundaryTol = 1e-6;
  double width = 8.0;
  double previous = integrate_box(width);
  double change = kInf;
  for (int expansion = 0; expansion < 8; ++expansion) {
    width *= 1.5;
    const double current = integrate_box(width);
    change = std::abs(current - previous) / current;
    previous = current;
    if (change < kBoundaryTol) break;
  }
  result.log_value = std::log(previous) + ref;
  result.achieved_rel_err = change + cubature_err;
  result.converged = change < kBoundaryTol && cubature_err < 1e-6;
  if (!result.converged) result.note = "box expansion or cubature did not reach tolerance";
  if (det < 1e-6) {
    result.converged = false;
    result.note = "near-singular residual matrix (det S < 1e-6)";
  }
  return result;
}

double spike_slab_enumerate(const RegressionData& data, const SpikeSlabPrior& prior, std::span<const double> beta) {
  if (beta.size() != 2 || data.cols() != 2) throw SizeError("spike_slab_enumerate: needs exactly two coefficients");
  const double sd_spike = std::sqrt(prior.spike_var());
  const double sd_slab = std::sqrt(prior.slab_var());
  std::array<double, 4> terms{};
  for (int z = 0; z < 4; ++z) {
    double t = 0.0;
    for (int j = 0; j < 2; ++j) {
      const bool spike = (z >> j) & 1;
      t += spike ? std::log(prior.spike_prob) + dist::normal_lpdf(beta[j], 0.0, sd_spike)
                 : std::log(1.0 - prior.spike_prob) + dist::normal_lpdf(beta[j], 0.0, sd_slab);
    }
    terms[z] = t;
  }
  double loglik = 0.0;
  for (std::size_t i = 0; i < data.y.size(); ++i)
    loglik += dist::normal_lpdf(data.y[i], data.X[i][0] * beta[0] + data.X[i][1] * beta[1], data.noise_sd);
  return logsumexp(terms) + loglik;
}

}  // namespace wildpost::oracle
