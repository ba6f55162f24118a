#include "wildpost/checks.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <random>

#include <nlohmann/json.hpp>

#include "wildpost/catalog.hpp"
#include "wildpost/grid.hpp"
#include "wildpost/oracle.hpp"

namespace wildpost {

double gradient_fd_error(const Target& target, std::uint64_t seed, int points, double h) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  const std::size_t dim = target.space().dim_unconstrained();
  std::vector<double> u(dim), grad(dim);
  double worst = 0.0;
  for (int k = 0; k < points; ++k) {
    for (auto& v : u) v = unif(rng);
    const double lp = target.log_density_unconstrained(u, grad);
    const auto fd = oracle::fd_gradient(target, u, h);
    if (!std::isfinite(lp)) return kInf;
    for (std::size_t i = 0; i < dim; ++i) {
      if (fd.nan_flag[i] || !std::isfinite(grad[i])) return kInf;
      worst = std::max(worst, std::abs(grad[i] - fd.grad[i]) / std::max(1.0, std::abs(grad[i])));
    }
  }
  return worst;
}

namespace {

class Suite {
 public:
  explicit Suite(const CheckOptions& options) : options_(options) {}

  bool wants(const std::string& target) const { return !options_.target || *options_.target == target; }

  void add(const std::string& target, const std::string& name, double metric, double threshold) {
    results_.push_back({target, name, metric, threshold, metric <= threshold});
  }

  void gradient(const std::string& name, std::unique_ptr<Target> target, const std::string& label = "gradient_fd") {
    if (options_.decorate) target = options_.decorate(std::move(target));
    add(name, label, gradient_fd_error(*target, options_.seed + 101), 1e-5);
  }

  std::uint64_t seed() const { return options_.seed; }
  std::vector<CheckResult> take() { return std::move(results_); }

 private:
  const CheckOptions& options_;
  std::vector<CheckResult> results_;
};

double rel_err(double got, double want) { return std::abs(got - want) / std::max(std::abs(want), 1e-8); }

void core_checks(Suite& suite) {
  std::mt19937_64 rng(suite.seed() + 7);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.02, 0.98);

  const std::vector<Support> supports{Support::real(),          Support::positive(),
                                      Support::unit_interval(), Support::interval(-1.0, 1.0),
                                      Support::interval(0.001, 10.0), Support::spd2x2()};
  double round_trip = 0.0;
  double jacobian = 0.0;
  for (const auto& support : supports) {
    const ParamSpace space({{"theta", support}});
    for (int k = 0; k < 100; ++k) {
      std::vector<double> c;
      switch (support.kind) {
        case SupportKind::real: c = {3.0 * normal(rng)}; break;
        case SupportKind::positive: c = {std::exp(normal(rng))}; break;
        case SupportKind::unit_interval:
        case SupportKind::interval: c = {support.lo + (support.hi - support.lo) * unif(rng)}; break;
        case SupportKind::spd2x2: {
          const double l11 = std::exp(0.5 * normal(rng)), l21 = normal(rng), l22 = std::exp(0.5 * normal(rng));
          c = {l11 * l11, l11 * l21, l21 * l21 + l22 * l22};
          break;
        }
      }
      const auto u = to_unconstrained(space, c);
      const auto back = to_constrained(space, u);
      const auto u2 = to_unconstrained(space, back.values);
      for (std::size_t i = 0; i < c.size(); ++i) {
        round_trip = std::max(round_trip, rel_err(back.values[i], c[i]));
        round_trip = std::max(round_trip, std::abs(u2[i] - u[i]) / std::max(1.0, std::abs(u[i])));
      }
    }
    // Finite-difference Jacobian determinant.
    for (int k = 0; k < 50; ++k) {
      std::vector<double> u(space.dim_unconstrained());
      for (auto& v : u) v = 1.5 * normal(rng);
      const double h = 1e-6;
      const std::size_t d = u.size();
      std::vector<double> jac(d * d);
      for (std::size_t col = 0; col < d; ++col) {
        auto up = u, down = u;
        up[col] += h;
        down[col] -= h;
        const auto cu = to_constrained(space, up).values;
        const auto cd = to_constrained(space, down).values;
        for (std::size_t row = 0; row < d; ++row) jac[row * d + col] = (cu[row] - cd[row]) / (2.0 * h);
      }
      double det = jac[0];
      if (d == 3)
        det = jac[0] * (jac[4] * jac[8] - jac[5] * jac[7]) - jac[1] * (jac[3] * jac[8] - jac[5] * jac[6]) +
              jac[2] * (jac[3] * jac[7] - jac[4] * jac[6]);
      jacobian = std::max(jacobian, std::abs(std::log(std::abs(det)) - to_constrained(space, u).log_jac));
    }
  }
  suite.add("core", "transform_round_trip", round_trip, 1e-12);
  suite.add("core", "transform_log_jacobian_fd", jacobian, 1e-6);

  const std::vector<double> pair{0.0, 0.0}, absorbing{-kInf, 3.5}, large{1000.0, 1000.1};
  double lse = std::abs(logsumexp(pair) - std::numbers::ln2);
  lse = std::max(lse, std::abs(logsumexp(absorbing) - 3.5));
  lse = std::max(lse, std::abs(logsumexp(large) - (1000.1 + std::log1p(std::exp(-0.1)))));
  suite.add("core", "logsumexp_identities", lse, 1e-12);

  // Trapezoid mass over a +-10 sd window, or exact support for bounded laws.
  auto trapz = [](auto f, double lo, double hi, int n) {
    const double h = (hi - lo) / n;
    double s = 0.5 * (f(lo) + f(hi));
    for (int i = 1; i < n; ++i) s += f(lo + i * h);
    return s * h;
  };
  double mass = 0.0;
  mass = std::max(mass, std::abs(trapz([](double x) { return std::exp(dist::normal_lpdf(x, 0.3, 1.7)); },
                                       0.3 - 17.0, 0.3 + 17.0, 20000) - 1.0));
  const double g_sd = std::sqrt(2.0) / 0.5;
  mass = std::max(mass, std::abs(trapz([](double x) { return std::exp(dist::gamma_lpdf(x, 2.0, 0.5)); }, 0.0,
                                       4.0 + 10.0 * g_sd, 20000) - 1.0));
  mass = std::max(mass, std::abs(trapz([](double x) { return std::exp(dist::uniform_lpdf(x, 0.001, 10.0)); }, 0.001,
                                       10.0, 1000) - 1.0));
  const double lap_sd = 2.0 * std::numbers::sqrt2;
  mass = std::max(mass, std::abs(trapz([](double x) { return std::exp(dist::laplace_lpdf(x, 0.0, 2.0)); },
                                       -10.0 * lap_sd, 10.0 * lap_sd, 20000) - 1.0));
  mass = std::max(mass, std::abs(trapz([](double x) { return std::exp(dist::cauchy_lpdf(x, 0.0, 10.0)); }, -50.0,
                                       50.0, 20000) -
                                 (dist::cauchy_cdf(50.0, 0.0, 10.0) - dist::cauchy_cdf(-50.0, 0.0, 10.0))));
  mass = std::max(mass, std::abs(trapz([](double x) { return std::exp(dist::half_cauchy_lpdf(x, 5.0)); }, 0.0, 40.0,
                                       20000) -
                                 2.0 * (dist::cauchy_cdf(40.0, 0.0, 5.0) - 0.5)));
  double pmf = 0.0;
  for (int k = 0; k <= 100; ++k) pmf += std::exp(dist::poisson_lpmf(k, 3.0));
  mass = std::max(mass, std::abs(pmf - 1.0));
  pmf = 0.0;
  for (int k = 0; k <= 12; ++k) pmf += std::exp(dist::binomial_lpmf(k, 12, 0.37));
  mass = std::max(mass, std::abs(pmf - 1.0));
  suite.add("core", "log_pdf_normalization", mass, 1e-4);
}

void nmixture_checks(Suite& suite) {
  const auto data = std::get<NMixtureData>(simulate_dataset("nmixture", suite.seed()));
  suite.gradient("nmixture", std::make_unique<NMixtureTarget>(data));

  double thinning = 0.0;
  for (int a = 0; a < 10; ++a)
    for (int b = 0; b < 10; ++b) {
      const double p = 0.05 + 0.1 * a;
      const double lambda = 1.0 + 5.0 * b;
      for (int y : {0, 3, 7}) {
        const std::vector<int> row{y};
        thinning = std::max(thinning,
                            std::abs(nmixture_site_loglik(row, p, lambda) - dist::poisson_lpmf(y, lambda * p)));
      }
    }
  suite.add("nmixture", "thinning_identity", thinning, 1e-9);

  double stability = 0.0;
  for (const auto& [p, lambda] : {std::pair{0.1, 30.0}, {0.05, 80.0}, {0.3, 10.0}, {0.5, 3.0}}) {
    for (const auto& row : data.counts) {
      const auto site = nmixture_site_sum(row, p, lambda);
      const std::vector<long long> bounds{site.upper_bound, site.upper_bound + 50};
      const auto scan = oracle::nmixture_truncation_scan(row, p, lambda, bounds);
      stability = std::max(stability, std::abs(scan[1] - scan[0]));
      stability = std::max(stability, std::abs(site.value - scan[0]));
    }
  }
  suite.add("nmixture", "truncation_bound_plus_50", stability, 1e-8);

  double scanned = dist::gamma_lpdf(30.0, data.prior_shape, data.prior_rate) + dist::uniform_lpdf(0.1, 0.0, 1.0);
  const std::vector<long long> wide{1000};
  for (const auto& row : data.counts) scanned += oracle::nmixture_truncation_scan(row, 0.1, 30.0, wide)[0];
  suite.add("nmixture", "reference_dataset_vs_scan", std::abs(nmixture_log_density(data, {0.1, 30.0}) - scanned),
            1e-8);
}

void occupancy_checks(Suite& suite) {
  const auto data = std::get<OccupancyData>(simulate_dataset("occupancy", suite.seed()));
  suite.gradient("occupancy", std::make_unique<OccupancyTarget>(data));

  std::mt19937_64 rng(suite.seed() + 11);
  std::uniform_real_distribution<double> unif(0.02, 0.98);
  std::uniform_int_distribution<int> visits(1, 8);
  double small = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    OccupancyData d;
    for (int i = 0; i < 6; ++i) {
      const int k = visits(rng);
      d.sites.push_back({std::uniform_int_distribution<int>(0, k)(rng) * (rep % 2), k});
    }
    const double psi = unif(rng), p = unif(rng);
    small = std::max(small, std::abs(occupancy_log_density(d, {psi, p}) - oracle::occupancy_enumerate(d, psi, p)));
  }
  suite.add("occupancy", "enumeration_6_sites", small, 1e-12);

  double chunked = 0.0;
  for (std::size_t first = 0; first < data.sites.size(); first += 10) {
    OccupancyData chunk;
    chunk.sites.assign(data.sites.begin() + static_cast<long>(first),
                       data.sites.begin() + static_cast<long>(std::min(first + 10, data.sites.size())));
    chunked += oracle::occupancy_enumerate(chunk, 0.1, 0.1);
  }
  suite.add("occupancy", "reference_dataset_chunked_enumeration",
            std::abs(occupancy_log_density(data, {0.1, 0.1}) - chunked), 1e-10);
}

double ridge_angle_degrees(const Target& target) {
  const auto grid = evaluate_grid(target, default_grid_spec("collinear"));
  const auto axis = principal_axis(grid);
  const double cosine = std::abs(axis[0] + axis[1]) / std::numbers::sqrt2;
  return std::acos(std::min(1.0, cosine)) * 180.0 / std::numbers::pi;
}

void collinear_checks(Suite& suite) {
  const auto ds = std::get<CollinearDataset>(simulate_dataset("collinear", suite.seed()));
  suite.gradient("collinear", std::make_unique<CollinearTarget>(ds.data, ds.prior));
  const CollinearTarget target(ds.data, ds.prior);
  suite.add("collinear", "ridge_angle_degrees", ridge_angle_degrees(target), 2.0);
}

void spike_slab_checks(Suite& suite) {
  const auto ds = std::get<SpikeSlabDataset>(simulate_dataset("spike_slab", suite.seed()));
  suite.gradient("spike_slab", std::make_unique<SpikeSlabTarget>(ds.data, ds.prior));
  std::mt19937_64 rng(suite.seed() + 13);
  std::uniform_real_distribution<double> unif(-3.0, 3.0);
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const std::vector<double> beta{unif(rng), unif(rng)};
    worst = std::max(worst, std::abs(spike_slab_log_density(ds.data, ds.prior, beta) -
                                     oracle::spike_slab_enumerate(ds.data, ds.prior, beta)));
  }
  suite.add("spike_slab", "enumeration_4_terms", worst, 1e-12);
  const double at_zero = std::log(0.1 / std::sqrt(0.2 * std::numbers::pi) + 0.9 / std::sqrt(200.0 * std::numbers::pi));
  suite.add("spike_slab", "prior_at_zero", std::abs(spike_slab_log_prior(0.0, SpikeSlabPrior{}) - at_zero), 1e-12);
}

void lasso_checks(Suite& suite) {
  const auto data = std::get<LassoData>(simulate_dataset("adaptive_lasso", suite.seed()));
  suite.gradient("adaptive_lasso", std::make_unique<LassoTarget>(data, LaplaceConvention::scale),
                 "gradient_fd_scale");
  suite.gradient("adaptive_lasso", std::make_unique<LassoTarget>(data, LaplaceConvention::rate), "gradient_fd_rate");

  // For fixed lambda the density in beta has one local maximum.
  const LassoTarget target(data, LaplaceConvention::scale);
  const auto grid = evaluate_grid(target, default_grid_spec("adaptive_lasso", 100));
  double violations = 0.0;
  for (std::size_t j = 0; j < grid.ny(); ++j) {
    int peaks = 0;
    for (std::size_t i = 1; i + 1 < grid.nx(); ++i)
      if (grid.at(i, j) > grid.at(i - 1, j) && grid.at(i, j) > grid.at(i + 1, j)) ++peaks;
    if (peaks > 1) violations += 1.0;
  }
  suite.add("adaptive_lasso", "fixed_lambda_single_peak_violations", violations, 0.0);

  std::vector<double> grad(2);
  const double lp = lasso_log_density(data, {0.0, 1.0}, LaplaceConvention::scale, grad);
  const bool finite = std::isfinite(lp) && std::isfinite(grad[0]) && std::isfinite(grad[1]);
  suite.add("adaptive_lasso", "beta_zero_gradient_nonfinite", finite ? 0.0 : 1.0, 0.0);
}

void iv_checks(Suite& suite) {
  const auto data = std::get<IVData>(simulate_dataset("iv", suite.seed()));
  suite.gradient("iv", std::make_unique<IVTarget>(data));

  const Sym2 s = iv_residual_outer(data, 0.1, 0.1);
  std::array<double, 3> resum{};
  for (std::size_t i = data.size(); i-- > 0;) {
    const std::array<double, 2> u{data.y[i] - data.x[i] * 0.1, data.x[i] - data.z[i] * 0.1};
    resum[0] += u[0] * u[0];
    resum[1] += u[1] * u[0];
    resum[2] += u[1] * u[1];
  }
  const double outer = std::max({rel_err(s.s11, resum[0]), rel_err(s.s21, resum[1]), rel_err(s.s22, resum[2])});
  suite.add("iv", "residual_outer_resummation", outer, 1e-12);

  std::vector<std::pair<double, double>> points{{0.1, 0.1}, {0.3, -0.2}, {-1.0, 0.5}, {2.0, 0.05}, {0.0, -0.4}};
  std::mt19937_64 rng(suite.seed() + 17);
  std::uniform_real_distribution<double> beta_draw(-2.0, 2.0), pi_draw(-0.8, 0.8);
  while (points.size() < 10) points.emplace_back(beta_draw(rng), pi_draw(rng));
  double lo = kInf, hi = -kInf;
  bool converged = true;
  for (const auto& [beta, pi] : points) {
    const auto q = oracle::iv_sigma_quadrature(data, beta, pi);
    converged = converged && q.converged;
    const double offset = q.log_value - iv_marginal_log_density(data, beta, pi);
    lo = std::min(lo, offset);
    hi = std::max(hi, offset);
  }
  suite.add("iv", "marginal_vs_quadrature_spread", converged ? std::expm1(hi - lo) : kInf, 1e-3);
}

void stoch_vol_checks(Suite& suite) {
  const auto data = std::get<SVData>(simulate_dataset("stoch_vol", suite.seed()));
  suite.gradient("stoch_vol", std::make_unique<StochVolTarget>(data));

  double violations = 0.0;
  double previous = 0.0;
  for (double phi : {0.0, 0.5, 0.9, 0.99, 0.999, 0.9999}) {
    const double sd = sv_initial_sd(phi, 0.1);
    if (!(sd > previous)) violations += 1.0;
    previous = sd;
  }
  suite.add("stoch_vol", "initial_sd_diverges_as_phi_to_1", violations, 0.0);

  std::mt19937_64 rng(suite.seed() + 19);
  std::uniform_real_distribution<double> unif(-3.0, 3.0);
  double rewrite = 0.0;
  for (int k = 0; k < 100; ++k) {
    const double mu = unif(rng), phi = unif(rng) / 3.0, h = unif(rng);
    rewrite = std::max(rewrite, std::abs(sv_transition_mean(mu, phi, h) - (mu + phi * (h - mu))));
  }
  suite.add("stoch_vol", "transition_mean_rewrite", rewrite, 1e-14);
}

}  // namespace

std::vector<CheckResult> run_checks(const CheckOptions& options) {
  if (options.target && *options.target != "core") target_info(*options.target);
  Suite suite(options);
  if (suite.wants("core")) core_checks(suite);
  if (suite.wants("nmixture")) nmixture_checks(suite);
  if (suite.wants("occupancy")) occupancy_checks(suite);
  if (suite.wants("collinear")) collinear_checks(suite);
  if (suite.wants("spike_slab")) spike_slab_checks(suite);
  if (suite.wants("adaptive_lasso")) lasso_checks(suite);
  if (suite.wants("iv")) iv_checks(suite);
  if (suite.wants("stoch_vol")) stoch_vol_checks(suite);
  return suite.take();
}

void print_report(const std::vector<CheckResult>& results, std::ostream& out) {
  for (const auto& r : results)
    out << (r.pass ? "PASS " : "FAIL ") << r.target << '.' << r.name << ' ' << format_real(r.metric) << ' '
        << format_real(r.threshold) << '\n';
}

void print_report_json(const std::vector<CheckResult>& results, std::ostream& out) {
  auto arr = nlohmann::ordered_json::array();
  bool all = true;
  for (const auto& r : results) {
    all = all && r.pass;
    arr.push_back({{"target", r.target},
                   {"name", r.name},
                   {"metric", std::isfinite(r.metric) ? nlohmann::ordered_json(r.metric)
                                                      : nlohmann::ordered_json(format_real(r.metric))},
                   {"threshold", r.threshold},
                   {"pass", r.pass}});
  }
  nlohmann::ordered_json j{{"pass", all}, {"checks", arr}};
  out << j.dump(2) << '\n';
}

}  // namespace wildpost
