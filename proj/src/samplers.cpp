#include "wildpost/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <numeric>
#include <random>
#include <thread>

#include <nlohmann/json.hpp>

namespace wildpost {

std::string to_string(Algorithm algorithm) { return algorithm == Algorithm::rwm ? "rwm" : "hmc"; }

SamplerConfig SamplerConfig::defaults(Algorithm algorithm) {
  SamplerConfig c;
  c.algorithm = algorithm;
  c.target_accept = algorithm == Algorithm::hmc ? 0.8 : 0.3;
  return c;
}

void SamplerConfig::validate() const {
  if (chains < 1) throw DomainError("sampler: chains must be at least 1");
  if (warmup < 1 || iters < 1) throw DomainError("sampler: warmup and iters must be positive");
  if (!(target_accept > 0.0 && target_accept < 1.0)) throw DomainError("sampler: target_accept must lie in (0,1)");
  if (leapfrog_steps < 1) throw DomainError("sampler: leapfrog_steps must be positive");
  if (!(leapfrog_jitter >= 0.0 && leapfrog_jitter < 1.0)) throw DomainError("sampler: jitter must lie in [0,1)");
}

std::vector<std::vector<double>> ChainSet::series(std::size_t k) const {
  std::vector<std::vector<double>> out(draws.size());
  for (std::size_t c = 0; c < draws.size(); ++c) {
    out[c].resize(iters);
    for (std::size_t i = 0; i < iters; ++i) out[c][i] = draw(c, i, k);
  }
  return out;
}

namespace {

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

// Points the target rejects (overflowed transforms and the like) carry no mass.
double density(const Target& target, std::span<const double> u, std::span<double> grad = {}) {
  try {
    return target.log_density_unconstrained(u, grad);
  } catch (const DomainError&) {
    return -kInf;
  }
}

struct ChainOutput {
  std::vector<double> draws;
  std::vector<double> step_trace;
  double accept_rate = 0.0;
  double step_size = 0.0;
  int divergences = 0;
};

std::vector<double> initialize(const Target& target, std::mt19937_64& rng, bool need_gradient) {
  const std::size_t dim = target.space().dim_unconstrained();
  std::uniform_real_distribution<double> init(-2.0, 2.0);
  std::vector<double> u(dim), grad(need_gradient ? dim : 0);
  for (int attempt = 0; attempt < 100; ++attempt) {
    for (auto& v : u) v = init(rng);
    const double lp = density(target, u, grad);
    if (std::isfinite(lp) && all_finite(grad)) return u;
  }
  throw InitializationError("no finite-density starting point for " + target.name() + " after 100 attempts");
}

void record(const Target& target, std::span<const double> u, std::vector<double>& out) {
  const auto c = to_constrained(target.space(), u);
  out.insert(out.end(), c.values.begin(), c.values.end());
}

ChainOutput run_rwm_chain(const Target& target, const SamplerConfig& config, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::size_t dim = target.space().dim_unconstrained();
  std::vector<double> u = initialize(target, rng, false);
  double lp = density(target, u);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double log_scale = std::log(2.38 / std::sqrt(static_cast<double>(dim)));

  ChainOutput out;
  out.draws.reserve(static_cast<std::size_t>(config.iters) * dim);
  std::vector<double> proposal(dim);
  long accepted = 0;
  for (int it = 0; it < config.warmup + config.iters; ++it) {
    const double scale = std::exp(log_scale);
    for (std::size_t k = 0; k < dim; ++k) proposal[k] = u[k] + scale * normal(rng);
    const double lp_prop = density(target, proposal);
    const double alpha = std::isfinite(lp_prop) ? std::min(1.0, std::exp(lp_prop - lp)) : 0.0;
    const bool accept = unif(rng) < alpha;
    if (accept) {
      u = proposal;
      lp = lp_prop;
    }
    if (it < config.warmup) {
      log_scale += (alpha - config.target_accept) / std::pow(it + 1.0, 0.6);
    } else {
      accepted += accept ? 1 : 0;
      out.step_trace.push_back(scale);
      record(target, u, out.draws);
    }
  }
  out.accept_rate = static_cast<double>(accepted) / config.iters;
  out.step_size = std::exp(log_scale);
  return out;
}

double kinetic(std::span<const double> p) { return 0.5 * std::inner_product(p.begin(), p.end(), p.begin(), 0.0); }

double find_initial_step(const Target& target, const std::vector<double>& u, double lp, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> p(u.size());
  for (auto& v : p) v = normal(rng);
  const double h0 = -lp + kinetic(p);
  auto log_accept = [&](double eps) {
    const auto next = leapfrog(target, u, p, eps, 1);
    if (!next.finite) return -kInf;
    return h0 - (-next.log_density + kinetic(next.p));
  };
  double eps = 1.0;
  double la = log_accept(eps);
  const double direction = la > std::log(0.5) ? 1.0 : -1.0;
  for (int i = 0; i < 60; ++i) {
    if (direction > 0 ? !(la > std::log(0.5)) : !(la < std::log(0.5))) break;
    eps *= std::pow(2.0, direction);
    la = log_accept(eps);
  }
  return eps;
}

ChainOutput run_hmc_chain(const Target& target, const SamplerConfig& config, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::size_t dim = target.space().dim_unconstrained();
  std::vector<double> u = initialize(target, rng, true);
  double lp = density(target, u);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  const int lo = std::max(1, static_cast<int>(std::lround(config.leapfrog_steps * (1.0 - config.leapfrog_jitter))));
  const int hi = std::max(lo, static_cast<int>(std::lround(config.leapfrog_steps * (1.0 + config.leapfrog_jitter))));
  std::uniform_int_distribution<int> path_length(lo, hi);

  // Dual averaging.
  double eps = find_initial_step(target, u, lp, rng);
  const double mu = std::log(10.0 * eps);
  constexpr double gamma = 0.05, t0 = 10.0, kappa = 0.75;
  double h_bar = 0.0, log_eps_bar = 0.0;

  ChainOutput out;
  out.draws.reserve(static_cast<std::size_t>(config.iters) * dim);
  std::vector<double> p(dim);
  double accepted = 0.0;
  for (int it = 0; it < config.warmup + config.iters; ++it) {
    for (auto& v : p) v = normal(rng);
    const double h0 = -lp + kinetic(p);
    const int steps = path_length(rng);
    auto next = leapfrog(target, u, p, eps, steps);

    double alpha = 0.0;
    bool divergent = !next.finite;
    if (next.finite) {
      const double h1 = -next.log_density + kinetic(next.p);
      if (!std::isfinite(h1) || h1 - h0 > 1000.0) {
        divergent = true;
      } else {
        alpha = std::min(1.0, std::exp(h0 - h1));
      }
    }
    const bool accept = !divergent && unif(rng) < alpha;
    if (accept) {
      u = std::move(next.q);
      lp = next.log_density;
    }

    if (it < config.warmup) {
      const double m = it + 1.0;
      h_bar = (1.0 - 1.0 / (m + t0)) * h_bar + (config.target_accept - alpha) / (m + t0);
      const double log_eps = mu - std::sqrt(m) / gamma * h_bar;
      const double eta = std::pow(m, -kappa);
      log_eps_bar = eta * log_eps + (1.0 - eta) * log_eps_bar;
      eps = std::exp(log_eps);
      if (it + 1 == config.warmup) eps = std::exp(log_eps_bar);
    } else {
      accepted += accept ? 1.0 : 0.0;
      out.divergences += divergent ? 1 : 0;
      out.step_trace.push_back(eps);
      record(target, u, out.draws);
    }
  }
  out.accept_rate = accepted / config.iters;
  out.step_size = eps;
  return out;
}

template <typename ChainFn>
ChainSet run_chains(const Target& target, const SamplerConfig& config, ChainFn chain_fn) {
  config.validate();
  const auto chains = static_cast<std::size_t>(config.chains);
  std::vector<ChainOutput> outputs(chains);
  std::vector<std::exception_ptr> errors(chains);
  {
    std::vector<std::jthread> workers;
    const unsigned lanes = std::max(1u, std::thread::hardware_concurrency());
    for (std::size_t first = 0; first < chains; first += lanes) {
      workers.clear();
      for (std::size_t c = first; c < std::min(chains, first + lanes); ++c)
        workers.emplace_back([&, c] {
          try {
            outputs[c] = chain_fn(target, config, config.seed + c);
          } catch (...) {
            errors[c] = std::current_exception();
          }
        });
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  ChainSet set;
  set.names = target.space().column_names();
  set.dim = target.space().dim_constrained();
  set.iters = static_cast<std::size_t>(config.iters);
  for (auto& o : outputs) {
    set.draws.push_back(std::move(o.draws));
    set.accept_rate.push_back(o.accept_rate);
    set.step_size.push_back(o.step_size);
    set.divergences.push_back(o.divergences);
    set.step_trace.push_back(std::move(o.step_trace));
  }
  compute_diagnostics(set);
  return set;
}

}  // namespace

PhasePoint leapfrog(const Target& target, std::vector<double> q, std::vector<double> p, double eps, int steps) {
  std::vector<double> grad(q.size());
  PhasePoint out;
  out.log_density = density(target, q, grad);
  out.finite = std::isfinite(out.log_density) && all_finite(grad);
  for (int s = 0; s < steps && out.finite; ++s) {
    for (std::size_t k = 0; k < q.size(); ++k) p[k] += 0.5 * eps * grad[k];
    for (std::size_t k = 0; k < q.size(); ++k) q[k] += eps * p[k];
    out.log_density = density(target, q, grad);
    out.finite = std::isfinite(out.log_density) && all_finite(grad);
    if (!out.finite) break;
    for (std::size_t k = 0; k < q.size(); ++k) p[k] += 0.5 * eps * grad[k];
  }
  out.q = std::move(q);
  out.p = std::move(p);
  return out;
}

ChainSet rwm_sample(const Target& target, const SamplerConfig& config) {
  return run_chains(target, config, run_rwm_chain);
}

ChainSet hmc_sample(const Target& target, const SamplerConfig& config) {
  return run_chains(target, config, run_hmc_chain);
}

ChainSet sample(const Target& target, const SamplerConfig& config) {
  return config.algorithm == Algorithm::rwm ? rwm_sample(target, config) : hmc_sample(target, config);
}

namespace {

double mean_of(std::span<const double> x) { return std::accumulate(x.begin(), x.end(), 0.0) / x.size(); }

double sample_variance(std::span<const double> x) {
  const double m = mean_of(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / (x.size() - 1.0);
}

}  // namespace

double split_rhat(const std::vector<std::vector<double>>& chains) {
  std::vector<std::span<const double>> halves;
  std::size_t n = std::numeric_limits<std::size_t>::max();
  for (const auto& c : chains) n = std::min(n, c.size() / 2);
  if (chains.empty() || n < 4) throw DomainError("split_rhat: need half-chains of length >= 4");
  for (const auto& c : chains) {
    halves.emplace_back(c.data(), n);
    halves.emplace_back(c.data() + c.size() - n, n);
  }
  const double m = static_cast<double>(halves.size());
  const double nd = static_cast<double>(n);
  std::vector<double> means, vars;
  for (const auto& h : halves) {
    means.push_back(mean_of(h));
    vars.push_back(sample_variance(h));
  }
  const double w = mean_of(vars);
  if (!(w > 0.0)) return kInf;
  const double grand = mean_of(means);
  double b = 0.0;
  for (double mu : means) b += (mu - grand) * (mu - grand);
  b *= nd / (m - 1.0);
  const double var_plus = (nd - 1.0) / nd * w + b / nd;
  return std::sqrt(var_plus / w);
}

double ess(const std::vector<std::vector<double>>& chains) {
  if (chains.empty()) throw DomainError("ess: no chains");
  std::size_t n = std::numeric_limits<std::size_t>::max();
  for (const auto& c : chains) n = std::min(n, c.size());
  if (n < 4) throw DomainError("ess: chains too short");
  const double m = static_cast<double>(chains.size());
  const double nd = static_cast<double>(n);

  std::vector<double> means;
  for (const auto& c : chains) means.push_back(mean_of(std::span<const double>(c.data(), n)));
  auto autocov = [&](std::size_t c, std::size_t lag) {
    const auto& x = chains[c];
    double s = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) s += (x[i] - means[c]) * (x[i + lag] - means[c]);
    return s / nd;
  };
  auto mean_autocov = [&](std::size_t lag) {
    double s = 0.0;
    for (std::size_t c = 0; c < chains.size(); ++c) s += autocov(c, lag);
    return s / m;
  };

  const double acov0 = mean_autocov(0);
  const double w = acov0 * nd / (nd - 1.0);
  const double between = chains.size() > 1 ? sample_variance(means) : 0.0;
  const double var_plus = (nd - 1.0) / nd * w + between;
  if (!(var_plus > 0.0)) return 0.0;

  auto rho = [&](std::size_t lag) { return 1.0 - (w - mean_autocov(lag)) / var_plus; };
  double pair_sum = 0.0;
  for (std::size_t lag = 0; lag + 1 < n; lag += 2) {
    const double pair = (lag == 0 ? 1.0 : rho(lag)) + rho(lag + 1);
    if (pair < 0.0) break;
    pair_sum += pair;
  }
  const double tau = -1.0 + 2.0 * pair_sum;
  const double total = m * nd;
  return std::min(total / tau, 1.05 * total);
}

void compute_diagnostics(ChainSet& set) {
  set.diagnostics.clear();
  for (std::size_t k = 0; k < set.dim; ++k) {
    const auto s = set.series(k);
    const bool long_enough = set.iters >= 8;
    set.diagnostics.push_back({set.names[k], long_enough ? split_rhat(s) : kInf, set.iters >= 4 ? ess(s) : 0.0});
  }
}

void write_draws(const ChainSet& set, const std::filesystem::path& csv_path) {
  std::ofstream out(csv_path);
  if (!out) throw std::runtime_error("cannot open " + csv_path.string() + " for writing");
  out << "chain,iter";
  for (const auto& n : set.names) out << ',' << n;
  out << '\n';
  for (std::size_t c = 0; c < set.draws.size(); ++c)
    for (std::size_t i = 0; i < set.iters; ++i) {
      out << c << ',' << i;
      for (std::size_t k = 0; k < set.dim; ++k) out << ',' << format_real(set.draw(c, i, k));
      out << '\n';
    }
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + csv_path.string());
}

void write_diagnostics(const ChainSet& set, const std::filesystem::path& json_path) {
  nlohmann::ordered_json j;
  for (const auto& d : set.diagnostics) j[d.name] = {{"rhat", d.rhat}, {"ess", d.ess}};
  j["accept_rate"] = set.accept_rate;
  j["divergences"] = set.divergences;
  j["step_size"] = set.step_size;
  std::ofstream out(json_path);
  if (!out) throw std::runtime_error("cannot open " + json_path.string() + " for writing");
  out << j.dump(2) << '\n';
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + json_path.string());
}

StandardNormalTarget::StandardNormalTarget(std::size_t dim) {
  std::vector<ParamDescriptor> d;
  for (std::size_t k = 1; k <= dim; ++k) d.push_back({"x" + std::to_string(k), Support::real()});
  space_ = ParamSpace(std::move(d));
}

double StandardNormalTarget::log_density(std::span<const double> c, std::span<double> grad) const {
  double lp = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    lp += -0.5 * kLogTwoPi - 0.5 * c[k] * c[k];
    if (!grad.empty()) grad[k] = -c[k];
  }
  return lp;
}

}  // namespace wildpost
