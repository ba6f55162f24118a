#include "wildpost/catalog.hpp"

#include <algorithm>
#include <fstream>

namespace wildpost {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

const std::vector<TargetInfo> kCatalog = {
    {"nmixture", "banana", "Eq. 1", "Fig. 1-A", "N-mixture abundance model, latent counts summed out"},
    {"occupancy", "banana", "Eq. 2", "Fig. 1-B", "site occupancy with imperfect detection"},
    {"collinear", "needle", "-", "Fig. 1-C", "linear regression with collinear covariates"},
    {"spike_slab", "cross", "Eq. 3", "Fig. 1-D", "regression under a spike-and-slab mixture prior"},
    {"adaptive_lasso", "multimodal", "Eq. 4", "Fig. 1-E", "Laplace prior with a uniform hyperprior on lambda"},
    {"iv", "singularity", "Eq. 5", "Fig. 1-F", "instrumental-variable regression, Sigma integrated out"},
    {"stoch_vol", "mushroom", "Eq. 6", "Fig. 2", "stochastic volatility with AR(1) log-variance"},
};

int as_count(const Overrides& o, const char* key) {
  const double v = o.at(key);
  if (v != static_cast<int>(v) || v < 1)
    throw UsageError(std::string("parameter ") + key + " must be a positive integer");
  return static_cast<int>(v);
}

}  // namespace

const std::vector<TargetInfo>& target_catalog() { return kCatalog; }

const TargetInfo& target_info(std::string_view name) {
  for (const auto& t : kCatalog)
    if (t.name == name) return t;
  throw UsageError("unknown target: " + std::string(name));
}

std::string dataset_target(const Dataset& dataset) {
  return std::visit(Overloaded{[](const NMixtureData&) { return std::string("nmixture"); },
                               [](const OccupancyData&) { return std::string("occupancy"); },
                               [](const CollinearDataset&) { return std::string("collinear"); },
                               [](const SpikeSlabDataset&) { return std::string("spike_slab"); },
                               [](const LassoData&) { return std::string("adaptive_lasso"); },
                               [](const IVData&) { return std::string("iv"); },
                               [](const SVData&) { return std::string("stoch_vol"); }},
                    dataset);
}

Overrides simulation_defaults(std::string_view target) {
  const std::string t(target_info(target).name);
  if (t == "nmixture")
    return {{"n_sites", 20}, {"n_repeats", 5}, {"lambda", 30}, {"p", 0.1}, {"shape", 1.0}, {"rate", 0.01}};
  if (t == "occupancy") return {{"n_sites", 100}, {"n_repeats", 8}, {"psi", 0.1}, {"p", 0.1}};
  if (t == "collinear")
    return {{"n", 30}, {"rho", -0.995}, {"beta1", -10}, {"beta2", 10}, {"prior_sd", 100}};
  if (t == "spike_slab")
    return {{"n", 10}, {"beta1", 0}, {"beta2", 0}, {"spike", 0.1}, {"slab", 100}, {"spike_prob", 0.1}};
  if (t == "adaptive_lasso") return {{"n", 5}, {"beta", 5}, {"sigma", 8}};
  if (t == "iv")
    return {{"n", 50},        {"beta", 0.1},      {"pi", 0.1},
            {"sigma11", 1.0}, {"sigma21", 0.0},   {"sigma22", 1.0},
            {"instrument_prob", 0.75}};
  return {{"T", 5}, {"mu", -1.02}, {"phi", -0.95}, {"sigma", 0.1}};
}

Dataset simulate_dataset(std::string_view target, std::uint64_t seed, const Overrides& overrides) {
  const std::string t(target_info(target).name);
  Overrides o = simulation_defaults(t);
  for (const auto& [key, value] : overrides) {
    if (!o.contains(key)) throw UsageError("unknown parameter '" + key + "' for target " + t);
    o[key] = value;
  }
  try {
    if (t == "nmixture")
      return simulate_nmixture(seed, as_count(o, "n_sites"), as_count(o, "n_repeats"), o["lambda"], o["p"],
                               o["shape"], o["rate"]);
    if (t == "occupancy")
      return simulate_occupancy(seed, as_count(o, "n_sites"), as_count(o, "n_repeats"), o["psi"], o["p"]);
    if (t == "collinear")
      return CollinearDataset{simulate_collinear(seed, as_count(o, "n"), o["rho"], {o["beta1"], o["beta2"]}),
                              CollinearPrior{o["prior_sd"]}};
    if (t == "spike_slab")
      return SpikeSlabDataset{simulate_spike_slab(seed, as_count(o, "n"), {o["beta1"], o["beta2"]}),
                              SpikeSlabPrior{o["spike"], o["slab"], o["spike_prob"]}};
    if (t == "adaptive_lasso") return simulate_lasso(seed, as_count(o, "n"), o["beta"], o["sigma"]);
    if (t == "iv")
      return simulate_iv(seed, as_count(o, "n"), o["beta"], o["pi"], Sym2{o["sigma11"], o["sigma21"], o["sigma22"]},
                         o["instrument_prob"]);
    return simulate_sv(seed, as_count(o, "T"), o["mu"], o["phi"], o["sigma"]).data;
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
}

nlohmann::ordered_json dataset_to_json(const Dataset& dataset) {
  nlohmann::ordered_json j;
  j["target"] = dataset_target(dataset);
  std::visit(Overloaded{
                 [&](const NMixtureData& d) {
                   j["data"]["counts"] = d.counts;
                   j["prior"] = {{"shape", d.prior_shape}, {"rate", d.prior_rate}};
                 },
                 [&](const OccupancyData& d) {
                   auto sites = nlohmann::ordered_json::array();
                   for (const auto& s : d.sites) sites.push_back({{"s", s.s}, {"k", s.k}});
                   j["data"]["sites"] = sites;
                 },
                 [&](const CollinearDataset& d) {
                   j["data"] = {{"X", d.data.X}, {"y", d.data.y}, {"noise_sd", d.data.noise_sd}};
                   j["prior"] = {{"sd", d.prior.prior_sd}};
                 },
                 [&](const SpikeSlabDataset& d) {
                   j["data"] = {{"X", d.data.X}, {"y", d.data.y}, {"noise_sd", d.data.noise_sd}};
                   j["prior"] = {{"spike", d.prior.spike},
                                 {"slab", d.prior.slab},
                                 {"spike_prob", d.prior.spike_prob},
                                 {"normal_arg", d.prior.normal_arg == NormalArg::sd ? "sd" : "variance"}};
                 },
                 [&](const LassoData& d) { j["data"] = {{"x", d.x}, {"y", d.y}, {"sigma", d.sigma}}; },
                 [&](const IVData& d) { j["data"] = {{"y", d.y}, {"x", d.x}, {"z", d.z}}; },
                 [&](const SVData& d) { j["data"]["y"] = d.returns; },
             },
             dataset);
  return j;
}

Dataset dataset_from_json(const nlohmann::json& j) {
  try {
    const std::string t = j.at("target").get<std::string>();
    const auto& data = j.at("data");
    const nlohmann::json prior = j.contains("prior") ? j.at("prior") : nlohmann::json::object();
    target_info(t);
    if (t == "nmixture") {
      NMixtureData d;
      d.counts = data.at("counts").get<std::vector<std::vector<int>>>();
      d.prior_shape = prior.value("shape", 1.0);
      d.prior_rate = prior.value("rate", 0.01);
      d.validate();
      return d;
    }
    if (t == "occupancy") {
      OccupancyData d;
      for (const auto& s : data.at("sites")) d.sites.push_back({s.at("s").get<int>(), s.at("k").get<int>()});
      d.validate();
      return d;
    }
    if (t == "collinear" || t == "spike_slab") {
      RegressionData r;
      r.X = data.at("X").get<std::vector<std::vector<double>>>();
      r.y = data.at("y").get<std::vector<double>>();
      r.noise_sd = data.value("noise_sd", 1.0);
      r.validate();
      if (t == "collinear") return CollinearDataset{r, CollinearPrior{prior.value("sd", 100.0)}};
      SpikeSlabPrior p;
      p.spike = prior.value("spike", 0.1);
      p.slab = prior.value("slab", 100.0);
      p.spike_prob = prior.value("spike_prob", 0.1);
      p.normal_arg = prior.value("normal_arg", std::string("variance")) == "sd" ? NormalArg::sd : NormalArg::variance;
      p.validate();
      return SpikeSlabDataset{r, p};
    }
    if (t == "adaptive_lasso") {
      LassoData d;
      d.x = data.at("x").get<std::vector<double>>();
      d.y = data.at("y").get<std::vector<double>>();
      d.sigma = data.at("sigma").get<double>();
      d.validate();
      return d;
    }
    if (t == "iv") {
      IVData d;
      d.y = data.at("y").get<std::vector<double>>();
      d.x = data.at("x").get<std::vector<double>>();
      d.z = data.at("z").get<std::vector<double>>();
      d.validate();
      return d;
    }
    SVData d;
    d.returns = data.at("y").get<std::vector<double>>();
    d.validate();
    return d;
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("malformed dataset: ") + e.what());
  }
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(path.string() + ": " + e.what());
  }
  return dataset_from_json(j);
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << dataset_to_json(dataset).dump(2) << '\n';
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::unique_ptr<Target> make_target(const Dataset& dataset, const TargetOptions& options) {
  return std::visit(
      Overloaded{
          [](const NMixtureData& d) -> std::unique_ptr<Target> { return std::make_unique<NMixtureTarget>(d); },
          [](const OccupancyData& d) -> std::unique_ptr<Target> { return std::make_unique<OccupancyTarget>(d); },
          [](const CollinearDataset& d) -> std::unique_ptr<Target> {
            return std::make_unique<CollinearTarget>(d.data, d.prior);
          },
          [&](const SpikeSlabDataset& d) -> std::unique_ptr<Target> {
            auto prior = d.prior;
            if (options.normal_arg) prior.normal_arg = *options.normal_arg;
            return std::make_unique<SpikeSlabTarget>(d.data, prior);
          },
          [&](const LassoData& d) -> std::unique_ptr<Target> {
            return std::make_unique<LassoTarget>(d, options.laplace);
          },
          [](const IVData& d) -> std::unique_ptr<Target> { return std::make_unique<IVTarget>(d); },
          [](const SVData& d) -> std::unique_ptr<Target> { return std::make_unique<StochVolTarget>(d); },
      },
      dataset);
}

GridSpec default_grid_spec(std::string_view target, int resolution) {
  const std::string t(target_info(target).name);
  GridSpec g;
  g.nx = g.ny = resolution;
  if (t == "nmixture") {
    g.x_param = "p";
    g.y_param = "lambda";
    g.x_range = {0.02, 0.5};
    g.y_range = {1.0, 160.0};
  } else if (t == "occupancy") {
    g.x_param = "psi";
    g.y_param = "p";
    g.x_range = {0.0, 1.0};
    g.y_range = {0.0, 1.0};
  } else if (t == "collinear") {
    g.x_param = "beta1";
    g.y_param = "beta2";
    g.x_range = {-25.0, 5.0};
    g.y_range = {-5.0, 25.0};
  } else if (t == "spike_slab") {
    g.x_param = "beta1";
    g.y_param = "beta2";
    g.x_range = {-1.5, 1.5};
    g.y_range = {-1.5, 1.5};
  } else if (t == "adaptive_lasso") {
    g.x_param = "beta";
    g.y_param = "lambda";
    g.x_range = {-10.0, 20.0};
    g.y_range = {kLassoLambdaLo, kLassoLambdaHi};
  } else if (t == "iv") {
    g.x_param = "beta";
    g.y_param = "pi";
    g.x_range = {-5.0, 5.0};
    g.y_range = {-1.0, 1.0};
  } else {
    throw UsageError(t + " is a sample-based target; it has no 2-D grid");
  }
  return g;
}

}  // namespace wildpost
