// wildpost: simulate datasets, evaluate contour grids, sample, and verify.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "wildpost/catalog.hpp"
#include "wildpost/checks.hpp"
#include "wildpost/grid.hpp"
#include "wildpost/samplers.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace wildpost;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Common {
  std::optional<std::uint64_t> seed;
  std::string out;
  bool json = false;
};

struct TargetFlags {
  std::string target;
  std::string data;
  std::vector<std::string> sets;
  bool laplace_rate = false;
  std::string normal_arg;
};

std::pair<std::string, double> parse_assignment(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw UsageError("expected key=value, got '" + text + "'");
  try {
    std::size_t used = 0;
    const double value = std::stod(text.substr(eq + 1), &used);
    if (used != text.size() - eq - 1) throw std::invalid_argument(text);
    return {text.substr(0, eq), value};
  } catch (const std::logic_error&) {
    throw UsageError("not a number in '" + text + "'");
  }
}

AxisRange parse_range(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw UsageError("range must be lo,hi: '" + text + "'");
  try {
    return {std::stod(text.substr(0, comma)), std::stod(text.substr(comma + 1))};
  } catch (const std::logic_error&) {
    throw UsageError("range must be lo,hi: '" + text + "'");
  }
}

TargetOptions target_options(const TargetFlags& flags) {
  TargetOptions options;
  if (flags.laplace_rate) options.laplace = LaplaceConvention::rate;
  if (flags.normal_arg == "sd") options.normal_arg = NormalArg::sd;
  else if (flags.normal_arg == "variance") options.normal_arg = NormalArg::variance;
  else if (!flags.normal_arg.empty()) throw UsageError("--normal-arg must be variance or sd");
  return options;
}

Overrides overrides_of(const TargetFlags& flags) {
  Overrides out;
  for (const auto& s : flags.sets) out.insert_or_assign(parse_assignment(s).first, parse_assignment(s).second);
  return out;
}

// Dataset from --data, or simulated with --seed and --set.
Dataset obtain_dataset(const TargetFlags& flags, const Common& common) {
  target_info(flags.target);
  if (!flags.data.empty()) {
    if (!flags.sets.empty()) throw UsageError("--set applies only to simulated data");
    Dataset ds = load_dataset(flags.data);
    if (dataset_target(ds) != flags.target)
      throw UsageError("dataset is for '" + dataset_target(ds) + "', not '" + flags.target + "'");
    return ds;
  }
  if (!common.seed) throw UsageError("either --data or --seed is required");
  return simulate_dataset(flags.target, *common.seed, overrides_of(flags));
}

void write_json(const ordered_json& j, const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

void write_manifest(const fs::path& primary, const std::vector<std::string>& argv, const std::string& subcommand,
                    const std::string& target, const ordered_json& params, const Common& common,
                    const ordered_json& artifacts) {
  ordered_json m{{"tool", "wildpost"}, {"version", kVersion}, {"subcommand", subcommand}, {"target", target},
                 {"argv", argv}, {"params", params}};
  m["seed"] = common.seed ? ordered_json(*common.seed) : ordered_json(nullptr);
  m["artifacts"] = artifacts;
  write_json(m, primary.string() + ".manifest.json");
}

ordered_json target_flags_json(const TargetFlags& flags) {
  ordered_json j{{"data", flags.data.empty() ? ordered_json(nullptr) : ordered_json(flags.data)},
                 {"laplace", flags.laplace_rate ? "rate" : "scale"},
                 {"normal_arg", flags.normal_arg.empty() ? "variance" : flags.normal_arg}};
  ordered_json sets = ordered_json::object();
  for (const auto& [k, v] : overrides_of(flags)) sets[k] = v;
  j["overrides"] = sets;
  return j;
}

int cmd_list(const Common& common) {
  ordered_json all = ordered_json::array();
  for (const auto& info : target_catalog()) {
    const auto target = make_target(simulate_dataset(info.name, kReferenceSeed));
    ordered_json params = ordered_json::array();
    for (const auto& d : target->space().descriptors())
      params.push_back({{"name", d.name}, {"support", d.support.describe()}});
    all.push_back({{"name", info.name},
                   {"shape", info.shape},
                   {"equation", info.equation},
                   {"panel", info.panel},
                   {"summary", info.summary},
                   {"params", params}});
  }
  if (common.json) {
    std::cout << all.dump(2) << '\n';
    return 0;
  }
  for (const auto& t : all) {
    std::cout << t["name"].get<std::string>() << "  [" << t["shape"].get<std::string>() << "; "
              << t["equation"].get<std::string>() << "; " << t["panel"].get<std::string>() << "]\n  "
              << t["summary"].get<std::string>() << "\n  params:";
    for (const auto& p : t["params"])
      std::cout << ' ' << p["name"].get<std::string>() << " in " << p["support"].get<std::string>() << ';';
    std::cout << '\n';
  }
  return 0;
}

int cmd_simulate(const TargetFlags& flags, const Common& common, const std::vector<std::string>& argv) {
  target_info(flags.target);
  if (!common.seed) throw UsageError("simulate requires --seed");
  if (!flags.data.empty()) throw UsageError("simulate does not take --data");
  const Overrides overrides = overrides_of(flags);
  const Dataset ds = simulate_dataset(flags.target, *common.seed, overrides);
  const fs::path out = common.out.empty() ? fs::path(flags.target + ".json") : fs::path(common.out);
  save_dataset(ds, out);

  ordered_json settings = ordered_json::object();
  Overrides merged = simulation_defaults(flags.target);
  for (const auto& [k, v] : overrides) merged[k] = v;
  for (const auto& [k, v] : merged) settings[k] = v;
  write_manifest(out, argv, "simulate", flags.target, settings, common, {{"dataset", out.string()}});
  if (common.json) std::cout << ordered_json{{"dataset", out.string()}}.dump() << '\n';
  else std::cout << "wrote " << out.string() << '\n';
  return 0;
}

struct GridFlags {
  std::string x_param, y_param, x_range, y_range, pgm;
  int nx = 200, ny = 200;
  unsigned threads = 0;
  bool default_ranges = false;
  std::vector<std::string> fixes;
};

std::string defaults_listing() {
  std::string text;
  for (const auto& info : target_catalog()) {
    try {
      const auto spec = default_grid_spec(info.name);
      text += "\n  " + info.name + ": --x-range " + format_real(spec.x_range.lo) + "," + format_real(spec.x_range.hi) +
              " --y-range " + format_real(spec.y_range.lo) + "," + format_real(spec.y_range.hi) + "  (" +
              spec.x_param + ", " + spec.y_param + ")";
    } catch (const UsageError&) {
      text += "\n  " + info.name + ": sample-based target, no grid";
    }
  }
  return text;
}

int cmd_grid(const TargetFlags& flags, const GridFlags& g, const Common& common, const std::vector<std::string>& argv) {
  target_info(flags.target);
  if (flags.target == "stoch_vol")
    throw UsageError("stoch_vol is a sample-based target with no 2-D grid; use `wildpost sample stoch_vol`");
  if (!g.default_ranges && (g.x_range.empty() || g.y_range.empty()))
    throw UsageError("grid needs --x-range and --y-range, or --default-ranges. Defaults:" + defaults_listing());

  GridSpec spec = default_grid_spec(flags.target);
  spec.nx = g.nx;
  spec.ny = g.ny;
  if (!g.x_param.empty()) spec.x_param = g.x_param;
  if (!g.y_param.empty()) spec.y_param = g.y_param;
  if (!g.x_range.empty()) spec.x_range = parse_range(g.x_range);
  if (!g.y_range.empty()) spec.y_range = parse_range(g.y_range);
  for (const auto& f : g.fixes) {
    const auto [k, v] = parse_assignment(f);
    spec.fixed.insert_or_assign(k, v);
  }

  const Dataset ds = obtain_dataset(flags, common);
  const auto target = make_target(ds, target_options(flags));
  DensityGrid grid;
  try {
    grid = evaluate_grid(*target, spec, g.threads);
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
  const fs::path out = common.out.empty() ? fs::path(flags.target + "_grid.csv") : fs::path(common.out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  std::optional<fs::path> pgm;
  if (!g.pgm.empty()) pgm = g.pgm;
  write_grid(grid, out, pgm);

  ordered_json params = target_flags_json(flags);
  params["x_param"] = spec.x_param;
  params["y_param"] = spec.y_param;
  params["x_range"] = {spec.x_range.lo, spec.x_range.hi};
  params["y_range"] = {spec.y_range.lo, spec.y_range.hi};
  params["nx"] = spec.nx;
  params["ny"] = spec.ny;
  params["fixed"] = spec.fixed;
  ordered_json artifacts{{"csv", out.string()}, {"sidecar", out.string() + ".json"}};
  if (pgm) artifacts["pgm"] = pgm->string();
  write_manifest(out, argv, "grid", flags.target, params, common, artifacts);
  if (common.json) std::cout << artifacts.dump() << '\n';
  else std::cout << "wrote " << out.string() << (pgm ? " and " + pgm->string() : "") << '\n';
  return 0;
}

struct SampleFlags {
  std::string sampler = "hmc";
  int chains = 4, warmup = 1000, iters = 1000;
  std::optional<double> target_accept;
  int leapfrog_steps = 32;
  double leapfrog_jitter = 0.5;
};

int cmd_sample(const TargetFlags& flags, const SampleFlags& s, const Common& common,
               const std::vector<std::string>& argv) {
  target_info(flags.target);
  if (!common.seed) throw UsageError("sample requires --seed");
  if (s.sampler != "hmc" && s.sampler != "rwm") throw UsageError("--sampler must be hmc or rwm");
  SamplerConfig config = SamplerConfig::defaults(s.sampler == "hmc" ? Algorithm::hmc : Algorithm::rwm);
  config.chains = s.chains;
  config.warmup = s.warmup;
  config.iters = s.iters;
  config.seed = *common.seed;
  if (s.target_accept) config.target_accept = *s.target_accept;
  config.leapfrog_steps = s.leapfrog_steps;
  config.leapfrog_jitter = s.leapfrog_jitter;
  try {
    config.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  const Dataset ds = obtain_dataset(flags, common);
  const auto target = make_target(ds, target_options(flags));
  const ChainSet set = sample(*target, config);
  const fs::path out = common.out.empty() ? fs::path(flags.target + "_draws.csv") : fs::path(common.out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  write_draws(set, out);
  const fs::path diag = out.string() + ".diagnostics.json";
  write_diagnostics(set, diag);

  ordered_json params = target_flags_json(flags);
  params["sampler"] = to_string(config.algorithm);
  params["chains"] = config.chains;
  params["warmup"] = config.warmup;
  params["iters"] = config.iters;
  params["target_accept"] = config.target_accept;
  if (config.algorithm == Algorithm::hmc) {
    params["leapfrog_steps"] = config.leapfrog_steps;
    params["leapfrog_jitter"] = config.leapfrog_jitter;
  }
  const ordered_json artifacts{{"draws", out.string()}, {"diagnostics", diag.string()}};
  write_manifest(out, argv, "sample", flags.target, params, common, artifacts);

  if (common.json) {
    std::cout << artifacts.dump() << '\n';
    return 0;
  }
  std::cout << "wrote " << out.string() << '\n';
  for (const auto& d : set.diagnostics)
    std::cout << "  " << d.name << "  rhat " << format_real(d.rhat) << "  ess " << format_real(d.ess) << '\n';
  int divergences = 0;
  for (int v : set.divergences) divergences += v;
  if (divergences > 0) std::cout << "  divergences " << divergences << '\n';
  return 0;
}

// Negative control: negates every gradient so the FD checks must fail.
class SignFlipTarget final : public Target {
 public:
  explicit SignFlipTarget(std::unique_ptr<Target> inner) : inner_(std::move(inner)) {}
  std::string name() const override { return inner_->name(); }
  const ParamSpace& space() const override { return inner_->space(); }
  double log_density(std::span<const double> c, std::span<double> grad) const override {
    const double lp = inner_->log_density(c, grad);
    for (auto& g : grad) g = -g;
    return lp;
  }

 private:
  std::unique_ptr<Target> inner_;
};

int cmd_check(const std::string& target, const std::string& fault, const Common& common) {
  CheckOptions options;
  if (!target.empty()) {
    if (target != "core") target_info(target);
    options.target = target;
  }
  if (common.seed) options.seed = *common.seed;
  if (fault == "sign-flip")
    options.decorate = [](std::unique_ptr<Target> t) -> std::unique_ptr<Target> {
      return std::make_unique<SignFlipTarget>(std::move(t));
    };
  else if (!fault.empty())
    throw UsageError("unknown fault '" + fault + "'");
  const auto results = run_checks(options);
  if (common.json) print_report_json(results, std::cout);
  else print_report(results, std::cout);
  for (const auto& r : results)
    if (!r.pass) return 1;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv, argv + argc);
  CLI::App app{"Benchmark posteriors with awkward geometry"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  Common common;
  TargetFlags tflags;
  GridFlags gflags;
  SampleFlags sflags;
  std::string check_target, fault;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", common.seed, "RNG seed");
    sub->add_option("--out", common.out, "Output path");
    sub->add_flag("--json", common.json, "Machine-readable stdout");
  };
  auto add_target = [&](CLI::App* sub, bool data) {
    sub->add_option("target", tflags.target, "Target name (see `list`)")->required();
    if (data) sub->add_option("--data", tflags.data, "Dataset JSON from `simulate`");
    sub->add_option("--set", tflags.sets, "Simulation override key=value")->take_all();
    if (data) {
      sub->add_flag("--laplace-rate", tflags.laplace_rate, "Rate parameterization of the Laplace prior");
      sub->add_option("--normal-arg", tflags.normal_arg, "Spike/slab normal argument: variance or sd");
    }
  };

  auto* list = app.add_subcommand("list", "List the targets");
  list->add_flag("--json", common.json, "Machine-readable stdout");

  auto* simulate = app.add_subcommand("simulate", "Simulate a dataset at the reference settings");
  add_target(simulate, false);
  add_common(simulate);

  auto* grid = app.add_subcommand("grid", "Evaluate the log density on a 2-D grid");
  add_target(grid, true);
  add_common(grid);
  grid->add_option("--x-param", gflags.x_param, "Parameter on the x axis");
  grid->add_option("--y-param", gflags.y_param, "Parameter on the y axis");
  grid->add_option("--x-range", gflags.x_range, "lo,hi");
  grid->add_option("--y-range", gflags.y_range, "lo,hi");
  grid->add_flag("--default-ranges", gflags.default_ranges, "Use the per-target default window");
  grid->add_option("--nx", gflags.nx, "Columns")->check(CLI::PositiveNumber);
  grid->add_option("--ny", gflags.ny, "Rows")->check(CLI::PositiveNumber);
  grid->add_option("--fix", gflags.fixes, "Fix an off-grid parameter name=value")->take_all();
  grid->add_option("--pgm", gflags.pgm, "Also write a PGM heatmap");
  grid->add_option("--threads", gflags.threads, "Worker threads (0 = all cores)");

  auto* samp = app.add_subcommand("sample", "Run MCMC on a target");
  add_target(samp, true);
  add_common(samp);
  samp->add_option("--sampler", sflags.sampler, "hmc or rwm");
  samp->add_option("--chains", sflags.chains, "Number of chains");
  samp->add_option("--warmup", sflags.warmup, "Warmup iterations per chain");
  samp->add_option("--iters", sflags.iters, "Kept iterations per chain");
  samp->add_option("--target-accept", sflags.target_accept, "Adaptation target acceptance rate");
  samp->add_option("--leapfrog-steps", sflags.leapfrog_steps, "Mean HMC path length in steps");
  samp->add_option("--leapfrog-jitter", sflags.leapfrog_jitter, "Relative path length jitter");

  auto* check = app.add_subcommand("check", "Run the oracle suite");
  check->add_option("target", check_target, "Limit to one target, or core");
  add_common(check);
  check->add_option("--inject-fault", fault)->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*list) return cmd_list(common);
    if (*simulate) return cmd_simulate(tflags, common, args);
    if (*grid) return cmd_grid(tflags, gflags, common, args);
    if (*samp) return cmd_sample(tflags, sflags, common, args);
    if (*check) return cmd_check(check_target, fault, common);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const InitializationError& e) {
    std::cerr << "initialization failed: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
