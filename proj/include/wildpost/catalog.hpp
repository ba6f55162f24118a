#pragma once

// The seven benchmark targets by name: simulation defaults, dataset files,
// and construction of the matching Target.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "wildpost/banana.hpp"
#include "wildpost/core.hpp"
#include "wildpost/grid.hpp"
#include "wildpost/instrumental.hpp"
#include "wildpost/lasso.hpp"
#include "wildpost/regression.hpp"
#include "wildpost/stoch_vol.hpp"

namespace wildpost {

/// Bad target name, parameter name or flag combination.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct TargetInfo {
  std::string name;
  std::string shape;     // banana, needle, ...
  std::string equation;  // model equation label
  std::string panel;     // figure panel label
  std::string summary;
};

const std::vector<TargetInfo>& target_catalog();
const TargetInfo& target_info(std::string_view name);

struct CollinearDataset {
  RegressionData data;
  CollinearPrior prior;
};

struct SpikeSlabDataset {
  RegressionData data;
  SpikeSlabPrior prior;
};

using Dataset =
    std::variant<NMixtureData, OccupancyData, CollinearDataset, SpikeSlabDataset, LassoData, IVData, SVData>;

std::string dataset_target(const Dataset& dataset);

using Overrides = std::map<std::string, double>;

/// Simulation settings for a target, keyed by override name.
Overrides simulation_defaults(std::string_view target);

/// Simulates a dataset at the default settings patched by `overrides`.
/// Unknown targets or keys raise UsageError.
Dataset simulate_dataset(std::string_view target, std::uint64_t seed, const Overrides& overrides = {});

nlohmann::ordered_json dataset_to_json(const Dataset& dataset);
Dataset dataset_from_json(const nlohmann::json& j);
Dataset load_dataset(const std::filesystem::path& path);
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);

struct TargetOptions {
  LaplaceConvention laplace = LaplaceConvention::scale;
  std::optional<NormalArg> normal_arg;
};

std::unique_ptr<Target> make_target(const Dataset& dataset, const TargetOptions& options = {});

/// Default contour window for a gridable target; throws UsageError for
/// sample-based targets.
GridSpec default_grid_spec(std::string_view target, int resolution = 200);

}  // namespace wildpost
