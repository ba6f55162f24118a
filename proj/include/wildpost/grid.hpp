#pragma once

// Dense evaluation of a target's two-parameter surface, plus the shape
// statistics used to recognise bananas, needles, crosses and multiple modes.

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wildpost/core.hpp"

namespace wildpost {

struct AxisRange {
  double lo;
  double hi;
};

struct GridSpec {
  std::string x_param;
  std::string y_param;
  AxisRange x_range{0.0, 1.0};
  AxisRange y_range{0.0, 1.0};
  int nx = 200;
  int ny = 200;
  std::map<std::string, double> fixed;

  void validate() const;
};

struct GridCell {
  std::size_t i;
  std::size_t j;
  friend bool operator==(const GridCell&, const GridCell&) = default;
};

struct DensityGrid {
  GridSpec spec;
  std::string target;
  std::vector<double> logp;  // ny rows of nx cells, row j at [j * nx, (j + 1) * nx)
  double max_logp = -kInf;
  std::vector<GridCell> clipped_cells;
  std::map<std::string, std::string> metadata;

  std::size_t nx() const { return static_cast<std::size_t>(spec.nx); }
  std::size_t ny() const { return static_cast<std::size_t>(spec.ny); }
  double at(std::size_t i, std::size_t j) const { return logp[j * nx() + i]; }
  double x_at(std::size_t i) const;
  double y_at(std::size_t j) const;
};

/// Cell center lo + (i + 1/2)(hi - lo)/n.
double cell_center(const AxisRange& range, int n, std::size_t i);

/// Log density above the finite maximum by more than this is clipped.
inline constexpr double kClipMargin = 10.0;

/// Evaluates the target's grid density (constrained space, no Jacobian) at
/// every cell center. Rows may be split across `threads` workers; 0 picks the
/// hardware concurrency. +inf cells are clipped to finite max + kClipMargin
/// and listed in clipped_cells.
DensityGrid evaluate_grid(const Target& target, const GridSpec& spec, unsigned threads = 0);

struct LocalMax {
  std::size_t i;
  std::size_t j;
  double logp;
};

/// Interior cells strictly above all eight neighbours, sorted by descending
/// logp and thinned greedily so kept maxima are at least `min_separation`
/// cells apart (Chebyshev distance).
std::vector<LocalMax> find_local_maxima(const DensityGrid& grid, int min_separation);

/// Leading eigenvector of the density-weighted covariance of cell centers,
/// signed so the first component above 1e-12 in magnitude is positive.
std::array<double, 2> principal_axis(const DensityGrid& grid);

enum class GridAxis { x, y };

/// For each column (axis x) or row (axis y): (coordinate, coordinate of the
/// other axis at the max cell). Columns with no finite value are skipped.
std::vector<std::pair<double, double>> conditional_argmax(const DensityGrid& grid, GridAxis axis);

/// Gray level round(255 exp(logp - max_logp)); 0 for -inf.
unsigned char gray_level(double logp, double max_logp);

/// Writes `x,y,logp` CSV, a JSON sidecar at csv_path + ".json", and an
/// optional binary PGM heatmap (top row = highest y).
void write_grid(const DensityGrid& grid, const std::filesystem::path& csv_path,
                const std::optional<std::filesystem::path>& pgm_path = std::nullopt);

}  // namespace wildpost
