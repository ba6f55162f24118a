#include "wildpost/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

namespace wildpost {

void GridSpec::validate() const {
  if (x_param == y_param) throw DomainError("grid: x and y parameters must differ");
  if (!(x_range.lo < x_range.hi) || !(y_range.lo < y_range.hi)) throw DomainError("grid: ranges need lo < hi");
  if (nx < 1 || ny < 1) throw DomainError("grid: need at least 1 cell per axis");
}

double cell_center(const AxisRange& range, int n, std::size_t i) {
  return range.lo + (static_cast<double>(i) + 0.5) * (range.hi - range.lo) / n;
}

double DensityGrid::x_at(std::size_t i) const { return cell_center(spec.x_range, spec.nx, i); }
double DensityGrid::y_at(std::size_t j) const { return cell_center(spec.y_range, spec.ny, j); }

namespace {

void check_range(const ParamDescriptor& d, const AxisRange& r) {
  const auto& s = d.support;
  if (s.kind == SupportKind::spd2x2) throw DomainError("grid: matrix parameter cannot be an axis: " + d.name);
  if (r.lo < s.lo || r.hi > s.hi)
    throw DomainError("grid: range of " + d.name + " leaves its support " + s.describe());
}

}  // namespace

DensityGrid evaluate_grid(const Target& target, const GridSpec& spec, unsigned threads) {
  spec.validate();
  const ParamSpace* space = target.grid_space();
  if (!space) throw DomainError("grid: " + target.name() + " is a sample-based target with no 2-D surface");

  // Template point: fixed values, axis slots filled per cell.
  std::vector<double> base(space->dim_constrained(), 0.0);
  std::size_t x_slot = 0, y_slot = 0;
  bool have_x = false, have_y = false;
  std::size_t offset = 0;
  for (const auto& d : space->descriptors()) {
    if (d.name == spec.x_param) {
      check_range(d, spec.x_range);
      x_slot = offset;
      have_x = true;
    } else if (d.name == spec.y_param) {
      check_range(d, spec.y_range);
      y_slot = offset;
      have_y = true;
    } else {
      if (d.support.size() != 1) throw DomainError("grid: cannot fix matrix parameter " + d.name);
      const auto it = spec.fixed.find(d.name);
      if (it == spec.fixed.end()) throw DomainError("grid: parameter " + d.name + " is neither an axis nor fixed");
      base[offset] = it->second;
    }
    offset += d.support.size();
  }
  if (!have_x) throw DomainError("grid: unknown parameter " + spec.x_param);
  if (!have_y) throw DomainError("grid: unknown parameter " + spec.y_param);
  for (const auto& [name, value] : spec.fixed)
    if (!space->offset_of(name) || name == spec.x_param || name == spec.y_param)
      throw DomainError("grid: fixed value for non-free parameter " + name);

  DensityGrid grid;
  grid.spec = spec;
  grid.target = target.name();
  const std::size_t nx = grid.nx(), ny = grid.ny();
  grid.logp.assign(nx * ny, 0.0);

  auto fill_rows = [&](std::size_t first, std::size_t stride) {
    std::vector<double> point = base;
    for (std::size_t j = first; j < ny; j += stride) {
      point[y_slot] = grid.y_at(j);
      for (std::size_t i = 0; i < nx; ++i) {
        point[x_slot] = grid.x_at(i);
        grid.logp[j * nx + i] = target.grid_log_density(point);
      }
    }
  };

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, ny));
  if (threads <= 1) {
    fill_rows(0, 1);
  } else {
    std::vector<std::jthread> workers;
    for (unsigned t = 0; t < threads; ++t) workers.emplace_back(fill_rows, t, threads);
  }

  double finite_max = -kInf;
  for (double v : grid.logp)
    if (std::isfinite(v)) finite_max = std::max(finite_max, v);
  const double clip_to = std::isfinite(finite_max) ? finite_max + kClipMargin : 0.0;
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) {
      double& v = grid.logp[j * nx + i];
      if (v == kInf || std::isnan(v)) {
        v = clip_to;
        grid.clipped_cells.push_back({i, j});
      }
    }
  for (double v : grid.logp)
    if (std::isfinite(v)) grid.max_logp = std::max(grid.max_logp, v);
  return grid;
}

std::vector<LocalMax> find_local_maxima(const DensityGrid& grid, int min_separation) {
  if (min_separation < 1) throw DomainError("find_local_maxima: min_separation must be at least 1");
  const std::size_t nx = grid.nx(), ny = grid.ny();
  std::vector<LocalMax> candidates;
  for (std::size_t j = 1; j + 1 < ny; ++j)
    for (std::size_t i = 1; i + 1 < nx; ++i) {
      const double v = grid.at(i, j);
      if (!std::isfinite(v)) continue;
      bool is_max = true;
      for (int dj = -1; dj <= 1 && is_max; ++dj)
        for (int di = -1; di <= 1; ++di) {
          if (di == 0 && dj == 0) continue;
          if (!(v > grid.at(i + di, j + dj))) {
            is_max = false;
            break;
          }
        }
      if (is_max) candidates.push_back({i, j, v});
    }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const LocalMax& a, const LocalMax& b) { return a.logp > b.logp; });

  std::vector<LocalMax> kept;
  for (const auto& c : candidates) {
    const bool far = std::all_of(kept.begin(), kept.end(), [&](const LocalMax& k) {
      const auto di = c.i > k.i ? c.i - k.i : k.i - c.i;
      const auto dj = c.j > k.j ? c.j - k.j : k.j - c.j;
      return std::max(di, dj) >= static_cast<std::size_t>(min_separation);
    });
    if (far) kept.push_back(c);
  }
  return kept;
}

std::array<double, 2> principal_axis(const DensityGrid& grid) {
  std::size_t finite = 0;
  double w_sum = 0.0, mx = 0.0, my = 0.0;
  for (std::size_t j = 0; j < grid.ny(); ++j)
    for (std::size_t i = 0; i < grid.nx(); ++i) {
      const double v = grid.at(i, j);
      if (!std::isfinite(v)) continue;
      ++finite;
      const double w = std::exp(v - grid.max_logp);
      w_sum += w;
      mx += w * grid.x_at(i);
      my += w * grid.y_at(j);
    }
  if (finite < 2) throw DomainError("principal_axis: need at least two finite cells");
  mx /= w_sum;
  my /= w_sum;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t j = 0; j < grid.ny(); ++j)
    for (std::size_t i = 0; i < grid.nx(); ++i) {
      const double v = grid.at(i, j);
      if (!std::isfinite(v)) continue;
      const double w = std::exp(v - grid.max_logp);
      const double dx = grid.x_at(i) - mx, dy = grid.y_at(j) - my;
      sxx += w * dx * dx;
      sxy += w * dx * dy;
      syy += w * dy * dy;
    }
  std::array<double, 2> axis{};
  if (sxy == 0.0) {
    axis = sxx >= syy ? std::array<double, 2>{1.0, 0.0} : std::array<double, 2>{0.0, 1.0};
  } else {
    const double half_gap = 0.5 * (sxx - syy);
    const double lead = 0.5 * (sxx + syy) + std::hypot(half_gap, sxy);
    // Pick the better-conditioned of the two equivalent eigenvector formulas.
    if (sxx >= syy)
      axis = {lead - syy, sxy};
    else
      axis = {sxy, lead - sxx};
    const double norm = std::hypot(axis[0], axis[1]);
    axis[0] /= norm;
    axis[1] /= norm;
  }
  // Components at rounding level count as zero for the sign rule.
  constexpr double kZero = 1e-12;
  if (axis[0] < -kZero || (std::abs(axis[0]) <= kZero && axis[1] < 0.0)) {
    axis[0] = -axis[0];
    axis[1] = -axis[1];
  }
  return axis;
}

std::vector<std::pair<double, double>> conditional_argmax(const DensityGrid& grid, GridAxis axis) {
  std::vector<std::pair<double, double>> spine;
  const bool by_column = axis == GridAxis::x;
  const std::size_t outer = by_column ? grid.nx() : grid.ny();
  const std::size_t inner = by_column ? grid.ny() : grid.nx();
  for (std::size_t a = 0; a < outer; ++a) {
    double best = -kInf;
    std::optional<std::size_t> arg;
    for (std::size_t b = 0; b < inner; ++b) {
      const double v = by_column ? grid.at(a, b) : grid.at(b, a);
      if (std::isfinite(v) && v > best) {
        best = v;
        arg = b;
      }
    }
    if (!arg) continue;
    if (by_column)
      spine.emplace_back(grid.x_at(a), grid.y_at(*arg));
    else
      spine.emplace_back(grid.y_at(a), grid.x_at(*arg));
  }
  return spine;
}

unsigned char gray_level(double logp, double max_logp) {
  if (!std::isfinite(logp) || !std::isfinite(max_logp)) return 0;
  const double level = std::round(255.0 * std::exp(logp - max_logp));
  return static_cast<unsigned char>(std::clamp(level, 0.0, 255.0));
}

namespace {

std::ofstream open_or_throw(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

void finish_or_throw(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace

void write_grid(const DensityGrid& grid, const std::filesystem::path& csv_path,
                const std::optional<std::filesystem::path>& pgm_path) {
  {
    auto out = open_or_throw(csv_path);
    out << "x,y,logp\n";
    for (std::size_t j = 0; j < grid.ny(); ++j)
      for (std::size_t i = 0; i < grid.nx(); ++i)
        out << format_real(grid.x_at(i)) << ',' << format_real(grid.y_at(j)) << ',' << format_real(grid.at(i, j))
            << '\n';
    finish_or_throw(out, csv_path);
  }

  if (pgm_path) {
    auto out = open_or_throw(*pgm_path, std::ios::out | std::ios::binary);
    out << "P5\n" << grid.nx() << ' ' << grid.ny() << "\n255\n";
    std::vector<char> row(grid.nx());
    for (std::size_t r = 0; r < grid.ny(); ++r) {
      const std::size_t j = grid.ny() - 1 - r;
      for (std::size_t i = 0; i < grid.nx(); ++i) row[i] = static_cast<char>(gray_level(grid.at(i, j), grid.max_logp));
      out.write(row.data(), static_cast<std::streamsize>(row.size()));
    }
    finish_or_throw(out, *pgm_path);
  }

  nlohmann::ordered_json side;
  side["target"] = grid.target;
  side["x_param"] = grid.spec.x_param;
  side["y_param"] = grid.spec.y_param;
  side["x_range"] = {grid.spec.x_range.lo, grid.spec.x_range.hi};
  side["y_range"] = {grid.spec.y_range.lo, grid.spec.y_range.hi};
  side["nx"] = grid.spec.nx;
  side["ny"] = grid.spec.ny;
  side["fixed"] = grid.spec.fixed;
  side["max_logp"] = grid.max_logp;
  auto clipped = nlohmann::ordered_json::array();
  for (const auto& c : grid.clipped_cells) clipped.push_back({c.i, c.j});
  side["clipped_cells"] = clipped;
  side["clip_margin"] = kClipMargin;
  side["metadata"] = grid.metadata;
  const auto side_path = std::filesystem::path(csv_path.string() + ".json");
  auto out = open_or_throw(side_path);
  out << side.dump(2) << '\n';
  finish_or_throw(out, side_path);
}

}  // namespace wildpost
