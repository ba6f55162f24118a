#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "wildpost/banana.hpp"
#include "wildpost/instrumental.hpp"
#include "wildpost/regression.hpp"
#include "wildpost/grid.hpp"

using namespace wildpost;
namespace fs = std::filesystem;

namespace {

class FunctionTarget final : public Target {
 public:
  explicit FunctionTarget(std::function<double(double, double)> f)
      : f_(std::move(f)), space_({{"x", Support::real()}, {"y", Support::real()}}) {}
  std::string name() const override { return "synthetic"; }
  const ParamSpace& space() const override { return space_; }
  double log_density(std::span<const double> c, std::span<double> = {}) const override { return f_(c[0], c[1]); }

 private:
  std::function<double(double, double)> f_;
  ParamSpace space_;
};

GridSpec square(double half, int n) {
  GridSpec spec{"x", "y", {-half, half}, {-half, half}, n, n, {}};
  return spec;
}

fs::path temp_dir() {
  auto dir = fs::temp_directory_path() / "wildpost_grid_test";
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("cell centers") {
  CHECK(cell_center({0.0, 1.0}, 4, 0) == 0.125);
  CHECK(cell_center({0.0, 1.0}, 4, 3) == 0.875);
}

TEST_CASE("grid spec validation") {
  GridSpec bad = square(1.0, 10);
  bad.x_range = {1.0, 1.0};
  const FunctionTarget flat([](double, double) { return 0.0; });
  CHECK_THROWS_AS(evaluate_grid(flat, bad), DomainError);
  GridSpec same = square(1.0, 10);
  same.y_param = "x";
  CHECK_THROWS_AS(evaluate_grid(flat, same), DomainError);
  GridSpec unknown = square(1.0, 10);
  unknown.x_param = "nope";
  CHECK_THROWS_AS(evaluate_grid(flat, unknown), DomainError);
}

TEST_CASE("symmetric target gives equal corners") {
  RegressionData empty{{{0.0, 0.0}}, {0.0}};
  const SpikeSlabTarget target(empty, {});
  GridSpec spec{"beta1", "beta2", {-1.0, 1.0}, {-1.0, 1.0}, 2, 2, {}};
  const auto grid = evaluate_grid(target, spec);
  CHECK(grid.at(0, 0) == grid.at(1, 0));
  CHECK(grid.at(0, 0) == grid.at(0, 1));
  CHECK(grid.at(0, 0) == grid.at(1, 1));
}

TEST_CASE("occupancy single site grid") {
  const OccupancyTarget target(OccupancyData{{{0, 1}}});
  GridSpec spec{"psi", "p", {0.0, 1.0}, {0.0, 1.0}, 1, 1, {}};
  const auto grid = evaluate_grid(target, spec);
  CHECK(grid.at(0, 0) == doctest::Approx(std::log(0.75)).epsilon(1e-14));
}

TEST_CASE("iv grid clips the singular cell") {
  // y = x * 0.5 exactly, so beta = 0.5 zeroes the first residual.
  const IVData data{{0.5, 1.0, -0.5, 1.5}, {1.0, 2.0, -1.0, 3.0}, {1.0, 0.0, 1.0, 1.0}};
  const IVTarget target(data);
  GridSpec spec{"beta", "pi", {0.0, 1.0}, {-1.0, 1.0}, 5, 4, {}};
  const auto grid = evaluate_grid(target, spec);
  REQUIRE(grid.clipped_cells.size() == 4);
  for (const auto& cell : grid.clipped_cells) {
    CHECK(cell.i == 2);
    CHECK(std::isfinite(grid.at(cell.i, cell.j)));
  }
  double finite_max = -kInf;
  for (std::size_t j = 0; j < grid.ny(); ++j)
    for (std::size_t i = 0; i < grid.nx(); ++i)
      if (i != 2) finite_max = std::max(finite_max, grid.at(i, j));
  CHECK(grid.at(2, 0) == finite_max + kClipMargin);
  CHECK(grid.max_logp == finite_max + kClipMargin);
}

TEST_CASE("grid uses thread count without changing values") {
  const FunctionTarget bump([](double x, double y) { return -x * x - 0.3 * x * y - 2.0 * y * y; });
  const auto one = evaluate_grid(bump, square(2.0, 37), 1);
  const auto many = evaluate_grid(bump, square(2.0, 37), 5);
  CHECK(one.logp == many.logp);
}

TEST_CASE("local maxima") {
  // Cell centers sit on the 0.05 + 0.1k lattice.
  const FunctionTarget one([](double x, double y) { return -0.5 * ((x - 0.25) * (x - 0.25) + (y + 0.15) * (y + 0.15)); });
  const auto g1 = evaluate_grid(one, square(3.0, 60));
  const auto m1 = find_local_maxima(g1, 3);
  REQUIRE(m1.size() == 1);
  CHECK(g1.x_at(m1[0].i) == doctest::Approx(0.25).epsilon(1e-9));
  CHECK(g1.y_at(m1[0].j) == doctest::Approx(-0.15).epsilon(1e-9));

  const FunctionTarget two([](double x, double y) {
    const double a = -2.0 * ((x - 1.42) * (x - 1.42) + (y - 0.03) * (y - 0.03));
    const double b = -2.0 * ((x + 1.33) * (x + 1.33) + (y + 0.02) * (y + 0.02));
    return logsumexp(a, b);
  });
  CHECK(find_local_maxima(evaluate_grid(two, square(3.0, 60)), 3).size() == 2);

  const FunctionTarget flat([](double, double) { return 1.0; });
  CHECK(find_local_maxima(evaluate_grid(flat, square(1.0, 10)), 1).empty());
}

TEST_CASE("principal axis") {
  const FunctionTarget tall([](double x, double y) { return -0.5 * (x * x + y * y / 4.0); });
  const auto a = principal_axis(evaluate_grid(tall, square(10.0, 200)));
  CHECK(std::abs(a[0]) < 1e-6);
  CHECK(a[1] == doctest::Approx(1.0));

  const FunctionTarget ridge([](double x, double y) {
    const double along = (x + y) / std::sqrt(2.0), across = (x - y) / std::sqrt(2.0);
    return -0.5 * (along * along / 4.0 + across * across / 0.01);
  });
  const auto r = principal_axis(evaluate_grid(ridge, square(8.0, 200)));
  CHECK(std::abs(r[0] - 1.0 / std::sqrt(2.0)) < 1e-6);
  CHECK(std::abs(r[1] - 1.0 / std::sqrt(2.0)) < 1e-6);

  const FunctionTarget round([](double x, double y) { return -0.5 * (x * x + y * y); });
  const auto u = principal_axis(evaluate_grid(round, square(5.0, 50)));
  CHECK(std::hypot(u[0], u[1]) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("conditional argmax") {
  const FunctionTarget separable([](double x, double y) { return -x * x - (y - 0.5) * (y - 0.5); });
  const auto spine = conditional_argmax(evaluate_grid(separable, square(2.0, 40)), GridAxis::x);
  REQUIRE(spine.size() == 40);
  for (const auto& [x, y] : spine) CHECK(y == spine.front().second);

  const FunctionTarget curve([](double x, double y) {
    const double c = y - std::exp(x / 2.0);
    return -10.0 * c * c;
  });
  const auto mono = conditional_argmax(evaluate_grid(curve, square(2.0, 80)), GridAxis::x);
  for (std::size_t k = 1; k < mono.size(); ++k) CHECK(mono[k].second >= mono[k - 1].second);
  const auto by_row = conditional_argmax(evaluate_grid(separable, square(2.0, 40)), GridAxis::y);
  for (const auto& [y, x] : by_row) CHECK(std::abs(x) < 0.1);
}

TEST_CASE("gray levels") {
  CHECK(gray_level(3.0, 3.0) == 255);
  CHECK(gray_level(-7.0, 3.0) == static_cast<unsigned char>(std::lround(255.0 * std::exp(-10.0))));
  CHECK(gray_level(-7.0, 3.0) == 0);
  CHECK(gray_level(-kInf, 3.0) == 0);
}

TEST_CASE("write_grid files") {
  const auto dir = temp_dir();
  const FunctionTarget flat([](double, double) { return -1.5; });
  const auto grid = evaluate_grid(flat, square(1.0, 2));
  write_grid(grid, dir / "g.csv", dir / "g.pgm");

  std::ifstream csv(dir / "g.csv");
  std::string line;
  std::getline(csv, line);
  CHECK(line == "x,y,logp");
  int rows = 0;
  while (std::getline(csv, line)) ++rows;
  CHECK(rows == 4);

  std::ifstream pgm(dir / "g.pgm", std::ios::binary);
  std::stringstream buf;
  buf << pgm.rdbuf();
  const std::string bytes = buf.str();
  const std::string header = "P5\n2 2\n255\n";
  REQUIRE(bytes.size() == header.size() + 4);
  CHECK(bytes.substr(0, header.size()) == header);
  for (std::size_t k = header.size(); k < bytes.size(); ++k) CHECK(static_cast<unsigned char>(bytes[k]) == 255);
  CHECK(fs::exists(dir / "g.csv.json"));
}

TEST_CASE("pgm top row is the highest y") {
  const auto dir = temp_dir();
  const FunctionTarget up([](double, double y) { return y > 0 ? 0.0 : -20.0; });
  write_grid(evaluate_grid(up, square(1.0, 2)), dir / "u.csv", dir / "u.pgm");
  std::ifstream pgm(dir / "u.pgm", std::ios::binary);
  std::stringstream buf;
  buf << pgm.rdbuf();
  const std::string bytes = buf.str();
  const auto start = bytes.size() - 4;
  CHECK(static_cast<unsigned char>(bytes[start]) == 255);
  CHECK(static_cast<unsigned char>(bytes[start + 2]) == 0);
}
