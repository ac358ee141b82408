#include "gplab/grid.hpp"

#include <cmath>
#include <string>

#include "gplab/error.hpp"

namespace gplab {

TorusGrid TorusGrid::make(int dim, int points) {
  if (dim != 1 && dim != 3) throw InputError("grid dimension must be 1 or 3, got " + std::to_string(dim));
  if (points < 2 || !is_power_of_two(points))
    throw InputError("points per side must be a power of two >= 2, got " + std::to_string(points));
  return TorusGrid{dim, points};
}

double TorusGrid::cell_volume() const { return std::pow(spacing(), dim); }

std::size_t TorusGrid::size() const { return ipow(static_cast<std::size_t>(points), dim); }

std::size_t ipow(std::size_t base, int exp) {
  std::size_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

bool is_power_of_two(long n) { return n > 0 && (n & (n - 1)) == 0; }

double min_image(double dx) { return dx - std::floor(dx + 0.5); }

double grid_distance(const TorusGrid& g, const int* index_diff) {
  double s = 0.0;
  for (int a = 0; a < g.dim; ++a) {
    int i = ((index_diff[a] % g.points) + g.points) % g.points;
    double c = g.signed_coord(i);
    s += c * c;
  }
  return std::sqrt(s);
}

std::array<double, 3> grid_point(const TorusGrid& g, std::size_t flat) {
  std::array<double, 3> x{0.0, 0.0, 0.0};
  for (int a = g.dim - 1; a >= 0; --a) {
    x[a] = static_cast<double>(flat % g.points) * g.spacing();
    flat /= g.points;
  }
  return x;
}

}  // namespace gplab
