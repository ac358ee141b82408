#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <vector>

namespace gplab {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;

inline constexpr double kPi = 3.14159265358979323846;

// Periodic grid on the unit torus [0,1)^d, M points per side.
struct TorusGrid {
  int dim = 1;
  int points = 0;

  static TorusGrid make(int dim, int points);

  double spacing() const { return 1.0 / points; }
  double cell_volume() const;
  std::size_t size() const;
  // Signed integer wavenumber of FFT index i: 0..M/2-1, -M/2..-1.
  int wavenumber(int i) const { return i < points / 2 ? i : i - points; }
  // Minimum-image coordinate of index i, in [-1/2, 1/2).
  double signed_coord(int i) const { return wavenumber(i) * spacing(); }

  bool operator==(const TorusGrid& o) const { return dim == o.dim && points == o.points; }
  bool operator!=(const TorusGrid& o) const { return !(*this == o); }
};

std::size_t ipow(std::size_t base, int exp);
bool is_power_of_two(long n);

// Minimum-image representative of a coordinate difference, in [-1/2, 1/2).
double min_image(double dx);

// |d| for a grid displacement given per-axis index differences (mod M).
double grid_distance(const TorusGrid& g, const int* index_diff);

// Point coordinates of flat index `flat` of one slot.
std::array<double, 3> grid_point(const TorusGrid& g, std::size_t flat);

}  // namespace gplab
