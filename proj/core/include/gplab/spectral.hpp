#pragma once

#include <functional>
#include <vector>

#include "gplab/grid.hpp"

namespace gplab {

// Multidimensional FFT over `slots` copies of a torus grid, i.e. an array of
// rank slots*dim with M points per axis (row-major, slot 0 slowest).
class Spectral {
 public:
  Spectral(const TorusGrid& grid, int slots);

  const TorusGrid& grid() const { return grid_; }
  int slots() const { return slots_; }
  int rank() const { return rank_; }
  std::size_t size() const { return size_; }

  // Unnormalized forward transform (sign -1), in place.
  void forward(CVec& a) const;
  // Backward transform (sign +1) divided by size(), in place.
  void backward(CVec& a) const;

  // |2 pi k|^2 for FFT index i along one axis.
  double k2(int i) const;
  // Multiply Fourier coefficients by sum over axes of table[axis][digit].
  void multiply_additive(CVec& a, const std::vector<std::vector<double>>& table) const;
  // Multiply Fourier coefficients by product over axes of table[axis][digit].
  void multiply_separable(CVec& a, const std::vector<std::vector<cplx>>& table) const;

  // Axis tables of sum_{slot in weights} weight * |2 pi k|^2 for the slot's axes.
  std::vector<std::vector<double>> laplacian_table(const std::vector<double>& slot_weights) const;

  // Apply sum_s slot_weights[s] * (-Delta_s) spectrally.
  CVec apply_neg_laplacian(const CVec& a, const std::vector<double>& slot_weights) const;
  // Spectral derivative along one axis (Nyquist mode dropped).
  CVec derivative(const CVec& a, int axis) const;

 private:
  TorusGrid grid_;
  int slots_;
  int rank_;
  std::size_t size_;
};

// Axis digit of a flat index.
inline int axis_digit(std::size_t flat, int axis, int rank, int M) {
  std::size_t stride = 1;
  for (int a = rank - 1; a > axis; --a) stride *= static_cast<std::size_t>(M);
  return static_cast<int>((flat / stride) % static_cast<std::size_t>(M));
}

}  // namespace gplab
