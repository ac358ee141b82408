#pragma once

#include <vector>

#include "gplab/grid.hpp"

namespace gplab {

// exp(-1/(1-t^2)) on |t| < 1, zero outside.
double bump(double t);

// Gauss-Legendre nodes and weights on [lo, hi].
struct Quadrature {
  std::vector<double> nodes;
  std::vector<double> weights;
};
Quadrature gauss_legendre(int n, double lo, double hi);

// Probability density proportional to bump mapped affinely onto [lo, hi].
class BumpDensity {
 public:
  BumpDensity(double lo, double hi);
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double operator()(double x) const;

 private:
  double lo_, hi_, norm_;
};

// Integral of bump over [-1,1], and the d-dimensional radial normalizer
// 1 / int_{R^d} bump(|x|) dx for d = 1, 3.
double bump_integral();
double bump_radial_norm(int dim);

// Mollifier h_r(x) = c r^{-d} bump(|x|/r) sampled at minimum-image grid
// displacements and rescaled so that sum h_r * cell_volume = 1.
// A scale below the grid spacing collapses to the discrete delta.
std::vector<double> grid_mollifier(const TorusGrid& g, double r);

}  // namespace gplab
