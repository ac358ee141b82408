#include "gplab/bump.hpp"

#include <cmath>

#include "gplab/error.hpp"

namespace gplab {

double bump(double t) {
  double s = 1.0 - t * t;
  if (s <= 0.0) return 0.0;
  return std::exp(-1.0 / s);
}

Quadrature gauss_legendre(int n, double lo, double hi) {
  if (n < 1) throw InputError("gauss_legendre: n must be >= 1");
  Quadrature q;
  q.nodes.resize(n);
  q.weights.resize(n);
  const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    q.nodes[i] = mid - half * x;
    q.nodes[n - 1 - i] = mid + half * x;
    q.weights[i] = q.weights[n - 1 - i] = half * w;
  }
  return q;
}

namespace {

// Trapezoid rule on [0, 1]: spectrally accurate for even integrands flat at t = 1.
double trapezoid_bump_moment(int power) {
  const int n = 20000;
  double h = 1.0 / n, s = power == 0 ? 0.5 * bump(0.0) : 0.0;
  for (int i = 1; i < n; ++i) {
    double t = i * h;
    s += bump(t) * std::pow(t, power);
  }
  return s * h;
}

}  // namespace

double bump_integral() {
  static const double v = 2.0 * trapezoid_bump_moment(0);
  return v;
}

double bump_radial_norm(int dim) {
  if (dim == 1) return 1.0 / bump_integral();
  if (dim == 3) {
    static const double v = 1.0 / (4.0 * kPi * trapezoid_bump_moment(2));
    return v;
  }
  throw InputError("bump_radial_norm: dim must be 1 or 3");
}

BumpDensity::BumpDensity(double lo, double hi) : lo_(lo), hi_(hi) {
  if (!(hi > lo)) throw InputError("BumpDensity: need hi > lo");
  norm_ = 2.0 / ((hi - lo) * bump_integral());
}

double BumpDensity::operator()(double x) const {
  double t = (2.0 * x - lo_ - hi_) / (hi_ - lo_);
  return norm_ * bump(t);
}

std::vector<double> grid_mollifier(const TorusGrid& g, double r) {
  std::vector<double> h(g.size(), 0.0);
  if (!(r > 0.0)) {
    h[0] = 1.0 / g.cell_volume();
    return h;
  }
  double sum = 0.0;
  std::vector<int> idx(g.dim);
  for (std::size_t f = 0; f < h.size(); ++f) {
    std::size_t rem = f;
    for (int a = g.dim - 1; a >= 0; --a) {
      idx[a] = static_cast<int>(rem % g.points);
      rem /= g.points;
    }
    double d = grid_distance(g, idx.data());
    h[f] = bump(d / r);
    sum += h[f];
  }
  const double scale = 1.0 / (sum * g.cell_volume());
  for (auto& v : h) v *= scale;
  return h;
}

}  // namespace gplab
