#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gplab/cutoff.hpp"
#include "gplab/grid.hpp"
#include "gplab/twobody.hpp"

namespace gplab::inequalities {

// Band-limited Gaussian fields on `slots` copies of a grid, normalized in L2.
// Coefficients are drawn per wavenumber tuple (|k_axis| <= k_max) in a fixed
// order, so the same seed gives the same continuum field on every grid.
struct TestEnsemble {
  TorusGrid grid;
  int slots = 1;
  int k_max = 0;
  std::uint64_t seed = 0;
  std::vector<CVec> fields;
  int count() const { return static_cast<int>(fields.size()); }
};
TestEnsemble make_ensemble(const TorusGrid& g, int count, int k_max, std::uint64_t seed, int slots = 1);
// Ensemble made of given fields (normalization is left alone).
TestEnsemble ensemble_of(const TorusGrid& g, std::vector<CVec> fields, int slots = 1);

// Radial weight centered at the origin, sampled at minimum-image distances.
struct WeightFunction {
  enum class Kind { Lambda, Sigma, Custom };
  Kind kind = Kind::Custom;
  TorusGrid grid;
  double ell1 = 0.0, a = 0.0;
  std::string label;
  std::vector<double> values;

  // chi(|x| <= 3 ell1/2)/|x|^2, origin node set to zero.
  static WeightFunction lambda(const TorusGrid& g, double ell1);
  // chi(|x| <= 3 ell1/2)/(|x|^3 + a^3).
  static WeightFunction sigma(const TorusGrid& g, double ell1, double a);
  // u(r); with exclude_origin the r = 0 node is zero.
  static WeightFunction custom(const TorusGrid& g, const std::function<double(double)>& u, std::string label,
                               bool exclude_origin = false);
  static WeightFunction constant(const TorusGrid& g, double c);
  // Mass-m radial bump of radius width (grid normalized).
  static WeightFunction bump(const TorusGrid& g, double width, double mass = 1.0);

  // (sum |U|^p cell_volume)^{1/p}.
  double norm(double p) const;
};

struct HardyReport {
  double ell = 0.0;
  int ball_points = 0;
  double mean_U = 0.0;
  // per field: <U|f|^2>, <|grad f|^2>, <|f|^2> and the ratio to <|grad f|^2> + <U><|f|^2>
  std::vector<double> lhs, grad, mass, ratio;
  double C = 0.0;
};
// <U|f|^2> <= C <|grad f|^2> + C <U><|f|^2>, averages over the grid ball |x| <= ell.
// Rejects U < 0 or U(x) > c_bound/|x|^2 on the ball.
HardyReport hardy_ball_probe(const WeightFunction& U, const TestEnsemble& e, double ell, double c_bound);

struct SobolevReport {
  double norm_U = 0.0;  // L^{3/2} for sob1, L^1 for 2delta
  std::vector<double> lhs, rhs, ratio;
  double C = 0.0;
};
// int U|psi|^2 <= C ||U||_{3/2} int (|grad psi|^2 + |psi|^2) on single-slot fields.
SobolevReport sob1_probe(const WeightFunction& U, const TestEnsemble& e);
// <f, U(x - y) f> <= C ||U||_1 <f, (1 - Delta_x)(1 - Delta_y) f> on two-slot fields.
SobolevReport two_delta_probe(const WeightFunction& U, const TestEnsemble& pairs);

struct PoincareLevel {
  double beta = 0.0;
  double C = 0.0;       // max L/R over nodes with R > 0
  double sup_L = 0.0;   // max_x |f - delta_beta * f|
  long violations = 0;  // nodes with R = 0 but L above roundoff
};
struct PoincareReport {
  std::vector<PoincareLevel> levels;
  // least-squares slope of log sup_L against log beta
  double decay_order = 0.0;
};
// L(x) = |f(x) - (delta_beta * f)(x)| against R(x) = int_{|y| <= beta} |grad f(x + y)| / |y|^{d-1} dy.
PoincareReport poincare_mollifier_probe(const TestEnsemble& e, const std::vector<double>& betas);
// Nodewise L and R for one field.
void poincare_sides(const CVec& f, const TorusGrid& g, double beta, std::vector<double>& L, std::vector<double>& R);

struct CombinedReport {
  int n = 0;
  double q = 1.0;
  bool unit_W = false;
  double mass_weight = 0.0;  // ell1 ell^-3
  // per field: left side, gradient term, mass term (already multiplied by mass_weight)
  std::vector<double> lhs, grad, mass, ratio;
  double C = 0.0;
};
// Both sides of the weighted Hardy bound in x_k for N = 2 or 3 particles in d = 3:
// x_j at the origin, x_m (N = 3) fixed at `third`, fields phi(x_k) from the ensemble.
CombinedReport combined_weighted_probe(int n, const cutoff::CutoffParams& p, const twobody::SofteningProfile& sp,
                                       const TestEnsemble& e, double q, bool unit_W,
                                       const cutoff::Vec& third = cutoff::Vec(0.1, 0.0, 0.0));

// Grid ball of radius r around the origin: nodes with min-image |x| <= r.
std::vector<std::size_t> ball_nodes(const TorusGrid& g, double r);

}  // namespace gplab::inequalities
