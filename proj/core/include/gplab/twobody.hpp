#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "gplab/bump.hpp"

namespace gplab::twobody {

// Nonnegative, compactly supported radial pair potential.
class RadialPotential {
 public:
  using Profile = std::function<double(double)>;

  RadialPotential(Profile profile, double support_radius, double coupling, std::string label);

  // coupling * e * bump(r/R0), so V(0) = coupling.
  static RadialPotential bump(double support_radius, double coupling);
  // coupling * (1 - r^2/R0^2)^4.
  static RadialPotential polynomial(double support_radius, double coupling);
  // coupling * e * bump(2r/R0 - 1): repulsive shell vanishing at the origin.
  static RadialPotential shell(double support_radius, double coupling);
  static RadialPotential zero(double support_radius);
  // Cubic B-spline through uniformly spaced samples starting at r = 0.
  static RadialPotential from_samples(const std::vector<double>& radius, const std::vector<double>& value,
                                      std::string label = "samples");

  double operator()(double r) const;
  double support_radius() const { return support_; }
  double coupling() const { return coupling_; }
  const std::string& label() const { return label_; }

  // int V d^3x (3D) or int V dx (1D).
  double integral(int dim = 3) const;
  double born_constant() const { return born_; }
  double sup_norm() const { return sup_; }
  double varrho() const { return (sup_ + born_) / (8.0 * kPi); }
  // varrho of the potential before any rescaling.
  double base_varrho() const { return base_varrho_; }
  // Scale factor n of n^p V(n r); 1 for an unscaled potential.
  double scale() const { return scale_; }
  bool is_zero() const { return sup_ == 0.0; }

  // n^2 V(n r) for dim 3, n V(n r) for dim 1.
  RadialPotential scaled(double n, int dim = 3) const;

 private:
  void validate();

  Profile profile_;
  double support_;
  double coupling_;
  std::string label_;
  double born_ = 0.0;
  double sup_ = 0.0;
  double scale_ = 1.0;
  double base_varrho_ = 0.0;
};

struct ZeroEnergySolution {
  std::vector<double> radius;
  std::vector<double> m;
  std::vector<double> m_prime;
  double scattering_length = 0.0;
  // max |m'' - V m / 2| by centered differences on the grid.
  double ode_residual = 0.0;
  // 4 pi int V m r dr and its distance from 8 pi a0.
  double identity_lhs = 0.0;
  double identity_defect = 0.0;
  // max |r - m(r) - a0| over r >= R0.
  double asymptote_spread = 0.0;
};

// RK4 for -m'' + V m / 2 = 0 from m(0) = 0, m'(0) = 1, normalized so that m' = 1
// beyond the support.
ZeroEnergySolution solve_zero_energy(const RadialPotential& v, double r_max, double step);

// Lowest Neumann mode family of -Delta + V/2 on balls (dim 3) or symmetric
// intervals (dim 1) of radius kappa > support.  The inner solution is
// integrated once by RK4 as a power series in the energy; outside the support
// the mode is continued in closed form.
class NeumannFamily {
 public:
  NeumannFamily(RadialPotential v, int dim, int inner_steps = 4000, int energy_order = 12);

  const RadialPotential& potential() const { return v_; }
  int dim() const { return dim_; }
  double support_radius() const { return R_; }
  // 3D: zero-energy scattering length. 1D: R - y(R)/y'(R) of the even solution.
  double scattering_length() const { return a_; }

  // Boundary function whose first root in E is the eigenvalue:
  // 3D kappa m'(kappa) - m(kappa), 1D y'(kappa).
  double boundary_function(double energy, double kappa) const;
  // Lowest eigenvalue by 60-step bisection.
  double eigenvalue(double kappa) const;

  struct Value {
    double phi, dphi, d2phi;
  };
  // Normalized eigenfunction phi (phi(kappa) = 1) and its radial derivatives;
  // phi = 1 for r >= kappa.
  Value mode(double kappa, double energy, double r) const;

 private:
  void boundary_values(double energy, double& m, double& mp) const;
  void outer(double energy, double m0, double mp0, double x, double& m, double& mp) const;

  RadialPotential v_;
  int dim_;
  double R_;
  int order_;
  double h_;
  // coeff_[p][i], dcoeff_[p][i]: p-th energy coefficient and derivative at node i.
  std::vector<std::vector<double>> coeff_, dcoeff_;
  std::vector<double> vnode_;
  double a_ = 0.0;
};

struct NeumannMode {
  double kappa = 0.0;
  double eigenvalue = 0.0;
  std::vector<double> radius;
  std::vector<double> w_kappa;
  double phi_floor = 1.0;
  // |phi'(kappa)| * kappa after the bisection.
  double boundary_residual = 0.0;
};

NeumannMode solve_neumann(const RadialPotential& v_scaled, double kappa, double tol, int dim = 3,
                          int grid_points = 2001);

// Smallest k > 0 with k kappa = tan(k (kappa - a)).
double trial_wavenumber(double a, double kappa);

class SofteningProfile {
 public:
  struct Options {
    int n_quad = 48;
    int n_radial = 4096;
    int dim = 3;
    double quad_tol = 1e-5;
  };

  SofteningProfile(const RadialPotential& v_scaled, double ell1, const Options& opt);
  SofteningProfile(const RadialPotential& v_scaled, double ell1) : SofteningProfile(v_scaled, ell1, Options{}) {}

  struct Value {
    double w, dw, d2w, q, dq;
  };
  // Direct evaluation by Gauss-Legendre quadrature over the mode family.
  Value evaluate(double r) const;
  // Quintic (w) and cubic (q) Hermite interpolation of the radial tables.
  Value interpolate(double r) const;

  double ell1() const { return ell1_; }
  int dim() const { return opt_.dim; }
  const Options& options() const { return opt_; }
  const BumpDensity& density() const { return density_; }
  const RadialPotential& potential() const { return family_->potential(); }
  const NeumannFamily& family() const { return *family_; }
  double scattering_length() const { return family_->scattering_length(); }
  double support() const { return 1.5 * ell1_; }

  const std::vector<double>& radius() const { return radius_; }
  const std::vector<double>& w_values() const { return w_; }
  const std::vector<double>& q_values() const { return q_; }
  const std::vector<double>& dw_values() const { return dw_; }
  const std::vector<double>& d2w_values() const { return d2w_; }
  const std::vector<double>& dq_values() const { return dq_; }
  double step() const { return radius_[1] - radius_[0]; }

  // int q d^d x by Simpson's rule on the radial grid.
  double l1_norm_q() const { return l1_q_; }
  // max over grid nodes of |(-Delta + V/2)(1-w) - q (1-w)|, centered differences.
  double neumann_residual() const { return residual_; }
  double residual_scale() const { return residual_scale_; }
  // 1 - max w.
  double c0() const { return c0_; }
  // sup |w_n - w_{n/2}| over probe radii.
  double quadrature_change() const { return quad_change_; }
  // kappa^3 e_kappa interpolated from Chebyshev samples in kappa.
  double eigenvalue(double kappa) const;

 private:
  Value evaluate_with(double r, int n_quad) const;

  std::shared_ptr<NeumannFamily> family_;
  double ell1_;
  Options opt_;
  BumpDensity density_;
  std::vector<double> cheb_nodes_, cheb_values_;
  std::vector<double> radius_, w_, dw_, d2w_, q_, dq_;
  double l1_q_ = 0.0, residual_ = 0.0, residual_scale_ = 0.0, c0_ = 1.0, quad_change_ = 0.0;
  struct Interp;
  std::shared_ptr<const Interp> interp_;
};

struct BoundEntry {
  std::string id;
  double fitted_c = 0.0;
  double location = 0.0;
};
struct BoundReport {
  double a = 0.0;
  double ell1 = 0.0;
  std::vector<BoundEntry> entries;
  const BoundEntry& at(const std::string& id) const;
};

// Minimal constants for the pointwise w and q bounds on the radial grid
// (r >= one grid step), derivatives by centered differences.
BoundReport audit_w_q_bounds(const SofteningProfile& p, double a);

// Ids of bounds whose fitted constant increases at every step of the sequence
// and ends more than a factor 2 above where it started.
std::vector<std::string> unsaturated_bounds(const std::vector<BoundReport>& sequence);

// Fitted constant for |phi'| <= C varrho / (r^2 + R^2) over a family of modes,
// with varrho of the unscaled potential.
double mode_gradient_constant(const NeumannFamily& f, const std::vector<double>& kappas);

}  // namespace gplab::twobody
