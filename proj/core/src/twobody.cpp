#include "gplab/twobody.hpp"

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <cmath>
#include <sstream>

#include "gplab/error.hpp"

namespace gplab::twobody {

namespace {

const double kE = std::exp(1.0);

// Composite Simpson on uniform samples; a trailing odd interval uses the 3/8 rule.
double simpson(const std::vector<double>& f, double h) {
  const std::size_t n = f.size() - 1;
  if (n == 0) return 0.0;
  if (n == 1) return 0.5 * h * (f[0] + f[1]);
  std::size_t m = (n % 2 == 0) ? n : n - 3;
  double s = 0.0;
  for (std::size_t i = 0; i + 2 <= m; i += 2) s += f[i] + 4.0 * f[i + 1] + f[i + 2];
  s *= h / 3.0;
  if (m != n) s += 3.0 * h / 8.0 * (f[m] + 3.0 * f[m + 1] + 3.0 * f[m + 2] + f[m + 3]);
  return s;
}

}  // namespace

RadialPotential::RadialPotential(Profile profile, double support_radius, double coupling, std::string label)
    : profile_(std::move(profile)), support_(support_radius), coupling_(coupling), label_(std::move(label)) {
  if (!(support_radius > 0.0) || !std::isfinite(support_radius))
    throw InputError("potential support radius must be positive and finite");
  if (!std::isfinite(coupling) || coupling < 0.0) throw InputError("potential coupling must be finite and >= 0");
  validate();
  base_varrho_ = varrho();
}

void RadialPotential::validate() {
  const int n = 4000;
  const double h = support_ / n;
  std::vector<double> r2v(n + 1);
  double sup = 0.0, prev = 0.0, max_jump = 0.0;
  for (int i = 0; i <= n; ++i) {
    double r = i * h;
    double v = (*this)(r);
    if (!std::isfinite(v)) throw InputError("potential '" + label_ + "' is not finite at r = " + std::to_string(r));
    if (v < 0.0) throw InputError("potential '" + label_ + "' is negative at r = " + std::to_string(r));
    sup = std::max(sup, v);
    if (i > 0) max_jump = std::max(max_jump, std::abs(v - prev));
    prev = v;
    r2v[i] = v * r * r;
  }
  if (max_jump > 0.05 * sup)
    throw InputError("potential '" + label_ + "' has a jump above sample resolution (not C^2 at r <= R0)");
  sup_ = sup;
  born_ = 4.0 * kPi * simpson(r2v, h);
}

double RadialPotential::operator()(double r) const {
  r = std::abs(r);
  if (r >= support_) return 0.0;
  return profile_(r);
}

double RadialPotential::integral(int dim) const {
  if (dim == 3) return born_;
  const int n = 4000;
  const double h = support_ / n;
  std::vector<double> f(n + 1);
  for (int i = 0; i <= n; ++i) f[i] = (*this)(i * h);
  return 2.0 * simpson(f, h);
}

RadialPotential RadialPotential::bump(double R0, double lambda) {
  return RadialPotential([R0, lambda](double r) { return lambda * kE * gplab::bump(r / R0); }, R0, lambda,
                         "bump");
}

RadialPotential RadialPotential::polynomial(double R0, double lambda) {
  return RadialPotential(
      [R0, lambda](double r) {
        double s = 1.0 - (r / R0) * (r / R0);
        return s > 0.0 ? lambda * s * s * s * s : 0.0;
      },
      R0, lambda, "polynomial");
}

RadialPotential RadialPotential::shell(double R0, double lambda) {
  return RadialPotential([R0, lambda](double r) { return lambda * kE * gplab::bump(2.0 * r / R0 - 1.0); }, R0,
                         lambda, "shell");
}

RadialPotential RadialPotential::zero(double R0) {
  return RadialPotential([](double) { return 0.0; }, R0, 0.0, "zero");
}

RadialPotential RadialPotential::from_samples(const std::vector<double>& radius, const std::vector<double>& value,
                                              std::string label) {
  if (radius.size() != value.size() || radius.size() < 5)
    throw InputError("potential samples: need >= 5 (radius, value) pairs of equal length");
  if (radius[0] != 0.0) throw InputError("potential samples must start at radius 0");
  const double h = radius[1] - radius[0];
  if (!(h > 0.0)) throw InputError("potential sample radii must be increasing");
  for (std::size_t i = 1; i < radius.size(); ++i) {
    if (std::abs((radius[i] - radius[i - 1]) - h) > 1e-9 * h)
      throw InputError("potential sample radii must be uniformly spaced (line " + std::to_string(i + 2) + ")");
    if (value[i] < 0.0) throw InputError("potential sample negative at radius " + std::to_string(radius[i]));
  }
  if (value.back() != 0.0) throw InputError("potential samples must vanish at the last radius (compact support)");
  auto spline = std::make_shared<boost::math::interpolators::cardinal_cubic_b_spline<double>>(
      value.begin(), value.end(), 0.0, h, 0.0, 0.0);
  const double R0 = radius.back();
  return RadialPotential([spline](double r) { return std::max(0.0, (*spline)(r)); }, R0, 1.0, std::move(label));
}

RadialPotential RadialPotential::scaled(double n, int dim) const {
  if (!(n > 0.0)) throw InputError("potential scale factor must be positive");
  if (dim != 1 && dim != 3) throw InputError("potential scaling dimension must be 1 or 3");
  const double p = dim == 3 ? n * n : n;
  Profile base = profile_;
  RadialPotential out([base, n, p](double r) { return p * base(n * r); }, support_ / n, coupling_,
                      label_);
  out.scale_ = scale_ * n;
  out.base_varrho_ = base_varrho_;
  return out;
}

ZeroEnergySolution solve_zero_energy(const RadialPotential& v, double r_max, double step) {
  const double R0 = v.support_radius();
  if (!(r_max > R0)) throw InputError("solve_zero_energy: r_max must exceed the support radius");
  if (!(step > 0.0) || step > R0 / 20.0)
    throw InputError("solve_zero_energy: step must resolve the support (>= 20 samples)");
  const int n0 = static_cast<int>(std::ceil(R0 / step));
  const double h = R0 / n0;
  const int n = static_cast<int>(std::ceil(r_max / h));
  ZeroEnergySolution s;
  s.radius.resize(n + 1);
  s.m.resize(n + 1);
  s.m_prime.resize(n + 1);
  double m = 0.0, mp = 1.0;
  s.radius[0] = 0.0;
  s.m[0] = m;
  s.m_prime[0] = mp;
  for (int i = 0; i < n; ++i) {
    const double r = i * h;
    const double v0 = 0.5 * v(r), v1 = 0.5 * v(r + 0.5 * h), v2 = 0.5 * v(r + h);
    const double k1m = mp, k1p = v0 * m;
    const double k2m = mp + 0.5 * h * k1p, k2p = v1 * (m + 0.5 * h * k1m);
    const double k3m = mp + 0.5 * h * k2p, k3p = v1 * (m + 0.5 * h * k2m);
    const double k4m = mp + h * k3p, k4p = v2 * (m + h * k3m);
    m += h / 6.0 * (k1m + 2.0 * k2m + 2.0 * k3m + k4m);
    mp += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
    if (!std::isfinite(m) || !std::isfinite(mp)) {
      std::ostringstream os;
      os << "solve_zero_energy: non-finite solution at step " << i + 1 << " (r = " << r + h << ")";
      throw NumericalError(os.str());
    }
    s.radius[i + 1] = (i + 1) * h;
    s.m[i + 1] = m;
    s.m_prime[i + 1] = mp;
  }
  if (v.is_zero()) s.m = s.radius;
  const double norm = 1.0 / s.m_prime[n];
  for (int i = 0; i <= n; ++i) {
    s.m[i] *= norm;
    s.m_prime[i] *= norm;
    if (i > 0 && !(s.m[i] > 0.0))
      throw NumericalError("solve_zero_energy: m(r) not positive at r = " + std::to_string(s.radius[i]));
  }
  double sum = 0.0;
  for (int i = n0; i <= n; ++i) sum += s.radius[i] - s.m[i];
  s.scattering_length = sum / (n - n0 + 1);
  for (int i = n0; i <= n; ++i)
    s.asymptote_spread = std::max(s.asymptote_spread, std::abs(s.radius[i] - s.m[i] - s.scattering_length));
  for (int i = 1; i < n; ++i) {
    double d2 = (s.m[i + 1] - 2.0 * s.m[i] + s.m[i - 1]) / (h * h);
    s.ode_residual = std::max(s.ode_residual, std::abs(d2 - 0.5 * v(s.radius[i]) * s.m[i]));
  }
  std::vector<double> f(n0 + 1);
  for (int i = 0; i <= n0; ++i) f[i] = v(s.radius[i]) * s.m[i] * s.radius[i];
  s.identity_lhs = 4.0 * kPi * simpson(f, h);
  s.identity_defect = std::abs(s.identity_lhs - 8.0 * kPi * s.scattering_length);
  return s;
}

NeumannFamily::NeumannFamily(RadialPotential v, int dim, int inner_steps, int energy_order)
    : v_(std::move(v)), dim_(dim), R_(v_.support_radius()), order_(energy_order) {
  if (dim != 1 && dim != 3) throw InputError("NeumannFamily: dim must be 1 or 3");
  if (inner_steps < 20) throw InputError("NeumannFamily: inner_steps must be >= 20");
  const int P = order_ + 1;
  const int n = inner_steps;
  h_ = R_ / n;
  coeff_.assign(P, std::vector<double>(n + 1, 0.0));
  dcoeff_.assign(P, std::vector<double>(n + 1, 0.0));
  vnode_.resize(n + 1);
  std::vector<double> y(2 * P, 0.0);
  if (dim == 3) {
    y[P] = 1.0;
  } else {
    y[0] = 1.0;
  }
  auto rhs = [P](double half_v, const std::vector<double>& s, std::vector<double>& d) {
    for (int p = 0; p < P; ++p) {
      d[p] = s[P + p];
      d[P + p] = half_v * s[p] - (p > 0 ? s[p - 1] : 0.0);
    }
  };
  std::vector<double> k1(2 * P), k2(2 * P), k3(2 * P), k4(2 * P), t(2 * P);
  for (int p = 0; p < P; ++p) {
    coeff_[p][0] = y[p];
    dcoeff_[p][0] = y[P + p];
  }
  for (int i = 0; i <= n; ++i) vnode_[i] = v_(i * h_);
  for (int i = 0; i < n; ++i) {
    const double r = i * h_;
    const double v0 = 0.5 * vnode_[i], v1 = 0.5 * v_(r + 0.5 * h_), v2 = 0.5 * vnode_[i + 1];
    rhs(v0, y, k1);
    for (int j = 0; j < 2 * P; ++j) t[j] = y[j] + 0.5 * h_ * k1[j];
    rhs(v1, t, k2);
    for (int j = 0; j < 2 * P; ++j) t[j] = y[j] + 0.5 * h_ * k2[j];
    rhs(v1, t, k3);
    for (int j = 0; j < 2 * P; ++j) t[j] = y[j] + h_ * k3[j];
    rhs(v2, t, k4);
    for (int j = 0; j < 2 * P; ++j) y[j] += h_ / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    for (int p = 0; p < P; ++p) {
      coeff_[p][i + 1] = y[p];
      dcoeff_[p][i + 1] = y[P + p];
    }
  }
  a_ = R_ - coeff_[0][n] / dcoeff_[0][n];
  if (v_.is_zero()) a_ = 0.0;
}

void NeumannFamily::boundary_values(double energy, double& m, double& mp) const {
  const int n = static_cast<int>(coeff_[0].size()) - 1;
  m = 0.0;
  mp = 0.0;
  for (int p = order_; p >= 0; --p) {
    m = m * energy + coeff_[p][n];
    mp = mp * energy + dcoeff_[p][n];
  }
}

void NeumannFamily::outer(double energy, double m0, double mp0, double x, double& m, double& mp) const {
  const double lam = std::sqrt(std::max(energy, 0.0));
  const double t = lam * x;
  const double c = std::cos(t);
  double s_over = 0.0, s = 0.0;
  if (std::abs(t) < 1e-6) {
    s_over = x * (1.0 - t * t / 6.0);
    s = t * (1.0 - t * t / 6.0);
  } else {
    s = std::sin(t);
    s_over = s / lam;
  }
  m = m0 * c + mp0 * s_over;
  mp = -m0 * lam * s + mp0 * c;
}

double NeumannFamily::boundary_function(double energy, double kappa) const {
  double mR, mpR, m, mp;
  boundary_values(energy, mR, mpR);
  outer(energy, mR, mpR, kappa - R_, m, mp);
  return dim_ == 3 ? kappa * mp - m : mp;
}

double NeumannFamily::eigenvalue(double kappa) const {
  if (!(kappa > R_)) throw InputError("Neumann radius must exceed the potential support radius");
  if (v_.is_zero()) return 0.0;
  double upper;
  if (dim_ == 3) {
    if (!(a_ > 0.0)) return 0.0;
    upper = 10.0 * 3.0 * a_ / (kappa * kappa * kappa);
  } else {
    double d = kappa - R_;
    upper = (kPi / (2.0 * d)) * (kPi / (2.0 * d));
  }
  double lo = 0.0, hi = upper;
  const double f0 = boundary_function(0.0, kappa);
  double fhi = boundary_function(hi, kappa);
  if ((f0 > 0.0) == (fhi > 0.0)) {
    const int scan = 400;
    bool found = false;
    double prev = f0;
    for (int i = 1; i <= scan; ++i) {
      double e = upper * i / scan;
      double fe = boundary_function(e, kappa);
      if ((fe > 0.0) != (prev > 0.0)) {
        lo = upper * (i - 1) / scan;
        hi = e;
        found = true;
        break;
      }
      prev = fe;
    }
    if (!found) {
      std::ostringstream os;
      os << "Neumann bisection bracket failure at kappa = " << kappa << "; sign table (E, sign):";
      for (int i = 0; i <= 10; ++i) {
        double e = upper * i / 10.0;
        os << " (" << e << ", " << (boundary_function(e, kappa) > 0.0 ? '+' : '-') << ")";
      }
      throw NumericalError(os.str());
    }
  }
  const bool pos_lo = boundary_function(lo, kappa) > 0.0;
  for (int it = 0; it < 60; ++it) {
    double mid = 0.5 * (lo + hi);
    if ((boundary_function(mid, kappa) > 0.0) == pos_lo) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

namespace {

// Quintic Hermite on [0, h] from (f, f', f'') at both ends, evaluated at t in [0, 1].
void hermite5(double t, double h, double f0, double d0, double s0, double f1, double d1, double s1, double& f,
              double& df) {
  const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
  const double H0 = 1 - 10 * t3 + 15 * t4 - 6 * t5;
  const double H1 = t - 6 * t3 + 8 * t4 - 3 * t5;
  const double H2 = 0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5;
  const double H3 = 0.5 * t3 - t4 + 0.5 * t5;
  const double H4 = -4 * t3 + 7 * t4 - 3 * t5;
  const double H5 = 10 * t3 - 15 * t4 + 6 * t5;
  const double D0 = -30 * t2 + 60 * t3 - 30 * t4;
  const double D1 = 1 - 18 * t2 + 32 * t3 - 15 * t4;
  const double D2 = t - 4.5 * t2 + 6 * t3 - 2.5 * t4;
  const double D3 = 1.5 * t2 - 4 * t3 + 2.5 * t4;
  const double D4 = -12 * t2 + 28 * t3 - 15 * t4;
  const double D5 = 30 * t2 - 60 * t3 + 30 * t4;
  f = f0 * H0 + h * d0 * H1 + h * h * s0 * H2 + h * h * s1 * H3 + h * d1 * H4 + f1 * H5;
  df = (f0 * D0 + h * d0 * D1 + h * h * s0 * D2 + h * h * s1 * D3 + h * d1 * D4 + f1 * D5) / h;
}

}  // namespace

NeumannFamily::Value NeumannFamily::mode(double kappa, double energy, double r) const {
  r = std::abs(r);
  if (r >= kappa) return {1.0, 0.0, 0.0};
  double mR, mpR, mk, mpk;
  boundary_values(energy, mR, mpR);
  outer(energy, mR, mpR, kappa - R_, mk, mpk);
  const double c = dim_ == 3 ? kappa / mk : 1.0 / mk;
  double m, mp, mpp;
  if (r >= R_) {
    outer(energy, mR, mpR, r - R_, m, mp);
    mpp = -energy * m;
  } else {
    const int n = static_cast<int>(coeff_[0].size()) - 1;
    int i = std::min(static_cast<int>(r / h_), n - 1);
    double t = (r - i * h_) / h_;
    double f0 = 0, d0 = 0, f1 = 0, d1 = 0;
    for (int p = order_; p >= 0; --p) {
      f0 = f0 * energy + coeff_[p][i];
      d0 = d0 * energy + dcoeff_[p][i];
      f1 = f1 * energy + coeff_[p][i + 1];
      d1 = d1 * energy + dcoeff_[p][i + 1];
    }
    const double s0 = (0.5 * vnode_[i] - energy) * f0, s1 = (0.5 * vnode_[i + 1] - energy) * f1;
    hermite5(t, h_, f0, d0, s0, f1, d1, s1, m, mp);
    mpp = (0.5 * v_(r) - energy) * m;
  }
  m *= c;
  mp *= c;
  mpp *= c;
  if (dim_ == 1) return {m, mp, mpp};
  if (r < 1e-4 * R_) {
    const double curv = (0.5 * v_(0.0) - energy) * c / 3.0;
    return {c + 0.5 * curv * r * r, curv * r, curv};
  }
  const double phi = m / r;
  const double dphi = (mp - phi) / r;
  const double d2phi = (mpp - 2.0 * dphi) / r;
  return {phi, dphi, d2phi};
}

NeumannMode solve_neumann(const RadialPotential& v_scaled, double kappa, double tol, int dim, int grid_points) {
  if (!(kappa > v_scaled.support_radius()))
    throw InputError("solve_neumann: kappa must exceed the support radius of the potential");
  if (!(tol > 0.0)) throw InputError("solve_neumann: tol must be positive");
  if (grid_points < 3) throw InputError("solve_neumann: grid_points must be >= 3");
  NeumannFamily fam(v_scaled, dim);
  NeumannMode out;
  out.kappa = kappa;
  out.eigenvalue = fam.eigenvalue(kappa);
  out.radius.resize(grid_points);
  out.w_kappa.resize(grid_points);
  for (int i = 0; i < grid_points; ++i) {
    double r = kappa * i / (grid_points - 1);
    out.radius[i] = r;
    double phi = fam.mode(kappa, out.eigenvalue, r).phi;
    out.w_kappa[i] = 1.0 - phi;
    out.phi_floor = std::min(out.phi_floor, phi);
  }
  const double mk = fam.boundary_function(out.eigenvalue, kappa);
  // phi(kappa) = 1 after normalization, so the scaled boundary function is kappa phi'(kappa).
  double mR = 0, mpR = 0;
  {
    auto v = fam.mode(kappa, out.eigenvalue, kappa * (1.0 - 1e-9));
    mR = v.phi;
    mpR = v.dphi;
  }
  (void)mR;
  (void)mk;
  out.boundary_residual = std::abs(mpR) * kappa;
  if (out.boundary_residual > tol) {
    std::ostringstream os;
    os << "solve_neumann: Neumann condition residual " << out.boundary_residual << " exceeds tol " << tol;
    throw NumericalError(os.str());
  }
  return out;
}

double trial_wavenumber(double a, double kappa) {
  if (!(kappa > a)) throw InputError("trial_wavenumber: need kappa > a");
  if (a <= 0.0) return 0.0;
  const double d = kappa - a;
  auto g = [&](double k) { return std::tan(k * d) - k * kappa; };
  double lo = 1e-3 * std::sqrt(3.0 * a / (d * d * d));
  double hi = 0.5 * kPi / d * (1.0 - 1e-12);
  if (g(lo) >= 0.0) throw NumericalError("trial_wavenumber: lower bracket not negative");
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (g(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double mode_gradient_constant(const NeumannFamily& f, const std::vector<double>& kappas) {
  const double rho = f.potential().base_varrho();
  const double R = f.support_radius();
  if (rho == 0.0) return 0.0;
  double c = 0.0;
  for (double kappa : kappas) {
    double e = f.eigenvalue(kappa);
    const int n = 2000;
    for (int i = 1; i <= n; ++i) {
      double r = kappa * i / n;
      auto v = f.mode(kappa, e, r * (1.0 - 1e-12));
      c = std::max(c, std::abs(v.dphi) * (r * r + R * R) / rho);
    }
  }
  return c;
}

}  // namespace gplab::twobody
