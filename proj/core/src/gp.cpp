#include "gplab/gp.hpp"

#include <cmath>
#include <sstream>

#include "gplab/error.hpp"

namespace gplab::gp {

double mass(const WaveField& u) {
  double s = 0.0;
  for (const auto& z : u.values) s += std::norm(z);
  return s * u.grid.cell_volume();
}

double kinetic_energy(const WaveField& u) {
  Spectral fft(u.grid, 1);
  CVec a = u.values;
  fft.forward(a);
  auto table = fft.laplacian_table({1.0});
  double s = 0.0;
  for (std::size_t f = 0; f < a.size(); ++f) {
    double k2 = 0.0;
    for (int ax = 0; ax < u.grid.dim; ++ax) k2 += table[ax][axis_digit(f, ax, u.grid.dim, u.grid.points)];
    s += k2 * std::norm(a[f]);
  }
  const double n = static_cast<double>(a.size());
  return s / (n * n);
}

double gp_energy(const WaveField& u, double sigma) {
  double quartic = 0.0;
  for (const auto& z : u.values) quartic += std::norm(z) * std::norm(z);
  return kinetic_energy(u) + 0.5 * sigma * quartic * u.grid.cell_volume();
}

WaveField plane_wave(const TorusGrid& g, const std::array<int, 3>& k, cplx amplitude) {
  WaveField u{g, CVec(g.size()), 0.0};
  for (std::size_t f = 0; f < g.size(); ++f) {
    auto x = grid_point(g, f);
    double ph = 0.0;
    for (int a = 0; a < g.dim; ++a) ph += 2.0 * kPi * k[a] * x[a];
    u.values[f] = amplitude * std::polar(1.0, ph);
  }
  return u;
}

WaveField constant_field(const TorusGrid& g, cplx amplitude) { return WaveField{g, CVec(g.size(), amplitude), 0.0}; }

WaveField smooth_field(const TorusGrid& g, double eps) {
  WaveField u{g, CVec(g.size()), 0.0};
  for (std::size_t f = 0; f < g.size(); ++f) {
    auto x = grid_point(g, f);
    cplx v = 1.0;
    for (int a = 0; a < g.dim; ++a) {
      v += eps * std::cos(2.0 * kPi * x[a] + 0.3 * a) + cplx(0.0, 0.5 * eps) * std::sin(4.0 * kPi * x[a] + 0.7);
    }
    u.values[f] = v;
  }
  const double m = std::sqrt(mass(u));
  for (auto& z : u.values) z /= m;
  return u;
}

GPPropagator::GPPropagator(const TorusGrid& g, double sigma, double dt, bool dealias)
    : grid_(g), fft_(g, 1), sigma_(sigma), dt_(dt), dealias_(dealias) {
  if (!(dt != 0.0) || !std::isfinite(dt)) throw InputError("GP time step must be finite and nonzero");
  if (!std::isfinite(sigma)) throw InputError("GP coupling must be finite");
  kinetic_.assign(g.dim, std::vector<cplx>(g.points));
  for (int a = 0; a < g.dim; ++a)
    for (int i = 0; i < g.points; ++i) {
      cplx v = std::polar(1.0, -fft_.k2(i) * dt);
      if (dealias && 3 * std::abs(g.wavenumber(i)) > g.points) v = 0.0;
      kinetic_[a][i] = v;
    }
}

void GPPropagator::half_phase(CVec& u) const {
  if (sigma_ == 0.0) return;
  const double c = -0.5 * sigma_ * dt_;
  const long n = static_cast<long>(u.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) u[i] *= std::polar(1.0, c * std::norm(u[i]));
}

void GPPropagator::step(CVec& u) const {
  half_phase(u);
  fft_.forward(u);
  fft_.multiply_separable(u, kinetic_);
  fft_.backward(u);
  half_phase(u);
}

namespace {

bool all_finite(const CVec& u) {
  for (const auto& z : u)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  return true;
}

}  // namespace

GPTrajectory evolve_gp(const WaveField& u0, const GPParams& p) {
  if (!(p.dt > 0.0)) throw InputError("GP dt must be positive");
  if (!(p.T >= 0.0)) throw InputError("GP horizon T must be >= 0");
  if (u0.values.size() != u0.grid.size()) throw InputError("GP initial field does not match its grid");
  const int steps = static_cast<int>(std::llround(p.T / p.dt));
  std::vector<char> record(steps + 1, 0);
  record[0] = 1;
  record[steps] = 1;
  if (p.snapshot_stride > 0)
    for (int s = 0; s <= steps; s += p.snapshot_stride) record[s] = 1;
  for (double t : p.snapshot_times) {
    long s = std::llround(t / p.dt);
    if (s < 0 || s > steps) throw InputError("GP snapshot time outside [0, T]");
    record[s] = 1;
  }

  GPPropagator prop(u0.grid, p.sigma, p.dt, p.dealias);
  GPTrajectory traj;
  traj.steps = steps;
  double kmax = 0.0;
  Spectral fft(u0.grid, 1);
  for (int i = 0; i < u0.grid.points; ++i) kmax = std::max(kmax, fft.k2(i));
  traj.kinetic_cfl = p.dt * kmax * u0.grid.dim;

  WaveField u = u0;
  traj.snapshots.push_back(u);
  double m_prev = mass(u);
  for (int s = 1; s <= steps; ++s) {
    prop.step(u.values);
    u.time = u0.time + s * p.dt;
    if (!all_finite(u.values)) {
      std::ostringstream os;
      os << "GP evolution produced non-finite values at step " << s << " (t = " << u.time << ")";
      throw NumericalError(os.str());
    }
    double m = mass(u);
    traj.max_mass_step_drift = std::max(traj.max_mass_step_drift, std::abs(m - m_prev));
    m_prev = m;
    if (record[s]) traj.snapshots.push_back(u);
  }
  return traj;
}

double sup_distance(const CVec& u, const CVec& v) {
  if (u.size() != v.size()) throw InputError("sup_distance: size mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) d = std::max(d, std::abs(u[i] - v[i]));
  return d;
}

}  // namespace gplab::gp
