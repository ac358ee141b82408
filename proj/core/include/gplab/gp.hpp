#pragma once

#include <array>
#include <vector>

#include "gplab/grid.hpp"
#include "gplab/spectral.hpp"

namespace gplab::gp {

struct WaveField {
  TorusGrid grid;
  CVec values;
  double time = 0.0;
};

// Periodic quadrature of |u|^2.
double mass(const WaveField& u);
// int |grad u|^2 + sigma/2 |u|^4, gradient spectral.
double gp_energy(const WaveField& u, double sigma);
// Kinetic part int |grad u|^2 alone.
double kinetic_energy(const WaveField& u);

WaveField plane_wave(const TorusGrid& g, const std::array<int, 3>& k, cplx amplitude);
WaveField constant_field(const TorusGrid& g, cplx amplitude);
// Smooth mass-one field: (1 + eps sum of low cosines with phases), normalized.
WaveField smooth_field(const TorusGrid& g, double eps = 0.3);

struct GPParams {
  double sigma = 0.0;
  double dt = 1e-3;
  double T = 0.0;
  bool dealias = false;
  // Record every stride-th step (0: only explicit times and the endpoints).
  int snapshot_stride = 0;
  // Rounded to the nearest multiple of dt.
  std::vector<double> snapshot_times;
};

struct GPTrajectory {
  std::vector<WaveField> snapshots;
  int steps = 0;
  double max_mass_step_drift = 0.0;
  // dt times the largest kinetic eigenvalue on the grid.
  double kinetic_cfl = 0.0;
};

// Strang splitting: half nonlinear phase, exact kinetic step, half phase.
class GPPropagator {
 public:
  GPPropagator(const TorusGrid& g, double sigma, double dt, bool dealias = false);
  // One step in place (dt may be negative for backward runs).
  void step(CVec& u) const;
  double dt() const { return dt_; }

 private:
  void half_phase(CVec& u) const;

  TorusGrid grid_;
  Spectral fft_;
  double sigma_, dt_;
  bool dealias_;
  std::vector<std::vector<cplx>> kinetic_;
};

GPTrajectory evolve_gp(const WaveField& u0, const GPParams& p);

// Sup norm of u - v.
double sup_distance(const CVec& u, const CVec& v);

}  // namespace gplab::gp
