#pragma once

#include <functional>
#include <vector>

#include "gplab/grid.hpp"
#include "gplab/hierarchy.hpp"
#include "gplab/spectral.hpp"
#include "gplab/twobody.hpp"

namespace gplab::manybody {

// N d log2 M, i.e. log2 of the entry count of psi, may not exceed this (N <= 3).
inline constexpr int kDenseLog2Cap = 24;
bool fits(const TorusGrid& g, int n);

struct ManyBodyState {
  TorusGrid grid;
  int n = 0;
  CVec psi;
  double time = 0.0;
};

double norm2(const ManyBodyState& s);
// u (x) u (x) ... (x) u.
ManyBodyState product_state(const CVec& u, const TorusGrid& g, int n);
ManyBodyState tensor_state(const std::vector<CVec>& factors, const TorusGrid& g);
// Average over all slot permutations, renormalized; throws on a zero symmetric part.
ManyBodyState symmetrize(const ManyBodyState& s);
// max |R_pi psi - psi| over permutations.
double symmetry_defect(const ManyBodyState& s);
// psi with slots permuted: out(x_1..x_n) = psi(x_perm[0], .., x_perm[n-1]).
CVec permute_slots(const CVec& psi, const TorusGrid& g, int n, const std::vector<int>& perm);

// Pair potential and the full diagonal sum_{i<j} V(x_i - x_j) over grid^N,
// with minimum-image distances, plus an optional extra diagonal.
class ScaledPotential {
 public:
  // V_a = s^2 V(s x) in 3D, s V(s x) in 1D, with s = N unless given.
  ScaledPotential(const twobody::RadialPotential& base, const TorusGrid& g, int n, double scale = 0.0);
  // Arbitrary radial pair function times a prefactor.
  static ScaledPotential from_pair(const std::function<double(double)>& pair, const TorusGrid& g, int n,
                                   double prefactor, double support);

  const TorusGrid& grid() const { return grid_; }
  int n() const { return n_; }
  double scale() const { return scale_; }
  double support() const { return support_; }
  double pair(double r) const { return pair_(r); }
  // Pair value at each one-slot grid displacement.
  const std::vector<double>& pair_table() const { return pair_table_; }
  const std::vector<double>& diagonal() const { return diag_; }
  void add_diagonal(const std::vector<double>& extra);
  // int V_a over the torus by the grid rule.
  double grid_integral() const;

 private:
  ScaledPotential(const TorusGrid& g, int n) : grid_(g), n_(n) {}
  void build();

  TorusGrid grid_;
  int n_;
  double scale_ = 1.0, support_ = 0.0;
  std::function<double(double)> pair_;
  std::vector<double> pair_table_, diag_;
};

CVec apply_hamiltonian(const ManyBodyState& s, const ScaledPotential& v);

struct ManyBodyTrajectory {
  std::vector<ManyBodyState> snapshots;
  double max_norm_drift = 0.0;
  double max_symmetry_defect = 0.0;
};

class ManyBodyPropagator {
 public:
  ManyBodyPropagator(const ScaledPotential& v, double dt);
  void step(CVec& psi) const;

 private:
  const ScaledPotential& v_;
  Spectral fft_;
  std::vector<std::vector<cplx>> kinetic_;
  CVec half_phase_;
};

ManyBodyTrajectory evolve_manybody(const ManyBodyState& psi0, const ScaledPotential& v, double dt, double T,
                                   int snapshot_stride = 1);

// Exact e^{-iHT} psi0 by dense diagonalization of H assembled from
// apply_hamiltonian on basis vectors.  At most kDenseOracleStates states.
inline constexpr std::size_t kDenseOracleStates = 4096;
CVec dense_reference_evolution(const ManyBodyState& psi0, const ScaledPotential& v, double T);

// gamma^(k) with the last N - k slots contracted; k = N gives |psi><psi|.
hierarchy::DensityMatrix marginal(const ManyBodyState& s, int k);

// L2 norm of i d_t gamma1 - (-Delta + Delta') gamma1 - (N-1) int (V(x-y) - V(x'-y)) gamma2(x,y;x',y) dy
// at the requested snapshot indices (all if empty).
std::vector<double> bbgky_residual_k1(const std::vector<ManyBodyState>& traj, const ScaledPotential& v, double dt,
                                      std::vector<int> at = {});

struct EnergyMoments {
  double h1 = 0.0, h2 = 0.0;
  double h1_imag = 0.0;
};
EnergyMoments energy_moments(const ManyBodyState& s, const ScaledPotential& v);

struct MeanFieldReport {
  double lhs = 0.0;  // sum_{j,l} int |grad_j grad_l psi|^2
  double h2 = 0.0;   // (psi, H_N^2 psi)
  double n2_norm = 0.0;
  double admissible_c = 0.0;
};
// H_N = -sum Delta_j + N^{-1} sum V_tau(x_i - x_j), V_tau = tau^{-d} V(x / tau).
MeanFieldReport mean_field_inequality_probe(const ManyBodyState& s, const twobody::RadialPotential& v, double tau);

}  // namespace gplab::manybody
