#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "gplab/gp.hpp"
#include "gplab/grid.hpp"

namespace gplab::hierarchy {

// log2 of the dense entry count, 2 k d log2 M, may not exceed this.
inline constexpr int kDenseLog2Cap = 24;
bool dense_fits(const TorusGrid& g, int k);

// k-particle kernel gamma(x_1..x_k; x'_1..x'_k). Dense storage is row-major
// with the unprimed slots first; product states also keep their factor and,
// above the dense cap, only the factor.
class DensityMatrix {
 public:
  DensityMatrix(const TorusGrid& g, int k, CVec kernel);
  static DensityMatrix product(const CVec& u, const TorusGrid& g, int k);
  // Product state without the dense kernel.
  static DensityMatrix factor_only(const CVec& u, const TorusGrid& g, int k);

  int k() const { return k_; }
  const TorusGrid& grid() const { return grid_; }
  bool has_dense() const { return !kernel_.empty(); }
  bool has_factor() const { return factor_.has_value(); }
  const CVec& kernel() const;
  const CVec& factor() const { return *factor_; }
  // G^k, with G the points of one slot.
  std::size_t side() const { return side_; }
  cplx operator()(std::size_t x, std::size_t xp) const;

  double trace() const;
  double purity() const;
  double hermiticity_defect() const;
  double symmetry_defect() const;
  // Smallest <f, gamma f> over `count` random unit test vectors.
  double positivity_floor(int count, unsigned long long seed) const;

 private:
  explicit DensityMatrix(const TorusGrid& g);

  TorusGrid grid_;
  int k_;
  std::size_t side_;
  CVec kernel_;
  std::optional<CVec> factor_;
};

// Rejects fields whose mass differs from 1 by more than 1e-10.
DensityMatrix product_state(const gp::WaveField& u, int k);
DensityMatrix partial_trace(const DensityMatrix& g);

// gamma^(k+1)(X, z; X', z) with z = x_j (or x'_j when primed), as a dense
// kernel over grid^k x grid^k. j is 1-based.
CVec diagonal_restrict(const DensityMatrix& g, int j, bool primed = false);
// Mollified variant: int h_r(z' - z) h_r'(z - x_j) gamma(X, z; X', z') dz dz'.
CVec diagonal_restrict_mollified(const DensityMatrix& g, int j, double r, double r_prime, bool primed = false);

struct TestFunctional {
  TorusGrid grid;
  int k = 1;
  CVec kernel;
  enum class Smoothness { W1inf, W2inf } tag = Smoothness::W2inf;
};
// Band-limited smooth kernel, reproducible from the seed.
TestFunctional smooth_test_functional(const TorusGrid& g, int k, int kmax, unsigned long long seed);
// int J gamma over grid^k x grid^k.
cplx pairing(const CVec& J, const CVec& kernel, const TorusGrid& g, int k);

struct HierarchySnapshot {
  DensityMatrix gk;
  DensityMatrix gk1;
  double time = 0.0;
};
using SnapshotSource = std::function<HierarchySnapshot(int)>;

// Product states of a uniformly spaced GP snapshot sequence.
SnapshotSource factorized_source(const std::vector<gp::WaveField>& snaps, int k);

// L2 norm of i d_t gamma - sum_j (-Delta_j + Delta'_j) gamma - sigma sum_j (diag_j - diag'_j) gamma^(k+1)
// at the requested indices (all if empty); d_t by centered second-order
// differences, one-sided at the ends.
std::vector<double> hierarchy_residual_strong(const SnapshotSource& src, int count, double dt, double sigma,
                                              std::vector<int> at = {});

// |<J,g_t> - <J,g_0> + i int <J, K g> + i sigma int sum_j <J, (d_j - d'_j) g^(k+1)>|
// with the trapezoid rule in time and the mollified diagonal at scales (r, r').
double weak_form_check(const TestFunctional& J, const SnapshotSource& src, int count, double dt, double sigma,
                       double r, double r_prime);

struct MollifierRateReport {
  std::vector<double> beta1, defect_beta1, beta2, defect_beta2;
  double slope_beta1 = 0.0, slope_beta2 = 0.0;
  double trace_factor = 0.0, j_norm = 0.0;
  // max defect / ((|J| + |grad J|) (b1 + sqrt b2) trace factor).
  double fitted_c = 0.0;
  double floor_defect = 0.0;
};

// Defect of the mollified diagonal against the sharp one for the pure state
// |f><f| on two slots (k = 1), swept in beta1 with beta2 sharp and vice versa.
double mollifier_defect(const CVec& f, const CVec& J, const TorusGrid& g, double beta1, double beta2);
MollifierRateReport mollifier_rate_probe(const CVec& f, const TestFunctional& J, const std::vector<double>& beta1,
                                         const std::vector<double>& beta2);

// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace gplab::hierarchy
