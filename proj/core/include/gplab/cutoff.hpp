#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "gplab/twobody.hpp"

namespace gplab::cutoff {

using Vec = Eigen::Vector3d;
using Mat = Eigen::Matrix3d;

struct CutoffParams {
  double ell = 0.05;
  double ell1 = 0.0025;
  double eps = 0.09;
  double K = 2.0;
  int n = 10;
  double a = 1e-4;
  int dim = 3;

  // Throws InputError naming the first failed relation of
  // a < ell1/10 < ell/100 < 1/100 and 0 < eps < 1/10.  The a relation is
  // only checked in 3D.
  void validate() const;
  // a ell1 / ell^4.
  double scale_product() const;
  double theta_radius() const;
};

// Smooth cutoff: 1 on s <= 1, 0 on s >= 2, C-infinity in between.
double theta(double s);

// h(r) = exp(-sqrt(r^2 + ell^2)/ell) and its radial derivatives.
struct Radial {
  double v, d1, d2;
};
Radial h_profile(double r, double ell);

// F(u) used for F_ij = F(N_ij), with derivatives in u.
class StepFunction {
 public:
  enum class Kind { Triple, Smooth, Exponential };
  // F(u) = exp(-u / ell^eps).
  static StepFunction triple(double ell, double eps);
  // F^(n)(u) = f((u - (n-3)) / ell^eps); f = exp(-x^2/(x+1)) for x > 0, 1 otherwise.
  static StepFunction nbody(int n, double ell, double eps);
  // Same shift with f = min(1, e^{-x}); n = 3 coincides with triple().
  static StepFunction nbody_exponential(int n, double ell, double eps);

  Radial operator()(double u) const;
  Kind kind() const { return kind_; }
  int n() const { return n_; }

 private:
  Kind kind_ = Kind::Triple;
  int n_ = 3;
  double scale_ = 1.0;
};

struct Configuration {
  int dim = 3;
  std::vector<Vec> x;
  int size() const { return static_cast<int>(x.size()); }
  // Minimum-image x_i - x_j.
  Vec displacement(int i, int j) const;
  double distance(int i, int j) const { return displacement(i, j).norm(); }
};

// Deterministic generator: each particle is either uniform on the torus or
// placed near an earlier particle at a log-uniform distance in
// [near_min, near_max] (probability cluster_fraction).
class ConfigSampler {
 public:
  ConfigSampler(std::uint64_t seed, double near_min, double near_max, double cluster_fraction);
  Configuration draw(int n, int dim);
  double uniform();

 private:
  std::uint64_t state_;
  double near_min_, near_max_, fraction_;
};

struct CorrelationFields {
  int n = 0, dim = 3;
  // N x N tables, row-major, zero on the diagonal.
  std::vector<double> dist, h, count, F, theta, w, dw, lap_w, q, M;
  std::vector<double> G;
  double W = 1.0, log_W = 0.0;
  // -sum_{k != j} (V/2 - q)[1 - (1 - w) M] = H~ - H at the configuration.
  double correction = 0.0;
  double q_sum = 0.0;
  double v_sum = 0.0;  // sum_{k<j} V_kj
  double at(const std::vector<double>& t, int i, int j) const { return t[static_cast<std::size_t>(i) * n + j]; }
};

// Fields for a configuration.  w, q and V are sampled from the profile at
// minimum-image distances.
CorrelationFields eval_fields(const Configuration& cfg, const CutoffParams& p, const twobody::SofteningProfile& sp,
                              const StepFunction& step);
CorrelationFields eval_fields(const Configuration& cfg, const CutoffParams& p, const twobody::SofteningProfile& sp);

// H~ - H at cfg, i.e. minus the subtracted pair sum.
double modified_correction(const Configuration& cfg, const CutoffParams& p, const twobody::SofteningProfile& sp);
// Same with F replaced by F^(n) (smooth step unless exponential is set).
double nbody_variant(const Configuration& cfg, const CutoffParams& p, const twobody::SofteningProfile& sp, int n,
                     bool exponential = false);

// W^(k_1..k_alpha) / W.
double removed_particle_ratio(const Configuration& cfg, const CutoffParams& p, const twobody::SofteningProfile& sp,
                              const std::vector<int>& removed);

// Analytic derivatives of the fields on a configuration.
class FieldDerivatives {
 public:
  FieldDerivatives(const Configuration& cfg, const CutoffParams& p, const twobody::SofteningProfile& sp,
                   const StepFunction& step);
  FieldDerivatives(const Configuration& cfg, const CutoffParams& p, const twobody::SofteningProfile& sp);

  const CorrelationFields& fields() const { return f_; }
  // grad_{x_k} N_ij and the (k, m) Hessian block of N_ij.
  Vec grad_count(int i, int j, int k) const;
  Mat hess_count(int i, int j, int k, int m) const;
  // Derivatives of F_ij^q.
  Vec grad_F(int i, int j, int k, double q = 1.0) const;
  Mat hess_F(int i, int j, int k, int m, double q = 1.0) const;
  double lap_F(int i, int j, int k) const;
  Vec grad_G(int i, int k) const;
  double lap_G(int i, int k) const;
  Vec grad_log_W(int k) const;

  struct Omega {
    double first = 0.0;      // sum Omega_k/(2G_k) + Omega_kj/(2G_j)
    double quadratic = 0.0;  // the two (grad G / G) products
    double gamma = 0.0;
    // sum of the absolute values of all terms, before cancellation
    double magnitude = 0.0;
    double omega() const { return first + quadratic; }
    double omega_tilde() const { return first + gamma; }
  };
  Omega omega() const;
  // B = sum_{k != j} q_kj + Omega.
  double B() const { return f_.q_sum + omega().omega(); }

 private:
  Configuration cfg_;
  CutoffParams p_;
  StepFunction step_;
  CorrelationFields f_;
  std::vector<Vec> gh_, gw_;  // (grad h)(x_a - x_b), (grad w)(x_a - x_b)
  std::vector<Mat> hh_;       // Hess h (x_a - x_b)
  std::vector<Vec> gh_sum_;   // sum_{u != a} gh(a, u)
  std::vector<Mat> hh_sum_;
  std::vector<int> w_pairs_;  // flattened i * n + j with w_ij != 0
  std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i) * f_.n + j; }
};

// Route (a) of the Omega check: 4th-order finite differences of W in every
// coordinate give W^{-1}(-sum Delta_k)W; adding sum_{k<j} V_kj and the
// correction gives B, and Omega = B - sum q.
double omega_by_differences(const Configuration& cfg, const CutoffParams& p, const twobody::SofteningProfile& sp,
                            double step);

struct OmegaCheck {
  double omega_a = 0.0, omega_b = 0.0, omega_tilde = 0.0;
  // |route a at step - route a at 2 step|.
  double fd_change = 0.0;
  // sum_{k != j} M_kj |Delta w + (V/2 - q)(1 - w)| with w, q by direct quadrature.
  double identity_floor = 0.0;
  double scale = 0.0;  // Omega::magnitude
  bool routes_agree() const;
};
OmegaCheck omega_decomposition_check(const Configuration& cfg, const CutoffParams& p,
                                     const twobody::SofteningProfile& sp);

// ---- audits over random configurations (cutoff_audit.cpp) ----

struct AuditSetting {
  int n = 10;
  int samples = 10000;
  std::uint64_t seed = 1;
  double cluster_fraction = 0.5;
};

struct GSeparationReport {
  int n = 0, samples = 0;
  double c1 = 1.0, max_G = 0.0;
  long violations = 0;
  // 1 - max w of the profile.
  double profile_floor = 0.0;
  Configuration witness;  // configuration attaining c1
};
GSeparationReport g_separation_audit(const CutoffParams& p, const twobody::SofteningProfile& sp,
                                     const AuditSetting& s);

struct OverlapReport {
  int n = 0, samples = 0;
  double q = 1.0;
  long overlaps = 0;
  // min over overlaps of -ell^eps log(F_ij^q)/q, so F^q <= exp(-c q / ell^eps).
  double fitted_c = 0.0;
  // max_i sum_j chi~_ij F_ij^q.
  double c_q = 0.0;
  Configuration witness;
};
OverlapReport no_overlap_audit(const CutoffParams& p, const twobody::SofteningProfile& sp, const AuditSetting& s,
                               double q);
// m particles within ell/2 of particle 0 plus a uniform background.
Configuration adversarial_cluster(int n, int m, int dim, double ell, std::uint64_t seed);

struct RemovalReport {
  int n = 0, samples = 0;
  int max_alpha = 0;
  // max |log(W^(k..)/W)| / alpha.
  double log_c0 = 0.0;
};
RemovalReport removal_audit(const CutoffParams& p, const twobody::SofteningProfile& sp, const AuditSetting& s,
                            int max_alpha);

struct DerivativeReport {
  int n = 0, samples = 0;
  double q = 1.0;
  double c_grad = 0.0, c_hess = 0.0;  // |||grad^a F^q||| <= c ell^-a F^{q/2}
  double c_koverlap = 0.0;            // k not in {i, j} with theta_ik + theta_jk > 0
  double koverlap_remainder = 0.0;    // max |grad_k F^q| where both thetas vanish
  double koverlap_allowance = 0.0;    // ell^{K - 1 - eps}
  double c_kfix = 0.0, c_kabfix = 0.0;
  double fd_max_rel = 0.0;             // analytic vs centered differences
};
DerivativeReport derivative_bounds_audit(const CutoffParams& p, const twobody::SofteningProfile& sp,
                                         const AuditSetting& s, double q);

// ---- grid-level operator identity (cutoff_grid.cpp) ----

struct LBResult {
  int points = 0;
  double lhs_norm = 0.0;
  // || W^{-1} H~ (W phi) - (L phi + B phi) || in L2 over grid^N.
  double defect = 0.0;
  // |int W^2 conj(phi1) L phi2 - int W^2 grad phi1 . grad phi2|.
  double self_adjoint_defect = 0.0;
  double min_W = 1.0;
};
// N <= 3 particles on a d = 1 torus grid; phi is a smooth symmetric product
// state.  Grids with more than 2^16 nodes are rejected.
LBResult assemble_L_B(int points, int n, const CutoffParams& p, const twobody::SofteningProfile& sp);

}  // namespace gplab::cutoff
