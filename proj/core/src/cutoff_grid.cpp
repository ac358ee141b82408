#include <cmath>

#include "gplab/cutoff.hpp"
#include "gplab/error.hpp"
#include "gplab/gp.hpp"
#include "gplab/manybody.hpp"
#include "gplab/spectral.hpp"

namespace gplab::cutoff {

namespace {

CVec product_field(const CVec& u, const TorusGrid& g, int n) { return manybody::product_state(u, g, n).psi; }

Configuration node_configuration(std::size_t flat, const TorusGrid& g, int n) {
  Configuration c;
  c.dim = 1;
  c.x.assign(n, Vec::Zero());
  for (int s = n - 1; s >= 0; --s) {
    c.x[s][0] = static_cast<double>(flat % g.points) * g.spacing();
    flat /= g.points;
  }
  return c;
}

}  // namespace

LBResult assemble_L_B(int points, int n, const CutoffParams& p, const twobody::SofteningProfile& sp) {
  if (p.dim != 1 || sp.dim() != 1) throw InputError("assemble_L_B works on d = 1 grids");
  if (n < 2 || n > 3) throw InputError("assemble_L_B needs N in {2, 3}");
  const auto g = TorusGrid::make(1, points);
  const std::size_t size = ipow(g.size(), n);
  if (size > (std::size_t{1} << 16)) throw InputError("assemble_L_B grid too large (more than 2^16 nodes)");
  CutoffParams pn = p;
  pn.n = n;

  const CVec phi = product_field(gp::smooth_field(g, 0.3).values, g, n);
  const CVec phi2 = product_field(gp::smooth_field(g, 0.15).values, g, n);
  std::vector<double> W(size), corr(size), B(size);
  std::vector<std::vector<double>> dlogw(n, std::vector<double>(size));
  const long count = static_cast<long>(size);
#pragma omp parallel for schedule(dynamic, 64)
  for (long i = 0; i < count; ++i) {
    FieldDerivatives d(node_configuration(i, g, n), pn, sp);
    W[i] = d.fields().W;
    corr[i] = d.fields().correction;
    B[i] = d.B();
    for (int k = 0; k < n; ++k) dlogw[k][i] = d.grad_log_W(k)[0];
  }

  const auto& V = sp.potential();
  auto vn = manybody::ScaledPotential::from_pair([V](double r) { return V(r); }, g, n, 1.0, V.support_radius());
  vn.add_diagonal(corr);
  manybody::ManyBodyState psi{g, n, phi, 0.0};
  for (std::size_t i = 0; i < size; ++i) psi.psi[i] *= W[i];
  const CVec hpsi = manybody::apply_hamiltonian(psi, vn);

  Spectral fft(g, n);
  const std::vector<double> ones(n, 1.0);
  const CVec lap = fft.apply_neg_laplacian(phi, ones);
  std::vector<CVec> dphi, dphi2;
  for (int k = 0; k < n; ++k) {
    dphi.push_back(fft.derivative(phi, k));
    dphi2.push_back(fft.derivative(phi2, k));
  }
  const CVec lap2 = fft.apply_neg_laplacian(phi2, ones);

  LBResult r;
  r.points = points;
  const double cv = std::pow(g.cell_volume(), n);
  double def = 0.0, ln = 0.0;
  cplx lhs_sa = 0.0, rhs_sa = 0.0;
  for (std::size_t i = 0; i < size; ++i) {
    const cplx lhs = hpsi[i] / W[i];
    cplx Lphi = lap[i], Lphi2 = lap2[i], grad = 0.0;
    for (int k = 0; k < n; ++k) {
      Lphi -= 2.0 * dlogw[k][i] * dphi[k][i];
      Lphi2 -= 2.0 * dlogw[k][i] * dphi2[k][i];
      grad += std::conj(dphi[k][i]) * dphi2[k][i];
    }
    def += std::norm(lhs - (Lphi + B[i] * phi[i]));
    ln += std::norm(lhs);
    lhs_sa += W[i] * W[i] * std::conj(phi[i]) * Lphi2;
    rhs_sa += W[i] * W[i] * grad;
    r.min_W = std::min(r.min_W, W[i]);
  }
  r.defect = std::sqrt(def * cv);
  r.lhs_norm = std::sqrt(ln * cv);
  r.self_adjoint_defect = std::abs(lhs_sa - rhs_sa) * cv;
  return r;
}

}  // namespace gplab::cutoff
