#include "gplab/manybody.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "gplab/error.hpp"

namespace gplab::manybody {

namespace {

int log2_points(const TorusGrid& g) {
  int lg = 0;
  while ((1 << lg) < g.points) ++lg;
  return lg;
}

std::size_t disp_index(const TorusGrid& g, std::size_t a, std::size_t b) {
  std::size_t out = 0, stride = 1;
  for (int ax = g.dim - 1; ax >= 0; --ax) {
    long da = static_cast<long>(a % g.points), db = static_cast<long>(b % g.points);
    long d = ((db - da) % g.points + g.points) % g.points;
    out += static_cast<std::size_t>(d) * stride;
    stride *= g.points;
    a /= g.points;
    b /= g.points;
  }
  return out;
}

void decode(std::size_t flat, int n, std::size_t G, std::size_t* slots) {
  for (int s = n - 1; s >= 0; --s) {
    slots[s] = flat % G;
    flat /= G;
  }
}

void check_state(const ManyBodyState& s) {
  if (s.n < 1 || s.psi.size() != ipow(s.grid.size(), s.n)) throw InputError("many-body state size mismatch");
}

}  // namespace

bool fits(const TorusGrid& g, int n) { return n >= 1 && n <= 3 && n * g.dim * log2_points(g) <= kDenseLog2Cap; }

double norm2(const ManyBodyState& s) {
  double t = 0.0;
  for (const auto& z : s.psi) t += std::norm(z);
  return t * std::pow(s.grid.cell_volume(), s.n);
}

ManyBodyState tensor_state(const std::vector<CVec>& factors, const TorusGrid& g) {
  const int n = static_cast<int>(factors.size());
  if (!fits(g, n)) throw InputError("many-body state above the dense cap (N <= 3, N d log2 M <= 24)");
  for (const auto& f : factors)
    if (f.size() != g.size()) throw InputError("tensor_state: factor size mismatch");
  const std::size_t G = g.size(), size = ipow(G, n);
  ManyBodyState s{g, n, CVec(size), 0.0};
  std::vector<std::size_t> slots(n);
  for (std::size_t f = 0; f < size; ++f) {
    decode(f, n, G, slots.data());
    cplx v = 1.0;
    for (int i = 0; i < n; ++i) v *= factors[i][slots[i]];
    s.psi[f] = v;
  }
  return s;
}

ManyBodyState product_state(const CVec& u, const TorusGrid& g, int n) {
  return tensor_state(std::vector<CVec>(n, u), g);
}

CVec permute_slots(const CVec& psi, const TorusGrid& g, int n, const std::vector<int>& perm) {
  const std::size_t G = g.size();
  CVec out(psi.size());
  std::vector<std::size_t> slots(n), p(n);
  for (std::size_t f = 0; f < psi.size(); ++f) {
    decode(f, n, G, slots.data());
    std::size_t src = 0;
    for (int i = 0; i < n; ++i) src = src * G + slots[perm[i]];
    out[f] = psi[src];
  }
  return out;
}

ManyBodyState symmetrize(const ManyBodyState& s) {
  check_state(s);
  std::vector<int> perm(s.n);
  std::iota(perm.begin(), perm.end(), 0);
  CVec acc(s.psi.size(), 0.0);
  int count = 0;
  do {
    CVec p = permute_slots(s.psi, s.grid, s.n, perm);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += p[i];
    ++count;
  } while (std::next_permutation(perm.begin(), perm.end()));
  ManyBodyState out{s.grid, s.n, std::move(acc), s.time};
  for (auto& z : out.psi) z /= static_cast<double>(count);
  const double nrm = norm2(out);
  if (!(nrm > 1e-24)) throw InputError("symmetrize: state has no symmetric component");
  const double c = 1.0 / std::sqrt(nrm);
  for (auto& z : out.psi) z *= c;
  return out;
}

double symmetry_defect(const ManyBodyState& s) {
  std::vector<int> perm(s.n);
  std::iota(perm.begin(), perm.end(), 0);
  double d = 0.0;
  while (std::next_permutation(perm.begin(), perm.end())) {
    CVec p = permute_slots(s.psi, s.grid, s.n, perm);
    for (std::size_t i = 0; i < p.size(); ++i) d = std::max(d, std::abs(p[i] - s.psi[i]));
  }
  return d;
}

ScaledPotential::ScaledPotential(const twobody::RadialPotential& base, const TorusGrid& g, int n, double scale)
    : grid_(g), n_(n) {
  if (!fits(g, n)) throw InputError("many-body potential above the dense cap (N <= 3, N d log2 M <= 24)");
  scale_ = scale > 0.0 ? scale : static_cast<double>(n);
  const double pre = g.dim == 3 ? scale_ * scale_ : scale_;
  const double s = scale_;
  support_ = base.support_radius() / s;
  if (!(support_ < 0.5)) throw InputError("scaled potential support R0/N must be < 1/2 on the unit torus");
  pair_ = [base, pre, s](double r) { return pre * base(s * r); };
  build();
}

ScaledPotential ScaledPotential::from_pair(const std::function<double(double)>& pair, const TorusGrid& g, int n,
                                           double prefactor, double support) {
  if (!fits(g, n)) throw InputError("many-body potential above the dense cap (N <= 3, N d log2 M <= 24)");
  if (!(support < 0.5)) throw InputError("pair potential support must be < 1/2 on the unit torus");
  ScaledPotential v(g, n);
  v.support_ = support;
  v.pair_ = [pair, prefactor](double r) { return prefactor * pair(r); };
  v.build();
  return v;
}

void ScaledPotential::build() {
  const std::size_t G = grid_.size();
  pair_table_.assign(G, 0.0);
  std::vector<int> idx(grid_.dim);
  for (std::size_t f = 0; f < G; ++f) {
    std::size_t rem = f;
    for (int a = grid_.dim - 1; a >= 0; --a) {
      idx[a] = static_cast<int>(rem % grid_.points);
      rem /= grid_.points;
    }
    pair_table_[f] = pair_(grid_distance(grid_, idx.data()));
  }
  const std::size_t size = ipow(G, n_);
  diag_.assign(size, 0.0);
  std::vector<std::size_t> slots(n_);
  for (std::size_t f = 0; f < size; ++f) {
    decode(f, n_, G, slots.data());
    double v = 0.0;
    for (int i = 0; i < n_; ++i)
      for (int j = i + 1; j < n_; ++j) v += pair_table_[disp_index(grid_, slots[i], slots[j])];
    diag_[f] = v;
  }
}

void ScaledPotential::add_diagonal(const std::vector<double>& extra) {
  if (extra.size() != diag_.size()) throw InputError("extra diagonal size mismatch");
  for (std::size_t i = 0; i < diag_.size(); ++i) diag_[i] += extra[i];
}

double ScaledPotential::grid_integral() const {
  double s = 0.0;
  for (double v : pair_table_) s += v;
  return s * grid_.cell_volume();
}

CVec apply_hamiltonian(const ManyBodyState& s, const ScaledPotential& v) {
  check_state(s);
  if (s.grid != v.grid() || s.n != v.n()) throw InputError("apply_hamiltonian: state and potential mismatch");
  Spectral fft(s.grid, s.n);
  CVec out = fft.apply_neg_laplacian(s.psi, std::vector<double>(s.n, 1.0));
  const auto& d = v.diagonal();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += d[i] * s.psi[i];
  return out;
}

ManyBodyPropagator::ManyBodyPropagator(const ScaledPotential& v, double dt) : v_(v), fft_(v.grid(), v.n()) {
  if (!(dt != 0.0) || !std::isfinite(dt)) throw InputError("many-body time step must be finite and nonzero");
  const TorusGrid& g = v.grid();
  kinetic_.assign(fft_.rank(), std::vector<cplx>(g.points));
  for (int a = 0; a < fft_.rank(); ++a)
    for (int i = 0; i < g.points; ++i) kinetic_[a][i] = std::polar(1.0, -fft_.k2(i) * dt);
  const auto& d = v.diagonal();
  half_phase_.resize(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) half_phase_[i] = std::polar(1.0, -0.5 * dt * d[i]);
}

void ManyBodyPropagator::step(CVec& psi) const {
  const long n = static_cast<long>(psi.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) psi[i] *= half_phase_[i];
  fft_.forward(psi);
  fft_.multiply_separable(psi, kinetic_);
  fft_.backward(psi);
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) psi[i] *= half_phase_[i];
}

ManyBodyTrajectory evolve_manybody(const ManyBodyState& psi0, const ScaledPotential& v, double dt, double T,
                                   int snapshot_stride) {
  check_state(psi0);
  if (psi0.grid != v.grid() || psi0.n != v.n()) throw InputError("evolve_manybody: state and potential mismatch");
  if (!(dt > 0.0) || !(T >= 0.0)) throw InputError("evolve_manybody: need dt > 0 and T >= 0");
  const int steps = static_cast<int>(std::llround(T / dt));
  ManyBodyPropagator prop(v, dt);
  ManyBodyTrajectory tr;
  ManyBodyState s = psi0;
  const double n0 = norm2(s);
  tr.snapshots.push_back(s);
  for (int k = 1; k <= steps; ++k) {
    prop.step(s.psi);
    s.time = psi0.time + k * dt;
    const double nk = norm2(s);
    if (!std::isfinite(nk) || std::abs(nk - n0) > 1e-6) {
      std::ostringstream os;
      os << "many-body evolution diverged at step " << k << " (norm " << nk << ")";
      throw NumericalError(os.str());
    }
    tr.max_norm_drift = std::max(tr.max_norm_drift, std::abs(nk - n0));
    if ((snapshot_stride > 0 && k % snapshot_stride == 0) || k == steps) {
      tr.max_symmetry_defect = std::max(tr.max_symmetry_defect, symmetry_defect(s));
      tr.snapshots.push_back(s);
    }
  }
  return tr;
}

hierarchy::DensityMatrix marginal(const ManyBodyState& s, int k) {
  check_state(s);
  if (k < 1 || k > s.n) throw InputError("marginal: need 1 <= k <= N");
  const std::size_t G = s.grid.size(), side = ipow(G, k), rest = ipow(G, s.n - k);
  const double cv = std::pow(s.grid.cell_volume(), s.n - k);
  CVec out(side * side);
  const long n = static_cast<long>(side);
#pragma omp parallel for schedule(static)
  for (long X = 0; X < n; ++X)
    for (std::size_t Xp = 0; Xp < side; ++Xp) {
      cplx acc = 0.0;
      for (std::size_t Y = 0; Y < rest; ++Y) acc += s.psi[X * rest + Y] * std::conj(s.psi[Xp * rest + Y]);
      out[X * side + Xp] = acc * cv;
    }
  return hierarchy::DensityMatrix(s.grid, k, std::move(out));
}

std::vector<double> bbgky_residual_k1(const std::vector<ManyBodyState>& traj, const ScaledPotential& v, double dt,
                                      std::vector<int> at) {
  const int count = static_cast<int>(traj.size());
  if (count < 3) throw InputError("BBGKY residual needs >= 3 snapshots");
  const int N = traj[0].n;
  if (N < 2) throw InputError("BBGKY residual needs N >= 2");
  if (at.empty())
    for (int i = 0; i < count; ++i) at.push_back(i);
  const TorusGrid& g = traj[0].grid;
  const std::size_t G = g.size(), rest = ipow(G, N - 2);
  const double cv = g.cell_volume();
  Spectral fft(g, 2);
  const auto& vt = v.pair_table();
  std::vector<double> out;
  for (int n : at) {
    if (n < 0 || n >= count) throw InputError("BBGKY residual: index out of range");
    int i0, i1, i2;
    double c0, c1, c2;
    if (n == 0) {
      i0 = 0, i1 = 1, i2 = 2, c0 = -1.5, c1 = 2.0, c2 = -0.5;
    } else if (n == count - 1) {
      i0 = n - 2, i1 = n - 1, i2 = n, c0 = 0.5, c1 = -2.0, c2 = 1.5;
    } else {
      i0 = n - 1, i1 = n, i2 = n + 1, c0 = -0.5, c1 = 0.0, c2 = 0.5;
    }
    for (int i : {i0, i1}) {
      if (std::abs(traj[i + 1].time - traj[i].time - dt) > 1e-9 * dt)
        throw InputError("BBGKY residual: snapshots are not spaced by dt");
    }
    auto a = marginal(traj[i0], 1), b = marginal(traj[i1], 1), c = marginal(traj[i2], 1);
    const ManyBodyState& s = traj[n];
    auto gn = marginal(s, 1);
    CVec kin = fft.apply_neg_laplacian(gn.kernel(), {1.0, -1.0});
    double sum = 0.0;
    for (std::size_t x = 0; x < G; ++x)
      for (std::size_t xp = 0; xp < G; ++xp) {
        cplx inter = 0.0;
        for (std::size_t y = 0; y < G; ++y) {
          const double dv = vt[disp_index(g, y, x)] - vt[disp_index(g, y, xp)];
          if (dv == 0.0) continue;
          cplx acc = 0.0;
          for (std::size_t r = 0; r < rest; ++r)
            acc += s.psi[(x * G + y) * rest + r] * std::conj(s.psi[(xp * G + y) * rest + r]);
          inter += dv * acc;
        }
        inter *= std::pow(cv, N - 1) * (N - 1);
        const std::size_t i = x * G + xp;
        const cplx dg = (c0 * a.kernel()[i] + c1 * b.kernel()[i] + c2 * c.kernel()[i]) / dt;
        sum += std::norm(cplx(0.0, 1.0) * dg - kin[i] - inter);
      }
    out.push_back(std::sqrt(sum * cv * cv));
  }
  return out;
}

EnergyMoments energy_moments(const ManyBodyState& s, const ScaledPotential& v) {
  CVec h = apply_hamiltonian(s, v);
  const double cv = std::pow(s.grid.cell_volume(), s.n);
  cplx h1 = 0.0;
  double h2 = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    h1 += std::conj(s.psi[i]) * h[i];
    h2 += std::norm(h[i]);
  }
  return {h1.real() * cv, h2 * cv, h1.imag() * cv};
}

MeanFieldReport mean_field_inequality_probe(const ManyBodyState& s, const twobody::RadialPotential& v, double tau) {
  check_state(s);
  if (!(tau > 0.0)) throw InputError("mean-field probe needs tau > 0");
  const int d = s.grid.dim;
  const double pre = std::pow(tau, -d) / s.n;
  auto vt = ScaledPotential::from_pair([v, tau](double r) { return v(r / tau); }, s.grid, s.n, pre,
                                       v.support_radius() * tau);
  Spectral fft(s.grid, s.n);
  CVec lap = fft.apply_neg_laplacian(s.psi, std::vector<double>(s.n, 1.0));
  const double cv = std::pow(s.grid.cell_volume(), s.n);
  MeanFieldReport rep;
  for (const auto& z : lap) rep.lhs += std::norm(z);
  rep.lhs *= cv;
  rep.h2 = energy_moments(s, vt).h2;
  rep.n2_norm = static_cast<double>(s.n) * s.n * norm2(s);
  rep.admissible_c = rep.lhs / (rep.h2 + rep.n2_norm);
  return rep;
}

CVec dense_reference_evolution(const ManyBodyState& psi0, const ScaledPotential& v, double T) {
  const std::size_t D = psi0.psi.size();
  if (D == 0 || D > kDenseOracleStates) throw InputError("dense oracle: state count outside [1, 4096]");
  if (psi0.n != v.n() || !(psi0.grid == v.grid())) throw InputError("dense oracle: state and potential disagree");
  const auto Di = static_cast<Eigen::Index>(D);
  Eigen::MatrixXcd H(Di, Di);
  ManyBodyState e{psi0.grid, psi0.n, CVec(D, 0.0), 0.0};
  for (std::size_t c = 0; c < D; ++c) {
    e.psi[c] = 1.0;
    CVec col = apply_hamiltonian(e, v);
    for (std::size_t r = 0; r < D; ++r) H(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = col[r];
    e.psi[c] = 0.0;
  }
  H = (0.5 * (H + H.adjoint())).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
  if (es.info() != Eigen::Success) throw NumericalError("dense oracle: eigensolver failed");
  Eigen::VectorXcd p(Di);
  for (std::size_t i = 0; i < D; ++i) p[static_cast<Eigen::Index>(i)] = psi0.psi[i];
  Eigen::VectorXcd c = es.eigenvectors().adjoint() * p;
  for (Eigen::Index i = 0; i < Di; ++i) c[i] *= std::polar(1.0, -es.eigenvalues()[i] * T);
  Eigen::VectorXcd out = es.eigenvectors() * c;
  CVec r(D);
  for (std::size_t i = 0; i < D; ++i) r[i] = out[static_cast<Eigen::Index>(i)];
  return r;
}

}  // namespace gplab::manybody
