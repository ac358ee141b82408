#include "gplab/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "gplab/bump.hpp"
#include "gplab/error.hpp"
#include "gplab/spectral.hpp"

namespace gplab::hierarchy {

namespace {

// Flat index of the displacement b - a (mod M per axis) of one slot.
std::size_t disp_index(const TorusGrid& g, std::size_t a, std::size_t b) {
  std::size_t out = 0;
  std::size_t stride = 1;
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

// Slot s of a k-slot flat index X (slot 0 slowest).
std::size_t slot_of(std::size_t X, int s, int k, std::size_t G) {
  for (int t = k - 1; t > s; --t) X /= G;
  return X % G;
}

std::size_t pack(const std::vector<std::size_t>& slots, std::size_t G) {
  std::size_t X = 0;
  for (std::size_t s : slots) X = X * G + s;
  return X;
}

}  // namespace

bool dense_fits(const TorusGrid& g, int k) {
  int lg = 0;
  while ((1 << lg) < g.points) ++lg;
  return 2 * k * g.dim * lg <= kDenseLog2Cap;
}

DensityMatrix::DensityMatrix(const TorusGrid& g, int k, CVec kernel)
    : grid_(g), k_(k), side_(ipow(g.size(), k)), kernel_(std::move(kernel)) {
  if (k < 1) throw InputError("density matrix needs k >= 1");
  if (!dense_fits(g, k)) throw InputError("dense density matrix above the storage cap 2 k d log2 M <= 24");
  if (kernel_.size() != side_ * side_) throw InputError("density matrix kernel size mismatch");
}

DensityMatrix DensityMatrix::product(const CVec& u, const TorusGrid& g, int k) {
  if (u.size() != g.size()) throw InputError("product state factor does not match grid");
  if (k < 1) throw InputError("product state needs k >= 1");
  DensityMatrix out = dense_fits(g, k) ? DensityMatrix(g, k, CVec(ipow(g.size(), 2 * k))) : DensityMatrix(g);
  out.k_ = k;
  out.side_ = ipow(g.size(), k);
  out.factor_ = u;
  if (out.has_dense()) {
    const std::size_t G = g.size(), side = out.side_;
    CVec U(side, 1.0);
    for (std::size_t X = 0; X < side; ++X)
      for (int s = 0; s < k; ++s) U[X] *= u[slot_of(X, s, k, G)];
    const long n = static_cast<long>(side);
#pragma omp parallel for schedule(static)
    for (long X = 0; X < n; ++X)
      for (std::size_t Xp = 0; Xp < side; ++Xp) out.kernel_[X * side + Xp] = U[X] * std::conj(U[Xp]);
  }
  return out;
}

DensityMatrix::DensityMatrix(const TorusGrid& g) : grid_(g), k_(0), side_(0) {}

DensityMatrix DensityMatrix::factor_only(const CVec& u, const TorusGrid& g, int k) {
  if (u.size() != g.size()) throw InputError("product state factor does not match grid");
  if (k < 1) throw InputError("product state needs k >= 1");
  DensityMatrix out(g);
  out.k_ = k;
  out.side_ = ipow(g.size(), k);
  out.factor_ = u;
  return out;
}

const CVec& DensityMatrix::kernel() const {
  if (!has_dense()) throw InputError("density matrix is stored as a factor only (above the dense cap)");
  return kernel_;
}

cplx DensityMatrix::operator()(std::size_t x, std::size_t xp) const {
  if (has_dense()) return kernel_[x * side_ + xp];
  const std::size_t G = grid_.size();
  cplx v = 1.0;
  for (int s = 0; s < k_; ++s) v *= (*factor_)[slot_of(x, s, k_, G)] * std::conj((*factor_)[slot_of(xp, s, k_, G)]);
  return v;
}

double DensityMatrix::trace() const {
  const double cv = grid_.cell_volume();
  if (!has_dense()) {
    double m = 0.0;
    for (const auto& z : *factor_) m += std::norm(z);
    return std::pow(m * cv, k_);
  }
  cplx t = 0.0;
  for (std::size_t X = 0; X < side_; ++X) t += kernel_[X * side_ + X];
  return t.real() * std::pow(cv, k_);
}

double DensityMatrix::purity() const {
  const double cv = grid_.cell_volume();
  if (!has_dense()) return trace() * trace();
  cplx t = 0.0;
  for (std::size_t X = 0; X < side_; ++X)
    for (std::size_t Y = 0; Y < side_; ++Y) t += kernel_[X * side_ + Y] * kernel_[Y * side_ + X];
  return t.real() * std::pow(cv, 2 * k_);
}

double DensityMatrix::hermiticity_defect() const {
  if (!has_dense()) return 0.0;
  double d = 0.0;
  for (std::size_t X = 0; X < side_; ++X)
    for (std::size_t Y = X; Y < side_; ++Y)
      d = std::max(d, std::abs(kernel_[X * side_ + Y] - std::conj(kernel_[Y * side_ + X])));
  return d;
}

double DensityMatrix::symmetry_defect() const {
  if (!has_dense() || k_ < 2) return 0.0;
  const std::size_t G = grid_.size();
  std::vector<int> perm(k_);
  std::iota(perm.begin(), perm.end(), 0);
  double d = 0.0;
  std::vector<std::size_t> a(k_), b(k_), pa(k_), pb(k_);
  while (std::next_permutation(perm.begin(), perm.end())) {
    for (std::size_t X = 0; X < side_; ++X) {
      for (int s = 0; s < k_; ++s) a[s] = slot_of(X, s, k_, G);
      for (int s = 0; s < k_; ++s) pa[s] = a[perm[s]];
      const std::size_t PX = pack(pa, G);
      for (std::size_t Y = 0; Y < side_; ++Y) {
        for (int s = 0; s < k_; ++s) b[s] = slot_of(Y, s, k_, G);
        for (int s = 0; s < k_; ++s) pb[s] = b[perm[s]];
        d = std::max(d, std::abs(kernel_[PX * side_ + pack(pb, G)] - kernel_[X * side_ + Y]));
      }
    }
  }
  return d;
}

double DensityMatrix::positivity_floor(int count, unsigned long long seed) const {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  const double cvk = std::pow(grid_.cell_volume(), k_);
  double floor = INFINITY;
  for (int c = 0; c < count; ++c) {
    CVec f(side_);
    double nrm = 0.0;
    for (auto& z : f) {
      z = cplx(n01(rng), n01(rng));
      nrm += std::norm(z);
    }
    nrm = std::sqrt(nrm * cvk);
    for (auto& z : f) z /= nrm;
    double val;
    if (has_dense()) {
      cplx s = 0.0;
      for (std::size_t X = 0; X < side_; ++X) {
        cplx row = 0.0;
        for (std::size_t Y = 0; Y < side_; ++Y) row += kernel_[X * side_ + Y] * f[Y];
        s += std::conj(f[X]) * row;
      }
      val = s.real() * cvk * cvk;
    } else {
      const std::size_t G = grid_.size();
      cplx s = 0.0;
      for (std::size_t X = 0; X < side_; ++X) {
        cplx U = 1.0;
        for (int t = 0; t < k_; ++t) U *= (*factor_)[slot_of(X, t, k_, G)];
        s += std::conj(f[X]) * U;
      }
      val = std::norm(s) * cvk * cvk;
    }
    floor = std::min(floor, val);
  }
  return floor;
}

DensityMatrix product_state(const gp::WaveField& u, int k) {
  if (std::abs(gp::mass(u) - 1.0) > 1e-10) throw InputError("product_state: field mass must be 1");
  return DensityMatrix::product(u.values, u.grid, k);
}

DensityMatrix partial_trace(const DensityMatrix& g) {
  if (g.k() < 2) throw InputError("partial_trace needs k >= 2");
  const TorusGrid& grid = g.grid();
  const std::size_t G = grid.size();
  if (!g.has_dense()) {
    // Factors of product states carry unit mass.
    return DensityMatrix::product(g.factor(), grid, g.k() - 1);
  }
  const std::size_t side = g.side(), sub = side / G;
  CVec out(sub * sub, 0.0);
  const CVec& K = g.kernel();
  const double cv = grid.cell_volume();
  const long n = static_cast<long>(sub);
#pragma omp parallel for schedule(static)
  for (long X = 0; X < n; ++X)
    for (std::size_t Y = 0; Y < sub; ++Y) {
      cplx s = 0.0;
      for (std::size_t z = 0; z < G; ++z) s += K[(X * G + z) * side + Y * G + z];
      out[X * sub + Y] = s * cv;
    }
  return DensityMatrix(grid, g.k() - 1, std::move(out));
}

namespace {

void check_j(const DensityMatrix& g, int j) {
  if (g.k() < 2) throw InputError("diagonal_restrict needs a (k+1)-particle matrix with k >= 1");
  if (j < 1 || j > g.k() - 1) throw InputError("diagonal_restrict: slot j out of range 1..k");
}

}  // namespace

CVec diagonal_restrict(const DensityMatrix& g, int j, bool primed) {
  check_j(g, j);
  const int k = g.k() - 1;
  const std::size_t G = g.grid().size(), side = ipow(G, k);
  CVec out(side * side);
  const long n = static_cast<long>(side);
#pragma omp parallel for schedule(static)
  for (long X = 0; X < n; ++X) {
    for (std::size_t Y = 0; Y < side; ++Y) {
      std::size_t z = primed ? slot_of(Y, j - 1, k, G) : slot_of(X, j - 1, k, G);
      out[X * side + Y] = g(X * G + z, Y * G + z);
    }
  }
  return out;
}

CVec diagonal_restrict_mollified(const DensityMatrix& g, int j, double r, double r_prime, bool primed) {
  check_j(g, j);
  const TorusGrid& grid = g.grid();
  const int k = g.k() - 1;
  const std::size_t G = grid.size(), side = ipow(G, k);
  const double cv = grid.cell_volume();
  const auto hr = grid_mollifier(grid, r), hrp = grid_mollifier(grid, r_prime);
  CVec out(side * side);
  if (!g.has_dense()) {
    const CVec& u = g.factor();
    CVec conv(G, 0.0), B(G, 0.0);
    for (std::size_t z = 0; z < G; ++z) {
      cplx s = 0.0;
      for (std::size_t zp = 0; zp < G; ++zp) s += hr[disp_index(grid, z, zp)] * std::conj(u[zp]);
      conv[z] = s * cv;
    }
    for (std::size_t x = 0; x < G; ++x) {
      cplx s = 0.0;
      for (std::size_t z = 0; z < G; ++z) s += hrp[disp_index(grid, x, z)] * u[z] * conv[z];
      B[x] = s * cv;
    }
    DensityMatrix gk = DensityMatrix::product(u, grid, k);
    const long n = static_cast<long>(side);
#pragma omp parallel for schedule(static)
    for (long X = 0; X < n; ++X)
      for (std::size_t Y = 0; Y < side; ++Y) {
        std::size_t x = primed ? slot_of(Y, j - 1, k, G) : slot_of(X, j - 1, k, G);
        out[X * side + Y] = gk(X, Y) * B[x];
      }
    return out;
  }
  const CVec& K = g.kernel();
  const std::size_t full = side * G;
  const long n = static_cast<long>(side);
#pragma omp parallel for schedule(static)
  for (long X = 0; X < n; ++X) {
    std::vector<cplx> T(G);
    for (std::size_t Y = 0; Y < side; ++Y) {
      for (std::size_t z = 0; z < G; ++z) {
        cplx s = 0.0;
        for (std::size_t zp = 0; zp < G; ++zp) s += hr[disp_index(grid, z, zp)] * K[(X * G + z) * full + Y * G + zp];
        T[z] = s * cv;
      }
      std::size_t x = primed ? slot_of(Y, j - 1, k, G) : slot_of(X, j - 1, k, G);
      cplx s = 0.0;
      for (std::size_t z = 0; z < G; ++z) s += hrp[disp_index(grid, x, z)] * T[z];
      out[X * side + Y] = s * cv;
    }
  }
  return out;
}

TestFunctional smooth_test_functional(const TorusGrid& g, int k, int kmax, unsigned long long seed) {
  if (!dense_fits(g, k)) throw InputError("test functional above the dense cap");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  Spectral fft(g, 2 * k);
  CVec hat(fft.size(), 0.0);
  const int rank = fft.rank();
  for (std::size_t f = 0; f < hat.size(); ++f) {
    bool in = true;
    for (int a = 0; a < rank && in; ++a) in = std::abs(g.wavenumber(axis_digit(f, a, rank, g.points))) <= kmax;
    if (in) hat[f] = cplx(n01(rng), n01(rng));
  }
  fft.backward(hat);
  double sup = 0.0;
  for (const auto& z : hat) sup = std::max(sup, std::abs(z));
  for (auto& z : hat) z /= sup;
  return TestFunctional{g, k, std::move(hat), TestFunctional::Smoothness::W2inf};
}

cplx pairing(const CVec& J, const CVec& kernel, const TorusGrid& g, int k) {
  if (J.size() != kernel.size()) throw InputError("pairing: size mismatch");
  cplx s = 0.0;
  for (std::size_t i = 0; i < J.size(); ++i) s += J[i] * kernel[i];
  return s * std::pow(g.cell_volume(), 2 * k);
}

SnapshotSource factorized_source(const std::vector<gp::WaveField>& snaps, int k) {
  return [&snaps, k](int i) {
    const auto& u = snaps.at(i);
    return HierarchySnapshot{product_state(u, k), DensityMatrix::product(u.values, u.grid, k + 1), u.time};
  };
}

namespace {

class Window {
 public:
  Window(const SnapshotSource& src) : src_(src) {}
  const HierarchySnapshot& get(int i) {
    auto it = cache_.find(i);
    if (it != cache_.end()) return it->second;
    return cache_.emplace(i, src_(i)).first->second;
  }
  void drop_below(int i) { cache_.erase(cache_.begin(), cache_.lower_bound(i)); }

 private:
  const SnapshotSource& src_;
  std::map<int, HierarchySnapshot> cache_;
};

std::vector<double> kinetic_weights(int k) {
  std::vector<double> w(2 * k, 1.0);
  for (int s = k; s < 2 * k; ++s) w[s] = -1.0;
  return w;
}

// sum_j (diag_j - diag'_j) gamma^(k+1), mollified when r >= 0.
CVec interaction(const DensityMatrix& gk1, int k, double r, double rp, bool sharp) {
  CVec acc;
  for (int j = 1; j <= k; ++j) {
    CVec a = sharp ? diagonal_restrict(gk1, j, false) : diagonal_restrict_mollified(gk1, j, r, rp, false);
    CVec b = sharp ? diagonal_restrict(gk1, j, true) : diagonal_restrict_mollified(gk1, j, r, rp, true);
    if (acc.empty()) acc.assign(a.size(), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) acc[i] += a[i] - b[i];
  }
  return acc;
}

}  // namespace

std::vector<double> hierarchy_residual_strong(const SnapshotSource& src, int count, double dt, double sigma,
                                              std::vector<int> at) {
  if (count < 3) throw InputError("hierarchy residual needs >= 3 snapshots");
  if (!(dt > 0.0)) throw InputError("hierarchy residual needs dt > 0");
  if (at.empty())
    for (int i = 0; i < count; ++i) at.push_back(i);
  Window win(src);
  std::vector<double> out;
  const auto& g0 = win.get(0);
  const TorusGrid grid = g0.gk.grid();
  const int k = g0.gk.k();
  if (g0.gk1.k() != k + 1 || g0.gk1.grid() != grid) throw InputError("hierarchy residual: inconsistent snapshot");
  Spectral fft(grid, 2 * k);
  const auto weights = kinetic_weights(k);
  const double cv2k = std::pow(grid.cell_volume(), 2 * k);
  for (int n : at) {
    if (n < 0 || n >= count) throw InputError("hierarchy residual: index out of range");
    int i0, i1, i2;
    double c0, c1, c2;
    if (n == 0) {
      i0 = 0, i1 = 1, i2 = 2, c0 = -1.5, c1 = 2.0, c2 = -0.5;
    } else if (n == count - 1) {
      i0 = n - 2, i1 = n - 1, i2 = n, c0 = 0.5, c1 = -2.0, c2 = 1.5;
    } else {
      i0 = n - 1, i1 = n, i2 = n + 1, c0 = -0.5, c1 = 0.0, c2 = 0.5;
    }
    win.drop_below(i0);
    CVec dg(win.get(i0).gk.kernel().size());
    {
      const CVec& a = win.get(i0).gk.kernel();
      const CVec& b = win.get(i1).gk.kernel();
      const CVec& c = win.get(i2).gk.kernel();
      const double tol = 1e-9 * dt;
      if (std::abs(win.get(i2).time - win.get(i1).time - dt) > tol ||
          std::abs(win.get(i1).time - win.get(i0).time - dt) > tol)
        throw InputError("hierarchy residual: snapshots are not spaced by dt");
      for (std::size_t i = 0; i < dg.size(); ++i) dg[i] = (c0 * a[i] + c1 * b[i] + c2 * c[i]) / dt;
    }
    const auto& snap = win.get(n);
    if (snap.gk.grid() != grid) throw InputError("hierarchy residual: mismatched grids");
    CVec kin = fft.apply_neg_laplacian(snap.gk.kernel(), weights);
    CVec inter = interaction(snap.gk1, k, 0.0, 0.0, true);
    double s = 0.0;
    for (std::size_t i = 0; i < dg.size(); ++i) s += std::norm(cplx(0.0, 1.0) * dg[i] - kin[i] - sigma * inter[i]);
    out.push_back(std::sqrt(s * cv2k));
  }
  return out;
}

double weak_form_check(const TestFunctional& J, const SnapshotSource& src, int count, double dt, double sigma,
                       double r, double r_prime) {
  if (count < 2) throw InputError("weak form needs >= 2 snapshots");
  const auto first = src(0);
  const TorusGrid grid = first.gk.grid();
  const int k = first.gk.k();
  if (J.k != k || J.grid != grid) throw InputError("weak form: test functional does not match snapshots");
  if (J.tag != TestFunctional::Smoothness::W2inf) throw InputError("weak form needs a W^{2,inf} test functional");
  Spectral fft(grid, 2 * k);
  const auto weights = kinetic_weights(k);
  cplx integral = 0.0, start = 0.0, end = 0.0;
  for (int n = 0; n < count; ++n) {
    const auto snap = n == 0 ? first : src(n);
    CVec kin = fft.apply_neg_laplacian(snap.gk.kernel(), weights);
    CVec inter = interaction(snap.gk1, k, r, r_prime, false);
    for (std::size_t i = 0; i < kin.size(); ++i) kin[i] += sigma * inter[i];
    const double wt = (n == 0 || n == count - 1) ? 0.5 * dt : dt;
    integral += wt * pairing(J.kernel, kin, grid, k);
    if (n == 0) start = pairing(J.kernel, snap.gk.kernel(), grid, k);
    if (n == count - 1) end = pairing(J.kernel, snap.gk.kernel(), grid, k);
  }
  return std::abs(end - start + cplx(0.0, 1.0) * integral);
}

double mollifier_defect(const CVec& f, const CVec& J, const TorusGrid& g, double beta1, double beta2) {
  const std::size_t G = g.size();
  if (f.size() != G * G || J.size() != G * G) throw InputError("mollifier probe: f and J must be two-slot kernels");
  const double cv = g.cell_volume();
  const auto d1 = grid_mollifier(g, beta1), d2 = grid_mollifier(g, beta2);
  // gbar(x', y) = int d_b1(y' - y) conj f(x', y') dy'.
  CVec gbar(G * G);
  for (std::size_t xp = 0; xp < G; ++xp)
    for (std::size_t y = 0; y < G; ++y) {
      cplx s = 0.0;
      for (std::size_t yp = 0; yp < G; ++yp) s += d1[disp_index(g, y, yp)] * std::conj(f[xp * G + yp]);
      gbar[xp * G + y] = s * cv;
    }
  cplx total = 0.0;
  const long n = static_cast<long>(G);
  std::vector<cplx> row(G);
  for (long x = 0; x < n; ++x) {
    for (std::size_t xp = 0; xp < G; ++xp) {
      cplx s = 0.0;
      for (std::size_t y = 0; y < G; ++y) s += d2[disp_index(g, x, y)] * f[x * G + y] * gbar[xp * G + y];
      s *= cv;
      s -= f[x * G + x] * std::conj(f[xp * G + x]);
      total += J[x * G + xp] * s;
    }
  }
  return std::abs(total) * cv * cv;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InputError("loglog_slope needs >= 2 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

MollifierRateReport mollifier_rate_probe(const CVec& f, const TestFunctional& J, const std::vector<double>& beta1,
                                         const std::vector<double>& beta2) {
  const TorusGrid& g = J.grid;
  if (J.k != 1) throw InputError("mollifier probe is implemented for k = 1");
  MollifierRateReport rep;
  rep.beta1 = beta1;
  rep.beta2 = beta2;
  for (double b : beta1) rep.defect_beta1.push_back(mollifier_defect(f, J.kernel, g, b, 0.0));
  for (double b : beta2) rep.defect_beta2.push_back(mollifier_defect(f, J.kernel, g, 0.0, b));
  rep.slope_beta1 = loglog_slope(beta1, rep.defect_beta1);
  rep.slope_beta2 = loglog_slope(beta2, rep.defect_beta2);

  // Tr |S_1 S_2 U S_1 S_2| = |S_1 S_2 f|^2 for U = |f><f|.
  Spectral fft(g, 2);
  CVec hat = f;
  fft.forward(hat);
  const double n = static_cast<double>(hat.size());
  double tr = 0.0;
  const int rank = fft.rank();
  for (std::size_t i = 0; i < hat.size(); ++i) {
    double w1 = 1.0, w2 = 1.0;
    for (int a = 0; a < g.dim; ++a) {
      w1 += fft.k2(axis_digit(i, a, rank, g.points));
      w2 += fft.k2(axis_digit(i, g.dim + a, rank, g.points));
    }
    tr += w1 * w2 * std::norm(hat[i]);
  }
  rep.trace_factor = tr / n * std::pow(g.cell_volume(), 2);
  double sup = 0.0, grad = 0.0;
  for (const auto& z : J.kernel) sup = std::max(sup, std::abs(z));
  for (int a = 0; a < g.dim; ++a) {
    CVec d = fft.derivative(J.kernel, a);
    for (const auto& z : d) grad = std::max(grad, std::abs(z));
  }
  rep.j_norm = sup + grad;
  auto fit = [&](double b1, double b2, double def) {
    rep.fitted_c = std::max(rep.fitted_c, def / (rep.j_norm * (b1 + std::sqrt(b2)) * rep.trace_factor));
  };
  for (std::size_t i = 0; i < beta1.size(); ++i) fit(beta1[i], 0.0, rep.defect_beta1[i]);
  for (std::size_t i = 0; i < beta2.size(); ++i) fit(0.0, beta2[i], rep.defect_beta2[i]);
  rep.floor_defect = mollifier_defect(f, J.kernel, g, 0.5 * g.spacing(), 0.5 * g.spacing());
  return rep;
}

}  // namespace gplab::hierarchy
