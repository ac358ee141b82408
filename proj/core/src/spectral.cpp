#include "gplab/spectral.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

#include "gplab/error.hpp"

namespace gplab {

namespace {

std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

fftw_plan get_plan(int rank, int M, int sign) {
  static std::map<std::tuple<int, int, int>, fftw_plan> cache;
  std::lock_guard<std::mutex> lock(plan_mutex());
  auto key = std::make_tuple(rank, M, sign);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  std::vector<int> n(rank, M);
  std::size_t total = ipow(static_cast<std::size_t>(M), rank);
  fftw_complex* buf = fftw_alloc_complex(total);
  fftw_plan p = fftw_plan_dft(rank, n.data(), buf, buf, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(buf);
  if (p == nullptr) throw NumericalError("FFTW planning failed");
  cache.emplace(key, p);
  return p;
}

}  // namespace

Spectral::Spectral(const TorusGrid& grid, int slots)
    : grid_(grid), slots_(slots), rank_(slots * grid.dim), size_(ipow(grid.size(), slots)) {
  if (slots < 1) throw InputError("Spectral: slots must be >= 1");
}

void Spectral::forward(CVec& a) const {
  if (a.size() != size_) throw InputError("Spectral::forward: size mismatch");
  auto* p = reinterpret_cast<fftw_complex*>(a.data());
  fftw_execute_dft(get_plan(rank_, grid_.points, FFTW_FORWARD), p, p);
}

void Spectral::backward(CVec& a) const {
  if (a.size() != size_) throw InputError("Spectral::backward: size mismatch");
  auto* p = reinterpret_cast<fftw_complex*>(a.data());
  fftw_execute_dft(get_plan(rank_, grid_.points, FFTW_BACKWARD), p, p);
  const double s = 1.0 / static_cast<double>(size_);
  for (auto& v : a) v *= s;
}

double Spectral::k2(int i) const {
  double k = 2.0 * kPi * grid_.wavenumber(i);
  return k * k;
}

namespace {

void additive_rec(cplx* a, const std::vector<std::vector<double>>& t, int axis, int rank, int M,
                  std::size_t stride, double acc) {
  const auto& row = t[axis];
  if (axis == rank - 1) {
    for (int d = 0; d < M; ++d) a[d] *= acc + row[d];
    return;
  }
  std::size_t inner = stride / M;
  for (int d = 0; d < M; ++d) additive_rec(a + d * inner, t, axis + 1, rank, M, inner, acc + row[d]);
}

void separable_rec(cplx* a, const std::vector<std::vector<cplx>>& t, int axis, int rank, int M,
                   std::size_t stride, cplx acc) {
  const auto& row = t[axis];
  if (axis == rank - 1) {
    for (int d = 0; d < M; ++d) a[d] *= acc * row[d];
    return;
  }
  std::size_t inner = stride / M;
  for (int d = 0; d < M; ++d) separable_rec(a + d * inner, t, axis + 1, rank, M, inner, acc * row[d]);
}

}  // namespace

void Spectral::multiply_additive(CVec& a, const std::vector<std::vector<double>>& table) const {
  if (static_cast<int>(table.size()) != rank_) throw InputError("multiply_additive: table rank mismatch");
  additive_rec(a.data(), table, 0, rank_, grid_.points, size_, 0.0);
}

void Spectral::multiply_separable(CVec& a, const std::vector<std::vector<cplx>>& table) const {
  if (static_cast<int>(table.size()) != rank_) throw InputError("multiply_separable: table rank mismatch");
  separable_rec(a.data(), table, 0, rank_, grid_.points, size_, cplx(1.0, 0.0));
}

std::vector<std::vector<double>> Spectral::laplacian_table(const std::vector<double>& slot_weights) const {
  if (static_cast<int>(slot_weights.size()) != slots_) throw InputError("laplacian_table: weight count mismatch");
  std::vector<std::vector<double>> t(rank_, std::vector<double>(grid_.points, 0.0));
  for (int s = 0; s < slots_; ++s)
    for (int a = 0; a < grid_.dim; ++a)
      for (int i = 0; i < grid_.points; ++i) t[s * grid_.dim + a][i] = slot_weights[s] * k2(i);
  return t;
}

CVec Spectral::apply_neg_laplacian(const CVec& a, const std::vector<double>& slot_weights) const {
  CVec b = a;
  forward(b);
  multiply_additive(b, laplacian_table(slot_weights));
  backward(b);
  return b;
}

CVec Spectral::derivative(const CVec& a, int axis) const {
  std::vector<std::vector<cplx>> t(rank_, std::vector<cplx>(grid_.points, cplx(1.0, 0.0)));
  for (int i = 0; i < grid_.points; ++i) {
    int k = grid_.wavenumber(i);
    t[axis][i] = (2 * i == grid_.points) ? cplx(0.0, 0.0) : cplx(0.0, 2.0 * kPi * k);
  }
  CVec b = a;
  forward(b);
  multiply_separable(b, t);
  backward(b);
  return b;
}

}  // namespace gplab
