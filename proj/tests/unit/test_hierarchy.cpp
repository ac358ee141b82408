#include <cmath>
#include <random>

#include "doctest.h"
#include "gplab/error.hpp"
#include "gplab/hierarchy.hpp"

using namespace gplab;
using namespace gplab::hierarchy;

namespace {

CVec random_two_slot(const TorusGrid& g, int kmax, unsigned seed) {
  Spectral fft(g, 2);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  CVec hat(fft.size(), 0.0);
  for (std::size_t i = 0; i < hat.size(); ++i) {
    int a = g.wavenumber(axis_digit(i, 0, 2, g.points)), b = g.wavenumber(axis_digit(i, 1, 2, g.points));
    if (std::abs(a) <= kmax && std::abs(b) <= kmax) hat[i] = cplx(n01(rng), n01(rng));
  }
  fft.backward(hat);
  double n = 0.0;
  for (auto& z : hat) n += std::norm(z);
  n = std::sqrt(n * g.cell_volume() * g.cell_volume());
  for (auto& z : hat) z /= n;
  return hat;
}

// Convex mixture of product states of distinct normalized fields.
DensityMatrix mixture(const TorusGrid& g, int k, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  CVec acc(ipow(g.size(), 2 * k), 0.0);
  double wsum = 0.0;
  for (int m = 0; m < 3; ++m) {
    auto u = gp::smooth_field(g, 0.2 + 0.3 * m);
    for (std::size_t i = 0; i < u.values.size(); ++i) u.values[i] *= std::polar(1.0, 2 * kPi * m * U(rng));
    double w = U(rng);
    auto p = product_state(u, k);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += w * p.kernel()[i];
    wsum += w;
  }
  for (auto& z : acc) z /= wsum;
  return DensityMatrix(g, k, std::move(acc));
}

}  // namespace

TEST_CASE("product states") {
  auto g = TorusGrid::make(1, 16);
  auto one = product_state(gp::constant_field(g, 1.0), 1);
  for (const auto& z : one.kernel()) CHECK(std::abs(z - 1.0) < 1e-15);
  CHECK(one.trace() == doctest::Approx(1.0));
  auto u = gp::smooth_field(TorusGrid::make(1, 8));
  auto p3 = product_state(u, 3);
  CHECK(std::abs(p3.trace() - 1.0) < 1e-10);
  CHECK(std::abs(p3.purity() - 1.0) < 1e-10);
  CHECK(p3.symmetry_defect() < 1e-14);
  CHECK(p3.hermiticity_defect() < 1e-15);
  CHECK(p3.positivity_floor(8, 1) >= -1e-10);
  auto bad = u;
  bad.values[0] *= 2.0;
  CHECK_THROWS_AS(product_state(bad, 1), InputError);
}

TEST_CASE("storage cap") {
  auto g = TorusGrid::make(1, 64);
  CHECK(dense_fits(g, 2));
  CHECK_FALSE(dense_fits(g, 3));
  auto p = product_state(gp::smooth_field(g), 3);
  CHECK_FALSE(p.has_dense());
  CHECK(p.has_factor());
  CHECK_THROWS_AS(p.kernel(), InputError);
  CHECK(std::abs(p.trace() - 1.0) < 1e-10);
  CHECK(p.positivity_floor(4, 2) >= 0.0);
}

TEST_CASE("partial trace") {
  auto g = TorusGrid::make(1, 16);
  auto u = gp::smooth_field(g);
  auto p1 = partial_trace(product_state(u, 2));
  auto r1 = product_state(u, 1);
  for (std::size_t i = 0; i < p1.kernel().size(); ++i) CHECK(std::abs(p1.kernel()[i] - r1.kernel()[i]) < 1e-12);
  auto mix = mixture(g, 3, 5);
  auto t2 = partial_trace(mix);
  CHECK(t2.trace() == doctest::Approx(mix.trace()).epsilon(1e-12));
  CHECK(t2.hermiticity_defect() < 1e-12);
  CHECK(t2.symmetry_defect() < 1e-12);
  CHECK(t2.positivity_floor(32, 3) >= -1e-10);
  CHECK(std::abs(partial_trace(t2).trace() - 1.0) < 1e-10);
  CHECK_THROWS_AS(partial_trace(r1), InputError);
}

TEST_CASE("diagonal restriction") {
  auto g = TorusGrid::make(1, 16);
  auto u = gp::smooth_field(g);
  auto p2 = product_state(u, 2);
  auto p1 = product_state(u, 1);
  auto d = diagonal_restrict(p2, 1);
  auto dp = diagonal_restrict(p2, 1, true);
  for (std::size_t x = 0; x < 16; ++x)
    for (std::size_t y = 0; y < 16; ++y) {
      CHECK(std::abs(d[x * 16 + y] - std::norm(u.values[x]) * p1.kernel()[x * 16 + y]) < 1e-13);
      CHECK(std::abs(dp[x * 16 + y] - std::norm(u.values[y]) * p1.kernel()[x * 16 + y]) < 1e-13);
    }
  CHECK_THROWS_AS(diagonal_restrict(p2, 2), InputError);
  CHECK_THROWS_AS(diagonal_restrict(p1, 1), InputError);

  // Sharp limit: scale below the spacing is the grid delta; factor and dense routes agree.
  auto m0 = diagonal_restrict_mollified(p2, 1, 0.0, 0.0);
  for (std::size_t i = 0; i < d.size(); ++i) CHECK(std::abs(m0[i] - d[i]) < 1e-12);
  auto g64 = TorusGrid::make(1, 64);
  auto v = gp::smooth_field(g64);
  auto dense = product_state(v, 2);
  CHECK(dense.has_dense());
  auto a = diagonal_restrict_mollified(dense, 1, 0.1, 0.05, true);
  CHECK(a.size() == 64 * 64);
  auto shp = diagonal_restrict(dense, 1, true);
  double prev = INFINITY;
  for (double r : {0.2, 0.1, 0.05}) {
    auto m = diagonal_restrict_mollified(dense, 1, r, r, true);
    double e = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) e = std::max(e, std::abs(m[i] - shp[i]));
    CHECK(e < prev);
    prev = e;
  }
  // Factor route equals the dense route on the k = 1 restriction of a product.
  auto fac2 = DensityMatrix::factor_only(v.values, g64, 2);
  CHECK_FALSE(fac2.has_dense());
  auto c = diagonal_restrict_mollified(fac2, 1, 0.1, 0.05, true);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - c[i]) < 1e-12);
}

TEST_CASE("strong residual: trivial and free cases") {
  auto g = TorusGrid::make(1, 32);
  gp::GPParams p{0.0, 1e-3, 0.01};
  p.snapshot_stride = 1;
  auto tr = gp::evolve_gp(gp::constant_field(g, 1.0), p);
  auto res = hierarchy_residual_strong(factorized_source(tr.snapshots, 1), tr.snapshots.size(), 1e-3, 0.0);
  for (double r : res) CHECK(r < 1e-12);

  auto tr2 = gp::evolve_gp(gp::smooth_field(g), p);
  auto res2 = hierarchy_residual_strong(factorized_source(tr2.snapshots, 1), tr2.snapshots.size(), 1e-3, 0.0, {5});
  p.dt = 5e-4;
  auto tr3 = gp::evolve_gp(gp::smooth_field(g), p);
  auto res3 = hierarchy_residual_strong(factorized_source(tr3.snapshots, 1), tr3.snapshots.size(), 5e-4, 0.0, {10});
  CHECK(res2[0] / res3[0] == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("strong residual: order two on interacting factorized data") {
  auto g = TorusGrid::make(1, 32);
  auto u0 = gp::smooth_field(g, 0.3);
  const double sigma = 8.0;
  for (int k : {1, 2}) {
    double prev = 0.0;
    for (double dt : {1e-3, 5e-4}) {
      gp::GPParams p{sigma, dt, 0.02};
      p.snapshot_stride = 1;
      auto tr = gp::evolve_gp(u0, p);
      int n = static_cast<int>(tr.snapshots.size());
      double r = hierarchy_residual_strong(factorized_source(tr.snapshots, k), n, dt, sigma, {n / 2})[0];
      if (prev > 0.0) CHECK(prev / r == doctest::Approx(4.0).epsilon(0.1));
      prev = r;
    }
  }
}

TEST_CASE("weak form") {
  auto g = TorusGrid::make(1, 32);
  auto u0 = gp::smooth_field(g, 0.3);
  const double sigma = 8.0;
  auto J = smooth_test_functional(g, 1, 3, 42);
  TestFunctional zero{g, 1, CVec(J.kernel.size(), 0.0)};
  gp::GPParams p{sigma, 1e-3, 0.02};
  p.snapshot_stride = 1;
  auto tr = gp::evolve_gp(u0, p);
  auto src = factorized_source(tr.snapshots, 1);
  const int n = static_cast<int>(tr.snapshots.size());
  CHECK(weak_form_check(zero, src, n, 1e-3, sigma, 0.05, 0.05) == 0.0);
  double d1 = weak_form_check(J, src, n, 1e-3, sigma, 0.05, 0.05);
  TestFunctional J3 = J;
  for (auto& z : J3.kernel) z *= 3.0;
  CHECK(weak_form_check(J3, src, n, 1e-3, sigma, 0.05, 0.05) == doctest::Approx(3.0 * d1).epsilon(1e-10));

  // Stationary plane wave u = e^{2 pi i x}: gamma constant in time and |u| = 1.
  auto pw = gp::plane_wave(g, {1, 0, 0}, 1.0);
  auto trp = gp::evolve_gp(pw, p);
  CHECK(weak_form_check(J, factorized_source(trp.snapshots, 1), n, 1e-3, sigma, 0.05, 0.05) < 1e-10);

  TestFunctional rough = J;
  rough.tag = TestFunctional::Smoothness::W1inf;
  CHECK_THROWS_AS(weak_form_check(rough, src, n, 1e-3, sigma, 0.05, 0.05), InputError);
}

TEST_CASE("mollifier rate probe") {
  auto g = TorusGrid::make(1, 128);
  auto f = random_two_slot(g, 3, 3);
  auto J = smooth_test_functional(g, 1, 2, 9);
  CHECK(mollifier_defect(f, J.kernel, g, 0.0, 0.0) < 1e-13);
  auto rep = mollifier_rate_probe(f, J, {0.2, 0.1, 0.05, 0.025}, {0.2, 0.1, 0.05, 0.025});
  CHECK(rep.slope_beta1 >= 0.9);
  CHECK(rep.slope_beta2 >= 0.45);
  CHECK(rep.floor_defect < 1e-13);
  CHECK(rep.fitted_c > 0.0);
  CHECK(loglog_slope({1, 2, 4}, {3, 12, 48}) == doctest::Approx(2.0));
}
