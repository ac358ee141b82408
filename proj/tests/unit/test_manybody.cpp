#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "doctest.h"
#include "gplab/error.hpp"
#include "gplab/gp.hpp"
#include "gplab/manybody.hpp"

using namespace gplab;
using namespace gplab::manybody;

namespace {

// Coefficients are drawn per wavenumber tuple, so the field is grid independent.
CVec random_band_limited(const TorusGrid& g, int n, int kmax, unsigned seed) {
  Spectral fft(g, n);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  const int side = 2 * kmax + 1, rank = fft.rank();
  CVec hat(fft.size(), 0.0);
  for (std::size_t t = 0; t < ipow(side, rank); ++t) {
    std::size_t rem = t, flat = 0;
    for (int a = 0; a < rank; ++a) {
      int k = static_cast<int>(rem % side) - kmax;
      rem /= side;
      flat = flat * g.points + static_cast<std::size_t>((k + g.points) % g.points);
    }
    const double re = n01(rng), im = n01(rng);
    hat[flat] = cplx(re, im);
  }
  fft.backward(hat);
  return hat;
}

ManyBodyState random_state(const TorusGrid& g, int n, int kmax, unsigned seed) {
  ManyBodyState s{g, n, random_band_limited(g, n, kmax, seed), 0.0};
  return symmetrize(s);
}

cplx inner(const CVec& a, const CVec& b, double cv) {
  cplx s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s * cv;
}

// Dense H on grid^2 in d = 1 with the kinetic matrix summed directly over wavenumbers.
Eigen::MatrixXcd dense_hamiltonian(const TorusGrid& g, const ScaledPotential& v) {
  const int M = g.points, D = M * M;
  Eigen::MatrixXcd K(M, M);
  for (int x = 0; x < M; ++x)
    for (int y = 0; y < M; ++y) {
      cplx a = 0.0;
      for (int k = -M / 2; k < M / 2; ++k) a += std::pow(2 * kPi * k, 2) * std::polar(1.0, 2 * kPi * k * (x - y) / M);
      K(x, y) = a / double(M);
    }
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(D, D);
  for (int a = 0; a < M; ++a)
    for (int b = 0; b < M; ++b) {
      for (int c = 0; c < M; ++c) {
        H(a * M + b, c * M + b) += K(a, c);
        H(a * M + b, a * M + c) += K(b, c);
      }
      H(a * M + b, a * M + b) += v.diagonal()[a * M + b];
    }
  return H;
}

}  // namespace

TEST_CASE("states, symmetrization and caps") {
  auto g = TorusGrid::make(1, 16);
  auto u = gp::plane_wave(g, {1, 0, 0}, 1.0).values, w = gp::plane_wave(g, {2, 0, 0}, 1.0).values;
  auto p = product_state(u, g, 2);
  CHECK(norm2(p) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(symmetry_defect(p) < 1e-14);
  CHECK(symmetry_defect(symmetrize(p)) < 1e-14);
  auto t = tensor_state({u, w}, g);
  CHECK(symmetry_defect(t) > 0.5);
  auto s = symmetrize(t);
  CHECK(symmetry_defect(s) < 1e-14);
  CHECK(norm2(s) == doctest::Approx(1.0).epsilon(1e-12));
  // (u x w + w x u) / sqrt 2 for orthonormal u, w.
  for (std::size_t i = 0; i < s.psi.size(); i += 37)
    CHECK(std::abs(s.psi[i] - (t.psi[i] + permute_slots(t.psi, g, 2, {1, 0})[i]) / std::sqrt(2.0)) < 1e-12);
  ManyBodyState anti{g, 2, t.psi, 0.0};
  auto sw = permute_slots(t.psi, g, 2, {1, 0});
  for (std::size_t i = 0; i < anti.psi.size(); ++i) anti.psi[i] -= sw[i];
  CHECK_THROWS_AS(symmetrize(anti), InputError);

  CHECK(fits(TorusGrid::make(3, 16), 2));
  CHECK(fits(TorusGrid::make(1, 64), 3));
  CHECK_FALSE(fits(TorusGrid::make(3, 32), 2));
  CHECK_FALSE(fits(TorusGrid::make(1, 16), 4));
  CHECK_THROWS_AS(product_state(CVec(TorusGrid::make(3, 32).size(), 1.0), TorusGrid::make(3, 32), 2), InputError);
}

TEST_CASE("scaled potential") {
  auto base = twobody::RadialPotential::bump(0.9, 3.0);
  auto g1 = TorusGrid::make(1, 64);
  ScaledPotential v1(base, g1, 2);
  CHECK(v1.support() == doctest::Approx(0.45));
  CHECK(v1.pair(0.1) == doctest::Approx(2 * base(0.2)));
  // 1D convention N V(N x) keeps the integral N independent.
  ScaledPotential v3(base, g1, 3);
  CHECK(v1.grid_integral() == doctest::Approx(base.integral(1)).epsilon(1e-6));
  CHECK(v3.grid_integral() == doctest::Approx(base.integral(1)).epsilon(1e-6));
  CHECK_THROWS_AS(ScaledPotential(twobody::RadialPotential::bump(1.2, 1.0), g1, 2), InputError);

  auto g3 = TorusGrid::make(3, 16);
  auto b3 = twobody::RadialPotential::bump(0.8, 1.0);
  ScaledPotential w(b3, g3, 2);
  CHECK(w.pair(0.1) == doctest::Approx(4 * b3(0.2)));
  CHECK(w.grid_integral() == doctest::Approx(b3.integral(3) / 2).epsilon(2e-3));

  // Diagonal is symmetric and uses minimum-image distances.
  const auto& d = v3.diagonal();
  const std::size_t G = g1.size();
  CHECK(d[(0 * G + 1) * G + 63] == doctest::Approx(v3.pair(1.0 / 64) * 2 + v3.pair(2.0 / 64)));
  CHECK(d[(5 * G + 9) * G + 2] == doctest::Approx(d[(9 * G + 2) * G + 5]));
}

TEST_CASE("hamiltonian: eigenvectors, N = 1 and hermiticity") {
  auto g = TorusGrid::make(1, 32);
  auto zero = ScaledPotential(twobody::RadialPotential::zero(0.5), g, 2);
  auto t = tensor_state({gp::plane_wave(g, {1, 0, 0}, 1.0).values, gp::plane_wave(g, {-3, 0, 0}, 1.0).values}, g);
  const double e = std::pow(2 * kPi, 2) * (1 + 9);
  auto h = apply_hamiltonian(t, zero);
  double d = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) d = std::max(d, std::abs(h[i] - e * t.psi[i]));
  CHECK(d < 1e-9 * e);
  auto m = energy_moments(t, zero);
  CHECK(m.h1 == doctest::Approx(e).epsilon(1e-12));
  CHECK(m.h2 == doctest::Approx(e * e).epsilon(1e-12));

  ScaledPotential one(twobody::RadialPotential::bump(0.4, 2.0), g, 1);
  ManyBodyState s1{g, 1, gp::smooth_field(g, 0.3).values, 0.0};
  auto h1 = apply_hamiltonian(s1, one);
  auto lap = Spectral(g, 1).apply_neg_laplacian(s1.psi, {1.0});
  for (std::size_t i = 0; i < lap.size(); ++i) CHECK(std::abs(h1[i] - lap[i]) < 1e-12 * (1 + std::abs(lap[i])));

  auto gg = TorusGrid::make(1, 16);
  ScaledPotential v3(twobody::RadialPotential::bump(0.9, 5.0), gg, 3);
  auto a = random_state(gg, 3, 5, 1), b = random_state(gg, 3, 5, 2);
  const double cv = std::pow(gg.cell_volume(), 3);
  cplx ab = inner(a.psi, apply_hamiltonian(b, v3), cv), ba = inner(b.psi, apply_hamiltonian(a, v3), cv);
  CHECK(std::abs(ab - std::conj(ba)) < 1e-10 * std::abs(ab));
}

TEST_CASE("energy moments: variance and reality") {
  auto g = TorusGrid::make(1, 32);
  ScaledPotential v(twobody::RadialPotential::bump(0.9, 4.0), g, 2);
  for (unsigned seed = 1; seed <= 5; ++seed) {
    auto s = random_state(g, 2, 6, seed);
    auto m = energy_moments(s, v);
    CHECK(m.h2 >= m.h1 * m.h1);
    CHECK(std::abs(m.h1_imag) < 1e-10 * m.h1);
  }
  // Dense eigenvector: h2 = h1^2.
  auto H = dense_hamiltonian(g, v);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
  ManyBodyState s{g, 2, CVec(H.rows()), 0.0};
  for (int i = 0; i < H.rows(); ++i) s.psi[i] = es.eigenvectors()(i, 0) * double(g.points);
  auto m = energy_moments(s, v);
  CHECK(m.h1 == doctest::Approx(es.eigenvalues()[0]).epsilon(1e-9));
  CHECK(m.h2 == doctest::Approx(m.h1 * m.h1).epsilon(1e-9));
}

TEST_CASE("evolution matches the dense propagator") {
  auto g = TorusGrid::make(1, 32);
  ScaledPotential v(twobody::RadialPotential::bump(0.9, 1.0), g, 2);
  auto s = product_state(gp::smooth_field(g, 0.3).values, g, 2);
  auto H = dense_hamiltonian(g, v);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
  const double T = 0.1;
  Eigen::VectorXcd p0(H.rows());
  for (int i = 0; i < H.rows(); ++i) p0[i] = s.psi[i];
  Eigen::VectorXcd c = es.eigenvectors().adjoint() * p0;
  for (int i = 0; i < H.rows(); ++i) c[i] *= std::polar(1.0, -es.eigenvalues()[i] * T);
  Eigen::VectorXcd exact = es.eigenvectors() * c;

  auto sup_err = [&](double dt) {
    auto tr = evolve_manybody(s, v, dt, T, 0);
    double e = 0.0;
    for (int i = 0; i < H.rows(); ++i) e = std::max(e, std::abs(exact[i] - tr.snapshots.back().psi[i]));
    return e;
  };
  const double e1 = sup_err(2e-4), e2 = sup_err(1e-4);
  CHECK(e2 < 1e-6);
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.1));

  auto lib = dense_reference_evolution(s, v, T);
  double d = 0.0;
  for (int i = 0; i < H.rows(); ++i) d = std::max(d, std::abs(exact[i] - lib[i]));
  CHECK(d < 1e-10);
  ManyBodyState big{TorusGrid::make(1, 128), 2, CVec(128 * 128, 0.0), 0.0};
  CHECK_THROWS_AS(dense_reference_evolution(big, ScaledPotential(twobody::RadialPotential::bump(0.9, 1.0), big.grid, 2), 0.1),
                  InputError);
}

TEST_CASE("evolution: unitarity, symmetry, reversal, commuting with symmetrization") {
  auto g = TorusGrid::make(1, 16);
  ScaledPotential v(twobody::RadialPotential::bump(0.9, 5.0), g, 3);
  auto s = random_state(g, 3, 4, 7);
  auto tr = evolve_manybody(s, v, 1e-3, 0.05, 10);
  CHECK(tr.max_norm_drift < 1e-10);
  CHECK(tr.max_symmetry_defect < 1e-10);
  CHECK(tr.snapshots.size() == 6);

  ManyBodyPropagator fwd(v, 1e-3), back(v, -1e-3);
  CVec psi = s.psi;
  for (int k = 0; k < 50; ++k) fwd.step(psi);
  for (int k = 0; k < 50; ++k) back.step(psi);
  double d = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) d = std::max(d, std::abs(psi[i] - s.psi[i]));
  CHECK(d < 1e-8);

  ManyBodyState raw{g, 3, random_band_limited(g, 3, 4, 9), 0.0};
  const double c = 1.0 / std::sqrt(norm2(raw));
  for (auto& z : raw.psi) z *= c;
  auto a = symmetrize(evolve_manybody(raw, v, 1e-3, 0.02).snapshots.back());
  auto b = evolve_manybody(symmetrize(raw), v, 1e-3, 0.02).snapshots.back();
  d = 0.0;
  for (std::size_t i = 0; i < a.psi.size(); ++i) d = std::max(d, std::abs(a.psi[i] - b.psi[i]));
  CHECK(d < 1e-10);

  CHECK_THROWS_AS(evolve_manybody(s, v, 0.0, 1.0), InputError);
}

TEST_CASE("marginals") {
  auto g = TorusGrid::make(1, 16);
  auto u = gp::smooth_field(g, 0.4).values;
  auto p = product_state(u, g, 2);
  auto g1 = marginal(p, 1);
  double d = 0.0;
  for (std::size_t x = 0; x < g.size(); ++x)
    for (std::size_t y = 0; y < g.size(); ++y) d = std::max(d, std::abs(g1(x, y) - u[x] * std::conj(u[y])));
  CHECK(d < 1e-12);

  auto s = random_state(g, 3, 5, 3);
  for (int k = 1; k <= 3; ++k) CHECK(marginal(s, k).trace() == doctest::Approx(1.0).epsilon(1e-12));
  auto m2 = marginal(s, 2), m1 = marginal(s, 1);
  auto pt = hierarchy::partial_trace(m2);
  d = 0.0;
  for (std::size_t i = 0; i < m1.kernel().size(); ++i) d = std::max(d, std::abs(pt.kernel()[i] - m1.kernel()[i]));
  CHECK(d < 1e-12);
  CHECK(m2.hermiticity_defect() < 1e-12);
  CHECK(m2.symmetry_defect() < 1e-12);
  CHECK(marginal(s, 3).purity() == doctest::Approx(1.0).epsilon(1e-10));

  // Free product data stays a rank-one projector.
  ScaledPotential zero(twobody::RadialPotential::zero(0.5), g, 2);
  auto tr = evolve_manybody(p, zero, 1e-3, 0.05, 25);
  for (const auto& st : tr.snapshots) CHECK(marginal(st, 1).purity() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("BBGKY k = 1 residual") {
  auto g = TorusGrid::make(1, 32);
  ScaledPotential v(twobody::RadialPotential::bump(0.9, 1.0), g, 2);
  auto s = product_state(gp::smooth_field(g, 0.3).values, g, 2);
  std::vector<double> res;
  for (double dt : {1e-3, 5e-4, 2.5e-4}) {
    auto tr = evolve_manybody(s, v, dt, 0.02);
    const int n = static_cast<int>(tr.snapshots.size()) - 1;
    auto r = bbgky_residual_k1(tr.snapshots, v, dt, {0, n / 2, n});
    res.push_back(r[1]);
    CHECK(r[0] < 10 * r[1]);
    CHECK(r[2] < 10 * r[1]);
  }
  CHECK(res[0] / res[1] == doctest::Approx(4.0).epsilon(0.05));
  CHECK(res[1] / res[2] == doctest::Approx(4.0).epsilon(0.05));

  auto tr = evolve_manybody(s, v, 1e-3, 0.004);
  CHECK_THROWS_AS(bbgky_residual_k1(tr.snapshots, v, 5e-4), InputError);
}

TEST_CASE("mean-field inequality probe") {
  auto g = TorusGrid::make(1, 32);
  auto zero = twobody::RadialPotential::zero(0.5);
  auto s = random_state(g, 2, 6, 11);
  auto r0 = mean_field_inequality_probe(s, zero, 0.5);
  CHECK(r0.lhs == doctest::Approx(r0.h2).epsilon(1e-12));
  CHECK(r0.admissible_c < 1.0);

  auto v = twobody::RadialPotential::bump(0.9, 20.0);
  auto r = mean_field_inequality_probe(s, v, 0.3);
  ManyBodyState s2 = s;
  for (auto& z : s2.psi) z *= 3.0;
  auto r2 = mean_field_inequality_probe(s2, v, 0.3);
  CHECK(r2.admissible_c == doctest::Approx(r.admissible_c).epsilon(1e-12));

  std::vector<double> cs;
  for (int M : {16, 32, 64}) {
    auto gm = TorusGrid::make(1, M);
    cs.push_back(mean_field_inequality_probe(random_state(gm, 2, 6, 11), v, 0.3).admissible_c);
  }
  CHECK(cs[2] == doctest::Approx(cs[1]).epsilon(0.05));
  CHECK(cs[1] > 0.0);
}
