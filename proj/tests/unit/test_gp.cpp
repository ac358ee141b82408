#include <cmath>
#include <random>

#include "doctest.h"
#include "gplab/error.hpp"
#include "gplab/gp.hpp"

using namespace gplab;
using namespace gplab::gp;

namespace {

WaveField random_band_limited(const TorusGrid& g, int kmax, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  Spectral fft(g, 1);
  CVec hat(g.size(), 0.0);
  for (std::size_t f = 0; f < g.size(); ++f) {
    bool in = true;
    for (int a = 0; a < g.dim; ++a) in = in && std::abs(g.wavenumber(axis_digit(f, a, g.dim, g.points))) <= kmax;
    if (in) hat[f] = cplx(n01(rng), n01(rng));
  }
  fft.backward(hat);
  WaveField u{g, hat, 0.0};
  double m = std::sqrt(mass(u));
  for (auto& z : u.values) z /= m;
  return u;
}

}  // namespace

TEST_CASE("mass and Parseval") {
  auto g = TorusGrid::make(1, 64);
  CHECK(mass(constant_field(g, 1.0)) == doctest::Approx(1.0));
  CHECK(mass(plane_wave(g, {3, 0, 0}, 1.0)) == doctest::Approx(1.0));
  auto g3 = TorusGrid::make(3, 16);
  auto u = random_band_limited(g3, 4, 7);
  CVec hat = u.values;
  Spectral(g3, 1).forward(hat);
  double parseval = 0.0;
  for (auto& z : hat) parseval += std::norm(z);
  parseval /= static_cast<double>(g3.size()) * static_cast<double>(g3.size());
  CHECK(std::abs(parseval - mass(u)) < 1e-12);
}

TEST_CASE("energy closed forms") {
  auto g = TorusGrid::make(3, 16);
  const double sigma = 2.5, A = 0.7;
  CHECK(gp_energy(constant_field(g, A), sigma) == doctest::Approx(0.5 * sigma * std::pow(A, 4)));
  auto pw = plane_wave(g, {1, -2, 3}, A);
  double k2 = 4 * kPi * kPi * 14;
  CHECK(gp_energy(pw, sigma) == doctest::Approx(k2 * A * A + 0.5 * sigma * std::pow(A, 4)).epsilon(1e-12));
}

TEST_CASE("free plane wave is exact") {
  auto g = TorusGrid::make(1, 64);
  auto u0 = plane_wave(g, {5, 0, 0}, 1.0);
  auto tr = evolve_gp(u0, {0.0, 1e-3, 0.1});
  auto ex = u0;
  const double w = std::pow(2 * kPi * 5, 2);
  for (auto& z : ex.values) z *= std::polar(1.0, -w * 0.1);
  CHECK(sup_distance(tr.snapshots.back().values, ex.values) < 1e-11);
}

TEST_CASE("constant data follows the reduced phase equation") {
  auto g = TorusGrid::make(1, 32);
  const double sigma = 3.0;
  const cplx A(0.6, 0.2);
  auto tr = evolve_gp(constant_field(g, A), {sigma, 1e-3, 0.5});
  cplx ex = A * std::polar(1.0, -sigma * std::norm(A) * 0.5);
  for (auto& z : tr.snapshots.back().values) CHECK(std::abs(z - ex) < 1e-12);
}

TEST_CASE("plane-wave dispersion by phase fit") {
  auto g = TorusGrid::make(1, 64);
  const double sigma = 4.0, A = 0.9, dt = 1e-3;
  auto u0 = plane_wave(g, {2, 0, 0}, A);
  GPParams p{sigma, dt, 0.1};
  p.snapshot_stride = 1;
  auto tr = evolve_gp(u0, p);
  REQUIRE(tr.snapshots.size() == 101);
  // Least-squares slope of the unwrapped phase at x = 0.
  double st = 0, sp = 0, stt = 0, stp = 0, prev = 0, unwrap = 0;
  for (std::size_t s = 0; s < tr.snapshots.size(); ++s) {
    double ph = std::arg(tr.snapshots[s].values[0] / u0.values[0]);
    if (s > 0) {
      double d = ph - prev;
      d -= 2 * kPi * std::round(d / (2 * kPi));
      unwrap += d;
    }
    prev = ph;
    double t = tr.snapshots[s].time;
    st += t;
    sp += unwrap;
    stt += t * t;
    stp += t * unwrap;
  }
  const double n = static_cast<double>(tr.snapshots.size());
  const double slope = (n * stp - st * sp) / (n * stt - st * st);
  const double omega = std::pow(4 * kPi, 2) + sigma * A * A;
  CHECK(std::abs(-slope / omega - 1.0) < 1e-8);
}

TEST_CASE("conservation, reversibility and order") {
  auto g = TorusGrid::make(1, 64);
  auto u0 = smooth_field(g, 0.01);
  const double sigma = 8.0;
  auto tr = evolve_gp(u0, {sigma, 1e-3, 1.0});
  CHECK(tr.max_mass_step_drift <= 1e-10);
  const double e0 = gp_energy(u0, sigma);
  CHECK(std::abs(gp_energy(tr.snapshots.back(), sigma) - e0) / e0 <= 1e-6);

  CVec back = tr.snapshots.back().values;
  GPPropagator rev(g, sigma, -1e-3);
  for (int s = 0; s < 1000; ++s) rev.step(back);
  CHECK(sup_distance(back, u0.values) < 1e-8);

  const double T = 0.2;
  auto rough = smooth_field(g, 0.3);
  auto ref = evolve_gp(rough, {sigma, 1e-3 / 8, T}).snapshots.back().values;
  double e1 = sup_distance(evolve_gp(rough, {sigma, 2e-3, T}).snapshots.back().values, ref);
  double e2 = sup_distance(evolve_gp(rough, {sigma, 1e-3, T}).snapshots.back().values, ref);
  CHECK(std::log2(e1 / e2) == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("energy drift shrinks fourfold under dt halving") {
  auto g = TorusGrid::make(1, 64);
  auto u0 = smooth_field(g, 0.5);
  const double sigma = 20.0, e0 = gp_energy(u0, sigma);
  double d1 = std::abs(gp_energy(evolve_gp(u0, {sigma, 4e-3, 0.4}).snapshots.back(), sigma) - e0);
  double d2 = std::abs(gp_energy(evolve_gp(u0, {sigma, 2e-3, 0.4}).snapshots.back(), sigma) - e0);
  CHECK(d1 / d2 == doctest::Approx(4.0).epsilon(0.2));
}

TEST_CASE("three-dimensional run and snapshots") {
  auto g = TorusGrid::make(3, 16);
  auto u0 = smooth_field(g);
  GPParams p{5.0, 1e-3, 0.05};
  p.snapshot_times = {0.0104, 0.02};
  auto tr = evolve_gp(u0, p);
  REQUIRE(tr.snapshots.size() == 4);
  CHECK(tr.snapshots[1].time == doctest::Approx(0.010));
  CHECK(std::abs(mass(tr.snapshots.back()) - 1.0) < 1e-12);
}

TEST_CASE("dealiasing and errors") {
  auto g = TorusGrid::make(1, 32);
  auto u0 = plane_wave(g, {12, 0, 0}, 1.0);
  GPParams p{0.0, 1e-3, 0.01};
  p.dealias = true;
  CHECK(mass(evolve_gp(u0, p).snapshots.back()) < 1e-20);
  CHECK_THROWS_AS(evolve_gp(u0, {0.0, -1.0, 1.0}), InputError);
  auto big = constant_field(g, 1e200);
  CHECK_THROWS_AS(evolve_gp(big, {1e10, 1e-3, 0.01}), NumericalError);
}
