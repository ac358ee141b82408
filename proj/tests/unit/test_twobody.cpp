#include <cmath>
#include <vector>

#include "doctest.h"
#include "gplab/error.hpp"
#include "gplab/twobody.hpp"

using namespace gplab;
using namespace gplab::twobody;

namespace {

// Second-order Born oracle: a = lam b/(8 pi) - lam^2/(64 pi^2) int V Phi, Phi = V * 1/|x|.
double born_second_order(const RadialPotential& unit, double lam) {
  const int n = 20000;
  const double R = unit.support_radius(), h = R / n;
  std::vector<double> inner(n + 1, 0.0), outer(n + 1, 0.0);
  for (int i = 1; i <= n; ++i) {
    double r0 = (i - 1) * h, r1 = i * h;
    inner[i] = inner[i - 1] + 0.5 * h * (unit(r0) * r0 * r0 + unit(r1) * r1 * r1);
  }
  for (int i = n - 1; i >= 0; --i) {
    double r0 = i * h, r1 = (i + 1) * h;
    outer[i] = outer[i + 1] + 0.5 * h * (unit(r0) * r0 + unit(r1) * r1);
  }
  double b = 0.0, vphi = 0.0;
  for (int i = 0; i <= n; ++i) {
    double r = i * h, wt = (i == 0 || i == n) ? 0.5 : 1.0;
    double phi = 4.0 * kPi * ((r > 0 ? inner[i] / r : 0.0) + outer[i]);
    b += wt * 4.0 * kPi * unit(r) * r * r * h;
    vphi += wt * 4.0 * kPi * unit(r) * phi * r * r * h;
  }
  return lam * b / (8.0 * kPi) - lam * lam * vphi / (64.0 * kPi * kPi);
}

// k kappa cos(k(kappa-a)) - sin(k(kappa-a)) by a fine scan plus secant.
double k_oracle(double a, double kappa) {
  auto f = [&](double k) { return k * kappa * std::cos(k * (kappa - a)) - std::sin(k * (kappa - a)); };
  const double top = 0.5 * kPi / (kappa - a);
  double prev = top * 1e-4, fp = f(prev);
  for (int i = 2; i <= 100000; ++i) {
    double k = top * i * 1e-5;
    double fk = f(k);
    if ((fk > 0) != (fp > 0)) {
      double x0 = prev, x1 = k;
      for (int it = 0; it < 60 && x1 != x0; ++it) {
        double f0 = f(x0), f1 = f(x1);
        if (f1 == f0) break;
        double x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
        x0 = x1;
        x1 = x2;
      }
      return x1;
    }
    prev = k;
    fp = fk;
  }
  return NAN;
}

}  // namespace

TEST_CASE("potential presets and validation") {
  auto v = RadialPotential::bump(1.0, 3.0);
  CHECK(v(0.0) == doctest::Approx(3.0));
  CHECK(v(1.0) == 0.0);
  CHECK(v(2.5) == 0.0);
  CHECK(v.varrho() == doctest::Approx((v.sup_norm() + v.born_constant()) / (8 * kPi)));
  CHECK(RadialPotential::zero(1.0).is_zero());
  CHECK_THROWS_AS(RadialPotential([](double) { return -1.0; }, 1.0, 1.0, "neg"), InputError);
  CHECK_THROWS_AS(RadialPotential([](double r) { return r < 0.5 ? 1.0 : 0.0; }, 1.0, 1.0, "step"), InputError);
  auto s = RadialPotential::shell(1.0, 2.0);
  CHECK(s(0.0) == 0.0);
  CHECK(s(0.5) == doctest::Approx(2.0));
}

TEST_CASE("scaled potential keeps the 3D integral identity") {
  auto v = RadialPotential::polynomial(1.0, 5.0);
  auto va = v.scaled(8.0);
  CHECK(va.support_radius() == doctest::Approx(1.0 / 8));
  CHECK(va.integral(3) == doctest::Approx(v.integral(3) / 8).epsilon(1e-9));
  CHECK(va.base_varrho() == doctest::Approx(v.varrho()));
  auto v1 = v.scaled(8.0, 1);
  CHECK(v1.integral(1) == doctest::Approx(v.integral(1)).epsilon(1e-9));
}

TEST_CASE("samples round trip") {
  std::vector<double> r, y;
  for (int i = 0; i <= 400; ++i) {
    r.push_back(i / 400.0);
    y.push_back(2.0 * std::exp(1.0) * bump(i / 400.0));
  }
  auto v = RadialPotential::from_samples(r, y);
  auto ref = RadialPotential::bump(1.0, 2.0);
  for (double x : {0.0, 0.3, 0.77, 0.95}) CHECK(v(x) == doctest::Approx(ref(x)).epsilon(1e-5).scale(1.0));
  y[10] = -1.0;
  CHECK_THROWS_AS(RadialPotential::from_samples(r, y), InputError);
}

TEST_CASE("zero energy: free equation") {
  auto z = solve_zero_energy(RadialPotential::zero(1.0), 2.0, 1e-3);
  CHECK(z.scattering_length == 0.0);
  for (std::size_t i = 0; i < z.radius.size(); i += 97) CHECK(z.m[i] == doctest::Approx(z.radius[i]).epsilon(1e-14));
}

TEST_CASE("zero energy: preconditions") {
  auto v = RadialPotential::bump(1.0, 1.0);
  CHECK_THROWS_AS(solve_zero_energy(v, 0.9, 1e-3), InputError);
  CHECK_THROWS_AS(solve_zero_energy(v, 2.0, 0.1), InputError);
}

TEST_CASE("zero energy: Born series oracle at weak coupling") {
  auto unit = RadialPotential::bump(1.0, 1.0);
  double prev_gap = 1.0;
  for (double lam : {0.4, 0.2, 0.1, 0.05}) {
    auto v = RadialPotential::bump(1.0, lam);
    double a = solve_zero_energy(v, 3.0, 1e-3).scattering_length;
    double first = v.born_constant() / (8 * kPi);
    double ratio = a / first;
    CHECK(ratio < 1.0);
    CHECK(1.0 - ratio < prev_gap);
    prev_gap = 1.0 - ratio;
    // Remainder beyond second order is O(lam^3).
    double second = born_second_order(unit, lam);
    CHECK(std::abs(a - second) < 0.1 * std::abs(second - first));
  }
}

TEST_CASE("zero energy: identity, Born bound and asymptote") {
  for (auto v : {RadialPotential::bump(1.0, 30.0), RadialPotential::polynomial(1.0, 8.0),
                 RadialPotential::shell(1.0, 50.0)}) {
    auto z = solve_zero_energy(v, 3.0, 1e-3);
    CHECK(z.identity_defect / (8 * kPi * z.scattering_length) < 1e-4);
    CHECK(z.scattering_length <= v.born_constant() / (8 * kPi));
    CHECK(z.scattering_length < v.support_radius());
    CHECK(z.asymptote_spread < 1e-9);
    for (std::size_t i = 1; i < z.m.size(); ++i) REQUIRE(z.m[i] > 0.0);
  }
}

TEST_CASE("Neumann: zero potential") {
  auto m = solve_neumann(RadialPotential::zero(1.0), 3.0, 1e-8);
  CHECK(m.eigenvalue == 0.0);
  for (double w : m.w_kappa) CHECK(w == doctest::Approx(0.0));
  CHECK_THROWS_AS(solve_neumann(RadialPotential::zero(1.0), 0.5, 1e-8), InputError);
}

TEST_CASE("Neumann: small a/kappa and the k-equation oracle") {
  auto v = RadialPotential::bump(1.0, 10.0);
  NeumannFamily fam(v, 3);
  const double a = fam.scattering_length();
  CHECK(a == doctest::Approx(solve_zero_energy(v, 3.0, 1e-3).scattering_length).epsilon(1e-9));
  for (double rat : {0.1, 0.03, 0.01}) {
    const double kappa = a / rat;
    const double e = fam.eigenvalue(kappa);
    const double k = k_oracle(a, kappa);
    CHECK(trial_wavenumber(a, kappa) == doctest::Approx(k).epsilon(1e-10));
    const double base = 3 * a / (kappa * kappa * kappa);
    CHECK(std::abs(k * k / base - 1.0) < 5.0 * v.support_radius() / kappa);
    CHECK(std::abs(e / (k * k) - 1.0) < v.support_radius() / kappa);
    if (rat == 0.01) CHECK(std::abs(e / base - 1.0) < 0.05);
  }
}

TEST_CASE("Neumann: mode shape and boundary condition") {
  auto v = RadialPotential::polynomial(1.0, 20.0);
  NeumannFamily fam(v, 3);
  const double kappa = 6.0, e = fam.eigenvalue(kappa);
  auto end = fam.mode(kappa, e, kappa * (1 - 1e-12));
  CHECK(end.phi == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(std::abs(end.dphi) < 1e-8);
  auto mode = solve_neumann(v, kappa, 1e-8);
  CHECK(mode.phi_floor > 0.0);
  for (double w : mode.w_kappa) {
    CHECK(w >= -1e-12);
    CHECK(1.0 - w >= mode.phi_floor - 1e-15);
  }
  // Derivatives against finite differences of phi.
  for (double r : {0.2, 0.7, 1.3, 4.0}) {
    const double d = 1e-4;
    auto p = fam.mode(kappa, e, r), pl = fam.mode(kappa, e, r - d), pr = fam.mode(kappa, e, r + d);
    CHECK(p.dphi == doctest::Approx((pr.phi - pl.phi) / (2 * d)).epsilon(1e-5).scale(1e-3));
    CHECK(p.d2phi == doctest::Approx((pr.phi - 2 * p.phi + pl.phi) / (d * d)).epsilon(1e-4).scale(1e-2));
  }
}

TEST_CASE("Neumann: gradient bound constant is family independent") {
  auto v = RadialPotential::bump(1.0, 10.0);
  NeumannFamily fam(v, 3);
  double c1 = mode_gradient_constant(fam, {3.0, 5.0});
  double c2 = mode_gradient_constant(fam, {10.0, 20.0, 40.0});
  CHECK(c1 > 0.0);
  CHECK(c2 < 2.0 * c1);
}

TEST_CASE("softening: zero potential") {
  SofteningProfile p(RadialPotential::zero(0.001), 0.05);
  for (double w : p.w_values()) CHECK(w == 0.0);
  for (double q : p.q_values()) CHECK(q == 0.0);
  CHECK(p.l1_norm_q() == 0.0);
  auto rep = audit_w_q_bounds(p, 0.0);
  for (const auto& e : rep.entries) CHECK(e.fitted_c == 0.0);
}

TEST_CASE("softening: invariants") {
  auto base = RadialPotential::bump(1.0, 20.0);
  const double a0 = solve_zero_energy(base, 3.0, 1e-3).scattering_length;
  const double ell1 = 0.05, a = 0.03 * ell1;
  SofteningProfile::Options opt;
  opt.n_radial = 2048;
  SofteningProfile p(base.scaled(a0 / a), ell1, opt);
  CHECK(p.scattering_length() == doctest::Approx(a).epsilon(1e-8));
  CHECK(p.c0() > 0.0);
  for (std::size_t i = 0; i < p.radius().size(); ++i) {
    CHECK(p.w_values()[i] >= -1e-14);
    CHECK(p.w_values()[i] <= 1.0 - p.c0() + 1e-15);
    CHECK(p.q_values()[i] >= 0.0);
  }
  CHECK(p.w_values().back() == 0.0);
  CHECK(p.evaluate(1.5 * ell1 + 1e-9).q == 0.0);
  CHECK(p.interpolate(2 * ell1).w == 0.0);

  // Density normalization.
  auto gq = gauss_legendre(64, p.density().lo(), p.density().hi());
  double mass = 0.0;
  for (int j = 0; j < 64; ++j) mass += gq.weights[j] * p.density()(gq.nodes[j]);
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-8));

  // Direct evaluation against the table interpolants and finite differences.
  for (double r : {0.0007, 0.013, 0.031, 0.06}) {
    auto d = p.evaluate(r), t = p.interpolate(r);
    CHECK(t.w == doctest::Approx(d.w).epsilon(1e-6).scale(1e-3));
    CHECK(t.q == doctest::Approx(d.q).epsilon(1e-4).scale(1.0));
    CHECK(t.d2w == doctest::Approx(d.d2w).epsilon(1e-3).scale(std::abs(d.d2w) + 1.0));
    const double s = 1e-6;
    auto l = p.evaluate(r - s), rr = p.evaluate(r + s);
    CHECK(d.dw == doctest::Approx((rr.w - l.w) / (2 * s)).epsilon(1e-5).scale(1.0));
    CHECK(d.dq == doctest::Approx((rr.q - l.q) / (2 * s)).epsilon(1e-4).scale(10.0));
  }
  CHECK(p.eigenvalue(0.04) == doctest::Approx(p.family().eigenvalue(0.04)).epsilon(1e-10));
}

TEST_CASE("softening: residual of the Neumann identity falls with the grid step squared") {
  auto base = RadialPotential::bump(1.0, 20.0);
  const double a0 = solve_zero_energy(base, 3.0, 1e-3).scattering_length;
  const double ell1 = 0.05, a = 0.1 * ell1;
  auto v = base.scaled(a0 / a);
  double res[2];
  int i = 0;
  for (int n : {1024, 2048}) {
    SofteningProfile::Options opt;
    opt.n_radial = n;
    SofteningProfile p(v, ell1, opt);
    res[i++] = p.neumann_residual() / p.residual_scale();
  }
  CHECK(res[0] / res[1] == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("softening: one-dimensional profile solves the same identity") {
  auto base = RadialPotential::bump(1.0, 5.0);
  SofteningProfile::Options opt;
  opt.dim = 1;
  opt.n_radial = 2048;
  SofteningProfile p(base.scaled(40.0, 1), 0.1, opt);
  CHECK(p.c0() > 0.0);
  CHECK(p.l1_norm_q() > 0.0);
  CHECK(p.neumann_residual() / p.residual_scale() < 1e-3);
}

TEST_CASE("softening: mass approaches 4 pi a and bound constants stay stable") {
  auto base = RadialPotential::bump(1.0, 20.0);
  const double a0 = solve_zero_energy(base, 3.0, 1e-3).scattering_length;
  const double ell1 = 0.05;
  std::vector<BoundReport> seq;
  double prev = INFINITY;
  for (double rat : {0.1, 0.03, 0.01}) {
    const double a = rat * ell1;
    SofteningProfile p(base.scaled(a0 / a), ell1);
    double dev = std::abs(p.l1_norm_q() / (4 * kPi * a) - 1.0);
    CHECK(dev < prev);
    prev = dev;
    seq.push_back(audit_w_q_bounds(p, a));
  }
  CHECK(prev <= 0.05);
  for (const auto& e : seq.front().entries) {
    double lo = INFINITY, hi = 0.0;
    for (const auto& r : seq) {
      lo = std::min(lo, r.at(e.id).fitted_c);
      hi = std::max(hi, r.at(e.id).fitted_c);
    }
    CHECK_MESSAGE(hi <= 2.0 * lo, e.id);
  }
  CHECK(unsaturated_bounds(seq).empty());
}

TEST_CASE("unsaturated bound detection") {
  auto mk = [](double c) {
    BoundReport r;
    r.entries = {{"grow", c, 0.0}, {"flat", 1.0, 0.0}};
    return r;
  };
  auto ids = unsaturated_bounds({mk(1.0), mk(2.0), mk(5.0)});
  REQUIRE(ids.size() == 1);
  CHECK(ids[0] == "grow");
  CHECK(unsaturated_bounds({mk(1.0), mk(1.5), mk(1.9)}).empty());
  CHECK_THROWS_AS(mk(1.0).at("missing"), InputError);
}
