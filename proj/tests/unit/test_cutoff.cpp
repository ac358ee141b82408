#include <cmath>
#include <vector>

#include "doctest.h"
#include "gplab/cutoff.hpp"
#include "gplab/error.hpp"
#include "gplab/twobody.hpp"

using namespace gplab;
using namespace gplab::cutoff;

namespace {

struct Setup {
  CutoffParams p;
  twobody::SofteningProfile sp;
};

Setup make_setup(double ell) {
  static const double a0 = twobody::solve_zero_energy(twobody::RadialPotential::bump(1.0, 10.0), 4.0, 1e-3).scattering_length;
  CutoffParams p;
  p.ell = ell;
  p.ell1 = ell / 20.0;
  p.a = p.ell1 / 20.0;
  p.eps = 0.09;
  p.n = 3;
  return {p, twobody::SofteningProfile(twobody::RadialPotential::bump(1.0, 10.0).scaled(a0 / p.a, 3), p.ell1)};
}

const Setup& setup() {
  static const Setup s = make_setup(0.05);
  return s;
}

Configuration config(std::vector<Vec> x) {
  Configuration c;
  c.dim = 3;
  c.x = std::move(x);
  return c;
}

// W straight from the definitions, without the library's tables.
double oracle_W(const Configuration& c, const CutoffParams& p, const twobody::SofteningProfile& sp) {
  const int n = c.size();
  auto hval = [&](int i, int j) {
    const double r = c.distance(i, j);
    return std::exp(-std::sqrt(r * r + p.ell * p.ell) / p.ell);
  };
  std::vector<double> H(n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int u = 0; u < n; ++u)
      if (u != i) H[i] += hval(i, u);
  double logW = 0.0;
  for (int i = 0; i < n; ++i) {
    double G = 1.0;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const double count = H[i] + H[j] - 2.0 * hval(i, j);
      G -= sp.interpolate(c.distance(i, j)).w * std::exp(-count / std::pow(p.ell, p.eps));
    }
    logW += 0.5 * std::log(G);
  }
  return std::exp(logW);
}

}  // namespace

TEST_CASE("theta cutoff") {
  CHECK(theta(0.5) == 1.0);
  CHECK(theta(1.0) == 1.0);
  CHECK(theta(2.0) == 0.0);
  CHECK(theta(3.0) == 0.0);
  CHECK(theta(1.5) == doctest::Approx(0.5).epsilon(1e-12));
  double prev = 1.0;
  for (int i = 1; i < 100; ++i) {
    const double t = theta(1.0 + i / 100.0);
    CHECK(t <= prev);
    CHECK(t > 0.0);
    prev = t;
  }
  // flat at both ends
  const double h = 1e-3;
  CHECK((1.0 - theta(1.0 + h)) / h < 1e-100);
  CHECK(theta(2.0 - h) / h < 1e-100);
}

TEST_CASE("parameter validation") {
  CutoffParams p = setup().p;
  CHECK_NOTHROW(p.validate());
  CutoffParams q = p;
  q.ell1 = p.ell / 5.0;
  CHECK_THROWS_AS(q.validate(), InputError);
  q = p;
  q.eps = 0.2;
  CHECK_THROWS_AS(q.validate(), InputError);
  q = p;
  q.a = p.ell1;
  CHECK_THROWS_AS(q.validate(), InputError);
}

TEST_CASE("step functions") {
  const double ell = 0.05, eps = 0.09, s = std::pow(ell, eps);
  const auto tri = StepFunction::triple(ell, eps);
  CHECK(tri(0.0).v == 1.0);
  CHECK(tri(0.3).v == doctest::Approx(std::exp(-0.3 / s)).epsilon(1e-14));
  CHECK(tri(0.3).d1 == doctest::Approx(-std::exp(-0.3 / s) / s).epsilon(1e-14));
  const auto ex = StepFunction::nbody_exponential(3, ell, eps);
  for (double u : {0.01, 0.2, 1.7}) CHECK(ex(u).v == doctest::Approx(tri(u).v).epsilon(1e-14));
  const auto sm = StepFunction::nbody(5, ell, eps);
  CHECK(sm(1.9).v == 1.0);
  CHECK(sm(2.0).v == 1.0);
  CHECK(sm(2.5).v < 1.0);
  // derivatives by differences
  const double u = 2.3, d = 1e-5;
  CHECK(sm(u).d1 == doctest::Approx((sm(u + d).v - sm(u - d).v) / (2 * d)).epsilon(1e-7));
  CHECK(sm(u).d2 == doctest::Approx((sm(u + d).d1 - sm(u - d).d1) / (2 * d)).epsilon(1e-6));
}

TEST_CASE("trivial configurations") {
  const auto& [p, sp] = setup();
  SUBCASE("far pair") {
    auto c = config({Vec(0.1, 0.1, 0.1), Vec(0.6, 0.5, 0.4)});
    auto f = eval_fields(c, p, sp);
    CHECK(f.at(f.w, 0, 1) == 0.0);
    CHECK(f.W == 1.0);
    CHECK(f.correction == 0.0);
    CHECK(removed_particle_ratio(c, p, sp, {0}) == 1.0);
  }
  SUBCASE("two particles give F = 1") {
    auto c = config({Vec(0.1, 0.1, 0.1), Vec(0.1 + 0.7 * p.ell1, 0.1, 0.1)});
    auto f = eval_fields(c, p, sp);
    CHECK(f.at(f.F, 0, 1) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(f.at(f.w, 0, 1) > 0.0);
    CHECK(f.W == doctest::Approx(1.0 - f.at(f.w, 0, 1)).epsilon(1e-13));
  }
  SUBCASE("third particle on top of the first") {
    auto c = config({Vec(0.1, 0.1, 0.1), Vec(0.1 + 0.7 * p.ell1, 0.1, 0.1), Vec(0.1, 0.1, 0.1)});
    auto f = eval_fields(c, p, sp);
    CHECK(f.at(f.F, 0, 1) <= std::exp(-std::exp(-1.0) / std::pow(p.ell, p.eps)) * (1 + 1e-12));
  }
}

TEST_CASE("W against a direct oracle") {
  const auto& [p, sp] = setup();
  ConfigSampler s(3, p.ell1 / 20, 2 * p.ell, 0.6);
  for (int t = 0; t < 40; ++t) {
    auto c = s.draw(3 + t % 6, 3);
    CutoffParams q = p;
    q.n = c.size();
    CHECK(eval_fields(c, q, sp).W == doctest::Approx(oracle_W(c, q, sp)).epsilon(1e-12));
  }
}

TEST_CASE("modified hamiltonian correction") {
  const auto& [p, sp] = setup();
  SUBCASE("single pair") {
    auto c = config({Vec(0.1, 0.1, 0.1), Vec(0.1 + 0.3 * p.ell1, 0.1, 0.1), Vec(0.7, 0.7, 0.7)});
    const double r = c.distance(0, 1);
    const auto e = sp.interpolate(r);
    const double V = sp.potential()(r);
    const double F = eval_fields(c, p, sp).at(eval_fields(c, p, sp).F, 0, 1);
    // G_0 = G_1 = 1 - w F, so M = F / (1 - w F)
    const double M = F / (1.0 - e.w * F);
    const double expect = -2.0 * (0.5 * V - e.q) * (1.0 - (1.0 - e.w) * M);
    CHECK(F < 1.0);
    CHECK(modified_correction(c, p, sp) == doctest::Approx(expect).epsilon(1e-10));
  }
  SUBCASE("n-body variant at n = 3 reproduces the correction") {
    ConfigSampler s(5, p.ell1 / 20, p.ell, 0.7);
    for (int t = 0; t < 20; ++t) {
      auto c = s.draw(5, 3);
      CutoffParams q = p;
      q.n = 5;
      const double ref = modified_correction(c, q, sp);
      CHECK(nbody_variant(c, q, sp, 3, true) == doctest::Approx(ref).epsilon(1e-12).scale(1.0));
    }
  }
  SUBCASE("smooth n-body step keeps small clusters unmodified") {
    // a tight triple: with n = 3 the pair is suppressed, with n = 6 it is not
    auto c = config({Vec(0.1, 0.1, 0.1), Vec(0.1 + 0.4 * p.ell1, 0.1, 0.1), Vec(0.1, 0.1 + 0.4 * p.ell1, 0.1)});
    CutoffParams q = p;
    const auto f3 = eval_fields(c, q, sp, StepFunction::triple(q.ell, q.eps));
    const auto f6 = eval_fields(c, q, sp, StepFunction::nbody(6, q.ell, q.eps));
    CHECK(f3.at(f3.F, 0, 1) < 0.5);
    CHECK(f6.at(f6.F, 0, 1) == 1.0);
  }
}

TEST_CASE("removed particle ratios") {
  const auto& [p, sp] = setup();
  ConfigSampler s(9, p.ell1 / 20, 2 * p.ell, 0.6);
  auto c = s.draw(8, 3);
  CutoffParams q = p;
  q.n = 8;
  CHECK(removed_particle_ratio(c, q, sp, {}) == 1.0);
  CHECK_THROWS_AS(removed_particle_ratio(c, q, sp, {1, 1}), InputError);
  CHECK_THROWS_AS(removed_particle_ratio(c, q, sp, {8}), InputError);
  const double r = removed_particle_ratio(c, q, sp, {2, 5});
  CHECK(r > 0.0);
  CHECK(std::isfinite(r));
}

TEST_CASE("analytic derivatives match differences") {
  const auto& [p, sp] = setup();
  ConfigSampler s(11, p.ell1 / 10, p.ell, 0.8);
  for (int t = 0; t < 6; ++t) {
    auto c = s.draw(4, 3);
    CutoffParams q = p;
    q.n = 4;
    FieldDerivatives d(c, q, sp);
    const double h = 1e-3 * q.ell1;
    for (int k = 0; k < 4; ++k) {
      Vec fd = Vec::Zero();
      for (int a = 0; a < 3; ++a) {
        double v[4];
        const double offs[4] = {-2.0, -1.0, 1.0, 2.0};
        for (int t2 = 0; t2 < 4; ++t2) {
          auto cs = c;
          cs.x[k][a] += offs[t2] * h;
          v[t2] = eval_fields(cs, q, sp).log_W;
        }
        fd[a] = (v[0] - 8.0 * v[1] + 8.0 * v[2] - v[3]) / (12.0 * h);
      }
      const Vec an = d.grad_log_W(k);
      CHECK((an - fd).norm() <= 1e-6 * (1.0 + an.norm()));
    }
  }
}

TEST_CASE("omega decomposition") {
  const auto& [p, sp] = setup();
  SUBCASE("no pairs in the support of w") {
    auto c = config({Vec(0.1, 0.1, 0.1), Vec(0.4, 0.1, 0.1), Vec(0.1, 0.5, 0.7)});
    auto o = FieldDerivatives(c, p, sp).omega();
    CHECK(o.omega() == 0.0);
    CHECK(o.omega_tilde() == 0.0);
  }
  SUBCASE("generic triple, both routes") {
    for (double sep : {0.6, 0.3}) {
      auto c = config({Vec(0.1, 0.1, 0.1), Vec(0.1 + sep * p.ell1, 0.1, 0.1),
                       Vec(0.1 + 0.3 * p.ell, 0.1 + 0.2 * p.ell, 0.1)});
      auto o = omega_decomposition_check(c, p, sp);
      CHECK(o.routes_agree());
      CHECK(std::abs(o.omega_a - o.omega_b) < 1e-3 * std::abs(o.omega_b));
    }
  }
  SUBCASE("isolated pairs make Omega and Omega~ coincide") {
    auto c = config({Vec(0.1, 0.1, 0.1), Vec(0.1 + 0.5 * p.ell1, 0.1, 0.1), Vec(0.1 + 0.6 * p.ell, 0.1, 0.1),
                     Vec(0.1 + 0.6 * p.ell, 0.1 + 0.7 * p.ell1, 0.1)});
    CutoffParams q = p;
    q.n = 4;
    auto o = FieldDerivatives(c, q, sp).omega();
    CHECK(o.quadratic != 0.0);
    CHECK(std::abs(o.omega() - o.omega_tilde()) <= 1e-13 * o.magnitude);
  }
  SUBCASE("clusters: relative gap below one") {
    ConfigSampler s(17, p.ell1 / 20, 1.5 * p.ell1, 0.8);
    for (int t = 0; t < 50; ++t) {
      CutoffParams q = p;
      q.n = 3 + t % 5;
      auto c = s.draw(q.n, 3);
      auto o = FieldDerivatives(c, q, sp).omega();
      if (o.magnitude > 0) CHECK(std::abs(o.omega() - o.omega_tilde()) < 0.5 * o.magnitude);
    }
  }
}

TEST_CASE("audits on a small sample") {
  const auto& [p, sp] = setup();
  AuditSetting s;
  s.n = 10;
  s.samples = 300;
  const auto g = g_separation_audit(p, sp, s);
  CHECK(g.violations == 0);
  CHECK(g.c1 > 0.0);
  CHECK(g.max_G <= 1.0);
  const auto ov = no_overlap_audit(p, sp, s, 1.0);
  CHECK(ov.overlaps > 0);
  CHECK(ov.fitted_c > 0.0);
  CHECK(ov.c_q < 2.0);
  const auto rm = removal_audit(p, sp, s, 3);
  CHECK(rm.log_c0 > 0.0);
  CHECK(rm.log_c0 < 2.0);
  s.samples = 30;
  const auto d = derivative_bounds_audit(p, sp, s, 1.0);
  CHECK(d.fd_max_rel < 1e-5);
  CHECK(d.koverlap_remainder <= d.koverlap_allowance);
  CHECK(std::isfinite(d.c_hess));
}

TEST_CASE("adversarial cluster keeps the overlap sum bounded") {
  const auto& [p, sp] = setup();
  for (int m : {2, 4, 8}) {
    auto c = adversarial_cluster(20, m, 3, p.ell, 23);
    CutoffParams q = p;
    q.n = 20;
    auto f = eval_fields(c, q, sp);
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      double sum = 0.0;
      for (int j = 0; j < 20; ++j)
        if (j != i && f.at(f.w, i, j) > 0) sum += f.at(f.F, i, j);
      worst = std::max(worst, sum);
    }
    CHECK(worst < 2.0);
  }
}

TEST_CASE("operator identity on a 1d grid") {
  CutoffParams p;
  p.dim = 1;
  p.ell = 0.95;
  p.ell1 = 0.09;
  p.a = 0.0;
  p.n = 2;
  twobody::SofteningProfile::Options o;
  o.dim = 1;
  twobody::SofteningProfile sp(twobody::RadialPotential::bump(1.0, 10.0).scaled(30.0, 1), p.ell1, o);
  const auto r32 = assemble_L_B(32, 2, p, sp);
  const auto r64 = assemble_L_B(64, 2, p, sp);
  const auto r128 = assemble_L_B(128, 2, p, sp);
  CHECK(std::log2(r32.defect / r64.defect) > 1.7);
  CHECK(std::log2(r64.defect / r128.defect) > 1.7);
  CHECK(r128.self_adjoint_defect < r64.self_adjoint_defect);
  CHECK(r128.self_adjoint_defect < 1e-4);
  CHECK(r128.min_W > 0.5);
  CHECK_THROWS_AS(assemble_L_B(64, 3, p, sp), InputError);
  CutoffParams p3 = p;
  p3.dim = 3;
  CHECK_THROWS_AS(assemble_L_B(32, 2, p3, sp), InputError);
}
