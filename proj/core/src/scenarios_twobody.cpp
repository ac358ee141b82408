#include <chrono>

#include "gplab/error.hpp"
#include "gplab/twobody.hpp"
#include "scenario_defs.hpp"

namespace gplab::cli_io::detail {

using twobody::RadialPotential;

namespace {

const std::vector<std::string> kKinds = {"bump", "polynomial", "shell", "zero"};

RadialPotential make_potential(const std::string& kind, double support, double coupling) {
  if (kind == "bump") return RadialPotential::bump(support, coupling);
  if (kind == "polynomial") return RadialPotential::polynomial(support, coupling);
  if (kind == "shell") return RadialPotential::shell(support, coupling);
  if (kind == "zero") return RadialPotential::zero(support);
  throw InputError("unknown potential kind '" + kind + "'");
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void scatter_identity(const ParamMap& p, RunContext& ctx) {
  const double r_max = p.real("r_max"), step = p.real("step");
  auto& t = ctx.table("identity", {"potential", "support", "coupling", "a0", "identity_lhs", "eight_pi_a0", "rel_defect"});
  const std::vector<RadialPotential> family = {RadialPotential::bump(1.0, p.real("bump_coupling")),
                                               RadialPotential::polynomial(1.0, p.real("polynomial_coupling")),
                                               RadialPotential::shell(1.0, p.real("shell_coupling"))};
  for (const auto& v : family) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto z = twobody::solve_zero_energy(v, r_max, step);
    const double secs = seconds_since(t0);
    const double target = 8 * kPi * z.scattering_length, rel = z.identity_defect / target;
    t.add({v.label(), v.support_radius(), v.coupling(), z.scattering_length, z.identity_lhs, target, rel});
    ctx.check_le("rel_defect[" + v.label() + "]", rel, 1e-4);
    ctx.check_le("wall_seconds[" + v.label() + "]", secs, 1.0);
  }
}

void scatter_single(const ParamMap& p, RunContext& ctx) {
  const auto v = make_potential(p.text("kind"), p.real("support"), p.real("coupling"));
  const auto z = twobody::solve_zero_energy(v, p.real("r_max"), p.real("step"));
  const double born = v.born_constant() / (8 * kPi);
  auto& t = ctx.table("scatter", {"potential", "support", "coupling", "a0", "born_bound", "identity_lhs",
                                  "identity_defect", "asymptote_spread", "ode_residual"});
  t.add({v.label(), v.support_radius(), v.coupling(), z.scattering_length, born, z.identity_lhs, z.identity_defect,
         z.asymptote_spread, z.ode_residual});
  auto& prof = ctx.table("zero_energy", {"r", "m", "m_prime"});
  const std::size_t stride = std::max<std::size_t>(1, z.radius.size() / 400);
  for (std::size_t i = 0; i < z.radius.size(); i += stride) prof.add({z.radius[i], z.m[i], z.m_prime[i]});
  ctx.check_le("a0_minus_born_bound", z.scattering_length - born, 0.0);
  if (v.is_zero()) {
    ctx.check_in("a0_zero_potential", z.scattering_length, 0.0, 0.0);
  } else {
    ctx.check_le("identity_rel_defect", z.identity_defect / (8 * kPi * z.scattering_length), 1e-4);
  }
  ctx.plot({"zero_energy", "r", {"m"}, "zero-energy solution", false, false, false});
}

void scatter_born(const ParamMap& p, RunContext& ctx) {
  auto& t = ctx.table("born", {"potential", "coupling", "a0", "born_bound", "ratio"});
  std::vector<RadialPotential> family;
  for (double c : p.reals("couplings")) {
    family.push_back(RadialPotential::bump(1.0, c));
    family.push_back(RadialPotential::polynomial(1.0, c));
  }
  for (double c : p.reals("shell_couplings")) family.push_back(RadialPotential::shell(1.0, c));
  long violations = 0;
  double worst = 0.0;
  for (const auto& v : family) {
    const auto z = twobody::solve_zero_energy(v, p.real("r_max"), p.real("step"));
    const double bound = v.born_constant() / (8 * kPi), ratio = z.scattering_length / bound;
    t.add({v.label(), v.coupling(), z.scattering_length, bound, ratio});
    if (!(z.scattering_length <= bound)) ++violations;
    worst = std::max(worst, ratio);
  }
  ctx.check_ge("family_size", static_cast<double>(family.size()), 20.0);
  ctx.check_le("violations", static_cast<double>(violations), 0.0);
  ctx.check_le("max_a0_over_born_bound", worst, 1.0);
}

void neumann_asymptotic(const ParamMap& p, RunContext& ctx) {
  const auto v = make_potential(p.text("kind"), p.real("support"), p.real("coupling"));
  if (v.is_zero()) throw InputError("the Neumann sweep needs a nonzero potential");
  twobody::NeumannFamily fam(v, 3);
  const double a = fam.scattering_length();
  auto& t = ctx.table("neumann", {"ratio", "kappa", "a", "e_kappa", "scaled", "deviation", "bound"});
  std::vector<double> dev;
  for (double rat : p.reals("ratios")) {
    if (!(rat > 0.0)) throw InputError("ratios must be positive");
    const double kappa = a / rat;
    const double e = fam.eigenvalue(kappa);
    const double scaled = e * kappa * kappa * kappa / (3 * a), d = std::abs(scaled - 1.0);
    t.add({rat, kappa, a, e, scaled, d, 5.0 * rat});
    ctx.check_le("deviation[" + format_real(rat) + "]", d, 5.0 * rat);
    dev.push_back(d);
  }
  ctx.check_true("deviation_decreasing", strictly_decreasing(dev));
  ctx.plot({"neumann", "ratio", {"deviation", "bound"}, "Neumann eigenvalue deviation", true, true, true});
}

void soften_mass(const ParamMap& p, RunContext& ctx) {
  const auto base = make_potential(p.text("kind"), 1.0, p.real("coupling"));
  const double a0 = twobody::solve_zero_energy(base, 3.0, 1e-3).scattering_length;
  const double ell1 = p.real("ell1");
  auto& t = ctx.table("softening_mass", {"ratio", "a", "ell1", "l1_q", "mass_ratio", "deviation", "c0"});
  std::vector<double> dev;
  for (double rat : p.reals("ratios")) {
    const double a = rat * ell1;
    twobody::SofteningProfile sp(base.scaled(a0 / a), ell1);
    const double mr = sp.l1_norm_q() / (4 * kPi * a), d = std::abs(mr - 1.0);
    t.add({rat, a, ell1, sp.l1_norm_q(), mr, d, sp.c0()});
    dev.push_back(d);
  }
  ctx.check_true("deviation_decreasing", strictly_decreasing(dev));
  ctx.check_le("deviation_finest", dev.back(), 0.05);
  ctx.plot({"softening_mass", "ratio", {"deviation"}, "softening mass deviation", true, true, true});
}

void soften_profile(const ParamMap& p, RunContext& ctx) {
  const auto base = make_potential(p.text("kind"), 1.0, p.real("coupling"));
  const double a0 = twobody::solve_zero_energy(base, 3.0, 1e-3).scattering_length;
  const double ell1 = p.real("ell1"), a = p.real("ratio") * ell1;
  twobody::SofteningProfile sp(base.scaled(a0 / a), ell1);
  auto& t = ctx.table("profile", {"r", "w", "dw", "q"});
  const long n = p.integer("points");
  if (n < 2 || n > 100000) throw InputError("points must be in [2, 100000]");
  double wmax = 0.0, qmin = INFINITY, qmax = 0.0;
  for (long i = 0; i < n; ++i) {
    const double r = sp.support() * (i + 0.5) / n;
    const auto val = sp.interpolate(r);
    t.add({r, val.w, val.dw, val.q});
    wmax = std::max(wmax, val.w);
    qmin = std::min(qmin, val.q);
    qmax = std::max(qmax, val.q);
  }
  const auto rep = twobody::audit_w_q_bounds(sp, a);
  auto& b = ctx.table("bounds", {"id", "fitted_c", "location"});
  for (const auto& e : rep.entries) b.add({e.id, e.fitted_c, e.location});
  ctx.check_in("c0", sp.c0(), 1e-12, 1.0);
  ctx.check_le("max_w", wmax, 1.0);
  ctx.check_ge("min_q_over_max_q", qmax > 0.0 ? qmin / qmax : 0.0, -1e-12);
  ctx.plot({"profile", "r", {"w", "q"}, "softening profile", false, false, false});
}

}  // namespace

void register_twobody(std::vector<Scenario>& out) {
  const std::vector<ParamSpec> grid = {real_param("r_max", "3.0", "outer radius of the zero-energy integration"),
                                       real_param("step", "1e-3", "RK4 step")};
  auto with = [&](std::vector<ParamSpec> extra) {
    auto v = grid;
    v.insert(v.end(), extra.begin(), extra.end());
    return v;
  };
  out.push_back({"scatter.identity", "twobody", "scatter",
                 "scattering identity for bump, polynomial and shell potentials", 1, 3.0,
                 with({real_param("bump_coupling", "30", "bump coupling"),
                       real_param("polynomial_coupling", "8", "polynomial coupling"),
                       real_param("shell_coupling", "50", "shell coupling")}),
                 scatter_identity});
  out.push_back({"scatter.born", "twobody", "scatter", "Born upper bound on a 20-potential family", 2, 5.0,
                 with({reals_param("couplings", "0.001, 0.01, 0.1, 1, 10, 100, 1000", "bump and polynomial couplings"),
                       reals_param("shell_couplings", "0.01, 0.1, 1, 10, 100, 1000", "shell couplings")}),
                 scatter_born});
  out.push_back({"scatter.single", "twobody", "scatter", "scattering length and zero-energy solution of one potential",
                 0, 0.0,
                 with({text_param("kind", "bump", "potential shape", kKinds), real_param("support", "1.0", "support radius"),
                       real_param("coupling", "10", "coupling")}),
                 scatter_single});
  out.push_back({"neumann.asymptotic", "twobody", "neumann", "Neumann eigenvalue against 3a/kappa^3 over a/kappa", 3,
                 10.0,
                 {text_param("kind", "bump", "potential shape", {"bump", "polynomial", "shell"}),
                  real_param("support", "1.0", "support radius"), real_param("coupling", "10", "coupling"),
                  reals_param("ratios", "0.1, 0.03, 0.01", "a/kappa")},
                 neumann_asymptotic});
  out.push_back({"soften.mass", "twobody", "soften", "int q against 4 pi a over a/ell1", 4, 30.0,
                 {text_param("kind", "bump", "potential shape", {"bump", "polynomial", "shell"}),
                  real_param("coupling", "20", "coupling of the unscaled potential"),
                  real_param("ell1", "0.05", "softening radius"), reals_param("ratios", "0.1, 0.03, 0.01", "a/ell1")},
                 soften_mass});
  out.push_back({"soften.profile", "twobody", "soften", "w and q tables with the pointwise bound constants", 0, 0.0,
                 {text_param("kind", "bump", "potential shape", {"bump", "polynomial", "shell"}),
                  real_param("coupling", "20", "coupling of the unscaled potential"),
                  real_param("ell1", "0.05", "softening radius"), real_param("ratio", "0.03", "a/ell1"),
                  int_param("points", "300", "table rows")},
                 soften_profile});
}

}  // namespace gplab::cli_io::detail
