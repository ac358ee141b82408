#include <filesystem>
#include <sstream>

#include "gplab/bump.hpp"
#include "gplab/cutoff.hpp"
#include "gplab/error.hpp"
#include "gplab/gp.hpp"
#include "gplab/inequalities.hpp"
#include "scenario_defs.hpp"

namespace gplab::cli_io::detail {

using namespace gplab::cutoff;
namespace fs = std::filesystem;

namespace {

struct CutoffSetup {
  CutoffParams p;
  twobody::SofteningProfile sp;
};

// ell1 = ell/20, a = ell1/20, bump potential scaled so the profile's a is exact.
CutoffSetup cutoff_setup(double ell, double coupling, double eps) {
  const auto base = twobody::RadialPotential::bump(1.0, coupling);
  const double a0 = twobody::solve_zero_energy(base, 4.0, 1e-3).scattering_length;
  CutoffParams p;
  p.ell = ell;
  p.ell1 = ell / 20.0;
  p.a = p.ell1 / 20.0;
  p.eps = eps;
  p.validate();
  return {p, twobody::SofteningProfile(base.scaled(a0 / p.a, 3), p.ell1)};
}

void cutoff_audits(const ParamMap& prm, RunContext& ctx) {
  const double coupling = prm.real("coupling"), eps = prm.real("eps");
  const auto ells = prm.reals("ells");
  const long samples = static_cast<long>(prm.integer("samples"));
  if (samples < 1) throw InputError("samples must be positive");
  auto base = cutoff_setup(ells.front(), coupling, eps);

  auto& g = ctx.table("g_separation", {"n", "samples", "c1", "max_G", "violations", "profile_floor"});
  auto& o = ctx.table("overlap", {"n", "samples", "overlaps", "fitted_c", "c_q"});
  auto& r = ctx.table("removal", {"n", "samples", "max_alpha", "log_c0"});
  std::vector<double> log_c0;
  for (long long n : prm.integers("particles")) {
    AuditSetting s;
    s.n = static_cast<int>(n);
    s.samples = static_cast<int>(samples);
    s.seed = ctx.seed() + static_cast<std::uint64_t>(n);
    base.p.n = s.n;
    const auto gs = g_separation_audit(base.p, base.sp, s);
    g.add({n, static_cast<long long>(gs.samples), gs.c1, gs.max_G, static_cast<long long>(gs.violations), gs.profile_floor});
    const std::string tag = "[N=" + std::to_string(n) + "]";
    ctx.check_le("g_violations" + tag, static_cast<double>(gs.violations), 0.0);
    ctx.check_in("c1" + tag, gs.c1, 1e-300, 1.0);
    ctx.check_le("max_G" + tag, gs.max_G, 1.0);
    const auto ov = no_overlap_audit(base.p, base.sp, s, 1.0);
    o.add({n, static_cast<long long>(ov.samples), static_cast<long long>(ov.overlaps), ov.fitted_c, ov.c_q});
    ctx.check_ge("overlap_fitted_c" + tag, ov.fitted_c, 1e-300);
    const auto rm = removal_audit(base.p, base.sp, s, static_cast<int>(prm.integer("max_alpha")));
    r.add({n, static_cast<long long>(rm.samples), static_cast<long long>(rm.max_alpha), rm.log_c0});
    log_c0.push_back(rm.log_c0);
  }
  // A single C0 covers every N: its log is the largest fitted value.
  ctx.check_in("log_c0_spread", spread(log_c0), 1.0, 2.0);

  auto& sw = ctx.table("overlap_ell_sweep", {"ell", "n", "samples", "overlaps", "fitted_c", "c_q"});
  std::vector<double> fitted;
  for (std::size_t i = 0; i < ells.size(); ++i) {
    auto st = i == 0 ? base : cutoff_setup(ells[i], coupling, eps);
    AuditSetting s;
    s.n = static_cast<int>(prm.integer("sweep_particles"));
    s.samples = static_cast<int>(samples);
    s.seed = ctx.seed() + 1000 + i;
    st.p.n = s.n;
    const auto ov = no_overlap_audit(st.p, st.sp, s, 1.0);
    sw.add({st.p.ell, static_cast<long long>(s.n), static_cast<long long>(ov.samples), static_cast<long long>(ov.overlaps),
            ov.fitted_c, ov.c_q});
    fitted.push_back(ov.fitted_c);
  }
  ctx.check_in("overlap_c_spread_over_ell", spread(fitted), 1.0, 2.0);

  AuditSetting s;
  s.n = static_cast<int>(prm.integer("derivative_particles"));
  s.samples = static_cast<int>(prm.integer("derivative_samples"));
  s.seed = ctx.seed() + 7;
  base.p.n = s.n;
  const auto d = derivative_bounds_audit(base.p, base.sp, s, 1.0);
  auto& dt = ctx.table("derivatives", {"n", "samples", "c_grad", "c_hess", "c_koverlap", "koverlap_remainder",
                                       "koverlap_allowance", "c_kfix", "c_kabfix", "fd_max_rel"});
  dt.add({static_cast<long long>(s.n), static_cast<long long>(d.samples), d.c_grad, d.c_hess, d.c_koverlap,
          d.koverlap_remainder, d.koverlap_allowance, d.c_kfix, d.c_kabfix, d.fd_max_rel});
  ctx.check_le("derivative_fd_rel", d.fd_max_rel, 1e-6);
  ctx.check_le("koverlap_remainder_over_allowance", d.koverlap_remainder / d.koverlap_allowance, 1.0);
  ctx.note("scale_chain", "ell1 = ell/20, a = ell1/20");
}

void cutoff_sample(const ParamMap& prm, RunContext& ctx) {
  auto st = cutoff_setup(prm.real("ell"), prm.real("coupling"), prm.real("eps"));
  AuditSetting s;
  s.n = static_cast<int>(prm.integer("n"));
  s.samples = static_cast<int>(prm.integer("samples"));
  s.seed = ctx.seed();
  s.cluster_fraction = prm.real("cluster_fraction");
  st.p.n = s.n;
  const auto gs = g_separation_audit(st.p, st.sp, s);
  const auto ov = no_overlap_audit(st.p, st.sp, s, 1.0);
  const auto rm = removal_audit(st.p, st.sp, s, 3);
  auto& t = ctx.table("audit", {"n", "samples", "c1", "violations", "overlaps", "fitted_c", "c_q", "log_c0"});
  t.add({static_cast<long long>(s.n), static_cast<long long>(s.samples), gs.c1, static_cast<long long>(gs.violations),
         static_cast<long long>(ov.overlaps), ov.fitted_c, ov.c_q, rm.log_c0});
  auto& w = ctx.table("witness", {"particle", "x", "y", "z"});
  for (int i = 0; i < gs.witness.size(); ++i)
    w.add({static_cast<long long>(i), gs.witness.x[i][0], gs.witness.x[i][1], gs.witness.x[i][2]});
  ctx.check_le("g_violations", static_cast<double>(gs.violations), 0.0);
  ctx.check_in("c1", gs.c1, 1e-300, 1.0);
}

void cutoff_identity(const ParamMap& prm, RunContext& ctx) {
  // Grid identity on N = 2, d = 1.
  CutoffParams p1;
  p1.dim = 1;
  p1.ell = prm.real("grid_ell");
  p1.ell1 = prm.real("grid_ell1");
  p1.a = 0.0;
  p1.n = 2;
  twobody::SofteningProfile::Options o1;
  o1.dim = 1;
  const twobody::SofteningProfile sp1(
      twobody::RadialPotential::bump(1.0, prm.real("grid_coupling")).scaled(prm.real("grid_scale"), 1), p1.ell1, o1);
  auto& lb = ctx.table("lb_identity", {"points", "spacing", "defect", "self_adjoint_defect", "min_W"});
  std::vector<double> h, def;
  for (long long m : prm.integers("grid_points")) {
    const auto r = assemble_L_B(static_cast<int>(m), 2, p1, sp1);
    lb.add({m, 1.0 / m, r.defect, r.self_adjoint_defect, r.min_W});
    h.push_back(1.0 / m);
    def.push_back(r.defect);
  }
  for (std::size_t i = 1; i < def.size(); ++i)
    ctx.check_ge("lb_order[" + format_real(1.0 / h[i]) + "]", std::log(def[i - 1] / def[i]) / std::log(h[i - 1] / h[i]), 1.7);

  // Omega by differences against the analytic decomposition.
  const double coupling = prm.real("coupling"), eps = prm.real("eps");
  auto st = cutoff_setup(prm.reals("ells").front(), coupling, eps);
  auto& rt = ctx.table("omega_routes", {"config", "omega_a", "omega_b", "omega_tilde", "fd_change", "identity_floor", "scale"});
  std::vector<Configuration> cfgs;
  for (double sep : {0.6, 0.3}) {
    Configuration c;
    c.x = {Vec(0.1, 0.1, 0.1), Vec(0.1 + sep * st.p.ell1, 0.1, 0.1),
           Vec(0.1 + 0.3 * st.p.ell, 0.1 + 0.2 * st.p.ell, 0.1)};
    cfgs.push_back(c);
  }
  ConfigSampler route_sampler(ctx.seed(), st.p.ell1 / 4, 1.2 * st.p.ell1, 0.8);
  for (long long i = 0; i < prm.integer("route_samples"); ++i) cfgs.push_back(route_sampler.draw(3, 3));
  st.p.n = 3;
  long agree = 0;
  for (std::size_t i = 0; i < cfgs.size(); ++i) {
    const auto oc = omega_decomposition_check(cfgs[i], st.p, st.sp);
    rt.add({static_cast<long long>(i), oc.omega_a, oc.omega_b, oc.omega_tilde, oc.fd_change, oc.identity_floor, oc.scale});
    agree += oc.routes_agree();
  }
  ctx.check_in("omega_routes_agree", static_cast<double>(agree), static_cast<double>(cfgs.size()),
               static_cast<double>(cfgs.size()));

  // |Omega - Omega~| relative to the summed term magnitudes, across ell.
  auto& gt = ctx.table("omega_gap", {"ell", "ell_pow_eps", "configs", "max_rel_gap", "fitted_c"});
  std::vector<double> cs;
  const long per_n = static_cast<long>(prm.integer("gap_samples"));
  for (double ell : prm.reals("ells")) {
    auto s = cutoff_setup(ell, coupling, eps);
    double worst = 0.0;
    long count = 0;
    for (int n = 3; n <= 10; ++n) {
      ConfigSampler sampler(7 + n, s.p.ell1 / 20, 1.5 * s.p.ell1, 0.8);
      s.p.n = n;
      for (long t = 0; t < per_n; ++t) {
        const auto c = sampler.draw(n, 3);
        const auto om = FieldDerivatives(c, s.p, s.sp).omega();
        if (om.magnitude <= 0.0) continue;
        worst = std::max(worst, std::abs(om.omega() - om.omega_tilde()) / om.magnitude);
        ++count;
      }
    }
    const double lp = std::pow(ell, eps);
    const double c = worst > 0.0 ? -lp * std::log(worst) : INFINITY;
    gt.add({ell, lp, static_cast<long long>(count), worst, c});
    cs.push_back(c);
  }
  ctx.check_in("omega_gap_c_spread", spread(cs), 1.0, 2.0);
  ctx.plot({"lb_identity", "spacing", {"defect"}, "L/B identity defect", true, true, true});
}

void ineq_probes(const ParamMap& prm, RunContext& ctx) {
  using namespace gplab::inequalities;
  const std::uint64_t seed = ctx.seed();
  auto& lv = ctx.table("levels", {"probe", "points", "C"});
  auto& cf = ctx.table("closed_forms", {"probe", "measured", "expected", "rel_error"});
  auto closed = [&](const std::string& name, double measured, double expected, double tol) {
    const double rel = expected != 0.0 ? std::abs(measured / expected - 1.0) : std::abs(measured);
    cf.add({name, measured, expected, rel});
    ctx.check_le("closed_form[" + name + "]", rel, tol);
  };
  auto bounded = [&](const std::string& name, const std::vector<double>& C) {
    ctx.check_in("spread[" + name + "]", spread(C), 1.0, 2.0);
  };

  // Hardy on the ball |x| <= ell with lambda.
  {
    const double ell1 = prm.real("hardy_ell1"), ell = prm.real("hardy_ell");
    std::vector<double> C;
    for (long long m : prm.integers("hardy_points")) {
      const auto g = TorusGrid::make(3, static_cast<int>(m));
      const auto r = hardy_ball_probe(WeightFunction::lambda(g, ell1), make_ensemble(g, 4, 3, seed), ell, 1.0);
      lv.add({"hardy", m, r.C});
      C.push_back(r.C);
    }
    bounded("hardy", C);
    const auto g = TorusGrid::make(3, 32);
    const auto r = hardy_ball_probe(WeightFunction::lambda(g, ell1), ensemble_of(g, {gp::constant_field(g, 1.0).values}),
                                    ell, 1.0);
    closed("hardy_constant_field", r.C, 1.0, 1e-12);
  }
  // Sobolev with U = chi(r <= 0.2)/r.
  {
    std::vector<double> C;
    for (long long m : prm.integers("sob1_points")) {
      const auto g = TorusGrid::make(3, static_cast<int>(m));
      const auto U = WeightFunction::custom(g, [](double r) { return r <= 0.2 ? 1.0 / r : 0.0; }, "inv_r", true);
      const auto r = sob1_probe(U, make_ensemble(g, 4, 3, seed + 1));
      lv.add({"sob1", m, r.C});
      C.push_back(r.C);
    }
    bounded("sob1", C);
    const auto g = TorusGrid::make(3, 16);
    const auto r = sob1_probe(WeightFunction::constant(g, 2.5), ensemble_of(g, {gp::plane_wave(g, {1, 2, 0}, 1.0).values}));
    closed("sob1_plane_wave", r.ratio[0], 1.0 / (1.0 + 4 * kPi * kPi * 5), 1e-12);
  }
  // Two-slot quadratic form with a unit-mass bump.
  {
    std::vector<double> C;
    for (long long m : prm.integers("two_delta_points")) {
      const auto g = TorusGrid::make(1, static_cast<int>(m));
      const auto r = two_delta_probe(WeightFunction::bump(g, prm.real("two_delta_width")), make_ensemble(g, 6, 2, seed + 2, 2));
      lv.add({"two_delta", m, r.C});
      C.push_back(r.C);
    }
    bounded("two_delta", C);
    const auto g = TorusGrid::make(1, 32);
    CVec f(32 * 32);
    for (int x = 0; x < 32; ++x)
      for (int y = 0; y < 32; ++y) f[x * 32 + y] = std::polar(1.0, 2 * kPi * (2 * x - 3 * y) / 32.0);
    const auto r = two_delta_probe(WeightFunction::constant(g, 0.7), ensemble_of(g, {f}, 2));
    closed("two_delta_plane_wave", r.ratio[0], 1.0 / ((1 + 16 * kPi * kPi) * (1 + 36 * kPi * kPi)), 1e-12);
  }
  // Poincare-type mollifier estimate.
  {
    const double beta = prm.real("poincare_beta");
    std::vector<double> C;
    for (long long m : prm.integers("poincare_points")) {
      const auto g = TorusGrid::make(3, static_cast<int>(m));
      const auto r = poincare_mollifier_probe(make_ensemble(g, 3, 3, seed + 3), {beta});
      lv.add({"poincare", m, r.levels[0].C});
      ctx.check_le("poincare_violations[" + std::to_string(m) + "]", static_cast<double>(r.levels[0].violations), 0.0);
      C.push_back(r.levels[0].C);
    }
    bounded("poincare", C);
    // Plane wave: L = |1 - hat h(k)| everywhere, R = |k| int_{|y| <= beta} |y|^-2.
    const auto g = TorusGrid::make(3, 32);
    const std::array<int, 3> k{1, 0, 2};
    std::vector<double> L, R;
    poincare_sides(gp::plane_wave(g, k, 1.0).values, g, beta, L, R);
    const auto moll = grid_mollifier(g, beta);
    double hat = 0.0, kern = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const auto x = grid_point(g, i);
      double r2 = 0.0, phase = 0.0;
      for (int a = 0; a < 3; ++a) {
        const double c = min_image(x[a]);
        r2 += c * c;
        phase += k[a] * c;
      }
      hat += moll[i] * std::cos(2 * kPi * phase) * g.cell_volume();
      if (i > 0 && std::sqrt(r2) <= beta) kern += g.cell_volume() / r2;
    }
    closed("poincare_plane_wave_L", L[123], std::abs(1.0 - hat), 1e-10);
    closed("poincare_plane_wave_R", R[123], 2 * kPi * std::sqrt(5.0) * kern, 1e-10);
  }
  // Weighted Hardy bound with the cutoff weight W.
  {
    const auto base = twobody::RadialPotential::bump(1.0, 10.0);
    const double a0 = twobody::solve_zero_energy(base, 4.0, 1e-3).scattering_length;
    CutoffParams p;
    p.ell = prm.real("combined_ell");
    p.ell1 = prm.real("combined_ell1");
    p.a = p.ell1 / 20;
    const twobody::SofteningProfile sp(base.scaled(a0 / p.a, 3), p.ell1);
    std::vector<double> C;
    for (long long m : prm.integers("combined_points")) {
      const auto g = TorusGrid::make(3, static_cast<int>(m));
      const auto r = combined_weighted_probe(3, p, sp, make_ensemble(g, 2, 3, seed + 4), 1.0, false);
      lv.add({"combined", m, r.C});
      C.push_back(r.C);
    }
    bounded("combined", C);
    const auto g = TorusGrid::make(3, 32);
    const auto e = make_ensemble(g, 1, 3, seed + 5);
    const auto c = combined_weighted_probe(2, p, sp, e, 1.0, true);
    const auto h = hardy_ball_probe(WeightFunction::lambda(g, p.ell1), e, p.ell, 1.0);
    closed("combined_unit_W", c.lhs[0], h.lhs[0] * h.ball_points * g.cell_volume(), 1e-12);
  }
}

std::vector<std::string> split_ids(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto b = item.find_first_not_of(' '), e = item.find_last_not_of(' ');
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

void io_determinism(const ParamMap& prm, RunContext& ctx) {
  const auto ids = split_ids(prm.text("targets"));
  if (ids.empty()) throw InputError("targets is empty");
  const int other_threads = static_cast<int>(prm.integer("second_threads"));
  auto& t = ctx.table("digests", {"target", "file", "sha256_first", "sha256_second", "identical"});
  long files = 0, identical = 0, failures = 0;
  for (const auto& id : ids) {
    const Scenario& s = find_scenario(id);
    if (s.id == "io.determinism") throw InputError("io.determinism cannot target itself");
    const auto p = ParamMap::defaults(s.params);
    const fs::path root = fs::path(ctx.settings().out_dir) / "rerun" / id;
    RunSettings a{ctx.seed(), 1, (root / "first").string()};
    RunSettings b{ctx.seed(), other_threads, (root / "second").string()};
    const auto ma = run_scenario(s, p, a), mb = run_scenario(s, p, b);
    if (ma.status == "error" || mb.status == "error") ++failures;
    if (ma.files.size() != mb.files.size()) ++failures;
    for (std::size_t i = 0; i < ma.files.size() && i < mb.files.size(); ++i) {
      const bool same = ma.files[i].path == mb.files[i].path && ma.files[i].sha256 == mb.files[i].sha256;
      t.add({id, ma.files[i].path, ma.files[i].sha256, mb.files[i].sha256, static_cast<long long>(same)});
      ++files;
      identical += same;
    }
  }
  ctx.check_ge("files_compared", static_cast<double>(files), 1.0);
  ctx.check_in("identical_files", static_cast<double>(identical), static_cast<double>(files), static_cast<double>(files));
  ctx.check_le("rerun_errors", static_cast<double>(failures), 0.0);
}

}  // namespace

void register_audits(std::vector<Scenario>& out) {
  out.push_back({"cutoff.audits", "cutoff", "cutoff-audit",
                 "G separation, no-overlap, removal and derivative audits over random configurations", 9, 180.0,
                 {real_param("coupling", "10", "bump coupling before scaling"), real_param("eps", "0.09", "cutoff exponent"),
                  reals_param("ells", "0.05, 0.02, 0.01", "ell sweep; the first also serves the N sweep"),
                  ints_param("particles", "10, 20, 50", "particle counts"), int_param("samples", "10000", "configurations per setting"),
                  int_param("max_alpha", "3", "largest number of removed particles"),
                  int_param("sweep_particles", "10", "particle count of the ell sweep"),
                  int_param("derivative_particles", "10", "particle count of the derivative audit"),
                  int_param("derivative_samples", "500", "configurations of the derivative audit")},
                 cutoff_audits});
  out.push_back({"cutoff.sample", "cutoff", "cutoff-audit", "small G separation and overlap audit with its witness", 0, 0.0,
                 {real_param("ell", "0.05", "cutoff length"), real_param("coupling", "10", "bump coupling before scaling"),
                  real_param("eps", "0.09", "cutoff exponent"), int_param("n", "10", "particles"),
                  int_param("samples", "1000", "configurations"), real_param("cluster_fraction", "0.5", "clustering probability")},
                 cutoff_sample});
  out.push_back({"cutoff.identity", "cutoff", "cutoff-audit",
                 "L/B operator identity, Omega routes and the Omega gap across ell", 10, 180.0,
                 {real_param("grid_ell", "0.95", "ell of the 1D identity"), real_param("grid_ell1", "0.09", "ell1 of the 1D identity"),
                  real_param("grid_coupling", "10", "bump coupling of the 1D identity"),
                  real_param("grid_scale", "30", "scale factor of the 1D potential"),
                  ints_param("grid_points", "32, 64, 128", "grid sizes"), real_param("coupling", "10", "3D bump coupling"),
                  real_param("eps", "0.09", "cutoff exponent"), reals_param("ells", "0.05, 0.02, 0.01", "ell sweep"),
                  int_param("route_samples", "6", "random triples for the route comparison"),
                  int_param("gap_samples", "200", "configurations per particle count")},
                 cutoff_identity});
  out.push_back({"ineq.probes", "inequalities", "ineq-audit",
                 "Hardy, Sobolev, two-slot, Poincare and weighted probes over three refinement levels", 11, 120.0,
                 {real_param("hardy_ell1", "0.1", "lambda radius parameter"), real_param("hardy_ell", "0.25", "ball radius"),
                  ints_param("hardy_points", "32, 64, 128", "grid sizes"), ints_param("sob1_points", "16, 32, 64", "grid sizes"),
                  ints_param("two_delta_points", "64, 128, 256", "grid sizes"),
                  real_param("two_delta_width", "0.05", "bump width"), ints_param("poincare_points", "16, 32, 64", "grid sizes"),
                  real_param("poincare_beta", "0.15", "mollifier scale"), real_param("combined_ell", "0.4", "cutoff length"),
                  real_param("combined_ell1", "0.035", "softening radius"),
                  ints_param("combined_points", "32, 64, 128", "grid sizes")},
                 ineq_probes});
  out.push_back({"io.determinism", "cli_io", "run", "reruns scenarios and compares output digests", 12, 60.0,
                 {text_param("targets", "scatter.single, neumann.asymptotic, gp.evolve, cutoff.sample", "scenario ids"),
                  int_param("second_threads", "2", "thread count of the second run")},
                 io_determinism});
}

}  // namespace gplab::cli_io::detail
