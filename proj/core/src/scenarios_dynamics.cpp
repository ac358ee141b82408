#include "gplab/error.hpp"
#include "gplab/gp.hpp"
#include "gplab/hierarchy.hpp"
#include "gplab/inequalities.hpp"
#include "gplab/manybody.hpp"
#include "scenario_defs.hpp"

namespace gplab::cli_io::detail {

namespace {

gp::GPParams gp_params(double sigma, double dt, double T, int stride = 0) {
  gp::GPParams p;
  p.sigma = sigma;
  p.dt = dt;
  p.T = T;
  p.snapshot_stride = stride;
  return p;
}

int grid_points(const ParamMap& p, const char* key = "points") {
  const long long m = p.integer(key);
  if (m < 4 || m > 4096 || !is_power_of_two(m)) throw InputError(std::string(key) + " must be a power of two in [4, 4096]");
  return static_cast<int>(m);
}

void gp_solver(const ParamMap& p, RunContext& ctx) {
  const auto g = TorusGrid::make(1, grid_points(p));
  const double dt = p.real("dt");

  // Plane-wave dispersion: least-squares slope of the unwrapped phase at x = 0.
  const double sigma_pw = p.real("plane_sigma"), A = p.real("plane_amplitude");
  const int k = static_cast<int>(p.integer("plane_k"));
  const auto u0 = gp::plane_wave(g, {k, 0, 0}, A);
  const auto pw = gp_params(sigma_pw, dt, 0.1, 1);
  const auto tr = gp::evolve_gp(u0, pw);
  auto& ph = ctx.table("dispersion", {"time", "phase"});
  double st = 0, sp = 0, stt = 0, stp = 0, prev = 0, unwrap = 0;
  for (std::size_t s = 0; s < tr.snapshots.size(); ++s) {
    const double a = std::arg(tr.snapshots[s].values[0] / u0.values[0]);
    if (s > 0) {
      double d = a - prev;
      d -= 2 * kPi * std::round(d / (2 * kPi));
      unwrap += d;
    }
    prev = a;
    const double t = tr.snapshots[s].time;
    ph.add({t, unwrap});
    st += t;
    sp += unwrap;
    stt += t * t;
    stp += t * unwrap;
  }
  const double n = static_cast<double>(tr.snapshots.size());
  const double slope = (n * stp - st * sp) / (n * stt - st * st);
  const double omega = std::pow(2 * kPi * k, 2) + sigma_pw * A * A;
  ctx.check_le("dispersion_rel_error", std::abs(-slope / omega - 1.0), 1e-8);

  // Conservation over T = 1.
  const double sigma = p.real("sigma");
  const auto sm = gp::smooth_field(g, p.real("conservation_eps"));
  const auto tc = gp::evolve_gp(sm, gp_params(sigma, dt, 1.0));
  const double e0 = gp::gp_energy(sm, sigma);
  const double e_drift = std::abs(gp::gp_energy(tc.snapshots.back(), sigma) - e0) / std::abs(e0);
  auto& c = ctx.table("conservation", {"steps", "max_mass_step_drift", "energy_rel_drift"});
  c.add({static_cast<long long>(tc.steps), tc.max_mass_step_drift, e_drift});
  ctx.check_le("mass_drift_per_step", tc.max_mass_step_drift, 1e-10);
  ctx.check_le("energy_rel_drift", e_drift, 1e-6);

  // Splitting order against a dt/8 reference.
  const double T = 0.2;
  const auto rough = gp::smooth_field(g, p.real("order_eps"));
  const auto ref = gp::evolve_gp(rough, gp_params(sigma, dt / 8, T)).snapshots.back().values;
  auto& o = ctx.table("order", {"dt", "sup_error"});
  const double e1 = gp::sup_distance(gp::evolve_gp(rough, gp_params(sigma, 2 * dt, T)).snapshots.back().values, ref);
  const double e2 = gp::sup_distance(gp::evolve_gp(rough, gp_params(sigma, dt, T)).snapshots.back().values, ref);
  o.add({2 * dt, e1});
  o.add({dt, e2});
  ctx.check_in("splitting_order", std::log2(e1 / e2), 1.9, 2.1);
  ctx.note("energy_drift_data", "smooth_field eps = " + format_real(p.real("conservation_eps")));
  ctx.plot({"order", "dt", {"sup_error"}, "Strang splitting error", true, true, true});
}

void gp_evolve(const ParamMap& p, RunContext& ctx) {
  const long long dim = p.integer("dim");
  if (dim != 1 && dim != 3) throw InputError("dim must be 1 or 3");
  const auto g = TorusGrid::make(static_cast<int>(dim), grid_points(p));
  const std::string& preset = p.text("preset");
  gp::WaveField u0;
  if (preset == "smooth") u0 = gp::smooth_field(g, p.real("eps"));
  else if (preset == "plane") u0 = gp::plane_wave(g, {static_cast<int>(p.integer("k")), 0, 0}, 1.0);
  else u0 = gp::constant_field(g, 1.0);
  auto gpp = gp_params(p.real("sigma"), p.real("dt"), p.real("T"), static_cast<int>(p.integer("stride")));
  gpp.dealias = p.boolean("dealias");
  if (gpp.snapshot_stride < 0) throw InputError("stride must be >= 0");
  const auto tr = gp::evolve_gp(u0, gpp);
  auto& t = ctx.table("trajectory", {"time", "mass", "energy", "kinetic"});
  for (const auto& s : tr.snapshots) t.add({s.time, gp::mass(s), gp::gp_energy(s, gpp.sigma), gp::kinetic_energy(s)});
  ctx.field("final", g, tr.snapshots.back().values);
  ctx.check_le("mass_drift_per_step", tr.max_mass_step_drift, 1e-10);
  ctx.note("kinetic_cfl", format_real(tr.kinetic_cfl));
  ctx.plot({"trajectory", "time", {"energy"}, "GP energy", false, false, false});
}

void hierarchy_identity(const ParamMap& p, RunContext& ctx) {
  const auto g = TorusGrid::make(1, grid_points(p));
  const double sigma = p.real("sigma"), T = p.real("T");
  const auto u0 = gp::smooth_field(g, p.real("eps"));
  const auto dts = p.reals("dts");
  if (dts.size() < 2) throw InputError("dts needs at least two steps");

  auto run = [&](double dt) {
    return gp::evolve_gp(u0, gp_params(sigma, dt, T, 1));
  };
  auto& s = ctx.table("strong", {"dt", "residual_k1", "residual_k2"});
  std::vector<std::vector<double>> res(2);
  for (double dt : dts) {
    const auto tr = run(dt);
    const int n = static_cast<int>(tr.snapshots.size());
    double r[2];
    for (int k = 1; k <= 2; ++k) {
      r[k - 1] = hierarchy::hierarchy_residual_strong(hierarchy::factorized_source(tr.snapshots, k), n, dt, sigma,
                                                      {n / 2})[0];
      res[k - 1].push_back(r[k - 1]);
    }
    s.add({dt, r[0], r[1]});
  }
  for (int k = 0; k < 2; ++k)
    for (std::size_t i = 1; i < res[k].size(); ++i)
      ctx.check_in("strong_ratio_k" + std::to_string(k + 1) + "[" + format_real(dts[i]) + "]", res[k][i - 1] / res[k][i],
                   3.5, 4.5);

  // Weak form with (dt, r = r') refined jointly.
  const auto J = hierarchy::smooth_test_functional(g, 1, static_cast<int>(p.integer("test_kmax")), ctx.seed());
  const auto wdt = p.reals("weak_dts"), wr = p.reals("weak_radii");
  if (wdt.size() != wr.size() || wdt.empty()) throw InputError("weak_dts and weak_radii must have equal nonzero length");
  auto& w = ctx.table("weak", {"dt", "r", "defect"});
  double last = 0.0;
  for (std::size_t i = 0; i < wdt.size(); ++i) {
    const auto tr = run(wdt[i]);
    const int n = static_cast<int>(tr.snapshots.size());
    const double r = wr[i] * g.spacing();
    last = hierarchy::weak_form_check(J, hierarchy::factorized_source(tr.snapshots, 1), n, wdt[i], sigma, r, r);
    w.add({wdt[i], r, last});
  }
  ctx.check_le("weak_defect_finest", last, 1e-3);
  ctx.plot({"strong", "dt", {"residual_k1", "residual_k2"}, "strong hierarchy residual", true, true, true});
  ctx.plot({"weak", "dt", {"defect"}, "weak-form defect", true, true, false});
}

void hierarchy_mollifier(const ParamMap& p, RunContext& ctx) {
  const auto g = TorusGrid::make(1, grid_points(p));
  const auto f = inequalities::make_ensemble(g, 1, static_cast<int>(p.integer("field_kmax")), ctx.seed(), 2);
  const auto J = hierarchy::smooth_test_functional(g, 1, static_cast<int>(p.integer("test_kmax")), ctx.seed() + 1);
  const auto betas = p.reals("betas");
  const auto rep = hierarchy::mollifier_rate_probe(f.fields[0], J, betas, betas);
  auto& t = ctx.table("mollifier", {"beta", "defect_beta1", "defect_beta2"});
  for (std::size_t i = 0; i < rep.beta1.size(); ++i) t.add({rep.beta1[i], rep.defect_beta1[i], rep.defect_beta2[i]});
  auto& s = ctx.table("mollifier_fit", {"slope_beta1", "slope_beta2", "fitted_c", "floor_defect"});
  s.add({rep.slope_beta1, rep.slope_beta2, rep.fitted_c, rep.floor_defect});
  ctx.check_ge("slope_beta1", rep.slope_beta1, 0.9);
  ctx.check_ge("slope_beta2", rep.slope_beta2, 0.45);
  ctx.plot({"mollifier", "beta", {"defect_beta1", "defect_beta2"}, "mollifier defect", true, true, true});
}

void manybody_oracle(const ParamMap& p, RunContext& ctx) {
  const auto g = TorusGrid::make(1, grid_points(p));
  const manybody::ScaledPotential v(twobody::RadialPotential::bump(p.real("support"), p.real("coupling")), g, 2);
  const auto s = manybody::product_state(gp::smooth_field(g, p.real("eps")).values, g, 2);
  const double T = p.real("T");
  const auto exact = manybody::dense_reference_evolution(s, v, T);
  auto sup_err = [&](double dt) {
    const auto tr = manybody::evolve_manybody(s, v, dt, T, 0);
    return gp::sup_distance(exact, tr.snapshots.back().psi);
  };
  auto& t = ctx.table("oracle", {"dt", "sup_error"});
  const double dt = p.real("dt");
  const double e_report = sup_err(p.real("report_dt")), e1 = sup_err(2 * dt), e2 = sup_err(dt);
  t.add({p.real("report_dt"), e_report});
  t.add({2 * dt, e1});
  t.add({dt, e2});
  ctx.check_le("sup_error", e2, 1e-6);
  ctx.check_in("oracle_ratio", e1 / e2, 3.5, 4.5);

  const double Tb = p.real("bbgky_T");
  auto& b = ctx.table("bbgky", {"dt", "residual"});
  std::vector<double> res;
  const auto bdts = p.reals("bbgky_dts");
  for (double d : bdts) {
    const auto tr = manybody::evolve_manybody(s, v, d, Tb);
    const int n = static_cast<int>(tr.snapshots.size()) - 1;
    const double r = manybody::bbgky_residual_k1(tr.snapshots, v, d, {n / 2})[0];
    b.add({d, r});
    res.push_back(r);
  }
  for (std::size_t i = 1; i < res.size(); ++i)
    ctx.check_in("bbgky_ratio[" + format_real(bdts[i]) + "]", res[i - 1] / res[i], 3.5, 4.5);
  ctx.note("potential_scaling", "V_a = N V(N x), d = 1");
  ctx.plot({"bbgky", "dt", {"residual"}, "BBGKY k = 1 residual", true, true, true});
}

}  // namespace

void register_dynamics(std::vector<Scenario>& out) {
  out.push_back({"gp.solver", "gp", "gp", "dispersion, conservation and splitting order of the GP solver", 5, 60.0,
                 {int_param("points", "64", "grid points"), real_param("dt", "1e-3", "time step"),
                  int_param("plane_k", "2", "plane-wave wavenumber"), real_param("plane_sigma", "4", "coupling for the dispersion run"),
                  real_param("plane_amplitude", "0.9", "plane-wave amplitude"),
                  real_param("sigma", "8", "coupling for conservation and order"),
                  real_param("conservation_eps", "0.01", "modulation of the conservation data"),
                  real_param("order_eps", "0.3", "modulation of the order data")},
                 gp_solver});
  out.push_back({"gp.evolve", "gp", "gp", "GP trajectory with mass and energy; final field as binary", 0, 0.0,
                 {int_param("dim", "1", "1 or 3"), int_param("points", "64", "grid points per side"),
                  text_param("preset", "smooth", "initial data", {"smooth", "plane", "constant"}),
                  real_param("eps", "0.3", "smooth-field modulation"), int_param("k", "1", "plane-wave wavenumber"),
                  real_param("sigma", "8", "coupling"), real_param("dt", "1e-3", "time step"),
                  real_param("T", "0.1", "final time"), int_param("stride", "10", "snapshot stride"),
                  {"dealias", ParamType::Bool, "false", "2/3 dealiasing", {}}},
                 gp_evolve});
  out.push_back({"hierarchy.identity", "hierarchy", "hierarchy", "strong and weak hierarchy residuals on factorized GP data",
                 6, 120.0,
                 {int_param("points", "32", "grid points"), real_param("sigma", "8", "coupling"),
                  real_param("eps", "0.3", "smooth-field modulation"), real_param("T", "0.02", "final time"),
                  reals_param("dts", "1e-3, 5e-4", "strong-residual time steps"),
                  int_param("test_kmax", "3", "band limit of the test functional"),
                  reals_param("weak_dts", "2e-3, 1e-3, 5e-4", "weak-form time steps"),
                  reals_param("weak_radii", "4, 2, 1.5", "mollifier radii in grid spacings")},
                 hierarchy_identity});
  out.push_back({"hierarchy.mollifier", "hierarchy", "hierarchy", "defect exponents of the mollified diagonal", 8, 60.0,
                 {int_param("points", "128", "grid points"), int_param("field_kmax", "3", "band limit of the state"),
                  int_param("test_kmax", "2", "band limit of the test functional"),
                  reals_param("betas", "0.2, 0.1, 0.05, 0.025", "beta sweep")},
                 hierarchy_mollifier});
  out.push_back({"manybody.oracle", "manybody", "manybody", "N = 2 split-step against the dense propagator; BBGKY order",
                 7, 120.0,
                 {int_param("points", "32", "grid points"), real_param("support", "0.9", "bump support"),
                  real_param("coupling", "1", "bump coupling"), real_param("eps", "0.3", "smooth-field modulation"),
                  real_param("T", "0.1", "oracle time"), real_param("dt", "1e-4", "asserted time step"),
                  real_param("report_dt", "1e-3", "reported time step"), real_param("bbgky_T", "0.02", "BBGKY time"),
                  reals_param("bbgky_dts", "1e-3, 5e-4, 2.5e-4", "BBGKY time steps")},
                 manybody_oracle});
}

}  // namespace gplab::cli_io::detail
