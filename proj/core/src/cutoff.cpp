#include "gplab/cutoff.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gplab/error.hpp"
#include "gplab/grid.hpp"

namespace gplab::cutoff {

namespace {

double psi_smooth(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }

// Radial function f(|x|) at displacement x: gradient and Hessian.
Vec radial_grad(double d1, const Vec& x, double r) { return r > 0.0 ? Vec(d1 / r * x) : Vec::Zero(); }

Mat radial_hess(double d1, double d2, const Vec& x, double r, int dim) {
  Mat id = Mat::Zero();
  for (int a = 0; a < dim; ++a) id(a, a) = 1.0;
  if (r <= 0.0) return d2 * id;
  const Vec u = x / r;
  return d2 * u * u.transpose() + d1 / r * (id - u * u.transpose());
}

double radial_lap(double d1, double d2, double r, int dim) {
  if (r <= 0.0) return dim * d2;
  return d2 + (dim - 1) * d1 / r;
}

}  // namespace

void CutoffParams::validate() const {
  auto fail = [](const std::string& what) { throw InputError("cutoff scales violate " + what); };
  if (dim != 1 && dim != 3) fail("dim in {1, 3}");
  if (n < 2) fail("N >= 2");
  if (!(eps > 0.0 && eps < 0.1)) fail("0 < eps < 1/10");
  if (!(K > 0.0)) fail("K > 0");
  if (dim == 3 && !(a > 0.0 && a < ell1 / 10)) fail("a < ell1/10");
  if (!(ell1 > 0.0 && ell1 / 10 < ell / 100)) fail("ell1/10 < ell/100");
  if (!(ell / 100 < 0.01)) fail("ell/100 < 1/100");
}

double CutoffParams::scale_product() const { return a * ell1 / std::pow(ell, 4); }
double CutoffParams::theta_radius() const { return K * ell * std::abs(std::log(ell)); }

double theta(double s) {
  if (s <= 1.0) return 1.0;
  if (s >= 2.0) return 0.0;
  const double a = psi_smooth(2.0 - s), b = psi_smooth(s - 1.0);
  return a / (a + b);
}

Radial h_profile(double r, double ell) {
  const double s = std::sqrt(r * r + ell * ell);
  const double v = std::exp(-s / ell);
  return {v, -r / (ell * s) * v, v * (r * r / (ell * ell * s * s) - ell / (s * s * s))};
}

StepFunction StepFunction::triple(double ell, double eps) {
  StepFunction f;
  f.kind_ = Kind::Triple;
  f.scale_ = std::pow(ell, eps);
  return f;
}

StepFunction StepFunction::nbody(int n, double ell, double eps) {
  if (n < 3) throw InputError("n-body cutoff needs n >= 3");
  StepFunction f;
  f.kind_ = Kind::Smooth;
  f.n_ = n;
  f.scale_ = std::pow(ell, eps);
  return f;
}

StepFunction StepFunction::nbody_exponential(int n, double ell, double eps) {
  auto f = nbody(n, ell, eps);
  f.kind_ = Kind::Exponential;
  return f;
}

Radial StepFunction::operator()(double u) const {
  const double s = scale_;
  if (kind_ == Kind::Triple) {
    const double v = std::exp(-u / s);
    return {v, -v / s, v / (s * s)};
  }
  const double x = (u - (n_ - 3)) / s;
  if (x <= 0.0) return {1.0, 0.0, 0.0};
  if (kind_ == Kind::Exponential) {
    const double v = std::exp(-x);
    return {v, -v / s, v / (s * s)};
  }
  const double v = std::exp(-x * x / (x + 1.0));
  const double g = 1.0 - 1.0 / ((x + 1.0) * (x + 1.0));
  const double dg = 2.0 / ((x + 1.0) * (x + 1.0) * (x + 1.0));
  return {v, -g * v / s, v * (g * g - dg) / (s * s)};
}

Vec Configuration::displacement(int i, int j) const {
  Vec d = Vec::Zero();
  for (int a = 0; a < dim; ++a) d[a] = min_image(x[i][a] - x[j][a]);
  return d;
}

ConfigSampler::ConfigSampler(std::uint64_t seed, double near_min, double near_max, double cluster_fraction)
    : state_(seed), near_min_(near_min), near_max_(near_max), fraction_(cluster_fraction) {
  if (!(near_min > 0.0 && near_max >= near_min)) throw InputError("sampler needs 0 < near_min <= near_max");
}

// splitmix64
double ConfigSampler::uniform() {
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return static_cast<double>(z >> 11) * 0x1.0p-53;
}

Configuration ConfigSampler::draw(int n, int dim) {
  Configuration c;
  c.dim = dim;
  c.x.assign(n, Vec::Zero());
  for (int i = 0; i < n; ++i) {
    if (i > 0 && uniform() < fraction_) {
      const int parent = std::min(i - 1, static_cast<int>(uniform() * i));
      const double r = near_min_ * std::pow(near_max_ / near_min_, uniform());
      Vec dir = Vec::Zero();
      if (dim == 1) {
        dir[0] = uniform() < 0.5 ? -1.0 : 1.0;
      } else {
        const double z = 2.0 * uniform() - 1.0, phi = 2.0 * kPi * uniform(), s = std::sqrt(1.0 - z * z);
        dir << s * std::cos(phi), s * std::sin(phi), z;
      }
      for (int a = 0; a < dim; ++a) {
        double v = c.x[parent][a] + r * dir[a];
        v -= std::floor(v);
        c.x[i][a] = v < 1.0 ? v : 0.0;
      }
    } else {
      for (int a = 0; a < dim; ++a) c.x[i][a] = uniform();
    }
  }
  return c;
}

CorrelationFields eval_fields(const Configuration& cfg, const CutoffParams& p, const twobody::SofteningProfile& sp,
                              const StepFunction& step) {
  p.validate();
  if (cfg.dim != p.dim || sp.dim() != p.dim) throw InputError("configuration, parameters and profile dimension differ");
  const int n = cfg.size();
  if (n < 2) throw InputError("configuration needs >= 2 particles");
  for (const auto& x : cfg.x)
    for (int a = 0; a < cfg.dim; ++a)
      if (!(x[a] >= 0.0 && x[a] < 1.0)) throw InputError("configuration coordinates must lie in [0, 1)");
  CorrelationFields f;
  f.n = n;
  f.dim = cfg.dim;
  const std::size_t nn = static_cast<std::size_t>(n) * n;
  for (auto* t : {&f.dist, &f.h, &f.count, &f.F, &f.theta, &f.w, &f.dw, &f.lap_w, &f.q, &f.M}) t->assign(nn, 0.0);
  const double trad = p.theta_radius();
  std::vector<double> hsum(n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double r = cfg.distance(i, j);
      const double hv = h_profile(r, p.ell).v;
      const auto wv = sp.interpolate(r);
      for (auto [a, b] : {std::pair{i, j}, std::pair{j, i}}) {
        const std::size_t k = static_cast<std::size_t>(a) * n + b;
        f.dist[k] = r;
        f.h[k] = hv;
        f.theta[k] = theta(r / trad);
        f.w[k] = wv.w;
        f.dw[k] = wv.dw;
        f.lap_w[k] = radial_lap(wv.dw, wv.d2w, r, cfg.dim);
        f.q[k] = wv.q;
      }
      hsum[i] += hv;
      hsum[j] += hv;
    }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) {
        const std::size_t k = static_cast<std::size_t>(i) * n + j;
        // N_ij = sum_{k != i,j} h_ki + h_kj
        f.count[k] = std::max(0.0, hsum[i] + hsum[j] - 2.0 * f.h[k]);
        f.F[k] = step(f.count[k]).v;
      }
  f.G.assign(n, 1.0);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 0; j < n; ++j)
      if (j != i) s += f.at(f.w, i, j) * f.at(f.F, i, j);
    f.G[i] = 1.0 - s;
    if (!(f.G[i] > 0.0)) throw NumericalError("G_i <= 0: cutoff fields undefined");
    f.log_W += 0.5 * std::log(f.G[i]);
  }
  f.W = std::exp(f.log_W);
  const auto& V = sp.potential();
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j) {
      if (j == k) continue;
      const std::size_t id = static_cast<std::size_t>(k) * n + j;
      f.M[id] = 0.5 * f.F[id] * (1.0 / f.G[j] + 1.0 / f.G[k]);
      const double vkj = V(f.dist[id]);
      const double sub = 0.5 * vkj - f.q[id];
      if (sub != 0.0) f.correction -= sub * (1.0 - (1.0 - f.w[id]) * f.M[id]);
      f.q_sum += f.q[id];
      if (j > k) f.v_sum += vkj;
    }
  return f;
}

CorrelationFields eval_fields(const Configuration& cfg, const CutoffParams& p, const twobody::SofteningProfile& sp) {
  return eval_fields(cfg, p, sp, StepFunction::triple(p.ell, p.eps));
}

double modified_correction(const Configuration& cfg, const CutoffParams& p, const twobody::SofteningProfile& sp) {
  return eval_fields(cfg, p, sp).correction;
}

double nbody_variant(const Configuration& cfg, const CutoffParams& p, const twobody::SofteningProfile& sp, int n,
                     bool exponential) {
  auto step = exponential ? StepFunction::nbody_exponential(n, p.ell, p.eps) : StepFunction::nbody(n, p.ell, p.eps);
  return eval_fields(cfg, p, sp, step).correction;
}

double removed_particle_ratio(const Configuration& cfg, const CutoffParams& p, const twobody::SofteningProfile& sp,
                              const std::vector<int>& removed) {
  const int n = cfg.size();
  std::vector<char> gone(n, 0);
  for (int k : removed) {
    if (k < 0 || k >= n) throw InputError("removed index out of range");
    if (gone[k]) throw InputError("duplicate removed index");
    gone[k] = 1;
  }
  if (static_cast<int>(removed.size()) >= n) throw InputError("need alpha < N");
  auto f = eval_fields(cfg, p, sp);
  if (removed.empty()) return 1.0;
  const auto step = StepFunction::triple(p.ell, p.eps);
  std::vector<double> hsum(n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int u = 0; u < n; ++u)
      if (u != i && !gone[u]) hsum[i] += f.at(f.h, i, u);
  double log_wk = 0.0;
  for (int i = 0; i < n; ++i) {
    if (gone[i]) continue;
    double s = 0.0;
    for (int m = 0; m < n; ++m) {
      if (m == i || gone[m]) continue;
      const double w = f.at(f.w, i, m);
      if (w == 0.0) continue;
      const double cnt = std::max(0.0, hsum[i] + hsum[m] - 2.0 * f.at(f.h, i, m));
      s += w * step(cnt).v;
    }
    if (!(1.0 - s > 0.0)) throw NumericalError("G_i^(k) <= 0");
    log_wk += 0.5 * std::log(1.0 - s);
  }
  return std::exp(log_wk - f.log_W);
}

FieldDerivatives::FieldDerivatives(const Configuration& cfg, const CutoffParams& p,
                                   const twobody::SofteningProfile& sp, const StepFunction& step)
    : cfg_(cfg), p_(p), step_(step), f_(eval_fields(cfg, p, sp, step)) {
  const int n = f_.n;
  const std::size_t nn = static_cast<std::size_t>(n) * n;
  gh_.assign(nn, Vec::Zero());
  gw_.assign(nn, Vec::Zero());
  hh_.assign(nn, Mat::Zero());
  gh_sum_.assign(n, Vec::Zero());
  hh_sum_.assign(n, Mat::Zero());
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      if (a == b) continue;
      const Vec x = cfg.displacement(a, b);
      const double r = f_.at(f_.dist, a, b);
      const auto hv = h_profile(r, p.ell);
      gh_[idx(a, b)] = radial_grad(hv.d1, x, r);
      hh_[idx(a, b)] = radial_hess(hv.d1, hv.d2, x, r, cfg.dim);
      gw_[idx(a, b)] = radial_grad(f_.at(f_.dw, a, b), x, r);
      gh_sum_[a] += gh_[idx(a, b)];
      hh_sum_[a] += hh_[idx(a, b)];
      if (f_.at(f_.w, a, b) != 0.0) w_pairs_.push_back(static_cast<int>(idx(a, b)));
    }
}

FieldDerivatives::FieldDerivatives(const Configuration& cfg, const CutoffParams& p,
                                   const twobody::SofteningProfile& sp)
    : FieldDerivatives(cfg, p, sp, StepFunction::triple(p.ell, p.eps)) {}

Vec FieldDerivatives::grad_count(int i, int j, int k) const {
  if (k == i) return gh_sum_[i] - gh_[idx(i, j)];
  if (k == j) return gh_sum_[j] - gh_[idx(j, i)];
  return gh_[idx(k, i)] + gh_[idx(k, j)];
}

Mat FieldDerivatives::hess_count(int i, int j, int k, int m) const {
  auto inside = [&](int a) { return a == i || a == j; };
  if (k == m) {
    if (k == i) return hh_sum_[i] - hh_[idx(i, j)];
    if (k == j) return hh_sum_[j] - hh_[idx(j, i)];
    return hh_[idx(k, i)] + hh_[idx(k, j)];
  }
  if (inside(k) && inside(m)) return Mat::Zero();
  if (!inside(k) && !inside(m)) return Mat::Zero();
  const int out = inside(k) ? m : k, in = inside(k) ? k : m;
  return -hh_[idx(out, in)];
}

Vec FieldDerivatives::grad_F(int i, int j, int k, double q) const {
  const auto s = step_(f_.at(f_.count, i, j));
  const double d1 = q == 1.0 ? s.d1 : q * std::pow(s.v, q - 1.0) * s.d1;
  return d1 * grad_count(i, j, k);
}

Mat FieldDerivatives::hess_F(int i, int j, int k, int m, double q) const {
  const auto s = step_(f_.at(f_.count, i, j));
  double d1 = s.d1, d2 = s.d2;
  if (q != 1.0) {
    d1 = q * std::pow(s.v, q - 1.0) * s.d1;
    d2 = q * (q - 1.0) * std::pow(s.v, q - 2.0) * s.d1 * s.d1 + q * std::pow(s.v, q - 1.0) * s.d2;
  }
  return d2 * grad_count(i, j, k) * grad_count(i, j, m).transpose() + d1 * hess_count(i, j, k, m);
}

double FieldDerivatives::lap_F(int i, int j, int k) const {
  const auto s = step_(f_.at(f_.count, i, j));
  const Vec g = grad_count(i, j, k);
  return s.d2 * g.squaredNorm() + s.d1 * hess_count(i, j, k, k).trace();
}

Vec FieldDerivatives::grad_G(int i, int k) const {
  Vec g = Vec::Zero();
  for (int id : w_pairs_) {
    const int a = id / f_.n, b = id % f_.n;
    if (a != i) continue;
    const double F = f_.F[id];
    if (k == i) g -= gw_[id] * F;
    if (k == b) g += gw_[id] * F;
    g -= f_.w[id] * grad_F(i, b, k);
  }
  return g;
}

double FieldDerivatives::lap_G(int i, int k) const {
  double s = 0.0;
  for (int id : w_pairs_) {
    const int a = id / f_.n, b = id % f_.n;
    if (a != i) continue;
    const double F = f_.F[id];
    const Vec gF = grad_F(i, b, k);
    if (k == i || k == b) s -= f_.lap_w[id] * F;
    if (k == i) s -= 2.0 * gw_[id].dot(gF);
    if (k == b) s += 2.0 * gw_[id].dot(gF);
    s -= f_.w[id] * lap_F(i, b, k);
  }
  return s;
}

Vec FieldDerivatives::grad_log_W(int k) const {
  Vec g = Vec::Zero();
  for (int i = 0; i < f_.n; ++i) g += 0.5 * grad_G(i, k) / f_.G[i];
  return g;
}

FieldDerivatives::Omega FieldDerivatives::omega() const {
  const int n = f_.n;
  Omega o;
  std::vector<char> active(n, 0);
  for (int id : w_pairs_) active[id / n] = 1;
  std::vector<Vec> g(n);
  for (int k = 0; k < n; ++k) {
    Vec sum = Vec::Zero();
    double sq = 0.0;
    for (int i = 0; i < n; ++i) {
      if (!active[i]) continue;
      // -Delta_k G_i without the (Delta w) F part.
      double rest = 0.0;
      for (int id : w_pairs_) {
        if (id / n != i) continue;
        const int b = id % n;
        const Vec gF = grad_F(i, b, k);
        if (k == i) rest += 2.0 * gw_[id].dot(gF);
        if (k == b) rest -= 2.0 * gw_[id].dot(gF);
        rest += f_.w[id] * lap_F(i, b, k);
      }
      o.first += rest / (2.0 * f_.G[i]);
      o.magnitude += std::abs(rest / (2.0 * f_.G[i]));
      g[i] = grad_G(i, k) / f_.G[i];
      sum += g[i];
      sq += g[i].squaredNorm();
    }
    o.quadratic += 0.25 * (2.0 * sq - sum.squaredNorm());
    o.magnitude += 0.25 * (2.0 * sq + sum.squaredNorm());
  }
  // Gamma = s_ij [ (grad w)_ik w_jl F_ik (grad_k F_jl - grad_i F_jl)/(2 G_i G_j)
  //               - w_il w_js grad_k F_il . grad_k F_js / (4 G_i G_j) ]
  double g1 = 0.0, g2 = 0.0;
  for (int a : w_pairs_) {
    const int i = a / n, k = a % n;
    for (int b : w_pairs_) {
      const int j = b / n, l = b % n;
      const double s = i == j ? -1.0 : 1.0;
      const Vec d = grad_F(j, l, k) - grad_F(j, l, i);
      const double t = gw_[a].dot(d) * f_.w[b] * f_.F[a] / (2.0 * f_.G[i] * f_.G[j]);
      g1 += s * t;
      o.magnitude += std::abs(t);
    }
  }
  for (int a : w_pairs_) {
    const int i = a / n, l = a % n;
    for (int b : w_pairs_) {
      const int j = b / n, s2 = b % n;
      const double s = i == j ? -1.0 : 1.0;
      double dot = 0.0;
      for (int k = 0; k < n; ++k) dot += grad_F(i, l, k).dot(grad_F(j, s2, k));
      const double t = f_.w[a] * f_.w[b] * dot / (4.0 * f_.G[i] * f_.G[j]);
      g2 += s * t;
      o.magnitude += std::abs(t);
    }
  }
  o.gamma = g1 - g2;
  return o;
}

double omega_by_differences(const Configuration& cfg, const CutoffParams& p, const twobody::SofteningProfile& sp,
                            double step) {
  const auto base = eval_fields(cfg, p, sp);
  double lap = 0.0;
  for (int k = 0; k < cfg.size(); ++k)
    for (int a = 0; a < cfg.dim; ++a) {
      double vals[4];
      const double offs[4] = {-2.0, -1.0, 1.0, 2.0};
      for (int s = 0; s < 4; ++s) {
        Configuration c = cfg;
        double v = c.x[k][a] + offs[s] * step;
        v -= std::floor(v);
        c.x[k][a] = v < 1.0 ? v : 0.0;
        vals[s] = eval_fields(c, p, sp).W;
      }
      lap += (-vals[0] + 16.0 * vals[1] - 30.0 * base.W + 16.0 * vals[2] - vals[3]) / (12.0 * step * step);
    }
  const double B = -lap / base.W + base.v_sum + base.correction;
  return B - base.q_sum;
}

bool OmegaCheck::routes_agree() const {
  return std::abs(omega_a - omega_b) <= 4.0 * fd_change + identity_floor + 1e-12 * scale;
}

OmegaCheck omega_decomposition_check(const Configuration& cfg, const CutoffParams& p,
                                     const twobody::SofteningProfile& sp) {
  FieldDerivatives d(cfg, p, sp);
  const auto o = d.omega();
  OmegaCheck c;
  c.omega_b = o.omega();
  c.omega_tilde = o.omega_tilde();
  c.scale = o.magnitude;
  const double h = 0.0025 * p.ell1;
  c.omega_a = omega_by_differences(cfg, p, sp, h);
  c.fd_change = std::abs(c.omega_a - omega_by_differences(cfg, p, sp, 2.0 * h));
  const auto& f = d.fields();
  for (int k = 0; k < f.n; ++k)
    for (int j = 0; j < f.n; ++j) {
      const double r = f.at(f.dist, k, j);
      if (j == k || f.at(f.w, k, j) == 0.0) continue;
      const auto e = sp.evaluate(r);
      const double res = radial_lap(e.dw, e.d2w, r, f.dim) + (0.5 * sp.potential()(r) - e.q) * (1.0 - e.w);
      c.identity_floor += f.at(f.M, k, j) * std::abs(res);
    }
  return c;
}

}  // namespace gplab::cutoff
