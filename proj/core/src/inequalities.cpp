#include "gplab/inequalities.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "gplab/bump.hpp"
#include "gplab/error.hpp"
#include "gplab/spectral.hpp"

namespace gplab::inequalities {

namespace {

double node_radius(const TorusGrid& g, std::size_t flat) {
  int digits[3] = {0, 0, 0};
  for (int a = 0; a < g.dim; ++a) digits[a] = axis_digit(flat, a, g.dim, g.points);
  return grid_distance(g, digits);
}

std::vector<double> radii(const TorusGrid& g) {
  std::vector<double> r(g.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = node_radius(g, i);
  return r;
}

// sum_axis |d f / d x_axis|^2 over all rank axes.
std::vector<double> grad_squared(const CVec& f, const Spectral& fft) {
  std::vector<double> out(f.size(), 0.0);
  for (int a = 0; a < fft.rank(); ++a) {
    const CVec d = fft.derivative(f, a);
    for (std::size_t i = 0; i < f.size(); ++i) out[i] += std::norm(d[i]);
  }
  return out;
}

// (K * a)(x) = sum_y K(y) a(x - y) cell_volume with K sampled at min-image offsets.
CVec convolve(const CVec& a, const std::vector<double>& K, const Spectral& fft) {
  CVec fa = a, fk(K.begin(), K.end());
  fft.forward(fa);
  fft.forward(fk);
  for (std::size_t i = 0; i < fa.size(); ++i) fa[i] *= fk[i];
  fft.backward(fa);
  const double cv = fft.grid().cell_volume();
  for (auto& v : fa) v *= cv;
  return fa;
}

double ratio_of(double lhs, double rhs) { return rhs > 0.0 ? lhs / rhs : (lhs > 0.0 ? INFINITY : 0.0); }

double max_of(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, x);
  return m;
}

void check_fields(const TestEnsemble& e, const TorusGrid& g, int slots) {
  if (e.grid != g) throw InputError("ensemble and weight live on different grids");
  if (e.slots != slots) throw InputError("ensemble has the wrong number of slots");
}

}  // namespace

TestEnsemble make_ensemble(const TorusGrid& g, int count, int k_max, std::uint64_t seed, int slots) {
  if (count < 1) throw InputError("ensemble needs at least one field");
  if (slots < 1 || slots > 2) throw InputError("ensemble slots must be 1 or 2");
  if (k_max < 0 || 2 * k_max >= g.points) throw InputError("band limit must satisfy 0 <= k_max < M/2");
  TestEnsemble e;
  e.grid = g;
  e.slots = slots;
  e.k_max = k_max;
  e.seed = seed;
  Spectral fft(g, slots);
  const int side = 2 * k_max + 1, rank = fft.rank();
  const std::size_t tuples = ipow(side, rank);
  const double cv = std::pow(g.cell_volume(), slots);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  for (int c = 0; c < count; ++c) {
    CVec hat(fft.size(), 0.0);
    for (std::size_t t = 0; t < tuples; ++t) {
      std::size_t rem = t, flat = 0;
      for (int a = 0; a < rank; ++a) {
        const int k = static_cast<int>(rem % side) - k_max;
        rem /= side;
        flat = flat * g.points + static_cast<std::size_t>((k + g.points) % g.points);
      }
      const double re = n01(rng), im = n01(rng);
      hat[flat] = cplx(re, im);
    }
    fft.backward(hat);
    double n2 = 0.0;
    for (const auto& v : hat) n2 += std::norm(v);
    const double s = 1.0 / std::sqrt(n2 * cv);
    for (auto& v : hat) v *= s;
    e.fields.push_back(std::move(hat));
  }
  return e;
}

TestEnsemble ensemble_of(const TorusGrid& g, std::vector<CVec> fields, int slots) {
  TestEnsemble e;
  e.grid = g;
  e.slots = slots;
  const std::size_t size = ipow(g.size(), slots);
  for (const auto& f : fields)
    if (f.size() != size) throw InputError("field size does not match the grid");
  e.fields = std::move(fields);
  return e;
}

WeightFunction WeightFunction::lambda(const TorusGrid& g, double ell1) {
  if (!(ell1 > 0.0)) throw InputError("lambda weight needs ell1 > 0");
  WeightFunction w = custom(
      g, [ell1](double r) { return r <= 1.5 * ell1 ? 1.0 / (r * r) : 0.0; }, "lambda", true);
  w.kind = Kind::Lambda;
  w.ell1 = ell1;
  return w;
}

WeightFunction WeightFunction::sigma(const TorusGrid& g, double ell1, double a) {
  if (!(ell1 > 0.0 && a > 0.0)) throw InputError("sigma weight needs ell1 > 0 and a > 0");
  WeightFunction w = custom(
      g, [ell1, a](double r) { return r <= 1.5 * ell1 ? 1.0 / (r * r * r + a * a * a) : 0.0; }, "sigma");
  w.kind = Kind::Sigma;
  w.ell1 = ell1;
  w.a = a;
  return w;
}

WeightFunction WeightFunction::custom(const TorusGrid& g, const std::function<double(double)>& u, std::string label,
                                      bool exclude_origin) {
  WeightFunction w;
  w.grid = g;
  w.label = std::move(label);
  const auto r = radii(g);
  w.values.resize(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    w.values[i] = (exclude_origin && i == 0) ? 0.0 : u(r[i]);
    if (!std::isfinite(w.values[i])) throw InputError("weight " + w.label + " is not finite on the grid");
  }
  return w;
}

WeightFunction WeightFunction::constant(const TorusGrid& g, double c) {
  return custom(g, [c](double) { return c; }, "constant");
}

WeightFunction WeightFunction::bump(const TorusGrid& g, double width, double mass) {
  WeightFunction w;
  w.grid = g;
  w.label = "bump";
  w.values = grid_mollifier(g, width);
  for (auto& v : w.values) v *= mass;
  return w;
}

double WeightFunction::norm(double p) const {
  double s = 0.0;
  for (double v : values) s += std::pow(std::abs(v), p);
  return std::pow(s * grid.cell_volume(), 1.0 / p);
}

std::vector<std::size_t> ball_nodes(const TorusGrid& g, double r) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (node_radius(g, i) <= r) out.push_back(i);
  return out;
}

HardyReport hardy_ball_probe(const WeightFunction& U, const TestEnsemble& e, double ell, double c_bound) {
  check_fields(e, U.grid, 1);
  const auto& g = U.grid;
  if (!(ell > 0.0 && ell <= 0.5)) throw InputError("hardy ball radius must lie in (0, 1/2]");
  const auto ball = ball_nodes(g, ell);
  if (ball.size() < 2) throw InputError("hardy ball contains fewer than two grid nodes");
  HardyReport rep;
  rep.ell = ell;
  rep.ball_points = static_cast<int>(ball.size());
  for (std::size_t i : ball) {
    const double r = node_radius(g, i), u = U.values[i];
    if (u < 0.0) throw InputError("weight " + U.label + " is negative on the ball");
    if (r > 0.0 && u * r * r > c_bound * (1.0 + 1e-12))
      throw InputError("weight " + U.label + " exceeds c/|x|^2 on the ball");
    rep.mean_U += u;
  }
  const double nb = static_cast<double>(ball.size());
  rep.mean_U /= nb;
  Spectral fft(g, 1);
  const int count = e.count();
  rep.lhs.assign(count, 0.0);
  rep.grad.assign(count, 0.0);
  rep.mass.assign(count, 0.0);
  rep.ratio.assign(count, 0.0);
#pragma omp parallel for schedule(static)
  for (int c = 0; c < count; ++c) {
    const auto& f = e.fields[c];
    const auto g2 = grad_squared(f, fft);
    double lhs = 0.0, grad = 0.0, mass = 0.0;
    for (std::size_t i : ball) {
      lhs += U.values[i] * std::norm(f[i]);
      grad += g2[i];
      mass += std::norm(f[i]);
    }
    rep.lhs[c] = lhs / nb;
    rep.grad[c] = grad / nb;
    rep.mass[c] = mass / nb;
    rep.ratio[c] = ratio_of(rep.lhs[c], rep.grad[c] + rep.mean_U * rep.mass[c]);
  }
  rep.C = max_of(rep.ratio);
  return rep;
}

SobolevReport sob1_probe(const WeightFunction& U, const TestEnsemble& e) {
  check_fields(e, U.grid, 1);
  for (double v : U.values)
    if (v < 0.0) throw InputError("sob1 needs U >= 0");
  const auto& g = U.grid;
  SobolevReport rep;
  rep.norm_U = U.norm(1.5);
  Spectral fft(g, 1);
  const double cv = g.cell_volume();
  const int count = e.count();
  rep.lhs.assign(count, 0.0);
  rep.rhs.assign(count, 0.0);
  rep.ratio.assign(count, 0.0);
#pragma omp parallel for schedule(static)
  for (int c = 0; c < count; ++c) {
    const auto& f = e.fields[c];
    const auto g2 = grad_squared(f, fft);
    double lhs = 0.0, h1 = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      lhs += U.values[i] * std::norm(f[i]);
      h1 += g2[i] + std::norm(f[i]);
    }
    rep.lhs[c] = lhs * cv;
    rep.rhs[c] = rep.norm_U * h1 * cv;
    rep.ratio[c] = ratio_of(rep.lhs[c], rep.rhs[c]);
  }
  rep.C = max_of(rep.ratio);
  return rep;
}

SobolevReport two_delta_probe(const WeightFunction& U, const TestEnsemble& pairs) {
  check_fields(pairs, U.grid, 2);
  const auto& g = U.grid;
  const std::size_t n1 = g.size();
  if (n1 * n1 > (std::size_t{1} << 24)) throw InputError("two-slot grid too large (more than 2^24 nodes)");
  SobolevReport rep;
  rep.norm_U = U.norm(1.0);
  Spectral fft(g, 2);
  const double cv = g.cell_volume() * g.cell_volume();
  // (1 - Delta_x)(1 - Delta_y) is separable over slots, not over axes, so build it per flat index.
  std::vector<double> symbol(fft.size());
  for (std::size_t i = 0; i < symbol.size(); ++i) {
    double kx = 0.0, ky = 0.0;
    for (int a = 0; a < g.dim; ++a) {
      kx += fft.k2(axis_digit(i, a, fft.rank(), g.points));
      ky += fft.k2(axis_digit(i, g.dim + a, fft.rank(), g.points));
    }
    symbol[i] = (1.0 + kx) * (1.0 + ky);
  }
  // U(x - y) via the min-image index difference per axis.
  std::vector<double> pair_weight(fft.size());
  for (std::size_t i = 0; i < pair_weight.size(); ++i) {
    std::size_t d = 0;
    for (int a = 0; a < g.dim; ++a) {
      const int x = axis_digit(i, a, fft.rank(), g.points), y = axis_digit(i, g.dim + a, fft.rank(), g.points);
      d = d * g.points + static_cast<std::size_t>(((x - y) % g.points + g.points) % g.points);
    }
    pair_weight[i] = U.values[d];
  }
  const int count = pairs.count();
  rep.lhs.assign(count, 0.0);
  rep.rhs.assign(count, 0.0);
  rep.ratio.assign(count, 0.0);
  for (int c = 0; c < count; ++c) {
    const auto& f = pairs.fields[c];
    double lhs = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) lhs += pair_weight[i] * std::norm(f[i]);
    CVec hat = f;
    fft.forward(hat);
    double form = 0.0;
    for (std::size_t i = 0; i < hat.size(); ++i) form += symbol[i] * std::norm(hat[i]);
    // Parseval: sum |f|^2 = sum |hat|^2 / size
    form /= static_cast<double>(hat.size());
    rep.lhs[c] = lhs * cv;
    rep.rhs[c] = rep.norm_U * form * cv;
    rep.ratio[c] = ratio_of(rep.lhs[c], rep.rhs[c]);
  }
  rep.C = max_of(rep.ratio);
  return rep;
}

void poincare_sides(const CVec& f, const TorusGrid& g, double beta, std::vector<double>& L, std::vector<double>& R) {
  if (!(beta > 0.0 && beta < 0.5)) throw InputError("mollifier scale must lie in (0, 1/2)");
  Spectral fft(g, 1);
  const CVec smooth = convolve(f, grid_mollifier(g, beta), fft);
  const auto r = radii(g);
  std::vector<double> K(g.size(), 0.0);
  for (std::size_t i = 1; i < K.size(); ++i)
    if (r[i] <= beta) K[i] = std::pow(r[i], -(g.dim - 1));
  const auto g2 = grad_squared(f, fft);
  CVec absgrad(g2.size());
  for (std::size_t i = 0; i < g2.size(); ++i) absgrad[i] = std::sqrt(g2[i]);
  const CVec conv = convolve(absgrad, K, fft);
  L.resize(f.size());
  R.resize(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    L[i] = std::abs(f[i] - smooth[i]);
    R[i] = std::max(0.0, conv[i].real());
  }
}

PoincareReport poincare_mollifier_probe(const TestEnsemble& e, const std::vector<double>& betas) {
  if (e.slots != 1) throw InputError("poincare probe works on single-slot fields");
  if (betas.empty()) throw InputError("poincare probe needs at least one beta");
  PoincareReport rep;
  const int count = e.count();
  for (double beta : betas) {
    PoincareLevel lv;
    lv.beta = beta;
    std::vector<double> C(count, 0.0), sup(count, 0.0);
    std::vector<long> viol(count, 0);
#pragma omp parallel for schedule(static)
    for (int c = 0; c < count; ++c) {
      std::vector<double> L, R;
      poincare_sides(e.fields[c], e.grid, beta, L, R);
      double fmax = 0.0;
      for (const auto& v : e.fields[c]) fmax = std::max(fmax, std::abs(v));
      const double floor = 1e-12 * (fmax + 1.0);
      for (std::size_t i = 0; i < L.size(); ++i) {
        sup[c] = std::max(sup[c], L[i]);
        if (R[i] > floor)
          C[c] = std::max(C[c], L[i] / R[i]);
        else if (L[i] > floor)
          ++viol[c];
      }
    }
    lv.C = max_of(C);
    lv.sup_L = max_of(sup);
    for (long v : viol) lv.violations += v;
    rep.levels.push_back(lv);
  }
  // fit over levels with sup_L > 0
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (const auto& lv : rep.levels) {
    if (!(lv.sup_L > 0.0)) continue;
    const double x = std::log(lv.beta), y = std::log(lv.sup_L);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  if (m >= 2 && m * sxx - sx * sx > 0.0) rep.decay_order = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  return rep;
}

CombinedReport combined_weighted_probe(int n, const cutoff::CutoffParams& p, const twobody::SofteningProfile& sp,
                                       const TestEnsemble& e, double q, bool unit_W, const cutoff::Vec& third) {
  if (n < 2 || n > 3) throw InputError("combined probe needs N in {2, 3}");
  if (p.dim != 3 || e.grid.dim != 3 || e.slots != 1) throw InputError("combined probe works on single-slot 3D grids");
  if (!(q > 0.0)) throw InputError("combined probe needs q > 0");
  if (!(p.ell <= 0.5)) throw InputError("combined probe needs ell <= 1/2");
  const auto& g = e.grid;
  cutoff::CutoffParams pn = p;
  pn.n = n;
  CombinedReport rep;
  rep.n = n;
  rep.q = q;
  rep.unit_W = unit_W;
  rep.mass_weight = p.ell1 / std::pow(p.ell, 3);

  const auto lam = WeightFunction::lambda(g, p.ell1);
  const auto r = radii(g);
  const std::size_t size = g.size();
  // x_k = node, x_j = origin, x_m = third
  std::vector<double> left(size), right(size);
  const long count_nodes = static_cast<long>(size);
#pragma omp parallel for schedule(static)
  for (long i = 0; i < count_nodes; ++i) {
    cutoff::Configuration c;
    c.dim = 3;
    const auto pt = grid_point(g, static_cast<std::size_t>(i));
    c.x = {cutoff::Vec(pt[0], pt[1], pt[2]), cutoff::Vec::Zero()};
    if (n == 3) {
      cutoff::Vec t = third;
      for (int a = 0; a < 3; ++a) t[a] -= std::floor(t[a]);
      c.x.push_back(t);
    }
    const auto f = cutoff::eval_fields(c, pn, sp);
    const double W2 = unit_W ? 1.0 : f.W * f.W;
    const double F = f.at(f.F, 0, 1);
    left[i] = W2 * std::pow(F, q) * lam.values[i];
    right[i] = r[i] <= p.ell ? W2 * std::pow(F, q / 4.0) : 0.0;
  }
  Spectral fft(g, 1);
  const double cv = g.cell_volume();
  const int count = e.count();
  rep.lhs.assign(count, 0.0);
  rep.grad.assign(count, 0.0);
  rep.mass.assign(count, 0.0);
  rep.ratio.assign(count, 0.0);
  for (int c = 0; c < count; ++c) {
    const auto& phi = e.fields[c];
    const auto g2 = grad_squared(phi, fft);
    double lhs = 0.0, grad = 0.0, mass = 0.0;
    for (std::size_t i = 0; i < size; ++i) {
      lhs += left[i] * std::norm(phi[i]);
      grad += right[i] * g2[i];
      mass += right[i] * std::norm(phi[i]);
    }
    rep.lhs[c] = lhs * cv;
    rep.grad[c] = grad * cv;
    rep.mass[c] = rep.mass_weight * mass * cv;
    rep.ratio[c] = ratio_of(rep.lhs[c], rep.grad[c] + rep.mass[c]);
  }
  rep.C = max_of(rep.ratio);
  return rep;
}

}  // namespace gplab::inequalities
