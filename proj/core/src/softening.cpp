#include <boost/math/interpolators/cubic_hermite.hpp>
#include <boost/math/interpolators/quintic_hermite.hpp>
#include <cmath>
#include <sstream>

#include "gplab/error.hpp"
#include "gplab/twobody.hpp"

namespace gplab::twobody {

struct SofteningProfile::Interp {
  boost::math::interpolators::cardinal_quintic_hermite<std::vector<double>> w;
  boost::math::interpolators::cardinal_cubic_hermite<std::vector<double>> q;
  // Boost 1.74 cardinal_quintic_hermite::double_prime mis-scales the slope term.
  double w_double_prime(const SofteningProfile& p, double r) const {
    const auto& w = p.w_values();
    const auto& dw = p.dw_values();
    const auto& d2w = p.d2w_values();
    const double h = p.step(), s = r / h;
    std::size_t i = static_cast<std::size_t>(s);
    if (i + 1 >= w.size()) return d2w.back();
    const double t = s - static_cast<double>(i);
    return 60 * t * (1 - 3 * t + 2 * t * t) * (w[i + 1] - w[i]) / (h * h) +
           12 * t * ((-3 + 8 * t - 5 * t * t) * dw[i] - (2 - 7 * t + 5 * t * t) * dw[i + 1]) / h +
           (1 - 9 * t + 18 * t * t - 10 * t * t * t) * d2w[i] + t * (3 - 12 * t + 10 * t * t) * d2w[i + 1];
  }
};

namespace {

constexpr int kChebNodes = 64;

}  // namespace

SofteningProfile::SofteningProfile(const RadialPotential& v_scaled, double ell1, const Options& opt)
    : ell1_(ell1), opt_(opt), density_(0.5 * ell1, 1.5 * ell1) {
  if (!(ell1 > 0.0)) throw InputError("softening: ell1 must be positive");
  if (opt.n_quad < 4) throw InputError("softening: n_quad must be >= 4");
  if (opt.n_radial < 16) throw InputError("softening: n_radial must be >= 16");
  if (!(v_scaled.support_radius() < 0.5 * ell1))
    throw InputError("softening: potential support must lie inside ell1/2 (a << ell1 required)");
  family_ = std::make_shared<NeumannFamily>(v_scaled, opt.dim);

  const double lo = 0.5 * ell1, hi = 1.5 * ell1;
  cheb_nodes_.resize(kChebNodes);
  cheb_values_.resize(kChebNodes);
  for (int j = 0; j < kChebNodes; ++j) {
    double x = std::cos(kPi * j / (kChebNodes - 1));
    double kappa = 0.5 * (lo + hi) + 0.5 * (hi - lo) * x;
    cheb_nodes_[j] = kappa;
    cheb_values_[j] = kappa * kappa * kappa * family_->eigenvalue(kappa);
  }

  const int n = opt.n_radial;
  const double h = hi / n;
  radius_.resize(n + 1);
  w_.assign(n + 1, 0.0);
  dw_.assign(n + 1, 0.0);
  d2w_.assign(n + 1, 0.0);
  q_.assign(n + 1, 0.0);
  dq_.assign(n + 1, 0.0);
  for (int i = 0; i <= n; ++i) radius_[i] = i * h;
  if (!family_->potential().is_zero()) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
      Value v = evaluate_with(radius_[i], opt.n_quad);
      w_[i] = v.w;
      dw_[i] = v.dw;
      d2w_[i] = v.d2w;
      q_[i] = v.q;
      dq_[i] = v.dq;
    }
  }

  // Quadrature convergence: halve the node count at probe radii.
  if (!family_->potential().is_zero()) {
    for (int j = 0; j <= 64; ++j) {
      double r = hi * j / 64.0;
      Value a = evaluate_with(r, opt.n_quad), b = evaluate_with(r, opt.n_quad / 2);
      quad_change_ = std::max(quad_change_, std::abs(a.w - b.w));
    }
    if (quad_change_ > opt.quad_tol) {
      std::ostringstream os;
      os << "softening: quadrature not converged, halving n_quad = " << opt.n_quad << " changes w by "
         << quad_change_ << " > " << opt.quad_tol;
      throw NumericalError(os.str());
    }
  }

  double wmax = 0.0;
  for (double w : w_) wmax = std::max(wmax, w);
  c0_ = 1.0 - wmax;

  std::vector<double> integrand(n + 1);
  for (int i = 0; i <= n; ++i)
    integrand[i] = opt.dim == 3 ? 4.0 * kPi * q_[i] * radius_[i] * radius_[i] : 2.0 * q_[i];
  {
    // Simpson, with a 3/8 tail when n is odd.
    const int m = n % 2 ? n - 3 : n;
    double s = 0.0;
    for (int i = 0; i + 2 <= m; i += 2) s += integrand[i] + 4.0 * integrand[i + 1] + integrand[i + 2];
    l1_q_ = s * h / 3.0;
    if (m != n)
      l1_q_ += 3.0 * h / 8.0 * (integrand[m] + 3.0 * integrand[m + 1] + 3.0 * integrand[m + 2] + integrand[n]);
  }

  const auto& pot = family_->potential();
  for (int i = 0; i < n; ++i) {
    const double phi = 1.0 - w_[i];
    double lap;
    if (opt.dim == 3) {
      if (i == 0) continue;
      const double r = radius_[i];
      const double mm = (r - h) * (1.0 - w_[i - 1]), m0 = r * phi, mp = (r + h) * (1.0 - w_[i + 1]);
      lap = (mp - 2.0 * m0 + mm) / (h * h) / r;
    } else {
      const double fm = i == 0 ? 1.0 - w_[1] : 1.0 - w_[i - 1];
      lap = ((1.0 - w_[i + 1]) - 2.0 * phi + fm) / (h * h);
    }
    const double half_v = 0.5 * pot(radius_[i]) * phi;
    residual_ = std::max(residual_, std::abs(-lap + half_v - q_[i] * phi));
    residual_scale_ = std::max(residual_scale_, std::max(half_v, q_[i] * phi));
  }

  auto wv = w_, dwv = dw_, d2wv = d2w_, qv = q_, dqv = dq_;
  interp_ = std::make_shared<const Interp>(
      Interp{boost::math::interpolators::cardinal_quintic_hermite<std::vector<double>>(
                 std::move(wv), std::move(dwv), std::move(d2wv), 0.0, h),
             boost::math::interpolators::cardinal_cubic_hermite<std::vector<double>>(std::move(qv),
                                                                                     std::move(dqv), 0.0, h)});
}

double SofteningProfile::eigenvalue(double kappa) const {
  // Barycentric interpolation on Chebyshev-Lobatto nodes.
  double num = 0.0, den = 0.0;
  for (int j = 0; j < kChebNodes; ++j) {
    double d = kappa - cheb_nodes_[j];
    if (d == 0.0) return cheb_values_[j] / (kappa * kappa * kappa);
    double wj = (j % 2 ? -1.0 : 1.0) * ((j == 0 || j == kChebNodes - 1) ? 0.5 : 1.0);
    num += wj * cheb_values_[j] / d;
    den += wj / d;
  }
  return num / den / (kappa * kappa * kappa);
}

SofteningProfile::Value SofteningProfile::evaluate_with(double r, int n_quad) const {
  r = std::abs(r);
  const double lo = density_.lo(), hi = density_.hi();
  if (r >= hi || family_->potential().is_zero()) return {0.0, 0.0, 0.0, 0.0, 0.0};
  const double s = std::max(r, lo);
  Quadrature gq = gauss_legendre(n_quad, s, hi);
  double w = 0, dw = 0, d2w = 0, A = 0, dA = 0;
  for (int j = 0; j < n_quad; ++j) {
    const double kappa = gq.nodes[j];
    const double gw = gq.weights[j] * density_(kappa);
    const double e = eigenvalue(kappa);
    NeumannFamily::Value m = family_->mode(kappa, e, r);
    w += (1.0 - m.phi) * gw;
    dw -= m.dphi * gw;
    d2w -= m.d2phi * gw;
    A += e * m.phi * gw;
    dA += e * m.dphi * gw;
  }
  if (r > lo) dA -= eigenvalue(r) * density_(r);
  const double q = A / (1.0 - w);
  const double dq = (dA + dw * q) / (1.0 - w);
  return {w, dw, d2w, q, dq};
}

SofteningProfile::Value SofteningProfile::evaluate(double r) const { return evaluate_with(r, opt_.n_quad); }

SofteningProfile::Value SofteningProfile::interpolate(double r) const {
  r = std::abs(r);
  if (r >= support()) return {0.0, 0.0, 0.0, 0.0, 0.0};
  return {interp_->w(r), interp_->w.prime(r), interp_->w_double_prime(*this, r), interp_->q(r), interp_->q.prime(r)};
}

const BoundEntry& BoundReport::at(const std::string& id) const {
  for (const auto& e : entries)
    if (e.id == id) return e;
  throw InputError("bound report has no entry '" + id + "'");
}

BoundReport audit_w_q_bounds(const SofteningProfile& p, double a) {
  BoundReport rep;
  rep.a = a;
  rep.ell1 = p.ell1();
  const auto& r = p.radius();
  const auto& w = p.w_values();
  const auto& q = p.q_values();
  const double h = p.step();
  const double ell1 = p.ell1(), supp = p.support();
  const double rho = p.potential().base_varrho();
  const std::size_t n = r.size() - 1;
  const bool three = p.dim() == 3;

  struct Acc {
    std::string id;
    double c = 0.0, loc = 0.0;
    void add(double num, double den, double at) {
      if (num == 0.0) return;
      double v = den > 0.0 ? num / den : INFINITY;
      if (v > c) {
        c = v;
        loc = at;
      }
    }
  };
  std::vector<Acc> acc;
  for (const char* id : {"w_le_Ca_over_r", "w_le_1", "w_le_Ca_ell1_lambda", "grad_w_le_Ca_over_r2_a2",
                         "hess_w_le_C_varrho_a_over_r3_a3", "hess_w_le_C_varrho_lambda", "hess_w_le_Ca_sigma",
                         "grad_w_sq_le_Ca_sigma", "w_sq_le_Ca2_lambda", "grad_w_le_C_over_a",
                         "grad_w_le_Ca_lambda", "q_le_Ca_ell1_m3", "grad_q_le_Ca_over_r_ell1_3"})
    acc.push_back({id});

  for (std::size_t i = 1; i < n; ++i) {
    const double x = r[i];
    const double dw = (w[i + 1] - w[i - 1]) / (2.0 * h);
    const double d2w = (w[i + 1] - 2.0 * w[i] + w[i - 1]) / (h * h);
    const double dq = (q[i + 1] - q[i - 1]) / (2.0 * h);
    const double hess = three ? std::max(std::abs(d2w), std::abs(dw) / x) : std::abs(d2w);
    const double chi = x <= supp ? 1.0 : 0.0;
    const double lam = chi / (x * x);
    const double sig = chi / (x * x * x + a * a * a);
    const double gw = std::abs(dw);
    acc[0].add(w[i], a / x, x);
    acc[1].add(w[i], 1.0, x);
    acc[2].add(w[i], a * ell1 * lam, x);
    acc[3].add(gw, a / (x * x + a * a), x);
    acc[4].add(hess, rho * a / (x * x * x + a * a * a), x);
    acc[5].add(hess, rho * lam, x);
    acc[6].add(hess, a * sig, x);
    acc[7].add(gw * gw, a * sig, x);
    acc[8].add(w[i] * w[i], a * a * lam, x);
    acc[9].add(gw, a > 0.0 ? 1.0 / a : 0.0, x);
    acc[10].add(gw, a * lam, x);
    acc[11].add(q[i], a / (ell1 * ell1 * ell1), x);
    acc[12].add(std::abs(dq), a / (x * ell1 * ell1 * ell1), x);
  }
  for (const auto& e : acc) rep.entries.push_back({e.id, e.c, e.loc});
  return rep;
}

std::vector<std::string> unsaturated_bounds(const std::vector<BoundReport>& sequence) {
  std::vector<std::string> out;
  if (sequence.size() < 2) return out;
  for (const auto& e : sequence.front().entries) {
    bool increasing = true;
    for (std::size_t k = 1; k < sequence.size(); ++k)
      if (!(sequence[k].at(e.id).fitted_c > sequence[k - 1].at(e.id).fitted_c)) increasing = false;
    double first = sequence.front().at(e.id).fitted_c, last = sequence.back().at(e.id).fitted_c;
    if (increasing && last > 2.0 * first) out.push_back(e.id);
  }
  return out;
}

}  // namespace gplab::twobody
