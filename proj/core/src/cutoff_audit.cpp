#include <algorithm>
#include <cmath>
#include <functional>

#include "gplab/cutoff.hpp"
#include "gplab/error.hpp"

namespace gplab::cutoff {

namespace {

std::vector<Configuration> draw_all(const CutoffParams& p, const AuditSetting& s) {
  if (s.samples < 1 || s.n < 2) throw InputError("audit needs samples >= 1 and N >= 2");
  ConfigSampler sampler(s.seed, p.ell1 / 20.0, 2.0 * p.ell, s.cluster_fraction);
  std::vector<Configuration> out;
  out.reserve(s.samples);
  for (int i = 0; i < s.samples; ++i) out.push_back(sampler.draw(s.n, p.dim));
  return out;
}

double spectral_norm(const Mat& m) { return Eigen::JacobiSVD<Mat>(m).singularValues()[0]; }

Configuration shifted(const Configuration& c, int k, int a, double d) {
  Configuration s = c;
  double v = s.x[k][a] + d;
  v -= std::floor(v);
  s.x[k][a] = v < 1.0 ? v : 0.0;
  return s;
}

// 5-point centered derivative of f along coordinate (k, a).
double fd(const std::function<double(const Configuration&)>& f, const Configuration& c, int k, int a, double h) {
  return (f(shifted(c, k, a, -2 * h)) - 8 * f(shifted(c, k, a, -h)) + 8 * f(shifted(c, k, a, h)) -
          f(shifted(c, k, a, 2 * h))) /
         (12 * h);
}

}  // namespace

GSeparationReport g_separation_audit(const CutoffParams& p, const twobody::SofteningProfile& sp,
                                     const AuditSetting& s) {
  const auto cfgs = draw_all(p, s);
  std::vector<double> mins(cfgs.size()), maxs(cfgs.size());
  std::vector<long> bad(cfgs.size(), 0);
  const long count = static_cast<long>(cfgs.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (long c = 0; c < count; ++c) {
    const auto f = eval_fields(cfgs[c], p, sp);
    mins[c] = *std::min_element(f.G.begin(), f.G.end());
    maxs[c] = *std::max_element(f.G.begin(), f.G.end());
    for (double g : f.G)
      if (!(g > 0.0) || g > 1.0) ++bad[c];
  }
  GSeparationReport r;
  r.n = s.n;
  r.samples = s.samples;
  r.profile_floor = sp.c0();
  std::size_t arg = 0;
  for (std::size_t c = 0; c < cfgs.size(); ++c) {
    if (mins[c] < r.c1) r.c1 = mins[c], arg = c;
    r.max_G = std::max(r.max_G, maxs[c]);
    r.violations += bad[c];
  }
  r.witness = cfgs[arg];
  return r;
}

OverlapReport no_overlap_audit(const CutoffParams& p, const twobody::SofteningProfile& sp, const AuditSetting& s,
                               double q) {
  if (!(q > 0.0)) throw InputError("overlap audit needs q > 0");
  const auto cfgs = draw_all(p, s);
  const long count = static_cast<long>(cfgs.size());
  std::vector<double> cfit(count, INFINITY), csum(count, 0.0);
  std::vector<long> nover(count, 0);
  const double le = std::pow(p.ell, p.eps);
#pragma omp parallel for schedule(dynamic, 16)
  for (long c = 0; c < count; ++c) {
    const auto f = eval_fields(cfgs[c], p, sp);
    for (int i = 0; i < f.n; ++i) {
      int near = 0;
      double sum = 0.0;
      for (int j = 0; j < f.n; ++j)
        if (j != i && f.at(f.dist, i, j) <= p.ell) {
          ++near;
          sum += std::pow(f.at(f.F, i, j), q);
        }
      csum[c] = std::max(csum[c], sum);
      if (near < 2) continue;
      for (int j = 0; j < f.n; ++j)
        if (j != i && f.at(f.dist, i, j) <= p.ell) {
          ++nover[c];
          const double Fq = std::pow(f.at(f.F, i, j), q);
          cfit[c] = std::min(cfit[c], -le * std::log(Fq) / q);
        }
    }
  }
  OverlapReport r;
  r.n = s.n;
  r.samples = s.samples;
  r.q = q;
  r.fitted_c = INFINITY;
  std::size_t arg = 0;
  for (long c = 0; c < count; ++c) {
    r.overlaps += nover[c];
    if (cfit[c] < r.fitted_c) r.fitted_c = cfit[c], arg = c;
    r.c_q = std::max(r.c_q, csum[c]);
  }
  r.witness = cfgs[arg];
  return r;
}

Configuration adversarial_cluster(int n, int m, int dim, double ell, std::uint64_t seed) {
  if (m < 1 || m >= n) throw InputError("cluster size must satisfy 1 <= m < N");
  ConfigSampler s(seed, ell / 100, ell / 2, 0.0);
  Configuration c = s.draw(n, dim);
  for (int i = 1; i <= m; ++i)
    for (int a = 0; a < dim; ++a) {
      // uniform in the cube of half side ell/(2 sqrt d) keeps |x_i - x_0| <= ell/2
      double v = c.x[0][a] + (2 * s.uniform() - 1) * ell / (2 * std::sqrt(double(dim)));
      v -= std::floor(v);
      c.x[i][a] = v < 1.0 ? v : 0.0;
    }
  return c;
}

RemovalReport removal_audit(const CutoffParams& p, const twobody::SofteningProfile& sp, const AuditSetting& s,
                            int max_alpha) {
  if (max_alpha < 1 || max_alpha >= s.n) throw InputError("removal audit needs 1 <= alpha < N");
  const auto cfgs = draw_all(p, s);
  const long count = static_cast<long>(cfgs.size());
  std::vector<double> worst(count, 0.0);
#pragma omp parallel for schedule(dynamic, 16)
  for (long c = 0; c < count; ++c) {
    const auto f = eval_fields(cfgs[c], p, sp);
    // Most correlated particle first, then a deterministic sweep.
    const int first = static_cast<int>(std::min_element(f.G.begin(), f.G.end()) - f.G.begin());
    std::vector<int> removed{first};
    for (int alpha = 1; alpha <= max_alpha; ++alpha) {
      if (alpha > 1) {
        int next = (removed.back() + 1 + static_cast<int>(c % s.n)) % s.n;
        while (std::find(removed.begin(), removed.end(), next) != removed.end()) next = (next + 1) % s.n;
        removed.push_back(next);
      }
      const double ratio = removed_particle_ratio(cfgs[c], p, sp, removed);
      worst[c] = std::max(worst[c], std::abs(std::log(ratio)) / alpha);
    }
  }
  RemovalReport r;
  r.n = s.n;
  r.samples = s.samples;
  r.max_alpha = max_alpha;
  for (double w : worst) r.log_c0 = std::max(r.log_c0, w);
  return r;
}

DerivativeReport derivative_bounds_audit(const CutoffParams& p, const twobody::SofteningProfile& sp,
                                         const AuditSetting& s, double q) {
  const auto cfgs = draw_all(p, s);
  const long count = static_cast<long>(cfgs.size());
  struct Local {
    double grad = 0, hess = 0, kov = 0, rem = 0, kfix = 0, kab = 0, fd = 0;
  };
  std::vector<Local> loc(count);
  const double allowance = std::pow(p.ell, p.K - 1.0 - p.eps);
  const int fd_checks = std::min<long>(count, 20);
#pragma omp parallel for schedule(dynamic, 4)
  for (long c = 0; c < count; ++c) {
    const auto& cfg = cfgs[c];
    FieldDerivatives d(cfg, p, sp);
    const auto& f = d.fields();
    const int n = f.n;
    Local& L = loc[c];
    std::vector<double> kfix(n, 0.0), kab(n, 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        const double Fh = std::pow(f.at(f.F, i, j), q / 2);
        const bool near = f.at(f.dist, i, j) <= p.ell;
        const auto st = StepFunction::triple(p.ell, p.eps)(f.at(f.count, i, j));
        const double d1 = q * std::pow(st.v, q - 1.0) * st.d1;
        const double d2 = q * (q - 1.0) * std::pow(st.v, q - 2.0) * st.d1 * st.d1 + q * std::pow(st.v, q - 1.0) * st.d2;
        std::vector<Vec> g(n);
        std::vector<double> gn(n);
        double gsum = 0.0;
        for (int k = 0; k < n; ++k) {
          g[k] = d.grad_count(i, j, k);
          gn[k] = g[k].norm();
          gsum += std::abs(d1) * gn[k];
        }
        // (k, m) blocks of the count Hessian vanish unless k = m or exactly one of k, m is in {i, j}.
        auto sparse = [&](int k, int m) {
          const bool ki = k == i || k == j, mi = m == i || m == j;
          return k == m || ki != mi;
        };
        double hsum = 0.0;
        for (int k = 0; k < n; ++k) {
          double row = 0.0;
          for (int m = 0; m < n; ++m)
            row += sparse(k, m) ? spectral_norm(d2 * g[k] * g[m].transpose() + d1 * d.hess_count(i, j, k, m))
                                : std::abs(d2) * gn[k] * gn[m];
          hsum += row;
          if (near) {
            kab[k] += row;
            kfix[k] += std::abs(d1) * gn[k];
          }
          if (k != i && k != j) {
            const double gk = std::abs(d1) * gn[k];
            const double th = f.at(f.theta, i, k) + f.at(f.theta, j, k);
            if (th > 0.0) {
              const double excess = std::max(0.0, gk - allowance);
              L.kov = std::max(L.kov, excess * p.ell / (th * Fh));
            } else {
              L.rem = std::max(L.rem, gk);
            }
          }
        }
        L.grad = std::max(L.grad, gsum * p.ell / Fh);
        L.hess = std::max(L.hess, hsum * p.ell * p.ell / Fh);
      }
    for (int k = 0; k < n; ++k) {
      L.kfix = std::max(L.kfix, kfix[k] * p.ell);
      L.kab = std::max(L.kab, kab[k] * p.ell * p.ell);
    }
    if (c < fd_checks) {
      const double h = 1e-3 * std::min(p.ell1, p.ell);
      auto rel = [](const std::vector<double>& an, const std::vector<double>& num) {
        double e = 0.0, s = 0.0;
        for (std::size_t t = 0; t < an.size(); ++t) {
          e = std::max(e, std::abs(an[t] - num[t]));
          s = std::max(s, std::abs(an[t]));
        }
        return s > 0.0 ? e / s : 0.0;
      };
      // Pair with the smallest F (most structure), the most correlated G, log W.
      int bi = 0, bj = 1;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          if (i != j && f.at(f.F, i, j) < f.at(f.F, bi, bj)) bi = i, bj = j;
      const int gi = static_cast<int>(std::min_element(f.G.begin(), f.G.end()) - f.G.begin());
      std::vector<double> aF, nF, aG, nG, aW, nW, aH, nH;
      for (int k = 0; k < n; ++k) {
        const Vec gF = d.grad_F(bi, bj, k, q), gG = d.grad_G(gi, k), gW = d.grad_log_W(k);
        const Mat hF = d.hess_F(bi, bj, bi, k, q);
        for (int a = 0; a < p.dim; ++a) {
          aF.push_back(gF[a]);
          nF.push_back(fd(
              [&](const Configuration& x) {
                const auto e = eval_fields(x, p, sp);
                return std::pow(e.at(e.F, bi, bj), q);
              },
              cfg, k, a, h));
          aG.push_back(gG[a]);
          nG.push_back(fd([&](const Configuration& x) { return eval_fields(x, p, sp).G[gi]; }, cfg, k, a, h));
          aW.push_back(gW[a]);
          nW.push_back(fd([&](const Configuration& x) { return eval_fields(x, p, sp).log_W; }, cfg, k, a, h));
          for (int b = 0; b < p.dim; ++b) {
            aH.push_back(hF(b, a));
            nH.push_back(fd([&](const Configuration& x) { return FieldDerivatives(x, p, sp).grad_F(bi, bj, bi, q)[b]; },
                            cfg, k, a, h));
          }
        }
      }
      L.fd = std::max({rel(aF, nF), rel(aG, nG), rel(aW, nW), rel(aH, nH)});
    }
  }
  DerivativeReport r;
  r.n = s.n;
  r.samples = s.samples;
  r.q = q;
  r.koverlap_allowance = allowance;
  for (const auto& L : loc) {
    r.c_grad = std::max(r.c_grad, L.grad);
    r.c_hess = std::max(r.c_hess, L.hess);
    r.c_koverlap = std::max(r.c_koverlap, L.kov);
    r.koverlap_remainder = std::max(r.koverlap_remainder, L.rem);
    r.c_kfix = std::max(r.c_kfix, L.kfix);
    r.c_kabfix = std::max(r.c_kabfix, L.kab);
    r.fd_max_rel = std::max(r.fd_max_rel, L.fd);
  }
  return r;
}

}  // namespace gplab::cutoff
