#include "dbar/sobolev.hpp"

#include <cmath>
#include <stdexcept>

#include "dbar/util.hpp"

namespace dbar {

namespace {

CVec shift(const CVec& x, int r, double h) {
  CVec y = x;
  if (r % 2 == 0)
    y[r / 2] += h;
  else
    y[r / 2] += cplx(0.0, h);
  return y;
}

// |d^alpha u(x)| for all real multi-indices |alpha| <= maxord (0, 1, 2),
// central differences with step h
void derivative_magnitudes(const FieldEval& u, const CVec& x, int nreal, int maxord, double h,
                           std::vector<double>& out) {
  out.clear();
  const cplx u0 = u(x);
  out.push_back(std::abs(u0));
  if (maxord < 1) return;
  std::vector<cplx> up(nreal), um(nreal);
  for (int r = 0; r < nreal; ++r) {
    up[r] = u(shift(x, r, h));
    um[r] = u(shift(x, r, -h));
    out.push_back(std::abs((up[r] - um[r]) / (2.0 * h)));
  }
  if (maxord < 2) return;
  for (int r = 0; r < nreal; ++r) out.push_back(std::abs((up[r] - 2.0 * u0 + um[r]) / (h * h)));
  for (int r = 0; r < nreal; ++r)
    for (int s = r + 1; s < nreal; ++s) {
      cplx pp = u(shift(shift(x, r, h), s, h));
      cplx pm = u(shift(shift(x, r, h), s, -h));
      cplx mp = u(shift(shift(x, r, -h), s, h));
      cplx mm = u(shift(shift(x, r, -h), s, -h));
      out.push_back(std::abs((pp - pm - mp + mm) / (4.0 * h * h)));
    }
}

double norm_impl(const FieldEval& u, int maxord, double p, double weight_exp, double hcap,
                 const Domain& d, const QuadratureRule& rule) {
  if (maxord > 2)
    throw std::invalid_argument("weighted_norm: derivative orders through 2 supported (k <= 1)");
  const int nreal = 2 * d.n;
  std::vector<double> acc;  // one integral per multi-index
  std::vector<double> mags;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    CVec x = rule.node(i);
    double dist = std::abs(d.sdist(x));
    if (dist <= 0.0) continue;  // rule nodes are interior by construction
    double h = std::min(hcap, dist / 8.0);
    derivative_magnitudes(u, x, nreal, maxord, h, mags);
    if (acc.empty()) acc.assign(mags.size(), 0.0);
    double wgt = rule.weights[i] * std::pow(dist, weight_exp);
    for (std::size_t a = 0; a < mags.size(); ++a) acc[a] += wgt * std::pow(mags[a], p);
  }
  double total = 0.0;
  for (double v : acc) total += std::pow(v, 1.0 / p);
  return total;
}

}  // namespace

double weighted_norm(const FieldEval& u, const NormSpec& spec, const Domain& d,
                     const QuadratureRule& rule) {
  return norm_impl(u, spec.k + 1, spec.p, (1.0 - spec.mu) * spec.p, spec.h, d, rule);
}

double weighted_norm(const std::function<std::vector<cplx>(const CVec&)>& u, int ncomp,
                     const NormSpec& spec, const Domain& d, const QuadratureRule& rule) {
  double total = 0.0;
  for (int c = 0; c < ncomp; ++c) {
    FieldEval uc = [&u, c](const CVec& x) { return u(x)[c]; };
    total += weighted_norm(uc, spec, d, rule);
  }
  return total;
}

double sobolev_norm(const FieldEval& u, int k, double p, const Domain& d,
                    const QuadratureRule& rule) {
  return norm_impl(u, k, p, 0.0, 1e-4, d, rule);
}

BlowupFit blowup_exponent(const FieldEval& u, const Domain& dom, const CVec& boundary_point,
                          const CVec& inward, const std::vector<double>& radii, int m) {
  if (m < 1 || m > 2) throw std::invalid_argument("blowup_exponent: m in {1, 2}");
  BlowupFit fit;
  fit.m = m;
  std::vector<double> lx, ly;
  for (double dv : radii) {
    CVec x = boundary_point + cplx(dv) * inward;
    double dist = std::abs(dom.sdist(x));
    double h = std::min(1e-4, dist / 8.0);
    double mag;
    if (m == 1) {
      mag = std::abs(u(x + cplx(h) * inward) - u(x - cplx(h) * inward)) / (2.0 * h);
    } else {
      mag = std::abs(u(x + cplx(h) * inward) - 2.0 * u(x) + u(x - cplx(h) * inward)) / (h * h);
    }
    fit.dvals.push_back(dv);
    fit.mags.push_back(mag);
    if (mag > 1e-13) {
      lx.push_back(std::log(dv));
      ly.push_back(std::log(mag));
    }
  }
  if (lx.size() < 2) {
    fit.floored = true;
    fit.exponent = 0.0;
    return fit;
  }
  fit.exponent = -ols_fit(lx, ly).slope;
  return fit;
}

}  // namespace dbar
