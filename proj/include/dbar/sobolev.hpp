#pragma once
// Weighted Sobolev norms with boundary-distance weights: the k-weighted norm
// sums (int |d^alpha u|^p d(x)^{(1-mu)p})^{1/p} over real multi-indices up to
// |alpha| = k+1. Derivatives are interior finite differences with steps kept
// clear of the boundary. Also fits boundary blow-up exponents along rays.

#include <functional>
#include <vector>

#include "dbar/complexn.hpp"
#include "dbar/geometry.hpp"
#include "dbar/quadrature.hpp"

namespace dbar {

using FieldEval = std::function<cplx(const CVec&)>;

struct NormSpec {
  int k = 0;
  double p = 2.0;
  double mu = 0.5;
  double h = 1e-4;  // step cap; the effective step at x is min(h, d(x)/8)
};

// supports k in {0, 1} (derivative orders through 2)
double weighted_norm(const FieldEval& u, const NormSpec& spec, const Domain& d,
                     const QuadratureRule& rule);
// forms / vector fields: coefficient-wise norms, summed
double weighted_norm(const std::function<std::vector<cplx>(const CVec&)>& u, int ncomp,
                     const NormSpec& spec, const Domain& d, const QuadratureRule& rule);

// classical W^{k,p}: weight 1, orders |alpha| <= k
double sobolev_norm(const FieldEval& u, int k, double p, const Domain& d,
                    const QuadratureRule& rule);

struct BlowupFit {
  int m = 0;
  double exponent = 0.0;  // gamma in |d^m u| ~ d(x)^{-gamma}
  bool floored = false;   // all magnitudes under the 1e-13 floor; exponent forced 0
  std::vector<double> dvals, mags;
};

// m-th directional derivative along x(d) = boundary_point + d * inward for the
// listed d values, least-squares fitted as log|d^m u| against log d
BlowupFit blowup_exponent(const FieldEval& u, const Domain& dom, const CVec& boundary_point,
                          const CVec& inward, const std::vector<double>& radii, int m);

}  // namespace dbar
