#pragma once
// Product quadrature over the model domains: polar volume rules with optional
// geometric grading toward an interior singular point, shell rules with
// radial cells aligned to the cutoff knots and graded toward the boundary,
// and a parametrized boundary rule carrying tangent frames for form pullback.

#include <functional>
#include <string>
#include <vector>

#include "dbar/complexn.hpp"
#include "dbar/geometry.hpp"

namespace dbar {

// Gauss-Legendre nodes/weights on [-1, 1]
void gauss_legendre(int m, std::vector<double>& x, std::vector<double>& w);

struct QuadratureRule {
  int n = 0;
  int level = 0;
  std::string descriptor;  // "volume" | "shell" | "boundary"

  std::vector<double> coords;   // 2n doubles per node, re/im interleaved
  std::vector<double> weights;  // volume measure, or surface measure on bD

  // boundary rules only, parallel to nodes
  std::vector<double> params;        // 2n-1 parameters per node
  std::vector<double> weight_param;  // parameter-cell measure
  std::vector<cplx> frames;          // (2n-1) x n entries per node

  bool has_singular_center = false;
  CVec singular_center{};

  // sign relating the parameter order to the complex orientation of bD;
  // multiplies any form pulled back through the frames
  double orientation = 1.0;

  std::size_t size() const { return weights.size(); }
  CVec node(std::size_t i) const;
  cplx frame(std::size_t i, int p, int j) const;  // d zeta_j / d u_p at node i
  double measure() const;                         // sum of weights
};

// volume rule over D; with singular_center, local polar layers graded toward
// it (layer ratio 1/2, truncated at radius  ~ 2^-(level+4)) blended into the
// global rule by a radial partition of unity
QuadratureRule volume_rule(const Domain& d, int level);
QuadratureRule volume_rule(const Domain& d, int level, const CVec& singular_center);

// ambient ball B(center, radius); nodes are center + fixed offsets, so rules
// at the same level share offsets across centers
QuadratureRule polar_rule(int n, const CVec& center, double radius, int level);

// shell {0 <= signed_distance <= shell_width}, radial cells split at the
// cutoff knots and geometrically refined toward the boundary
QuadratureRule shell_rule(const Domain& d, int level);

// bD for n = 2; weights carry the surface measure, frames the chart tangents
QuadratureRule boundary_rule(const Domain& d, int level);

// deterministic weighted sum in node order; threads parallelize evaluation
// only, the reduction order is fixed
cplx integrate(const QuadratureRule& rule, const std::function<cplx(const CVec&)>& f,
               int threads = 1);

struct ConvergenceReport {
  std::vector<cplx> values;    // one per level
  std::vector<double> orders;  // log2 of successive difference ratios
  bool saturated = false;      // differences at round-off
};

ConvergenceReport self_convergence(const std::vector<QuadratureRule>& family,
                                   const std::function<cplx(const CVec&)>& f);

}  // namespace dbar
