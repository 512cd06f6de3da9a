#pragma once
// Boundary coordinate chart (s1, s2, t) anchored at a boundary point, the
// structured Jacobian recursion, and graded-grid evaluation of the
// elementary lemma integrals with log-log slope sweeps.

#include <array>
#include <string>
#include <vector>

#include "dbar/geometry.hpp"
#include "dbar/util.hpp"

namespace dbar {

struct Chart {
  Domain domain;
  CVec base;  // boundary anchor; d rho / d zeta_1 (base) must not vanish

  // s = (s1, s2, t_3 ... t_2n):
  //   s1 = rho(zeta), s2 = Im(rho_zeta(zeta).(zeta - base)),
  //   t_{2k-1} + i t_{2k} = zeta_k - base_k for k = 2..n
  std::array<double, 2 * kMaxN> forward(const CVec& zeta) const;
};

Chart coord_map(const Domain& d, const CVec& base);

// Newton inversion of chart.forward; round-trips to 1e-10
CVec chart_inverse(const Chart& chart, const std::array<double, 2 * kMaxN>& s);

// Structured Jacobian determinants at the ball chart base (1,0,...,0) for
// n = 1..n_max, built exactly in the row pattern of the chart's derivative
// at the base (scalar factors dropped). Ratio det(n+1)/det(n) = -2.
std::vector<cplx> jacobian_recursion_check(int n_max);

struct GridSpec {
  int cells_per_level = 8;  // subcells per geometric level, ratio 1/2 toward 0
};

struct LemmaResult {
  double value = 0.0;
  double self_error = 0.0;  // relative gap to the next-coarser grid
  bool precision_warning = false;
};

// int_0^1 int_0^1 s^{1+alpha} / (delta + s + t^2)^3 dt ds
LemmaResult lemma31_i(double delta, double alpha, const GridSpec& grid);
// int^3 s1^{alpha-1} t^{2n-3} / ((delta+s1+s2+t^2)^3 (delta+s1+s2+t)^{2n-3})
LemmaResult lemma31_ii(double delta, double alpha, int n, const GridSpec& grid);
// case i:  s   t^{2n-3} / (delta+s+t^2)^{n+1}        (2-d)
// case ii: s^{1+alpha} t^{2n-3} / (delta+s+t^2)^{n+1} (2-d)
// case iii: s1^{alpha-1} t^{2n-3} / (delta+s1+s2+t^2)^{n+1} (3-d)
LemmaResult lemma41(const std::string& which, double delta, double alpha, int n,
                    const GridSpec& grid);

// geometric grading toward 0 on (0,1]: midpoints and cell widths
void graded_axis(double delta, int cells_per_level, std::vector<double>& pts,
                 std::vector<double>& wts);

// log10-spaced delta sweep with per-decade density
std::vector<double> delta_sweep(double lo, double hi, int per_decade);

struct GrowthFit {
  int order = 0;
  double exponent = 0.0;
};

// fitted growth exponents of |d^m phi^{-1} / d s1^m| against d(zeta)^{-gamma}
// along inward s1 rays from exterior samples
std::vector<GrowthFit> inverse_chart_growth(const Chart& chart, const std::vector<int>& orders,
                                            const std::vector<CVec>& samples);

}  // namespace dbar
