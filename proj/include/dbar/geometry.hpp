#pragma once
// Model domains (unit ball, convex ellipsoids) with exact defining-function
// jets, boundary distance, the plurisubharmonic rescale and the Levi
// polynomial. rho < 0 inside, > 0 outside; signed_distance shares its sign.

#include <array>
#include <functional>
#include <stdexcept>
#include <string>

#include "dbar/complexn.hpp"

namespace dbar {

enum class Region { interior, shell, exterior };

struct RhoJet {
  double value = 0.0;
  CVec grad;                                      // (d rho / d zeta_j)
  std::array<std::array<cplx, kMaxN>, kMaxN> hh;  // d2 rho / d zeta_j d zeta_k
  std::array<std::array<cplx, kMaxN>, kMaxN> hm;  // d2 rho / d zeta_j d zeta_bar_k
};

struct Domain {
  int n = 0;
  double shell_width = 0.25;  // U = { signed_distance < shell_width }
  double bounding_radius = 4.0;
  std::string name;

  std::function<RhoJet(const CVec&)> jet;
  std::function<double(const CVec&)> sdist;
  // d(signed_distance)/d zeta_bar_j; present for domains with a closed form
  std::function<CVec(const CVec&)> sdist_dbar;
};

Domain make_ball(int n, double shell_width = 0.25);
// rho = sum_j c_j |zeta_j|^2 - 1, c_j > 0
Domain make_ellipsoid(const std::vector<double>& coeffs, double shell_width = 0.25);

RhoJet rho_jet(const Domain& d, const CVec& z);
double signed_distance(const Domain& d, const CVec& z);
Region region_classify(const Domain& d, const CVec& z);

// new domain with rho1 = exp(L0*rho0) - 1 and chain-rule jets; same zero set
Domain psh_rescale(const Domain& d, double L0);

// F(z,zeta) = -sum drho/dzeta_j (zeta)(z_j - zeta_j)
//             + sum a_jk(zeta)(z_j - zeta_j)(z_k - zeta_k),
// a_jk = (1/2) d2 rho / d zeta_j d zeta_k
cplx levi_polynomial(const Domain& d, const CVec& z, const CVec& zeta);

}  // namespace dbar
