#include "dbar/geometry.hpp"

#include <cmath>

namespace dbar {

namespace {

void check_box(const Domain& d, const CVec& z) {
  for (int j = 0; j < d.n; ++j) {
    if (std::abs(z[j].real()) > d.bounding_radius || std::abs(z[j].imag()) > d.bounding_radius)
      throw std::domain_error("point outside bounding box of domain " + d.name);
  }
}

// Distance from x to the ellipsoid sum c_j |zeta_j|^2 = 1 via the Lagrange
// parametrization of the projection, p_j = x_j / (1 + t c_j). g(t) = rho(p)
// is strictly decreasing on the branch containing t = 0, so a bracketed
// Newton iteration is safe. Axes with x_j = 0 stay at p_j = 0 and do not
// constrain the branch.
double ellipsoid_distance(const std::vector<double>& c, const CVec& x) {
  const int n = static_cast<int>(c.size());
  double cmax_active = 0.0;
  double rho = -1.0;
  for (int j = 0; j < n; ++j) {
    rho += c[j] * std::norm(x[j]);
    if (std::norm(x[j]) > 1e-26) cmax_active = std::max(cmax_active, c[j]);
  }
  if (cmax_active == 0.0) {  // x is the center
    double dmin = 1e300;
    for (int j = 0; j < n; ++j) dmin = std::min(dmin, 1.0 / std::sqrt(c[j]));
    return -dmin;
  }
  const double t_pole = -1.0 / cmax_active;
  auto g = [&](double t, double* dg) {
    double v = -1.0, d = 0.0;
    for (int j = 0; j < n; ++j) {
      const double aj = std::norm(x[j]);
      if (aj <= 1e-26) continue;
      const double w = 1.0 + t * c[j];
      v += c[j] * aj / (w * w);
      d += -2.0 * c[j] * c[j] * aj / (w * w * w);
    }
    if (dg) *dg = d;
    return v;
  };
  // bracket [lo, hi] with g(lo) > 0 > g(hi)
  double lo, hi;
  if (rho > 0.0) {
    lo = 0.0;
    hi = 1.0;
    while (g(hi, nullptr) > 0.0) hi *= 2.0;
  } else {
    hi = 0.0;
    lo = 0.5 * t_pole;
    while (g(lo, nullptr) < 0.0) lo = 0.5 * (lo + t_pole);
  }
  double t = 0.5 * (lo + hi);
  bool converged = false;
  for (int it = 0; it < 50; ++it) {
    double dg;
    const double gv = g(t, &dg);
    if (gv > 0.0)
      lo = t;
    else
      hi = t;
    double tn = t - gv / dg;
    if (!(tn > lo && tn < hi)) tn = 0.5 * (lo + hi);
    if (std::abs(tn - t) < 1e-12 * (1.0 + std::abs(t))) {
      t = tn;
      converged = true;
      break;
    }
    t = tn;
  }
  if (!converged)
    throw std::runtime_error("ellipsoid projection did not converge; last t = " + std::to_string(t));
  double d2 = 0.0;
  for (int j = 0; j < n; ++j) {
    const double w = 1.0 + t * c[j];
    d2 += std::norm(x[j] - x[j] / w);
  }
  return rho < 0.0 ? -std::sqrt(d2) : std::sqrt(d2);
}

}  // namespace

Domain make_ball(int n, double shell_width) {
  Domain d;
  d.n = n;
  d.shell_width = shell_width;
  d.name = "ball";
  d.jet = [n](const CVec& z) {
    RhoJet j;
    j.value = abs2(z) - 1.0;
    j.grad = conj(z);
    j.grad.n = n;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        j.hh[a][b] = 0.0;
        j.hm[a][b] = (a == b) ? 1.0 : 0.0;
      }
    return j;
  };
  d.sdist = [](const CVec& z) { return norm2(z) - 1.0; };
  d.sdist_dbar = [n](const CVec& z) {
    CVec g(n);
    const double r = norm2(z);
    if (r < 1e-14) return g;  // nondifferentiable at the center; unused there
    for (int j = 0; j < n; ++j) g[j] = z[j] / (2.0 * r);
    return g;
  };
  return d;
}

Domain make_ellipsoid(const std::vector<double>& coeffs, double shell_width) {
  Domain d;
  d.n = static_cast<int>(coeffs.size());
  d.shell_width = shell_width;
  d.name = "ellipsoid";
  const std::vector<double> c = coeffs;
  const int n = d.n;
  d.jet = [c, n](const CVec& z) {
    RhoJet j;
    j.value = -1.0;
    j.grad = CVec(n);
    for (int a = 0; a < n; ++a) {
      j.value += c[a] * std::norm(z[a]);
      j.grad[a] = c[a] * std::conj(z[a]);
      for (int b = 0; b < n; ++b) {
        j.hh[a][b] = 0.0;
        j.hm[a][b] = (a == b) ? cplx(c[a]) : cplx(0.0);
      }
    }
    return j;
  };
  d.sdist = [c](const CVec& z) { return ellipsoid_distance(c, z); };
  // gradient of the distance is the unit outward normal at the projection;
  // a central difference is accurate enough for the cutoff derivative here
  d.sdist_dbar = [c, n](const CVec& z) {
    CVec g(n);
    const double h = 1e-6;
    for (int j = 0; j < n; ++j) {
      CVec zp = z, zm = z, zpi = z, zmi = z;
      zp[j] += h;
      zm[j] -= h;
      zpi[j] += cplx(0, h);
      zmi[j] -= cplx(0, h);
      const double dx = (ellipsoid_distance(c, zp) - ellipsoid_distance(c, zm)) / (2 * h);
      const double dy = (ellipsoid_distance(c, zpi) - ellipsoid_distance(c, zmi)) / (2 * h);
      g[j] = 0.5 * cplx(dx, dy);  // d/d zeta_bar = (d/dx + i d/dy)/2 on real fields
    }
    return g;
  };
  return d;
}

RhoJet rho_jet(const Domain& d, const CVec& z) {
  check_box(d, z);
  return d.jet(z);
}

double signed_distance(const Domain& d, const CVec& z) {
  check_box(d, z);
  return d.sdist(z);
}

Region region_classify(const Domain& d, const CVec& z) {
  const double s = signed_distance(d, z);
  if (s < 0.0) return Region::interior;
  if (s < d.shell_width) return Region::shell;
  return Region::exterior;
}

Domain psh_rescale(const Domain& d, double L0) {
  if (L0 <= 0.0) throw std::invalid_argument("psh_rescale: L0 must be positive");
  Domain r = d;
  r.name = d.name + "-rescaled";
  const auto base = d.jet;
  const int n = d.n;
  r.jet = [base, L0, n](const CVec& z) {
    const RhoJet j0 = base(z);
    const double e = std::exp(L0 * j0.value);
    RhoJet j1;
    j1.value = e - 1.0;
    j1.grad = CVec(n);
    for (int a = 0; a < n; ++a) j1.grad[a] = L0 * e * j0.grad[a];
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        j1.hh[a][b] = L0 * e * (j0.hh[a][b] + L0 * j0.grad[a] * j0.grad[b]);
        j1.hm[a][b] = L0 * e * (j0.hm[a][b] + L0 * j0.grad[a] * std::conj(j0.grad[b]));
      }
    return j1;
  };
  return r;
}

cplx levi_polynomial(const Domain& d, const CVec& z, const CVec& zeta) {
  const RhoJet j = rho_jet(d, zeta);
  cplx f = 0.0;
  for (int a = 0; a < d.n; ++a) f -= j.grad[a] * (z[a] - zeta[a]);
  for (int a = 0; a < d.n; ++a)
    for (int b = 0; b < d.n; ++b)
      f += 0.5 * j.hh[a][b] * (z[a] - zeta[a]) * (z[b] - zeta[b]);
  return f;
}

}  // namespace dbar
