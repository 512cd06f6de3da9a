#include "dbar/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace dbar {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

void gl_cell(int m, double a, double b, std::vector<double>& x, std::vector<double>& w) {
  std::vector<double> xs, ws;
  gauss_legendre(m, xs, ws);
  x.resize(m);
  w.resize(m);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (int i = 0; i < m; ++i) {
    x[i] = mid + half * xs[i];
    w[i] = half * ws[i];
  }
}

// directions on S^{2n-1} with weights carrying the full surface measure
struct SphereRule {
  int n = 0;
  std::vector<cplx> dirs;  // n entries per direction
  std::vector<double> w;

  std::size_t size() const { return w.size(); }
};

SphereRule sphere_rule(int n, int ntheta, int nphi) {
  SphereRule s;
  s.n = n;
  const double dphi = kTwoPi / nphi;
  if (n == 1) {
    for (int k = 0; k < nphi; ++k) {
      double phi = (k + 0.5) * dphi;
      s.dirs.push_back(std::polar(1.0, phi));
      s.w.push_back(dphi);
    }
    return s;
  }
  std::vector<double> tx, tw;
  gl_cell(ntheta, 0.0, 0.5 * kPi, tx, tw);
  if (n == 2) {
    // zeta = (cos t e^{i p1}, sin t e^{i p2}), dsigma = cos t sin t dt dp1 dp2
    for (int it = 0; it < ntheta; ++it) {
      double ct = std::cos(tx[it]), st = std::sin(tx[it]);
      double wt = tw[it] * ct * st * dphi * dphi;
      for (int k1 = 0; k1 < nphi; ++k1)
        for (int k2 = 0; k2 < nphi; ++k2) {
          s.dirs.push_back(ct * std::polar(1.0, (k1 + 0.5) * dphi));
          s.dirs.push_back(st * std::polar(1.0, (k2 + 0.5) * dphi));
          s.w.push_back(wt);
        }
    }
    return s;
  }
  if (n == 3) {
    // dsigma = cos t1 sin^3 t1 cos t2 sin t2 dt1 dt2 dp1 dp2 dp3
    for (int i1 = 0; i1 < ntheta; ++i1) {
      double c1 = std::cos(tx[i1]), s1 = std::sin(tx[i1]);
      for (int i2 = 0; i2 < ntheta; ++i2) {
        double c2 = std::cos(tx[i2]), s2 = std::sin(tx[i2]);
        double wt = tw[i1] * tw[i2] * c1 * s1 * s1 * s1 * c2 * s2 * dphi * dphi * dphi;
        for (int k1 = 0; k1 < nphi; ++k1)
          for (int k2 = 0; k2 < nphi; ++k2)
            for (int k3 = 0; k3 < nphi; ++k3) {
              s.dirs.push_back(c1 * std::polar(1.0, (k1 + 0.5) * dphi));
              s.dirs.push_back(s1 * c2 * std::polar(1.0, (k2 + 0.5) * dphi));
              s.dirs.push_back(s1 * s2 * std::polar(1.0, (k3 + 0.5) * dphi));
              s.w.push_back(wt);
            }
      }
    }
    return s;
  }
  throw std::invalid_argument("sphere_rule: angular products implemented for n <= 3");
}

void push_node(QuadratureRule& r, const CVec& x, double w) {
  for (int j = 0; j < r.n; ++j) {
    r.coords.push_back(x[j].real());
    r.coords.push_back(x[j].imag());
  }
  r.weights.push_back(w);
}

// largest r with rho(r * dir) <= 0; domains are star-shaped about 0
double boundary_radius(const Domain& d, const CVec& dir) {
  double lo = 0.0, hi = d.bounding_radius;
  for (int it = 0; it < 100; ++it) {
    double mid = 0.5 * (lo + hi);
    if (d.jet(mid * dir).value < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

// r >= boundary radius along dir with signed_distance(r * dir) = s
double radius_at_sdist(const Domain& d, const CVec& dir, double rb, double s) {
  if (s <= 0.0) return rb;
  double lo = rb, hi = rb + 4.0 * d.shell_width + s;
  for (int it = 0; it < 100; ++it) {
    double mid = 0.5 * (lo + hi);
    if (d.sdist(mid * dir) < s)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

// quintic taper: 1 below a, 0 above b
double taper(double x, double a, double b) {
  if (x <= a) return 1.0;
  if (x >= b) return 0.0;
  double t = (x - a) / (b - a);
  return 1.0 - t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

}  // namespace

void gauss_legendre(int m, std::vector<double>& x, std::vector<double>& w) {
  if (m < 1) throw std::invalid_argument("gauss_legendre: m >= 1 required");
  x.assign(m, 0.0);
  w.assign(m, 0.0);
  for (int i = 0; i < (m + 1) / 2; ++i) {
    double t = std::cos(kPi * (i + 0.75) / (m + 0.5));
    double p0 = 1.0, dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      p0 = 1.0;
      double p1 = 0.0;
      for (int j = 0; j < m; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * t * p1 - j * p2) / (j + 1.0);
      }
      dp = m * (t * p0 - p1) / (t * t - 1.0);
      double dt = p0 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-15) break;
    }
    x[i] = -t;
    x[m - 1 - i] = t;
    w[i] = w[m - 1 - i] = 2.0 / ((1.0 - t * t) * dp * dp);
  }
}

CVec QuadratureRule::node(std::size_t i) const {
  CVec x(n);
  const double* p = coords.data() + 2 * static_cast<std::size_t>(n) * i;
  for (int j = 0; j < n; ++j) x[j] = cplx(p[2 * j], p[2 * j + 1]);
  return x;
}

cplx QuadratureRule::frame(std::size_t i, int p, int j) const {
  const int np = 2 * n - 1;
  return frames[(i * np + p) * n + j];
}

double QuadratureRule::measure() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

QuadratureRule volume_rule(const Domain& d, int level) {
  if (level < 0) throw std::invalid_argument("volume_rule: level >= 0 required");
  QuadratureRule r;
  r.n = d.n;
  r.level = level;
  r.descriptor = "volume";
  const int sc = 1 << level;
  SphereRule ang = sphere_rule(d.n, 3 * sc, 6 * sc);
  std::vector<double> rx, rw;
  gl_cell(8 * sc, 0.0, 1.0, rx, rw);
  const int pw = 2 * d.n - 1;
  for (std::size_t a = 0; a < ang.size(); ++a) {
    CVec dir(d.n);
    for (int j = 0; j < d.n; ++j) dir[j] = ang.dirs[a * d.n + j];
    double rb = boundary_radius(d, dir);
    double scale = std::pow(rb, 2 * d.n);
    for (std::size_t i = 0; i < rx.size(); ++i) {
      double rpow = std::pow(rx[i], pw);
      push_node(r, (rb * rx[i]) * dir, rw[i] * ang.w[a] * scale * rpow);
    }
  }
  return r;
}

QuadratureRule volume_rule(const Domain& d, int level, const CVec& singular_center) {
  if (level < 0) throw std::invalid_argument("volume_rule: level >= 0 required");
  if (d.jet(singular_center).value > 0.0)
    throw std::invalid_argument("volume_rule: singular_center must lie in the closed domain");
  QuadratureRule r;
  r.n = d.n;
  r.level = level;
  r.descriptor = "volume";
  r.has_singular_center = true;
  r.singular_center = singular_center;

  // partition of unity in |zeta - center|: psi = 1 inside rho0/2, 0 past rho0
  double dist = std::abs(d.sdist(singular_center));
  double rho0 = std::min(0.8 * dist, 0.4);
  if (rho0 <= 0.0) throw std::invalid_argument("volume_rule: singular_center on the boundary");
  const double a = 0.5 * rho0, b = rho0;
  const int sc = 1 << level;

  // near field: geometric polar layers around the center, ratio 1/2,
  // truncated at rho0 * 2^-(level+4); the dropped ball is O(eps) for the
  // 1-2n singular kernels this rule serves
  SphereRule ang_near = sphere_rule(d.n, 3 * sc, 6 * sc);
  const int layers = level + 4;
  for (int k = 1; k <= layers; ++k) {
    double r_hi = rho0 * std::pow(0.5, k - 1);
    double r_lo = rho0 * std::pow(0.5, k);
    std::vector<double> rx, rw;
    gl_cell(4, r_lo, r_hi, rx, rw);
    for (std::size_t q = 0; q < ang_near.size(); ++q) {
      CVec dir(d.n);
      for (int j = 0; j < d.n; ++j) dir[j] = ang_near.dirs[q * d.n + j];
      for (std::size_t i = 0; i < rx.size(); ++i) {
        CVec x = singular_center + rx[i] * dir;
        if (d.jet(x).value > 0.0) continue;  // clip layers poking outside D
        double w = rw[i] * ang_near.w[q] * std::pow(rx[i], 2 * d.n - 1) * taper(rx[i], a, b);
        if (w > 0.0) push_node(r, x, w);
      }
    }
  }

  // far field: global rule weighted by 1 - psi
  QuadratureRule global = volume_rule(d, level);
  for (std::size_t i = 0; i < global.size(); ++i) {
    CVec x = global.node(i);
    double w = global.weights[i] * (1.0 - taper(norm2(x - singular_center), a, b));
    if (w > 0.0) push_node(r, x, w);
  }
  return r;
}

QuadratureRule polar_rule(int n, const CVec& center, double radius, int level) {
  if (level < 0 || radius <= 0.0) throw std::invalid_argument("polar_rule: bad parameters");
  QuadratureRule r;
  r.n = n;
  r.level = level;
  r.descriptor = "volume";
  const int sc = 1 << level;
  SphereRule ang = sphere_rule(n, 6 * sc, 12 * sc);
  std::vector<double> rx, rw;
  gl_cell(8 * sc, 0.0, radius, rx, rw);
  for (std::size_t a = 0; a < ang.size(); ++a) {
    CVec dir(n);
    for (int j = 0; j < n; ++j) dir[j] = ang.dirs[a * n + j];
    for (std::size_t i = 0; i < rx.size(); ++i)
      push_node(r, center + rx[i] * dir, rw[i] * ang.w[a] * std::pow(rx[i], 2 * n - 1));
  }
  return r;
}

QuadratureRule shell_rule(const Domain& d, int level) {
  if (level < 0) throw std::invalid_argument("shell_rule: level >= 0 required");
  QuadratureRule r;
  r.n = d.n;
  r.level = level;
  r.descriptor = "shell";
  const double delta = d.shell_width;
  const double r0 = 0.25 * delta, r1 = 0.75 * delta;
  // signed-distance knots: graded toward bD, then aligned with the cutoff band
  const double knots[] = {0.0, r0 / 8.0, r0 / 4.0, r0 / 2.0, r0, r1, delta};
  const int ncell = 6;
  const int sc = 1 << level;
  SphereRule ang = sphere_rule(d.n, 4 * sc, 8 * sc);
  const int ns = 3 * sc;
  for (std::size_t a = 0; a < ang.size(); ++a) {
    CVec dir(d.n);
    for (int j = 0; j < d.n; ++j) dir[j] = ang.dirs[a * d.n + j];
    double rb = boundary_radius(d, dir);
    double rad[ncell + 1];
    for (int k = 0; k <= ncell; ++k) rad[k] = radius_at_sdist(d, dir, rb, knots[k]);
    for (int k = 0; k < ncell; ++k) {
      std::vector<double> rx, rw;
      gl_cell(ns, rad[k], rad[k + 1], rx, rw);
      for (int i = 0; i < ns; ++i)
        push_node(r, rx[i] * dir, rw[i] * ang.w[a] * std::pow(rx[i], 2 * d.n - 1));
    }
  }
  return r;
}

QuadratureRule boundary_rule(const Domain& d, int level) {
  if (d.n != 2)
    throw std::invalid_argument("boundary_rule: parametrization implemented for n = 2");
  if (level < 0) throw std::invalid_argument("boundary_rule: level >= 0 required");
  // scaled-sphere chart zeta = (a1 cos t e^{i p1}, a2 sin t e^{i p2}); for the
  // ball a1 = a2 = 1. Ellipsoids sum c_j |zeta_j|^2 = 1 use a_j = 1 / sqrt(c_j),
  // read off the jet's constant Hessian.
  RhoJet j0 = d.jet(CVec{0.0, 0.0});
  double a1 = 1.0 / std::sqrt(j0.hm[0][0].real());
  double a2 = 1.0 / std::sqrt(j0.hm[1][1].real());

  QuadratureRule r;
  r.n = 2;
  r.level = level;
  r.descriptor = "boundary";
  // (theta, phi1, phi2) is negatively oriented against the complex
  // orientation of bD (checked against the n = 1 Cauchy count)
  r.orientation = -1.0;
  const int sc = 1 << level;
  const int ntheta = 10 * sc, nphi = 20 * sc;
  const double dphi = kTwoPi / nphi;
  std::vector<double> tx, tw;
  gl_cell(ntheta, 0.0, 0.5 * kPi, tx, tw);
  for (int it = 0; it < ntheta; ++it) {
    const double ct = std::cos(tx[it]), st = std::sin(tx[it]);
    for (int k1 = 0; k1 < nphi; ++k1) {
      const cplx e1 = std::polar(1.0, (k1 + 0.5) * dphi);
      for (int k2 = 0; k2 < nphi; ++k2) {
        const cplx e2 = std::polar(1.0, (k2 + 0.5) * dphi);
        const cplx z1 = a1 * ct * e1, z2 = a2 * st * e2;
        push_node(r, CVec{z1, z2}, 0.0);  // surface weight filled below
        r.params.insert(r.params.end(), {tx[it], (k1 + 0.5) * dphi, (k2 + 0.5) * dphi});
        const double wp = tw[it] * dphi * dphi;
        r.weight_param.push_back(wp);
        // frames d zeta / d (theta, phi1, phi2)
        const cplx f[3][2] = {{-a1 * st * e1, a2 * ct * e2},
                              {kI * z1, 0.0},
                              {0.0, kI * z2}};
        double gram[3][3];
        for (int p = 0; p < 3; ++p)
          for (int q = 0; q < 3; ++q) {
            double s = 0.0;
            for (int c = 0; c < 2; ++c)
              s += f[p][c].real() * f[q][c].real() + f[p][c].imag() * f[q][c].imag();
            gram[p][q] = s;
          }
        double det = gram[0][0] * (gram[1][1] * gram[2][2] - gram[1][2] * gram[2][1]) -
                     gram[0][1] * (gram[1][0] * gram[2][2] - gram[1][2] * gram[2][0]) +
                     gram[0][2] * (gram[1][0] * gram[2][1] - gram[1][1] * gram[2][0]);
        r.weights.back() = wp * std::sqrt(std::max(det, 0.0));
        for (int p = 0; p < 3; ++p)
          for (int c = 0; c < 2; ++c) r.frames.push_back(f[p][c]);
      }
    }
  }
  return r;
}

cplx integrate(const QuadratureRule& rule, const std::function<cplx(const CVec&)>& f,
               int threads) {
  const std::size_t m = rule.size();
  std::vector<cplx> vals(m);
  auto worker = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) vals[i] = f(rule.node(i));
  };
  threads = std::max(1, threads);
  if (threads == 1 || m < 1024) {
    worker(0, m);
  } else {
    std::vector<std::thread> pool;
    std::size_t chunk = (m + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      std::size_t lo = t * chunk, hi = std::min(m, lo + chunk);
      if (lo < hi) pool.emplace_back(worker, lo, hi);
    }
    for (auto& th : pool) th.join();
  }
  cplx acc = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (!std::isfinite(vals[i].real()) || !std::isfinite(vals[i].imag())) {
      std::ostringstream os;
      os << "integrate: non-finite integrand at node " << i << " = (";
      CVec x = rule.node(i);
      for (int j = 0; j < rule.n; ++j)
        os << (j ? ", " : "") << x[j].real() << (x[j].imag() < 0 ? "" : "+") << x[j].imag()
           << "i";
      os << ")";
      throw std::runtime_error(os.str());
    }
    acc += rule.weights[i] * vals[i];
  }
  return acc;
}

ConvergenceReport self_convergence(const std::vector<QuadratureRule>& family,
                                   const std::function<cplx(const CVec&)>& f) {
  if (family.size() < 3)
    throw std::invalid_argument("self_convergence: at least 3 levels required");
  ConvergenceReport rep;
  for (const QuadratureRule& r : family) rep.values.push_back(integrate(r, f));
  double scale = 0.0;
  for (cplx v : rep.values) scale = std::max(scale, std::abs(v));
  for (std::size_t k = 0; k + 2 < rep.values.size(); ++k) {
    double d0 = std::abs(rep.values[k + 1] - rep.values[k]);
    double d1 = std::abs(rep.values[k + 2] - rep.values[k + 1]);
    if (d1 < 1e-15 * std::max(scale, 1.0)) {
      rep.saturated = true;
      rep.orders.push_back(std::numeric_limits<double>::infinity());
    } else {
      rep.orders.push_back(std::log2(d0 / d1));
    }
  }
  return rep;
}

}  // namespace dbar
