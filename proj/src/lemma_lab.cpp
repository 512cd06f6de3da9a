#include "dbar/lemma_lab.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace dbar {

namespace {

// value and Wirtinger gradient of G = rho_zeta(zeta).(zeta - base)
void s2_jet(const Domain& d, const CVec& base, const CVec& zeta, cplx& G, CVec& G_dz, CVec& G_dzb) {
  const RhoJet j = d.jet(zeta);
  const int n = d.n;
  G = 0.0;
  G_dz = CVec(n);
  G_dzb = CVec(n);
  for (int a = 0; a < n; ++a) G += j.grad[a] * (zeta[a] - base[a]);
  for (int l = 0; l < n; ++l) {
    cplx dz = j.grad[l];
    cplx dzb = 0.0;
    for (int a = 0; a < n; ++a) {
      dz += j.hh[l][a] * (zeta[a] - base[a]);
      dzb += j.hm[a][l] * (zeta[a] - base[a]);
    }
    G_dz[l] = dz;
    G_dzb[l] = dzb;
  }
}

}  // namespace

std::array<double, 2 * kMaxN> Chart::forward(const CVec& zeta) const {
  std::array<double, 2 * kMaxN> s{};
  const RhoJet j = domain.jet(zeta);
  s[0] = j.value;
  cplx G = 0.0;
  for (int a = 0; a < domain.n; ++a) G += j.grad[a] * (zeta[a] - base[a]);
  s[1] = G.imag();
  for (int k = 1; k < domain.n; ++k) {
    s[2 * k] = (zeta[k] - base[k]).real();
    s[2 * k + 1] = (zeta[k] - base[k]).imag();
  }
  return s;
}

Chart coord_map(const Domain& d, const CVec& base) {
  const RhoJet j = d.jet(base);
  if (std::abs(j.value) > 1e-8)
    throw std::invalid_argument("chart base must lie on the boundary (rho = " +
                                std::to_string(j.value) + ")");
  if (std::abs(j.grad[0]) < 1e-10)
    throw std::invalid_argument("chart base needs d rho / d zeta_1 != 0");
  Chart c;
  c.domain = d;
  c.base = base;
  return c;
}

CVec chart_inverse(const Chart& chart, const std::array<double, 2 * kMaxN>& s) {
  const Domain& d = chart.domain;
  const int n = d.n;
  CVec zeta = chart.base;
  for (int k = 1; k < n; ++k) zeta[k] = chart.base[k] + cplx(s[2 * k], s[2 * k + 1]);

  Eigen::MatrixXd Jm(2 * n, 2 * n);
  Eigen::VectorXd r(2 * n);
  for (int it = 0; it < 50; ++it) {
    const auto cur = chart.forward(zeta);
    double err = 0.0;
    for (int i = 0; i < 2 * n; ++i) {
      r(i) = cur[i] - s[i];
      err = std::max(err, std::abs(r(i)));
    }
    if (err < 1e-12) return zeta;

    const RhoJet j = d.jet(zeta);
    cplx G;
    CVec G_dz, G_dzb;
    s2_jet(d, chart.base, zeta, G, G_dz, G_dzb);
    Jm.setZero();
    for (int l = 0; l < n; ++l) {
      // d s1 / d(x_l, y_l)
      Jm(0, 2 * l) = 2.0 * j.grad[l].real();
      Jm(0, 2 * l + 1) = -2.0 * j.grad[l].imag();
      // d s2 / d(x_l, y_l) with s2 = Im G
      Jm(1, 2 * l) = (G_dz[l] + G_dzb[l]).imag();
      Jm(1, 2 * l + 1) = (G_dz[l] - G_dzb[l]).real();
    }
    for (int k = 1; k < n; ++k) {
      Jm(2 * k, 2 * k) = 1.0;
      Jm(2 * k + 1, 2 * k + 1) = 1.0;
    }
    const Eigen::VectorXd step = Jm.partialPivLu().solve(r);
    for (int l = 0; l < n; ++l) zeta[l] -= cplx(step(2 * l), step(2 * l + 1));
  }
  throw std::runtime_error("chart inversion did not converge in 50 iterations");
}

std::vector<cplx> jacobian_recursion_check(int n_max) {
  if (n_max > 6) throw std::invalid_argument("jacobian_recursion_check supports n_max <= 6");
  std::vector<cplx> dets;
  for (int n = 1; n <= n_max; ++n) {
    const Domain ball = make_ball(n);
    CVec base(n);
    base[0] = 1.0;
    const RhoJet j = ball.jet(base);
    // rows 1-2: (rho_zeta_k, +-rho_zetabar_k) per column pair; then the
    // Re/Im rows of zeta_k - base_k for k >= 2, scalar factors dropped
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(2 * n, 2 * n);
    for (int k = 0; k < n; ++k) {
      M(0, 2 * k) = j.grad[k];
      M(0, 2 * k + 1) = std::conj(j.grad[k]);
      M(1, 2 * k) = j.grad[k];
      M(1, 2 * k + 1) = -std::conj(j.grad[k]);
    }
    for (int k = 1; k < n; ++k) {
      M(2 * k, 2 * k) = 1.0;
      M(2 * k, 2 * k + 1) = 1.0;
      M(2 * k + 1, 2 * k) = 1.0;
      M(2 * k + 1, 2 * k + 1) = -1.0;
    }
    dets.push_back(M.determinant());
  }
  return dets;
}

void graded_axis(double delta, int cells_per_level, std::vector<double>& pts,
                 std::vector<double>& wts) {
  pts.clear();
  wts.clear();
  const double ratio = 0.5;
  const double floor_frac = 1.0 / 16.0;
  const int K = std::max(1, static_cast<int>(std::ceil(std::log(1.0 / (delta * floor_frac)) /
                                                       std::log(1.0 / ratio))));
  double hi = 1.0;
  for (int k = 1; k <= K + 1; ++k) {
    const double lo = (k <= K) ? std::pow(ratio, k) : 0.0;
    const double h = (hi - lo) / cells_per_level;
    for (int c = 0; c < cells_per_level; ++c) {
      pts.push_back(lo + (c + 0.5) * h);
      wts.push_back(h);
    }
    hi = lo;
  }
}

std::vector<double> delta_sweep(double lo, double hi, int per_decade) {
  const double dl = std::log10(lo), dh = std::log10(hi);
  const int m = static_cast<int>(std::lround((dh - dl) * per_decade)) + 1;
  std::vector<double> out(m);
  for (int i = 0; i < m; ++i) out[i] = std::pow(10.0, dl + (dh - dl) * i / (m - 1));
  return out;
}

namespace {

double eval_31i(double delta, double alpha, int cpl) {
  std::vector<double> s, ws, t, wt;
  graded_axis(delta, cpl, s, ws);
  graded_axis(delta, cpl, t, wt);
  double acc = 0.0;
  for (std::size_t a = 0; a < s.size(); ++a) {
    const double sp = std::pow(s[a], 1.0 + alpha) * ws[a];
    const double ds = delta + s[a];
    double inner = 0.0;
    for (std::size_t b = 0; b < t.size(); ++b) {
      const double den = ds + t[b] * t[b];
      inner += wt[b] / (den * den * den);
    }
    acc += sp * inner;
  }
  return acc;
}

double eval_31ii(double delta, double alpha, int n, int cpl) {
  std::vector<double> s1, w1, s2, w2, t, wt;
  graded_axis(delta, cpl, s1, w1);
  graded_axis(delta, cpl, s2, w2);
  graded_axis(delta, cpl, t, wt);
  const int p2 = 2 * n - 3;
  std::vector<double> tp(t.size());
  for (std::size_t b = 0; b < t.size(); ++b) tp[b] = std::pow(t[b], p2) * wt[b];
  double acc = 0.0;
  for (std::size_t a = 0; a < s1.size(); ++a) {
    const double f1 = std::pow(s1[a], alpha - 1.0) * w1[a];
    for (std::size_t c = 0; c < s2.size(); ++c) {
      const double D = delta + s1[a] + s2[c];
      const double f12 = f1 * w2[c];
      double inner = 0.0;
      for (std::size_t b = 0; b < t.size(); ++b) {
        const double d1 = D + t[b] * t[b];
        const double d2 = D + t[b];
        inner += tp[b] / (d1 * d1 * d1 * std::pow(d2, p2));
      }
      acc += f12 * inner;
    }
  }
  return acc;
}

double eval_41(const std::string& which, double delta, double alpha, int n, int cpl) {
  const int p2 = 2 * n - 3;
  if (which == "iii") {
    std::vector<double> s1, w1, s2, w2, t, wt;
    graded_axis(delta, cpl, s1, w1);
    graded_axis(delta, cpl, s2, w2);
    graded_axis(delta, cpl, t, wt);
    std::vector<double> tp(t.size());
    for (std::size_t b = 0; b < t.size(); ++b) tp[b] = std::pow(t[b], p2) * wt[b];
    double acc = 0.0;
    for (std::size_t a = 0; a < s1.size(); ++a) {
      const double f1 = std::pow(s1[a], alpha - 1.0) * w1[a];
      for (std::size_t c = 0; c < s2.size(); ++c) {
        const double D = delta + s1[a] + s2[c];
        const double f12 = f1 * w2[c];
        double inner = 0.0;
        for (std::size_t b = 0; b < t.size(); ++b)
          inner += tp[b] / std::pow(D + t[b] * t[b], n + 1);
        acc += f12 * inner;
      }
    }
    return acc;
  }
  const double spow = (which == "i") ? 1.0 : 1.0 + alpha;
  std::vector<double> s, ws, t, wt;
  graded_axis(delta, cpl, s, ws);
  graded_axis(delta, cpl, t, wt);
  std::vector<double> tp(t.size());
  for (std::size_t b = 0; b < t.size(); ++b) tp[b] = std::pow(t[b], p2) * wt[b];
  double acc = 0.0;
  for (std::size_t a = 0; a < s.size(); ++a) {
    const double f = std::pow(s[a], spow) * ws[a];
    const double ds = delta + s[a];
    double inner = 0.0;
    for (std::size_t b = 0; b < t.size(); ++b)
      inner += tp[b] / std::pow(ds + t[b] * t[b], n + 1);
    acc += f * inner;
  }
  return acc;
}

LemmaResult with_self_check(double fine, double coarse) {
  LemmaResult r;
  r.value = fine;
  r.self_error = std::abs(fine - coarse) / std::max(std::abs(fine), 1e-300);
  r.precision_warning = r.self_error > 0.05;
  return r;
}

}  // namespace

LemmaResult lemma31_i(double delta, double alpha, const GridSpec& grid) {
  if (!(delta > 0.0 && delta < 0.5)) throw std::invalid_argument("lemma31_i needs 0 < delta < 1/2");
  const int cpl = grid.cells_per_level;
  return with_self_check(eval_31i(delta, alpha, cpl),
                         eval_31i(delta, alpha, std::max(2, cpl / 2)));
}

LemmaResult lemma31_ii(double delta, double alpha, int n, const GridSpec& grid) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("lemma31_ii needs 0 < alpha < 1");
  if (n < 2) throw std::invalid_argument("lemma31_ii needs n >= 2");
  const int cpl = grid.cells_per_level;
  return with_self_check(eval_31ii(delta, alpha, n, cpl),
                         eval_31ii(delta, alpha, n, std::max(2, cpl / 2)));
}

LemmaResult lemma41(const std::string& which, double delta, double alpha, int n,
                    const GridSpec& grid) {
  if (which != "i" && which != "ii" && which != "iii")
    throw std::invalid_argument("lemma41 case must be i, ii or iii");
  if (n < 2) throw std::invalid_argument("lemma41 needs n >= 2");
  const int cpl = grid.cells_per_level;
  return with_self_check(eval_41(which, delta, alpha, n, cpl),
                         eval_41(which, delta, alpha, n, std::max(2, cpl / 2)));
}

std::vector<GrowthFit> inverse_chart_growth(const Chart& chart, const std::vector<int>& orders,
                                            const std::vector<CVec>& samples) {
  std::vector<GrowthFit> out;
  for (int m : orders) {
    std::vector<double> lx, ly;
    for (const CVec& zeta : samples) {
      const auto s0 = chart.forward(zeta);
      const double dist = signed_distance(chart.domain, zeta);
      if (dist <= 0.0) continue;
      const double h = std::max(1e-6, 0.05 * dist);
      auto shift = [&](double ds1) {
        auto s = s0;
        s[0] += ds1;
        return chart_inverse(chart, s);
      };
      double mag = 0.0;
      if (m == 1) {
        const CVec a = shift(h), b = shift(-h);
        CVec diff = a - b;
        mag = norm2(diff) / (2 * h);
      } else if (m == 2) {
        const CVec a = shift(h), b = shift(-h), c = shift(0.0);
        const CVec diff = (a - c) + (b - c);
        mag = norm2(diff) / (h * h);
      } else {
        throw std::invalid_argument("inverse_chart_growth supports orders 1 and 2");
      }
      if (mag < 1e-13) continue;
      lx.push_back(std::log(dist));
      ly.push_back(std::log(mag));
    }
    GrowthFit g;
    g.order = m;
    g.exponent = lx.size() >= 2 ? -ols_fit(lx, ly).slope : 0.0;
    out.push_back(g);
  }
  return out;
}

}  // namespace dbar
