// Homotopy operators: ambient BM potential over a recentered offset grid plus
// the band-supported Leray correction. All kernel contraction data that does
// not depend on the evaluation point is baked at construction; per z the
// ambient loop is a support test plus a row product, the shell loop an affine
// Leray update per band node.

#include "dbar/homotopy.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <memory>
#include <stdexcept>
#include <utility>

#include "dbar/util.hpp"

namespace dbar {

namespace {

// boundary crossing along a ray from the (interior) origin
double direction_radius(const Domain& d, const CVec& dir) {
  CVec origin(d.n);
  if (d.sdist(origin) >= 0.0) throw std::invalid_argument("origin is not interior");
  double lo = 0.0, hi = d.bounding_radius;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    CVec p = dir;
    for (int j = 0; j < d.n; ++j) p[j] *= mid;
    (d.sdist(p) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double domain_max_axis(const Domain& d) {
  double m = 0.0;
  for (int j = 0; j < d.n; ++j) {
    CVec e(d.n);
    e[j] = 1.0;
    m = std::max(m, direction_radius(d, e));
  }
  return m;
}

std::vector<CVec> interior_samples(const Domain& d, int count, std::uint64_t seed) {
  Rng rng(seed);
  const double r = domain_max_axis(d);
  std::vector<CVec> out;
  out.reserve(count);
  while (static_cast<int>(out.size()) < count) {
    CVec z = rng.ball_point(d.n, r);
    if (d.sdist(z) < -0.02 * r) out.push_back(z);
  }
  return out;
}

}  // namespace

std::vector<CVec> interior_points(const Domain& d, int count, std::uint64_t seed) {
  Rng rng(seed);
  const double r = domain_max_axis(d);
  std::vector<CVec> out;
  out.reserve(count);
  while (static_cast<int>(out.size()) < count) {
    CVec z = rng.ball_point(d.n, r);
    if (d.sdist(z) < -0.15 * r) out.push_back(z);
  }
  return out;
}

HomotopyEvaluator::HomotopyEvaluator(const Domain& d, const Form& phi, int level)
    : d_(d), phi_(phi), q_(phi.q), level_(level), cutoff_(make_cutoff(d)) {
  if (level_ < 0) throw std::invalid_argument("level must be >= 0");
  if (phi_.n != d_.n) throw std::invalid_argument("form/domain dimension mismatch");
  if (q_ < 0 || q_ > d_.n) throw std::invalid_argument("degree out of range");
  max_axis_ = domain_max_axis(d_);
  support_radius_ = max_axis_ + cutoff_.r1 + 1e-9;
  if (q_ == 0) {
    out_slots_ = mask_slots(d_.n, 0);
    prepare_shell(KernelFlavor::leray, 0, 1);
  } else {
    out_slots_ = mask_slots(d_.n, q_ - 1);
    in_slots_ = mask_slots(d_.n, q_);
    prepare_ambient();
    if (q_ <= d_.n - 1) prepare_shell(KernelFlavor::mixed, q_ - 1, q_ + 1);
  }
}

void HomotopyEvaluator::prepare_ambient() {
  const int n = d_.n;
  // any ball containing supp E phi seen from every z in D works; weights and
  // the fold into Lebesgue measure go straight into the stored rows
  offsets_ = polar_rule(n, CVec(n), 2.0 * max_axis_ + cutoff_.r1, level_);
  const CompiledKernel& kern = compiled_kernel(n, KernelFlavor::bm);
  const Mask full = (Mask(1) << n) - 1;
  std::vector<FoldEntry> plan;
  const auto& monos = kern.monos();
  for (int i = 0; i < static_cast<int>(monos.size()); ++i) {
    const KernelMono& m = monos[i];
    if (std::popcount(m.J) != q_ - 1) continue;
    const Mask I = full & ~m.M;
    if (std::popcount(I) != q_) continue;
    const cplx f = kern.cn() * kernel_fold_factor(n, q_ - 1, q_, m.M, I);
    if (f == cplx(0.0)) continue;
    plan.push_back({i, slot_of(out_slots_, m.J), slot_of(in_slots_, I), f});
  }
  const int R = static_cast<int>(out_slots_.size());
  const int C = static_cast<int>(in_slots_.size());
  bm_rows_.assign(offsets_.size() * R * C, cplx(0.0));
  KernelPoint p;
  p.n = n;
  p.etabar = CVec(n);
  const double* co = offsets_.coords.data();
  for (std::size_t i = 0; i < offsets_.size(); ++i) {
    double N = 0.0;
    for (int j = 0; j < n; ++j) {
      const cplx w(co[2 * (i * n + j)], co[2 * (i * n + j) + 1]);
      p.etabar[j] = std::conj(w);
      N += std::norm(w);
    }
    p.N = N;
    cplx* row = &bm_rows_[i * R * C];
    const double wt = offsets_.weights[i];
    for (const FoldEntry& e : plan)
      row[e.row * C + e.col] += wt * e.factor * kernel_mono_value(monos[e.mono], p);
  }
}

void HomotopyEvaluator::prepare_shell(KernelFlavor flavor, int q_out, int q_in) {
  const int n = d_.n;
  shell_kernel_ = &compiled_kernel(n, flavor);
  const std::vector<Mask> comm_slots = mask_slots(n, q_in);
  ncomm_ = static_cast<int>(comm_slots.size());
  const Mask full = (Mask(1) << n) - 1;
  const auto& monos = shell_kernel_->monos();
  for (int i = 0; i < static_cast<int>(monos.size()); ++i) {
    const KernelMono& m = monos[i];
    if (std::popcount(m.J) != q_out) continue;
    const Mask I = full & ~m.M;
    if (std::popcount(I) != q_in) continue;
    const cplx f = shell_kernel_->cn() * kernel_fold_factor(n, q_out, q_in, m.M, I);
    if (f == cplx(0.0)) continue;
    plan_.push_back({i, slot_of(out_slots_, m.J), slot_of(comm_slots, I), f});
  }
  if (plan_.empty()) return;

  const QuadratureRule sh = shell_rule(d_, level_);
  std::vector<cplx> pv(phi_.coeff.size());
  std::vector<cplx> psi(ncomm_);
  for (std::size_t i = 0; i < sh.size(); ++i) {
    const CVec zeta = sh.node(i);
    const CVec dchi = dbar_chi(d_, zeta);
    bool band = false;
    for (int j = 0; j < n; ++j) band = band || dchi[j] != cplx(0.0);
    if (!band) continue;
    for (std::size_t c = 0; c < pv.size(); ++c) pv[c] = phi_.coeff[c].value(zeta);
    bool keep = false;
    for (int s = 0; s < ncomm_; ++s) {
      const Mask K = comm_slots[s];
      cplx v = 0.0;
      for (int k = 1; k <= n; ++k) {
        const Mask bit = Mask(1) << (k - 1);
        if (!(K & bit)) continue;
        v += static_cast<double>(insert_sign(K & ~bit, k)) * dchi[k - 1] *
             pv[slot_of(phi_.slots, K & ~bit)];
      }
      psi[s] = v * sh.weights[i];
      keep = keep || psi[s] != cplx(0.0);
    }
    if (!keep) continue;
    szeta_.push_back(zeta);
    scomm_.insert(scomm_.end(), psi.begin(), psi.end());
    const RhoJet jet = d_.jet(zeta);
    sgrad_.push_back(jet.grad);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) sa_.push_back(0.5 * jet.hh[r][c]);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) shm_.push_back(jet.hm[r][c]);
  }
}

std::vector<cplx> HomotopyEvaluator::u0(const CVec& z) const {
  if (q_ < 1) throw std::logic_error("u0 needs a form of degree >= 1");
  const int n = d_.n;
  const int R = static_cast<int>(out_slots_.size());
  const int C = static_cast<int>(in_slots_.size());
  std::vector<cplx> acc(R, cplx(0.0));
  std::vector<cplx> tmp(C);
  CVec x(n);
  const double bound2 = support_radius_ * support_radius_;
  const double* co = offsets_.coords.data();
  const std::size_t m = offsets_.size();
  for (std::size_t i = 0; i < m; ++i) {
    double r2 = 0.0;
    for (int j = 0; j < n; ++j) {
      const double xr = z[j].real() + co[2 * (i * n + j)];
      const double xi = z[j].imag() + co[2 * (i * n + j) + 1];
      x[j] = cplx(xr, xi);
      r2 += xr * xr + xi * xi;
    }
    if (r2 > bound2) continue;
    const double chi = cutoff_.value(d_.sdist(x));
    if (chi == 0.0) continue;
    for (int c = 0; c < C; ++c) tmp[c] = chi * phi_.coeff[c].value(x);
    const cplx* row = &bm_rows_[i * R * C];
    for (int r = 0; r < R; ++r)
      for (int c = 0; c < C; ++c) acc[r] += row[r * C + c] * tmp[c];
  }
  return acc;
}

std::vector<cplx> HomotopyEvaluator::shell_sum(const CVec& z) const {
  const int n = d_.n;
  const int nn = n * n;
  std::vector<cplx> acc(out_slots_.size(), cplx(0.0));
  if (shell_kernel_ == nullptr || szeta_.empty()) return acc;
  const auto& monos = shell_kernel_->monos();
  KernelPoint p;
  p.n = n;
  p.etabar = CVec(n);
  p.W = CVec(n);
  CVec eta(n);
  const std::size_t m = szeta_.size();
  for (std::size_t a = 0; a < m; ++a) {
    const CVec& zeta = szeta_[a];
    double N = 0.0;
    for (int j = 0; j < n; ++j) {
      const cplx e = zeta[j] - z[j];
      eta[j] = e;
      p.etabar[j] = std::conj(e);
      N += std::norm(e);
    }
    p.N = N;
    const CVec& g = sgrad_[a];
    const cplx* A = &sa_[a * nn];
    cplx Phi = 0.0;
    for (int r = 0; r < n; ++r) {
      cplx W = g[r];
      for (int c = 0; c < n; ++c) W += A[r * n + c] * eta[c];
      p.W[r] = W;
      Phi += W * eta[r];
    }
    p.Phi = Phi;
    const cplx* H = &shm_[a * nn];
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) p.dW[r][c] = H[r * n + c];
    const cplx* psi = &scomm_[a * ncomm_];
    for (const FoldEntry& e : plan_)
      acc[e.row] += e.factor * kernel_mono_value(monos[e.mono], p) * psi[e.col];
  }
  return acc;
}

std::vector<cplx> HomotopyEvaluator::u1(const CVec& z) const {
  if (q_ < 1) throw std::logic_error("u1 needs a form of degree >= 1");
  return shell_sum(z);
}

std::vector<cplx> HomotopyEvaluator::hq(const CVec& z) const {
  std::vector<cplx> a = u0(z);
  const std::vector<cplx> b = shell_sum(z);
  for (std::size_t r = 0; r < a.size(); ++r) a[r] += b[r];
  return a;
}

cplx HomotopyEvaluator::h0(const CVec& z) const {
  if (q_ != 0) throw std::logic_error("h0 needs function input");
  return shell_sum(z)[0];
}

std::vector<cplx> HomotopyEvaluator::dbar_hq(const CVec& z) const {
  if (q_ < 1) throw std::logic_error("dbar_hq needs a form of degree >= 1");
  const int n = d_.n;
  const double dist = std::abs(d_.sdist(z));
  const double h = std::min(phi_.h_fd, std::max(dist, 1e-8) / 8.0);
  std::vector<std::vector<cplx>> db(n);
  for (int k = 0; k < n; ++k) {
    CVec zp = z, zm = z, wp = z, wm = z;
    zp[k] += h;
    zm[k] -= h;
    wp[k] += cplx(0.0, h);
    wm[k] -= cplx(0.0, h);
    const auto up = hq(zp), um = hq(zm), vp = hq(wp), vm = hq(wm);
    db[k].resize(up.size());
    for (std::size_t r = 0; r < up.size(); ++r)
      db[k][r] = 0.5 * ((up[r] - um[r]) + kI * (vp[r] - vm[r])) / (2.0 * h);
  }
  const std::vector<Mask> res_slots = mask_slots(n, q_);
  std::vector<cplx> res(res_slots.size(), cplx(0.0));
  for (std::size_t s = 0; s < res_slots.size(); ++s) {
    const Mask K = res_slots[s];
    for (int k = 1; k <= n; ++k) {
      const Mask bit = Mask(1) << (k - 1);
      if (!(K & bit)) continue;
      res[s] += static_cast<double>(insert_sign(K & ~bit, k)) *
                db[k - 1][slot_of(out_slots_, K & ~bit)];
    }
  }
  return res;
}

std::vector<cplx> u0(const Domain& d, const Form& phi, const CVec& z, int level) {
  return HomotopyEvaluator(d, phi, level).u0(z);
}

std::vector<cplx> u1(const Domain& d, const Form& phi, const CVec& z, int level) {
  return HomotopyEvaluator(d, phi, level).u1(z);
}

std::vector<cplx> h_q(const Domain& d, const Form& phi, const CVec& z, int level) {
  return HomotopyEvaluator(d, phi, level).hq(z);
}

cplx h0(const Domain& d, const std::function<cplx(const CVec&)>& f, const CVec& z, int level) {
  Form f0(d.n, 0);
  f0.coeff[0].value = f;
  return HomotopyEvaluator(d, f0, level).h0(z);
}

double homotopy_residual(const Domain& d, const Form& phi, const CVec& z, int level) {
  if (phi.q < 1 || phi.q > d.n) throw std::invalid_argument("residual needs 1 <= q <= n");
  HomotopyEvaluator ev(d, phi, level);
  const std::vector<cplx> lhs = eval_form(phi, z);
  std::vector<cplx> rhs = ev.dbar_hq(z);
  const ClosednessReport cr = is_dbar_closed(phi, interior_samples(d, 25, 2026), 1e-6);
  if (!cr.closed && phi.q + 1 <= d.n) {
    const Form dphi = dbar(phi);
    HomotopyEvaluator next(d, dphi, level);
    const std::vector<cplx> t2 = next.hq(z);
    for (std::size_t r = 0; r < rhs.size(); ++r) rhs[r] += t2[r];
  }
  double scale = 1.0, worst = 0.0;
  for (const cplx v : lhs) scale = std::max(scale, std::abs(v));
  for (std::size_t r = 0; r < lhs.size(); ++r) worst = std::max(worst, std::abs(lhs[r] - rhs[r]));
  return worst / scale;
}

BoundaryReproducer::BoundaryReproducer(const Domain& d, int level)
    : rule_(boundary_rule(d, level)) {
  const int n = rule_.n;
  cols_ = mask_slots(n, n - 1);
  const int C = static_cast<int>(cols_.size());
  dets_.assign(rule_.size() * C, cplx(0.0));
  for (std::size_t i = 0; i < rule_.size(); ++i) {
    for (int c = 0; c < C; ++c) {
      // pullback determinant of dzeta_1 ^ dzeta_2 ^ dzetabar_m through the
      // chart frames, rows in wedge order, columns in parameter order
      const int mbar = std::countr_zero(cols_[c]);
      cplx A[3][3];
      for (int pc = 0; pc < 3; ++pc) {
        A[0][pc] = rule_.frame(i, pc, 0);
        A[1][pc] = rule_.frame(i, pc, 1);
        A[2][pc] = std::conj(rule_.frame(i, pc, mbar));
      }
      const cplx det = A[0][0] * (A[1][1] * A[2][2] - A[1][2] * A[2][1]) -
                       A[0][1] * (A[1][0] * A[2][2] - A[1][2] * A[2][0]) +
                       A[0][2] * (A[1][0] * A[2][1] - A[1][1] * A[2][0]);
      dets_[i * C + c] = rule_.orientation * rule_.weight_param[i] * det;
    }
  }
}

cplx BoundaryReproducer::reproduce(const std::function<cplx(const CVec&)>& f,
                                   const CVec& z) const {
  const int n = rule_.n;
  const CompiledKernel& kern = compiled_kernel(n, KernelFlavor::bm);
  const int C = static_cast<int>(cols_.size());
  // monos contributing to the (n, n-1) components, by column
  std::vector<std::pair<int, int>> entries;
  const auto& monos = kern.monos();
  for (int i = 0; i < static_cast<int>(monos.size()); ++i) {
    if (monos[i].J != 0) continue;
    for (int c = 0; c < C; ++c)
      if (monos[i].M == cols_[c]) entries.push_back({i, c});
  }
  KernelPoint p;
  p.n = n;
  p.etabar = CVec(n);
  cplx acc = 0.0;
  for (std::size_t i = 0; i < rule_.size(); ++i) {
    const CVec zeta = rule_.node(i);
    double N = 0.0;
    for (int j = 0; j < n; ++j) {
      const cplx e = zeta[j] - z[j];
      p.etabar[j] = std::conj(e);
      N += std::norm(e);
    }
    p.N = N;
    cplx val = 0.0;
    for (const auto& [mi, c] : entries)
      val += kern.cn() * kernel_mono_value(monos[mi], p) * dets_[i * C + c];
    acc += f(zeta) * val;
  }
  return acc;
}

cplx bm_reproduce(const Domain& d, const std::function<cplx(const CVec&)>& f, const CVec& z,
                  int level) {
  return BoundaryReproducer(d, level).reproduce(f, z);
}

namespace {

SolveReport solve_impl(const Domain& d, const Form& phi, const std::vector<CVec>& points,
                       int level, const std::vector<NormSpec>& specs, bool top_degree) {
  const WallTimer timer;
  SolveReport rep;
  rep.n = d.n;
  rep.q = phi.q;
  if (top_degree) {
    if (phi.q != d.n) throw std::invalid_argument("top-degree solve needs q = n");
  } else {
    if (phi.q < 1 || phi.q > d.n) throw std::invalid_argument("solve needs 1 <= q <= n");
    const ClosednessReport cr = is_dbar_closed(phi, interior_samples(d, 25, 2026), 1e-6);
    rep.closedness_residual = cr.max_residual;
    if (!cr.closed)
      throw std::invalid_argument("input is not dbar-closed: max residual " +
                                  format_double(cr.max_residual) + " over 25 interior samples");
  }
  rep.levels = level >= 1 ? std::vector<int>{level - 1, level} : std::vector<int>{0};

  double scale = 1e-12;
  for (const CVec& z : points)
    for (const cplx v : eval_form(phi, z)) scale = std::max(scale, std::abs(v));

  rep.residuals.resize(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) rep.residuals[i].z = points[i];

  std::shared_ptr<HomotopyEvaluator> ev;
  for (const int lvl : rep.levels) {
    ev = std::make_shared<HomotopyEvaluator>(d, phi, lvl);
    for (std::size_t i = 0; i < points.size(); ++i) {
      const std::vector<cplx> lhs = eval_form(phi, points[i]);
      const std::vector<cplx> rhs = ev->dbar_hq(points[i]);
      double worst = 0.0;
      for (std::size_t r = 0; r < lhs.size(); ++r)
        worst = std::max(worst, std::abs(lhs[r] - rhs[r]));
      rep.residuals[i].by_level.push_back(worst / scale);
    }
  }

  const std::size_t nl = rep.levels.size();
  std::vector<double> maxima(nl, 0.0);
  for (const PointResidual& pr : rep.residuals)
    for (std::size_t l = 0; l < nl; ++l) maxima[l] = std::max(maxima[l], pr.by_level[l]);
  rep.max_residual = maxima.back();
  rep.nonincreasing = nl < 2 || maxima[nl - 1] <= maxima[nl - 2] * (1.0 + 1e-9);

  if (!specs.empty()) {
    const QuadratureRule norm_rule = volume_rule(d, 0);
    const int ncomp = binomial(d.n, phi.q - 1);
    auto uvec = [ev](const CVec& z) { return ev->hq(z); };
    for (const NormSpec& s : specs) {
      char label[64];
      std::snprintf(label, sizeof(label), "k=%d,p=%g,mu=%g", s.k, s.p, s.mu);
      rep.norms.emplace_back(label, weighted_norm(uvec, ncomp, s, d, norm_rule));
    }
  }
  rep.u = [ev](const CVec& z) { return ev->hq(z); };
  rep.wall_seconds = timer.seconds();
  return rep;
}

}  // namespace

SolveReport solve(const Domain& d, const Form& phi, const std::vector<CVec>& points, int level,
                  const std::vector<NormSpec>& norm_specs) {
  return solve_impl(d, phi, points, level, norm_specs, false);
}

SolveReport solve_top_degree(const Domain& d, const Form& phi, const std::vector<CVec>& points,
                             int level) {
  return solve_impl(d, phi, points, level, {}, true);
}

}  // namespace dbar
