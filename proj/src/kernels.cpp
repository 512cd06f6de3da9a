#include "dbar/kernels.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>
#include <utility>

#include "dbar/util.hpp"

namespace dbar {

namespace {

constexpr double kPi = 3.14159265358979323846;

cplx ipow(cplx b, int e) {
  cplx r = 1.0;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

double ipow(double b, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

enum class Gen : std::uint8_t { dzeta = 0, dzetabar = 1, dzbar = 2 };

struct Gen1 {
  Gen type;
  std::uint8_t idx;  // 0-based
};

bool operator==(const Gen1& a, const Gen1& b) { return a.type == b.type && a.idx == b.idx; }
bool gen_less(const Gen1& a, const Gen1& b) {
  if (a.type != b.type) return a.type < b.type;
  return a.idx < b.idx;
}

// expansion-time term; the wedge word stays in product order until the end
struct XTerm {
  double coeff = 1.0;
  std::vector<std::uint8_t> etabar, w;
  std::vector<std::pair<std::uint8_t, std::uint8_t>> dw;
  int npow = 0, phipow = 0;
  std::vector<Gen1> word;
};

using TermList = std::vector<XTerm>;

bool word_repeats(const std::vector<Gen1>& word) {
  for (std::size_t i = 0; i < word.size(); ++i)
    for (std::size_t j = i + 1; j < word.size(); ++j)
      if (word[i] == word[j]) return true;
  return false;
}

TermList wedge(const TermList& u, const TermList& v) {
  TermList out;
  out.reserve(u.size() * v.size());
  for (const XTerm& a : u)
    for (const XTerm& b : v) {
      XTerm t = a;
      t.coeff *= b.coeff;
      t.etabar.insert(t.etabar.end(), b.etabar.begin(), b.etabar.end());
      t.w.insert(t.w.end(), b.w.begin(), b.w.end());
      t.dw.insert(t.dw.end(), b.dw.begin(), b.dw.end());
      t.npow += b.npow;
      t.phipow += b.phipow;
      t.word.insert(t.word.end(), b.word.begin(), b.word.end());
      if (word_repeats(t.word)) continue;
      out.push_back(std::move(t));
    }
  return out;
}

TermList unit_term() { return {XTerm{}}; }

TermList wedge_pow(const TermList& f, int p) {
  TermList r = unit_term();
  for (int i = 0; i < p; ++i) r = wedge(r, f);
  return r;
}

// <etabar, dzeta> / N
TermList beta_factor(int n) {
  TermList out;
  for (int m = 0; m < n; ++m) {
    XTerm t;
    t.etabar.push_back(static_cast<std::uint8_t>(m));
    t.npow = 1;
    t.word = {{Gen::dzeta, static_cast<std::uint8_t>(m)}};
    out.push_back(std::move(t));
  }
  return out;
}

// <W, dzeta> / Phi
TermList gamma_factor(int n) {
  TermList out;
  for (int m = 0; m < n; ++m) {
    XTerm t;
    t.w.push_back(static_cast<std::uint8_t>(m));
    t.phipow = 1;
    t.word = {{Gen::dzeta, static_cast<std::uint8_t>(m)}};
    out.push_back(std::move(t));
  }
  return out;
}

// <d etabar, dzeta> / N with d etabar_k = dzetabar_k - dzbar_k
TermList a_factor(int n) {
  TermList out;
  for (int k = 0; k < n; ++k) {
    XTerm t;
    t.npow = 1;
    t.word = {{Gen::dzetabar, static_cast<std::uint8_t>(k)},
              {Gen::dzeta, static_cast<std::uint8_t>(k)}};
    out.push_back(t);
    t.coeff = -1.0;
    t.word[0].type = Gen::dzbar;
    out.push_back(std::move(t));
  }
  return out;
}

// <dbar_zeta W, dzeta> / Phi = sum_{j,k} dW[j][k] dzetabar_k ^ dzeta_j / Phi
TermList b_factor(int n) {
  TermList out;
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      XTerm t;
      t.dw.emplace_back(static_cast<std::uint8_t>(j), static_cast<std::uint8_t>(k));
      t.phipow = 1;
      t.word = {{Gen::dzetabar, static_cast<std::uint8_t>(k)},
                {Gen::dzeta, static_cast<std::uint8_t>(j)}};
      out.push_back(std::move(t));
    }
  return out;
}

// sort the word into dzeta_{1..n} ^ dzetabar_M ^ dzbar_J, tracking the sign
bool canonicalize(const XTerm& t, int n, KernelMono& out) {
  std::vector<Gen1> w = t.word;
  int trans = 0;
  for (std::size_t i = 1; i < w.size(); ++i)
    for (std::size_t j = i; j > 0 && gen_less(w[j], w[j - 1]); --j) {
      std::swap(w[j], w[j - 1]);
      ++trans;
    }
  // every kernel term carries a full dzeta block
  for (int j = 0; j < n; ++j)
    if (!(w[j].type == Gen::dzeta && w[j].idx == j)) return false;
  out = KernelMono{};
  out.coeff = t.coeff * (trans % 2 ? -1.0 : 1.0);
  for (std::size_t j = n; j < w.size(); ++j) {
    Mask bit = Mask{1} << w[j].idx;
    if (w[j].type == Gen::dzetabar)
      out.M |= bit;
    else
      out.J |= bit;
  }
  out.n_etabar = static_cast<int>(t.etabar.size());
  out.n_w = static_cast<int>(t.w.size());
  out.n_dw = static_cast<int>(t.dw.size());
  std::copy(t.etabar.begin(), t.etabar.end(), out.etabar.begin());
  std::copy(t.w.begin(), t.w.end(), out.w.begin());
  std::copy(t.dw.begin(), t.dw.end(), out.dw.begin());
  std::sort(out.etabar.begin(), out.etabar.begin() + out.n_etabar);
  std::sort(out.w.begin(), out.w.begin() + out.n_w);
  std::sort(out.dw.begin(), out.dw.begin() + out.n_dw);
  out.npow = t.npow;
  out.phipow = t.phipow;
  return true;
}

std::tuple<Mask, Mask, std::array<std::uint8_t, kMaxN>, std::array<std::uint8_t, kMaxN>,
           std::array<std::pair<std::uint8_t, std::uint8_t>, kMaxN>, int, int>
mono_key(const KernelMono& m) {
  return {m.J, m.M, m.etabar, m.w, m.dw, m.npow, m.phipow};
}

cplx mono_value(const KernelMono& m, const KernelPoint& p) {
  cplx v = m.coeff;
  for (int i = 0; i < m.n_etabar; ++i) v *= p.etabar[m.etabar[i]];
  for (int i = 0; i < m.n_w; ++i) v *= p.W[m.w[i]];
  for (int i = 0; i < m.n_dw; ++i) v *= p.dW[m.dw[i].first][m.dw[i].second];
  if (m.npow > 0) v /= ipow(p.N, m.npow);
  if (m.phipow > 0) v /= ipow(p.Phi, m.phipow);
  return v;
}

// volume pairing against dzetabar_I: reorders
//   dzeta_{1..n} ^ dzetabar_M ^ dzbar_J ^ dzetabar_I
// to dzeta_{1..n} ^ dzetabar_{1..n} ^ dzbar_J = (-1)^{n(n-1)/2} (-2i)^n dV ^ dzbar_J
cplx fold_factor(int n, int q_out, int q_in, Mask M, Mask I) {
  double s = (q_out * q_in) % 2 ? -1.0 : 1.0;
  s *= merge_sign(M, I);
  if ((n * (n - 1) / 2) % 2) s = -s;
  return s * ipow(cplx(0.0, -2.0), n);
}

}  // namespace

cplx kernel_mono_value(const KernelMono& m, const KernelPoint& p) { return mono_value(m, p); }

cplx kernel_fold_factor(int n, int q_out, int q_in, Mask M, Mask I) {
  if (merge_sign(M, I) == 0) return 0.0;
  return fold_factor(n, q_out, q_in, M, I);
}

LerayMap leray_ball(int n) {
  LerayMap m;
  m.n = n;
  m.kind = "ball";
  m.eval = [n](const CVec&, const CVec& zeta, CVec& W,
               std::array<std::array<cplx, kMaxN>, kMaxN>& dW) {
    W = conj(zeta);
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) dW[j][k] = (j == k) ? 1.0 : 0.0;
  };
  return m;
}

LerayMap leray_levi(const Domain& d) {
  LerayMap m;
  m.n = d.n;
  m.kind = "levi";
  // W_j = rho_j(zeta) - sum_k a_jk (z_k - zeta_k), a_jk = hh[j][k] / 2.
  // dW/dzetabar = hm exactly when a_jk is constant, which holds for the
  // quadratic jets these maps are built over.
  m.eval = [jet = d.jet, n = d.n](const CVec& z, const CVec& zeta, CVec& W,
                                  std::array<std::array<cplx, kMaxN>, kMaxN>& dW) {
    RhoJet j = jet(zeta);
    W = CVec(n);
    for (int a = 0; a < n; ++a) {
      cplx acc = j.grad[a];
      for (int b = 0; b < n; ++b) acc -= 0.5 * j.hh[a][b] * (z[b] - zeta[b]);
      W[a] = acc;
      for (int b = 0; b < n; ++b) dW[a][b] = j.hm[a][b];
    }
  };
  return m;
}

KernelPoint make_kernel_point(int n, const CVec& z, const CVec& zeta) {
  KernelPoint p;
  p.n = n;
  p.z = z;
  p.zeta = zeta;
  p.etabar = conj(zeta - z);
  p.N = abs2(zeta - z);
  return p;
}

KernelPoint make_kernel_point(const LerayMap& leray, const CVec& z, const CVec& zeta) {
  KernelPoint p = make_kernel_point(leray.n, z, zeta);
  leray.eval(z, zeta, p.W, p.dW);
  p.Phi = dot_c(p.W, zeta - z);
  return p;
}

CompiledKernel::CompiledKernel(int n, KernelFlavor flavor) : n_(n), flavor_(flavor) {
  if (n < 1 || n > 6) throw std::invalid_argument("kernel dimension must be in 1..6");
  if (flavor == KernelFlavor::mixed && n < 2)
    throw std::invalid_argument("mixed kernel needs n >= 2");
  cn_ = 1.0 / ipow(2.0 * kPi * kI, n);

  TermList terms;
  switch (flavor) {
    case KernelFlavor::bm:
      terms = wedge(beta_factor(n), wedge_pow(a_factor(n), n - 1));
      break;
    case KernelFlavor::leray:
      terms = wedge(gamma_factor(n), wedge_pow(b_factor(n), n - 1));
      break;
    case KernelFlavor::mixed: {
      TermList sum;
      for (int i = 0; i <= n - 2; ++i) {
        TermList part = wedge(wedge_pow(a_factor(n), i), wedge_pow(b_factor(n), n - 2 - i));
        sum.insert(sum.end(), part.begin(), part.end());
      }
      terms = wedge(wedge(beta_factor(n), gamma_factor(n)), sum);
      break;
    }
  }

  for (const XTerm& t : terms) {
    KernelMono m;
    if (canonicalize(t, n, m)) monos_.push_back(m);
  }
  std::sort(monos_.begin(), monos_.end(),
            [](const KernelMono& a, const KernelMono& b) { return mono_key(a) < mono_key(b); });
  std::vector<KernelMono> merged;
  for (const KernelMono& m : monos_) {
    if (!merged.empty() && mono_key(merged.back()) == mono_key(m))
      merged.back().coeff += m.coeff;
    else
      merged.push_back(m);
  }
  merged.erase(std::remove_if(merged.begin(), merged.end(),
                              [](const KernelMono& m) { return std::abs(m.coeff) < 1e-12; }),
               merged.end());
  monos_ = std::move(merged);
}

cplx CompiledKernel::component(const KernelPoint& p, Mask J, Mask M) const {
  cplx acc = 0.0;
  for (const KernelMono& m : monos_) {
    if (m.J != J || m.M != M) continue;
    acc += mono_value(m, p);
  }
  return cn_ * acc;
}

const CompiledKernel& compiled_kernel(int n, KernelFlavor flavor) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::unique_ptr<CompiledKernel>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(n, static_cast<int>(flavor));
  auto it = cache.find(key);
  if (it == cache.end())
    it = cache.emplace(key, std::make_unique<CompiledKernel>(n, flavor)).first;
  return *it->second;
}

namespace {

KernelTable volume_table(const CompiledKernel& ck, int q_out, int q_in, const KernelPoint& p) {
  const int n = ck.n();
  KernelTable t;
  t.n = n;
  t.q_out = q_out;
  t.q_in = q_in;
  t.rows = mask_slots(n, q_out);
  t.cols = mask_slots(n, q_in);
  t.k.assign(t.rows.size() * t.cols.size(), 0.0);
  const Mask full = (Mask{1} << n) - 1;
  const cplx cn = 1.0 / ipow(2.0 * kPi * kI, n);
  for (const KernelMono& m : ck.monos()) {
    if (std::popcount(m.J) != q_out) continue;
    Mask I = full ^ m.M;
    if (std::popcount(I) != q_in) continue;
    int r = slot_of(t.rows, m.J);
    int c = slot_of(t.cols, I);
    t.at(r, c) += cn * mono_value(m, p) * fold_factor(n, q_out, q_in, m.M, I);
  }
  return t;
}

}  // namespace

KernelTable bm_table(int n, int q_out, int q_in, const CVec& z, const CVec& zeta) {
  const CompiledKernel& ck = compiled_kernel(n, KernelFlavor::bm);
  KernelPoint p = make_kernel_point(n, z, zeta);
  if (q_in == q_out + 1) return volume_table(ck, q_out, q_in, p);
  if (q_in != q_out) throw std::invalid_argument("bm_table: q_in must be q_out or q_out + 1");
  // boundary flavor: raw components indexed by the kernel's own dzetabar word
  KernelTable t;
  t.n = n;
  t.q_out = q_out;
  t.q_in = q_in;
  t.rows = mask_slots(n, q_out);
  t.cols = mask_slots(n, n - 1 - q_out);
  t.k.assign(t.rows.size() * t.cols.size(), 0.0);
  const cplx cn = 1.0 / ipow(2.0 * kPi * kI, n);
  for (const KernelMono& m : ck.monos()) {
    if (std::popcount(m.J) != q_out) continue;
    t.at(slot_of(t.rows, m.J), slot_of(t.cols, m.M)) += cn * mono_value(m, p);
  }
  return t;
}

KernelTable leray_table(const LerayMap& leray, int n, int q_out, const CVec& z,
                        const CVec& zeta) {
  if (q_out != 0) throw std::invalid_argument("leray_table: kernel vanishes for q_out > 0");
  const CompiledKernel& ck = compiled_kernel(n, KernelFlavor::leray);
  return volume_table(ck, 0, 1, make_kernel_point(leray, z, zeta));
}

KernelTable mixed_table(const LerayMap& leray, int n, int q_out, const CVec& z,
                        const CVec& zeta) {
  if (q_out < 0 || q_out > n - 2)
    throw std::invalid_argument("mixed_table: q_out must be in 0..n-2");
  const CompiledKernel& ck = compiled_kernel(n, KernelFlavor::mixed);
  return volume_table(ck, q_out, q_out + 2, make_kernel_point(leray, z, zeta));
}

double homotopy_identity_residual(const LerayMap& leray, int n, int q, const CVec& z,
                                  const CVec& zeta, double h) {
  if (q < 1 || q > n - 1) throw std::invalid_argument("identity holds for 1 <= q <= n - 1");
  const CompiledKernel& k0 = compiled_kernel(n, KernelFlavor::bm);
  const CompiledKernel& kw = compiled_kernel(n, KernelFlavor::leray);
  const CompiledKernel& km = compiled_kernel(n, KernelFlavor::mixed);

  auto mixed_at = [&](const CVec& zz, const CVec& zt, Mask J, Mask M) {
    return km.component(make_kernel_point(leray, zz, zt), J, M);
  };
  // Wirtinger dbar by central differences in the k-th slot of z or zeta
  auto dbar_fd = [&](Mask J, Mask M, int k, bool in_zeta) {
    auto shifted = [&](cplx d) {
      CVec zz = z, zt = zeta;
      (in_zeta ? zt : zz)[k] += d;
      return mixed_at(zz, zt, J, M);
    };
    cplx gx = (shifted(cplx(h, 0.0)) - shifted(cplx(-h, 0.0))) / (2.0 * h);
    cplx gy = (shifted(cplx(0.0, h)) - shifted(cplx(0.0, -h))) / (2.0 * h);
    return 0.5 * (gx + kI * gy);
  };

  KernelPoint p0 = make_kernel_point(leray, z, zeta);
  const double sgn_zeta = (n % 2) ? -1.0 : 1.0;        // dzetabar_k across dzeta_{1..n}
  const double sgn_z = ((q + 1) % 2) ? -1.0 : 1.0;      // dzbar_k across that and dzetabar_M
  double worst = 0.0, scale = 0.0;
  for (Mask J : mask_slots(n, q))
    for (Mask M : mask_slots(n, n - 1 - q)) {
      cplx bm = k0.component(p0, J, M);
      cplx lw = kw.component(p0, J, M);
      cplx dzeta_term = 0.0;
      for (int k = 1; k <= n; ++k) {
        Mask bit = Mask{1} << (k - 1);
        if (!(M & bit)) continue;
        dzeta_term += static_cast<double>(insert_sign(M ^ bit, k)) * dbar_fd(J, M ^ bit, k - 1, true);
      }
      dzeta_term *= sgn_zeta;
      cplx dz_term = 0.0;
      for (int k = 1; k <= n; ++k) {
        Mask bit = Mask{1} << (k - 1);
        if (!(J & bit)) continue;
        dz_term += static_cast<double>(insert_sign(J ^ bit, k)) * dbar_fd(J ^ bit, M, k - 1, false);
      }
      dz_term *= sgn_z;
      worst = std::max(worst, std::abs(bm - lw - dzeta_term - dz_term));
      for (double s : {std::abs(bm), std::abs(lw), std::abs(dzeta_term), std::abs(dz_term)})
        scale = std::max(scale, s);
    }
  return worst / std::max(scale, 1e-300);
}

SupportBoundFit support_bound_scan(const LerayMap& leray, const Domain& domain, const Chart& chart,
                                   int samples, std::uint64_t seed) {
  Rng rng(seed);
  const int n = domain.n;
  SupportBoundFit fit;
  fit.c1 = fit.c2 = std::numeric_limits<double>::infinity();
  fit.levi_c = 0.0;
  fit.ball_identity_residual = 0.0;
  CVec W(n);
  std::array<std::array<cplx, kMaxN>, kMaxN> dW{};
  int kept = 0;
  while (kept < samples) {
    // z: pulled inward from the chart base with tangential jitter
    double depth = rng.uniform(1e-3, 0.35);
    CVec z = chart.base;
    for (int j = 0; j < n; ++j) {
      z[j] *= (1.0 - depth);
      z[j] += cplx(rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1));
    }
    if (domain.jet(z).value >= -1e-9) continue;
    // zeta: in the closed shell patch around the base
    CVec zeta = chart.base;
    for (int j = 0; j < n; ++j)
      zeta[j] += cplx(rng.uniform(-0.45, 0.45), rng.uniform(-0.45, 0.45));
    RhoJet jz = domain.jet(zeta);
    if (jz.value < 0.0 || jz.value > domain.shell_width) continue;
    ++kept;

    leray.eval(z, zeta, W, dW);
    const cplx Phi = dot_c(W, zeta - z);
    const double dz = std::abs(domain.sdist(z));
    const auto s = chart.forward(zeta);
    double tsq = 0.0;
    for (int j = 2; j < 2 * n; ++j) tsq += s[j] * s[j];
    const double gauge = dz + s[0] + std::abs(s[1]) + tsq;
    const double sep = abs2(zeta - z);
    fit.c1 = std::min(fit.c1, std::abs(Phi) / gauge);
    fit.c2 = std::min(fit.c2, std::abs(Phi) / sep);

    // 2 Re Phi >= rho(zeta) - rho(z) + |zeta - z|^2 / C
    const double lhs = 2.0 * Phi.real();
    const double drho = jz.value - domain.jet(z).value;
    const double margin = lhs - drho;
    if (margin <= 0.0)
      fit.levi_c = std::numeric_limits<double>::infinity();
    else
      fit.levi_c = std::max(fit.levi_c, sep / margin);
    fit.ball_identity_residual =
        std::max(fit.ball_identity_residual, std::abs(lhs - (drho + sep)));
  }
  return fit;
}

}  // namespace dbar
