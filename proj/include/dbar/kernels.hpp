#pragma once
// Leray maps and the three Cauchy-Fantappie kernels as compiled monomial
// tables. Kernels are expanded symbolically once per (n, flavor) from their
// wedge-product definitions into a normal form
//   coeff * prod etabar_m * prod W_m * prod dW_{j,k} / (N^a Phi^b)
// against the wedge word dzeta_{1..n} ^ dzetabar_M ^ dzbar_J, with
// etabar = conj(zeta - z), N = |zeta - z|^2, Phi = W.(zeta - z).

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "dbar/forms.hpp"
#include "dbar/geometry.hpp"
#include "dbar/lemma_lab.hpp"

namespace dbar {

struct LerayMap {
  int n = 0;
  std::string kind;  // "ball" or "levi"
  // fills W(z, zeta) and dW[j][k] = d W_j / d zetabar_k
  std::function<void(const CVec&, const CVec&, CVec&, std::array<std::array<cplx, kMaxN>, kMaxN>&)>
      eval;
};

LerayMap leray_ball(int n);
LerayMap leray_levi(const Domain& d);

// pointwise data shared by all kernel evaluations at fixed (z, zeta)
struct KernelPoint {
  int n = 0;
  CVec z, zeta, etabar;
  double N = 0.0;
  cplx Phi = 0.0;
  CVec W;
  std::array<std::array<cplx, kMaxN>, kMaxN> dW{};
};

// without a Leray map (BM kernel only: W fields unset)
KernelPoint make_kernel_point(int n, const CVec& z, const CVec& zeta);
KernelPoint make_kernel_point(const LerayMap& leray, const CVec& z, const CVec& zeta);

enum class KernelFlavor { bm, leray, mixed };

struct KernelMono {
  double coeff = 0.0;  // rational part including the word sort sign
  std::array<std::uint8_t, kMaxN> etabar{};
  std::array<std::uint8_t, kMaxN> w{};
  std::array<std::pair<std::uint8_t, std::uint8_t>, kMaxN> dw{};
  int n_etabar = 0, n_w = 0, n_dw = 0;
  int npow = 0, phipow = 0;
  Mask M = 0;  // dzetabar word
  Mask J = 0;  // dzbar word
};

class CompiledKernel {
 public:
  CompiledKernel(int n, KernelFlavor flavor);

  int n() const { return n_; }
  KernelFlavor flavor() const { return flavor_; }
  cplx cn() const { return cn_; }
  const std::vector<KernelMono>& monos() const { return monos_; }

  // coefficient of dzeta_{1..n} ^ dzetabar_M ^ dzbar_J at the point
  cplx component(const KernelPoint& p, Mask J, Mask M) const;

 private:
  int n_;
  KernelFlavor flavor_;
  cplx cn_{0.0};  // 1 / (2 pi i)^n
  std::vector<KernelMono> monos_;
};

const CompiledKernel& compiled_kernel(int n, KernelFlavor flavor);

// rational value of one mono at a point (c_n not included)
cplx kernel_mono_value(const KernelMono& m, const KernelPoint& p);
// volume-pairing factor carrying the wedge-merge sign against dzbar_I and the
// Lebesgue conversion; zero when popcount mismatches or M meets I
cplx kernel_fold_factor(int n, int q_out, int q_in, Mask M, Mask I);

// Contraction tables: (integral of Omega ^ phi)_J = sum_I K_{J,I} phi_I dV.
// For volume pairing the Lebesgue conversion of dzeta ^ dzetabar_{1..n} is
// folded into the entries. q_in = q_out + 1 for bm, q_out + 2 for mixed,
// 1 for leray at q_out = 0. The bm boundary flavor (q_in = q_out) instead
// lists raw kernel components indexed by their own dzetabar word M; surface
// pullback happens in the homotopy module.
struct KernelTable {
  int n = 0, q_out = 0, q_in = 0;
  std::vector<Mask> rows;  // J
  std::vector<Mask> cols;  // I (volume) or M (boundary flavor)
  std::vector<cplx> k;     // row-major

  cplx& at(int r, int c) { return k[static_cast<std::size_t>(r) * cols.size() + c]; }
  const cplx& at(int r, int c) const { return k[static_cast<std::size_t>(r) * cols.size() + c]; }
};

KernelTable bm_table(int n, int q_out, int q_in, const CVec& z, const CVec& zeta);
KernelTable leray_table(const LerayMap& leray, int n, int q_out, const CVec& z, const CVec& zeta);
KernelTable mixed_table(const LerayMap& leray, int n, int q_out, const CVec& z, const CVec& zeta);

// max-entry relative residual of
//   Omega^0_{0,q} - Omega^W_{0,q} - dbar_zeta Omega^{0,W}_{0,q} - dbar_z Omega^{0,W}_{0,q-1}
// with both exterior derivatives taken by central differences (step h)
double homotopy_identity_residual(const LerayMap& leray, int n, int q, const CVec& z,
                                  const CVec& zeta, double h);

struct SupportBoundFit {
  double c1 = 0.0;       // min |Phi| / (d(z) + s1 + |s2| + |t|^2)
  double c2 = 0.0;       // min |Phi| / |zeta - z|^2
  double levi_c = 0.0;   // max C with 2 Re F >= rho(zeta) - rho(z) + |zeta-z|^2 / C
  double ball_identity_residual = 0.0;  // max |2 Re F - (rho(zeta)-rho(z)+|zeta-z|^2)|
};

SupportBoundFit support_bound_scan(const LerayMap& leray, const Domain& domain, const Chart& chart,
                                   int samples, std::uint64_t seed);

}  // namespace dbar
