#pragma once
// Homotopy operators solving dbar u = phi on the model domains.
//
// For (0,q) input with 1 <= q <= n,
//   Hq phi = int_B Omega0_{0,q-1} ^ E phi
//          + int_{U \ D} Omega0W_{0,q-1} ^ [dbar, E] phi,
// and for functions H0 f = int_{U \ D} OmegaW ^ [dbar, E] f. E is the cutoff
// extension, so the ambient piece may integrate over any ball containing
// supp E phi; the correction lives on the cutoff band inside the shell.
// dbar-closed input satisfies dbar Hq phi = phi, in general
// phi = dbar Hq phi + H_{q+1} dbar phi and f = H0 f + H1 dbar f.

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "dbar/extension.hpp"
#include "dbar/forms.hpp"
#include "dbar/geometry.hpp"
#include "dbar/kernels.hpp"
#include "dbar/quadrature.hpp"
#include "dbar/sobolev.hpp"

namespace dbar {

// One (domain, input, level) triple prepared for evaluation at many z. The
// ambient rule is a fixed offset grid recentered at each z, so BM kernel
// values attach to offsets once with weights folded in; the shell piece
// stores boundary jets and weighted commutator values per band node, leaving
// only the affine update W(z) = grad + a (zeta - z) inside the per-z loop.
class HomotopyEvaluator {
 public:
  HomotopyEvaluator(const Domain& d, const Form& phi, int level);

  int n() const { return d_.n; }
  int q() const { return q_; }
  int level() const { return level_; }
  const std::vector<Mask>& out_slots() const { return out_slots_; }

  // ambient Bochner-Martinelli potential of E phi (q >= 1)
  std::vector<cplx> u0(const CVec& z) const;
  // shell correction through the transition kernel; identically zero for q = n
  std::vector<cplx> u1(const CVec& z) const;
  std::vector<cplx> hq(const CVec& z) const;

  // Leray potential of [dbar, E] f for function input (q = 0 only)
  cplx h0(const CVec& z) const;

  // finite-difference (dbar hq)(z) on mask_slots(n, q); the step
  // min(phi.h_fd, distance(z)/8) keeps stencils inside D
  std::vector<cplx> dbar_hq(const CVec& z) const;

 private:
  void prepare_ambient();
  void prepare_shell(KernelFlavor flavor, int q_out, int q_in);
  std::vector<cplx> shell_sum(const CVec& z) const;

  Domain d_;
  Form phi_;
  int q_ = 0;
  int level_ = 0;
  Cutoff cutoff_{};
  double max_axis_ = 0.0;        // largest boundary distance from the origin
  double support_radius_ = 0.0;  // |zeta| bound on supp E phi

  std::vector<Mask> out_slots_, in_slots_;

  // ambient piece
  QuadratureRule offsets_;
  std::vector<cplx> bm_rows_;  // size() x |out| x |in|, weights folded in

  // shell piece, band nodes only
  struct FoldEntry {
    int mono = 0;
    int row = 0, col = 0;
    cplx factor{0.0};
  };
  const CompiledKernel* shell_kernel_ = nullptr;
  std::vector<FoldEntry> plan_;
  int ncomm_ = 0;
  std::vector<CVec> szeta_;
  std::vector<cplx> scomm_;  // ncomm_ per node, weight folded in
  std::vector<CVec> sgrad_;
  std::vector<cplx> sa_, shm_;  // n*n per node: Levi coefficients, dW
};

// deterministic well-interior sample points, rejection against sdist
std::vector<CVec> interior_points(const Domain& d, int count, std::uint64_t seed);

// one-shot faces over HomotopyEvaluator
std::vector<cplx> u0(const Domain& d, const Form& phi, const CVec& z, int level);
std::vector<cplx> u1(const Domain& d, const Form& phi, const CVec& z, int level);
std::vector<cplx> h_q(const Domain& d, const Form& phi, const CVec& z, int level);
cplx h0(const Domain& d, const std::function<cplx(const CVec&)>& f, const CVec& z, int level);

// max-component residual of phi = dbar Hq phi + H_{q+1} dbar phi at z,
// relative to max(|phi(z)|_inf, 1); the second term is assembled only when
// phi fails the closedness probe (it vanishes identically otherwise)
double homotopy_residual(const Domain& d, const Form& phi, const CVec& z, int level);

// Bochner-Martinelli boundary reproduction of holomorphic f: pulls the
// (n, n-1) kernel components back through the chart frames and integrates
// f against them over bD. Pullback determinants are per-node data shared
// across (f, z) pairs. n = 2.
class BoundaryReproducer {
 public:
  BoundaryReproducer(const Domain& d, int level);

  std::size_t nodes() const { return rule_.size(); }
  cplx reproduce(const std::function<cplx(const CVec&)>& f, const CVec& z) const;

 private:
  QuadratureRule rule_;
  std::vector<Mask> cols_;  // kernel dzetabar words, |M| = n-1
  std::vector<cplx> dets_;  // per node per col, parameter weight folded in
};

cplx bm_reproduce(const Domain& d, const std::function<cplx(const CVec&)>& f, const CVec& z,
                  int level);

struct PointResidual {
  CVec z;
  std::vector<double> by_level;  // relative dbar-residual, coarse to fine
};

struct SolveReport {
  int n = 0, q = 0;
  std::vector<int> levels;
  double closedness_residual = 0.0;
  std::vector<PointResidual> residuals;
  double max_residual = 0.0;  // finest level, max over points
  bool nonincreasing = true;  // point-max residual over the final two levels
  double wall_seconds = 0.0;
  std::vector<std::pair<std::string, double>> norms;  // finest-level summaries
  std::function<std::vector<cplx>(const CVec&)> u;    // finest-level evaluator
};

// dbar-closed (0,q) input, 1 <= q <= n: runs levels {level-1, level} (just
// {0} at level 0), records per-point residual trajectories, and returns the
// finest-level solution together with weighted-norm summaries taken over a
// coarse volume rule. Non-closed input is rejected, the exception message
// carries the closedness residual.
SolveReport solve(const Domain& d, const Form& phi, const std::vector<CVec>& points, int level,
                  const std::vector<NormSpec>& norm_specs = {});

// (0,n) input is never constrained, so it is accepted as-is; the operator
// reduces to the ambient potential
SolveReport solve_top_degree(const Domain& d, const Form& phi, const std::vector<CVec>& points,
                             int level);

}  // namespace dbar
