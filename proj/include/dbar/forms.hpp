#pragma once
// (0,q)-forms with evaluable coefficients and the dbar operator.
//
// Multi-indices are bitmasks over 1..n (bit j-1 = index j present);
// coefficients are stored against sorted dzbar_I in increasing mask order.

#include <cstdint>
#include <functional>
#include <vector>

#include "dbar/complexn.hpp"

namespace dbar {

using Mask = std::uint32_t;

// strictly increasing multi-indices of length q over 1..n, in mask order
std::vector<Mask> mask_slots(int n, int q);
int slot_of(const std::vector<Mask>& slots, Mask m);

// sign of inserting index k (1-based) into sorted multi-index m; 0 if k in m
int insert_sign(Mask m, int k);
// sign of merging two sorted disjoint multi-indices a, b into sorted(a|b); 0 if they meet
int merge_sign(Mask a, Mask b);

int binomial(int n, int k);

struct Coefficient {
  std::function<cplx(const CVec&)> value;
  // analytic first-derivative oracles; empty means finite differences
  std::function<cplx(const CVec&, int)> dz;
  std::function<cplx(const CVec&, int)> dzbar;
};

// Wirtinger derivatives of a coefficient, analytic oracle or central FD
cplx coeff_dz(const Coefficient& c, const CVec& z, int j, double h);
cplx coeff_dzbar(const Coefficient& c, const CVec& z, int j, double h);

struct Form {
  int n = 0;
  int q = 0;
  std::vector<Mask> slots;        // mask_slots(n, q)
  std::vector<Coefficient> coeff; // one per slot
  double h_fd = 1e-5;

  Form() = default;
  Form(int n_, int q_);
};

std::vector<cplx> eval_form(const Form& f, const CVec& z);
Form dbar(const Form& f);

struct ClosednessReport {
  bool closed = false;
  double max_residual = 0.0;
};
ClosednessReport is_dbar_closed(const Form& f, const std::vector<CVec>& samples, double tol);

enum class FamilyKind { exact_polynomial, exact_exponential, nonclosed, top_degree };

// named test inputs; exact kinds are dbar of listed generators and carry
// analytic derivative oracles
std::vector<Form> make_test_family(FamilyKind kind, int n);

}  // namespace dbar
