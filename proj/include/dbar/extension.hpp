#pragma once
// Cutoff extension E phi = chi(sdist) phi and the commutator [dbar, E].
// chi is a quintic smoothstep in the signed boundary distance: identically 1
// on the domain and the inner quarter of the collar, identically 0 past the
// outer three-quarter mark, so [dbar, E] phi = dbar chi ^ phi lives in a
// closed collar strictly inside the shell.

#include "dbar/forms.hpp"
#include "dbar/geometry.hpp"

namespace dbar {

struct Cutoff {
  double r0 = 0.0, r1 = 0.0;  // transition band in signed distance
  double value(double s) const;
  double slope(double s) const;
};

Cutoff make_cutoff(const Domain& d);

// coefficients of dbar chi at zeta; zero vector outside the band
CVec dbar_chi(const Domain& d, const CVec& zeta);

Form extend(const Domain& d, const Form& phi);
Form commutator(const Domain& d, const Form& phi);

}  // namespace dbar
