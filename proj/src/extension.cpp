#include "dbar/extension.hpp"

#include <memory>

namespace dbar {

double Cutoff::value(double s) const {
  if (s <= r0) return 1.0;
  if (s >= r1) return 0.0;
  double t = (s - r0) / (r1 - r0);
  return 1.0 - t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

double Cutoff::slope(double s) const {
  if (s <= r0 || s >= r1) return 0.0;
  double t = (s - r0) / (r1 - r0);
  return -30.0 * t * t * (1.0 - t) * (1.0 - t) / (r1 - r0);
}

Cutoff make_cutoff(const Domain& d) {
  return Cutoff{0.25 * d.shell_width, 0.75 * d.shell_width};
}

CVec dbar_chi(const Domain& d, const CVec& zeta) {
  Cutoff c = make_cutoff(d);
  CVec out(d.n);
  double s = d.sdist(zeta);
  double g = c.slope(s);
  if (g == 0.0) return out;
  CVec sd = d.sdist_dbar(zeta);
  for (int j = 0; j < d.n; ++j) out[j] = g * sd[j];
  return out;
}

Form extend(const Domain& d, const Form& phi) {
  Form out(phi.n, phi.q);
  out.h_fd = phi.h_fd;
  Cutoff c = make_cutoff(d);
  for (std::size_t s = 0; s < out.slots.size(); ++s) {
    const Coefficient pc = phi.coeff[s];
    out.coeff[s].value = [pc, c, d](const CVec& z) { return c.value(d.sdist(z)) * pc.value(z); };
    // product rule through the real radial factor: d sdist / d zeta = conj(d sdist / d zetabar)
    if (pc.dz) {
      out.coeff[s].dz = [pc, c, d](const CVec& z, int j) {
        double sd = d.sdist(z);
        return c.value(sd) * pc.dz(z, j) +
               c.slope(sd) * std::conj(d.sdist_dbar(z)[j]) * pc.value(z);
      };
    }
    if (pc.dzbar) {
      out.coeff[s].dzbar = [pc, c, d](const CVec& z, int j) {
        double sd = d.sdist(z);
        return c.value(sd) * pc.dzbar(z, j) + c.slope(sd) * d.sdist_dbar(z)[j] * pc.value(z);
      };
    }
  }
  return out;
}

Form commutator(const Domain& d, const Form& phi) {
  Form out(phi.n, phi.q + 1);
  out.h_fd = phi.h_fd;
  auto src = std::make_shared<Form>(phi);
  for (std::size_t s = 0; s < out.slots.size(); ++s) {
    Mask K = out.slots[s];
    out.coeff[s].value = [src, d, K](const CVec& z) {
      CVec dchi = dbar_chi(d, z);
      cplx acc = 0.0;
      for (int k = 1; k <= src->n; ++k) {
        Mask bit = Mask{1} << (k - 1);
        if (!(K & bit)) continue;
        int slot = slot_of(src->slots, K ^ bit);
        acc += static_cast<double>(insert_sign(K ^ bit, k)) * dchi[k - 1] *
               src->coeff[slot].value(z);
      }
      return acc;
    };
  }
  return out;
}

}  // namespace dbar
