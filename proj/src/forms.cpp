#include "dbar/forms.hpp"

#include <bit>
#include <cmath>
#include <memory>
#include <stdexcept>

namespace dbar {

std::vector<Mask> mask_slots(int n, int q) {
  std::vector<Mask> out;
  if (q < 0 || q > n) return out;
  for (Mask m = 0; m < (Mask(1) << n); ++m)
    if (std::popcount(m) == q) out.push_back(m);
  return out;
}

int slot_of(const std::vector<Mask>& slots, Mask m) {
  for (std::size_t i = 0; i < slots.size(); ++i)
    if (slots[i] == m) return static_cast<int>(i);
  throw std::logic_error("multi-index not present in slot table");
}

int insert_sign(Mask m, int k) {
  const Mask bit = Mask(1) << (k - 1);
  if (m & bit) return 0;
  const int below = std::popcount(m & (bit - 1));
  return (below % 2 == 0) ? 1 : -1;
}

int merge_sign(Mask a, Mask b) {
  if (a & b) return 0;
  // inversions between the concatenation [sorted a | sorted b]
  int inv = 0;
  Mask bb = b;
  while (bb) {
    const int k = std::countr_zero(bb);
    inv += std::popcount(a >> (k + 1));
    bb &= bb - 1;
  }
  return (inv % 2 == 0) ? 1 : -1;
}

int binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  long r = 1;
  for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
  return static_cast<int>(r);
}

cplx coeff_dz(const Coefficient& c, const CVec& z, int j, double h) {
  if (c.dz) return c.dz(z, j);
  CVec zp = z, zm = z, zpi = z, zmi = z;
  zp[j] += h;
  zm[j] -= h;
  zpi[j] += cplx(0, h);
  zmi[j] -= cplx(0, h);
  const cplx dx = (c.value(zp) - c.value(zm)) / (2 * h);
  const cplx dy = (c.value(zpi) - c.value(zmi)) / (2 * h);
  return 0.5 * (dx - kI * dy);
}

cplx coeff_dzbar(const Coefficient& c, const CVec& z, int j, double h) {
  if (c.dzbar) return c.dzbar(z, j);
  CVec zp = z, zm = z, zpi = z, zmi = z;
  zp[j] += h;
  zm[j] -= h;
  zpi[j] += cplx(0, h);
  zmi[j] -= cplx(0, h);
  const cplx dx = (c.value(zp) - c.value(zm)) / (2 * h);
  const cplx dy = (c.value(zpi) - c.value(zmi)) / (2 * h);
  return 0.5 * (dx + kI * dy);
}

Form::Form(int n_, int q_) : n(n_), q(q_), slots(mask_slots(n_, q_)) {
  coeff.resize(slots.size());
  for (auto& c : coeff) c.value = [](const CVec&) { return cplx(0.0); };
}

std::vector<cplx> eval_form(const Form& f, const CVec& z) {
  std::vector<cplx> out(f.coeff.size());
  for (std::size_t i = 0; i < f.coeff.size(); ++i) out[i] = f.coeff[i].value(z);
  return out;
}

Form dbar(const Form& f) {
  if (f.q >= f.n) throw std::domain_error("dbar: form already has top antiholomorphic degree");
  Form g(f.n, f.q + 1);
  g.h_fd = f.h_fd;
  const auto src = std::make_shared<Form>(f);
  for (std::size_t s = 0; s < g.slots.size(); ++s) {
    const Mask J = g.slots[s];
    g.coeff[s].value = [src, J](const CVec& z) {
      cplx acc = 0.0;
      Mask jj = J;
      while (jj) {
        const int k = std::countr_zero(jj) + 1;
        jj &= jj - 1;
        const Mask rest = J & ~(Mask(1) << (k - 1));
        const int sgn = insert_sign(rest, k);
        const int islot = slot_of(src->slots, rest);
        acc += double(sgn) * coeff_dzbar(src->coeff[islot], z, k - 1, src->h_fd);
      }
      return acc;
    };
  }
  return g;
}

ClosednessReport is_dbar_closed(const Form& f, const std::vector<CVec>& samples, double tol) {
  ClosednessReport r;
  if (f.q == f.n) {  // top degree: closed by type
    r.closed = true;
    return r;
  }
  const Form g = dbar(f);
  for (const CVec& z : samples)
    for (const cplx& v : eval_form(g, z)) r.max_residual = std::max(r.max_residual, std::abs(v));
  r.closed = r.max_residual <= tol;
  return r;
}

namespace {

Coefficient zero_coeff() {
  Coefficient c;
  c.value = [](const CVec&) { return cplx(0.0); };
  c.dz = [](const CVec&, int) { return cplx(0.0); };
  c.dzbar = [](const CVec&, int) { return cplx(0.0); };
  return c;
}

// dbar of a generator g given by value/dz/dzbar oracles of g itself plus
// oracles for the mixed second derivatives needed by the (0,1) coefficients
struct Gen {
  std::function<cplx(const CVec&)> value;
  std::function<cplx(const CVec&, int)> dzbar;            // d g / d zbar_k
  std::function<cplx(const CVec&, int, int)> dzbar_dz;    // d2 g / d zbar_k d z_j
  std::function<cplx(const CVec&, int, int)> dzbar_dzbar; // d2 g / d zbar_k d zbar_j
};

Form exact_form(int n, const Gen& g) {
  Form f(n, 1);
  for (int k = 1; k <= n; ++k) {
    Coefficient c;
    const int kk = k;
    c.value = [g, kk](const CVec& z) { return g.dzbar(z, kk - 1); };
    c.dz = [g, kk](const CVec& z, int j) { return g.dzbar_dz(z, kk - 1, j); };
    c.dzbar = [g, kk](const CVec& z, int j) { return g.dzbar_dzbar(z, kk - 1, j); };
    f.coeff[slot_of(f.slots, Mask(1) << (k - 1))] = c;
  }
  return f;
}

}  // namespace

std::vector<Form> make_test_family(FamilyKind kind, int n) {
  if (n < 2) throw std::invalid_argument("test families need n >= 2");
  std::vector<Form> out;
  switch (kind) {
    case FamilyKind::exact_polynomial: {
      Gen g1;  // zbar1 * zbar2
      g1.value = [](const CVec& z) { return std::conj(z[0] * z[1]); };
      g1.dzbar = [](const CVec& z, int k) {
        if (k == 0) return std::conj(z[1]);
        if (k == 1) return std::conj(z[0]);
        return cplx(0.0);
      };
      g1.dzbar_dz = [](const CVec&, int, int) { return cplx(0.0); };
      g1.dzbar_dzbar = [](const CVec&, int k, int j) {
        return (k + j == 1) ? cplx(1.0) : cplx(0.0);
      };
      out.push_back(exact_form(n, g1));

      Gen g2;  // zbar1^2
      g2.value = [](const CVec& z) { return std::conj(z[0] * z[0]); };
      g2.dzbar = [](const CVec& z, int k) {
        return k == 0 ? 2.0 * std::conj(z[0]) : cplx(0.0);
      };
      g2.dzbar_dz = [](const CVec&, int, int) { return cplx(0.0); };
      g2.dzbar_dzbar = [](const CVec&, int k, int j) {
        return (k == 0 && j == 0) ? cplx(2.0) : cplx(0.0);
      };
      out.push_back(exact_form(n, g2));

      Gen g3;  // z1 * zbar2
      g3.value = [](const CVec& z) { return z[0] * std::conj(z[1]); };
      g3.dzbar = [](const CVec& z, int k) { return k == 1 ? z[0] : cplx(0.0); };
      g3.dzbar_dz = [](const CVec&, int k, int j) {
        return (k == 1 && j == 0) ? cplx(1.0) : cplx(0.0);
      };
      g3.dzbar_dzbar = [](const CVec&, int, int) { return cplx(0.0); };
      out.push_back(exact_form(n, g3));
      break;
    }
    case FamilyKind::exact_exponential: {
      Gen g1;  // exp(zbar1)
      g1.value = [](const CVec& z) { return std::exp(std::conj(z[0])); };
      g1.dzbar = [](const CVec& z, int k) {
        return k == 0 ? std::exp(std::conj(z[0])) : cplx(0.0);
      };
      g1.dzbar_dz = [](const CVec&, int, int) { return cplx(0.0); };
      g1.dzbar_dzbar = [](const CVec& z, int k, int j) {
        return (k == 0 && j == 0) ? std::exp(std::conj(z[0])) : cplx(0.0);
      };
      out.push_back(exact_form(n, g1));

      Gen g2;  // zbar2 * exp(zbar1)
      g2.value = [](const CVec& z) { return std::conj(z[1]) * std::exp(std::conj(z[0])); };
      g2.dzbar = [](const CVec& z, int k) {
        if (k == 0) return std::conj(z[1]) * std::exp(std::conj(z[0]));
        if (k == 1) return std::exp(std::conj(z[0]));
        return cplx(0.0);
      };
      g2.dzbar_dz = [](const CVec&, int, int) { return cplx(0.0); };
      g2.dzbar_dzbar = [](const CVec& z, int k, int j) {
        const cplx e = std::exp(std::conj(z[0]));
        if (k == 0 && j == 0) return std::conj(z[1]) * e;
        if (k + j == 1) return e;
        return cplx(0.0);
      };
      out.push_back(exact_form(n, g2));
      break;
    }
    case FamilyKind::nonclosed: {
      Form f1(n, 1);  // zbar2 dzbar1
      Coefficient c1;
      c1.value = [](const CVec& z) { return std::conj(z[1]); };
      c1.dz = [](const CVec&, int) { return cplx(0.0); };
      c1.dzbar = [](const CVec&, int j) { return j == 1 ? cplx(1.0) : cplx(0.0); };
      f1.coeff[slot_of(f1.slots, Mask(1))] = c1;
      for (std::size_t s = 0; s < f1.slots.size(); ++s)
        if (f1.slots[s] != Mask(1)) f1.coeff[s] = zero_coeff();
      out.push_back(f1);

      Form f2(n, 1);  // z1 zbar1 dzbar2
      Coefficient c2;
      c2.value = [](const CVec& z) { return z[0] * std::conj(z[0]); };
      c2.dz = [](const CVec& z, int j) { return j == 0 ? std::conj(z[0]) : cplx(0.0); };
      c2.dzbar = [](const CVec& z, int j) { return j == 0 ? z[0] : cplx(0.0); };
      f2.coeff[slot_of(f2.slots, Mask(2))] = c2;
      for (std::size_t s = 0; s < f2.slots.size(); ++s)
        if (f2.slots[s] != Mask(2)) f2.coeff[s] = zero_coeff();
      out.push_back(f2);
      break;
    }
    case FamilyKind::top_degree: {
      if (n != 2) throw std::invalid_argument("top_degree family is provided for n = 2");
      auto top = [&](std::function<cplx(const CVec&)> v,
                     std::function<cplx(const CVec&, int)> dz,
                     std::function<cplx(const CVec&, int)> dzb) {
        Form f(2, 2);
        Coefficient c;
        c.value = std::move(v);
        c.dz = std::move(dz);
        c.dzbar = std::move(dzb);
        f.coeff[0] = c;
        return f;
      };
      out.push_back(top([](const CVec& z) { return 1.0 + std::conj(z[0]); },
                        [](const CVec&, int) { return cplx(0.0); },
                        [](const CVec&, int j) { return j == 0 ? cplx(1.0) : cplx(0.0); }));
      out.push_back(top([](const CVec&) { return cplx(1.0); },
                        [](const CVec&, int) { return cplx(0.0); },
                        [](const CVec&, int) { return cplx(0.0); }));
      out.push_back(top([](const CVec& z) { return std::conj(z[1]); },
                        [](const CVec&, int) { return cplx(0.0); },
                        [](const CVec&, int j) { return j == 1 ? cplx(1.0) : cplx(0.0); }));
      break;
    }
  }
  return out;
}

}  // namespace dbar
