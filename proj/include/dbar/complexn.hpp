#pragma once
// Small fixed-capacity complex vectors for points in C^n, n <= 8.
// Kept as aggregates so hot loops stay allocation-free.

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>

namespace dbar {

using cplx = std::complex<double>;
inline constexpr int kMaxN = 8;
inline constexpr cplx kI{0.0, 1.0};

struct CVec {
  int n = 0;
  std::array<cplx, kMaxN> v{};

  CVec() = default;
  explicit CVec(int dim) : n(dim) {}
  CVec(std::initializer_list<cplx> xs) : n(static_cast<int>(xs.size())) {
    int k = 0;
    for (const cplx& x : xs) v[k++] = x;
  }

  cplx& operator[](int j) { return v[j]; }
  const cplx& operator[](int j) const { return v[j]; }
};

inline CVec operator+(const CVec& a, const CVec& b) {
  CVec r(a.n);
  for (int j = 0; j < a.n; ++j) r[j] = a[j] + b[j];
  return r;
}

inline CVec operator-(const CVec& a, const CVec& b) {
  CVec r(a.n);
  for (int j = 0; j < a.n; ++j) r[j] = a[j] - b[j];
  return r;
}

inline CVec operator*(cplx s, const CVec& a) {
  CVec r(a.n);
  for (int j = 0; j < a.n; ++j) r[j] = s * a[j];
  return r;
}

inline CVec conj(const CVec& a) {
  CVec r(a.n);
  for (int j = 0; j < a.n; ++j) r[j] = std::conj(a[j]);
  return r;
}

// bilinear dot, no conjugation: sum_j a_j b_j
inline cplx dot_c(const CVec& a, const CVec& b) {
  cplx s = 0.0;
  for (int j = 0; j < a.n; ++j) s += a[j] * b[j];
  return s;
}

inline double abs2(const CVec& a) {
  double s = 0.0;
  for (int j = 0; j < a.n; ++j) s += std::norm(a[j]);
  return s;
}

inline double norm2(const CVec& a) { return std::sqrt(abs2(a)); }

}  // namespace dbar
