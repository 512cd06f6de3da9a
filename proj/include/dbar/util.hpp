#pragma once
// Shared small utilities: seeded RNG draws, least-squares fits, timers.

#include <chrono>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "dbar/complexn.hpp"

namespace dbar {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform(double a, double b) {
    return a + (b - a) * dist_(eng_);
  }

  // uniform point in the complex ball of given radius (rejection on the box)
  CVec ball_point(int n, double radius) {
    CVec p(n);
    for (;;) {
      double s = 0.0;
      for (int j = 0; j < n; ++j) {
        double x = uniform(-1.0, 1.0), y = uniform(-1.0, 1.0);
        p[j] = cplx(x, y);
        s += x * x + y * y;
      }
      if (s < 1.0) break;
    }
    for (int j = 0; j < n; ++j) p[j] *= radius;
    return p;
  }

 private:
  std::mt19937_64 eng_;
  std::uniform_real_distribution<double> dist_{0.0, 1.0};
};

// ordinary least squares y = slope*x + intercept
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

inline LineFit ols_fit(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t m = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double d = static_cast<double>(m) * sxx - sx * sx;
  LineFit f;
  f.slope = (static_cast<double>(m) * sxy - sx * sy) / d;
  f.intercept = (sy - f.slope * sx) / static_cast<double>(m);
  return f;
}

class WallTimer {
 public:
  WallTimer() : t0_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }

 private:
  std::chrono::steady_clock::time_point t0_;
};

// shortest round-trippable decimal representation, stable across runs
std::string format_double(double x);

}  // namespace dbar
