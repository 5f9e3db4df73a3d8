#pragma once

#include <cstdint>
#include <random>

#include "hamplug/geometry.hpp"

namespace testing_support {

/// Seeded generator for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : engine_(seed) {}

  double real(double lo, double hi) {
    return lo + (hi - lo) * static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  hamplug::Vec vec(int size, double lo, double hi) {
    hamplug::Vec v(size);
    for (int k = 0; k < size; ++k) v[k] = real(lo, hi);
    return v;
  }

 private:
  std::mt19937_64 engine_;
};

/// Central-difference exterior derivative of a 1-form field a(p):
/// (da)_ij = d_i a_j - d_j a_i.
template <class OneForm>
hamplug::Mat fd_exterior_derivative(const OneForm& a, const hamplug::Vec& p, double h = 1e-6) {
  const int d = static_cast<int>(p.size());
  hamplug::Mat jac(d, d);  // jac(i, j) = d_i a_j
  for (int i = 0; i < d; ++i) {
    hamplug::Vec pp = p, pm = p;
    pp[i] += h;
    pm[i] -= h;
    jac.row(i) = (a(pp) - a(pm)).transpose() / (2.0 * h);
  }
  return jac - jac.transpose();
}

inline double max_abs(const hamplug::Mat& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace testing_support
