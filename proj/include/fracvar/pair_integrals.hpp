#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "fracvar/model.hpp"

namespace fracvar {

// Axis-aligned cube given by its center and side length.
struct Cube {
  Point center{};
  double side = 0.0;
};

// Exact value of int_a^b int_c^d |x - y|^{-1-2s} dy dx for disjoint intervals.
double interval_pair_integral(double a, double b, double c, double d, double s);

// T(k) = int_{[-1,1]^n} prod_d (1 - |t_d|) |k + t|^{-n-2s} dt, the pair
// integral of two unit cubes whose centers differ by k.
double tent_integral(const Point& k, int n, double s);

// I = int_{C_a} int_{C_b} |x - y|^{-n-2s}. Cubes must share the side length;
// identical cubes return 0 (the difference quotient vanishes there).
double pair_integral(const Cube& a, const Cube& b, int n, double s);

// int_C |x - z|^{-n-2s} dx by an order^n Gauss product rule; z outside C.
double cell_point_kernel(const Point& center, double side, const Point& z,
                         int n, double s, int order = 2);

// sum over k in Z^n \ {0} of T(k): the interaction of a unit cube with its
// complement. Exact in n = 1; in n >= 2 a lattice sum over |k|_inf <= K plus
// the exact far integral of the complement of the enclosing cube.
double lattice_complement_sum(int n, double s, int K = -1);

// T(k) over integer offsets 0 <= |k_d| < extent[d].
class PairTable {
 public:
  PairTable() = default;
  PairTable(int n, double s, const std::array<int, kMaxDim>& extent);

  int dim() const { return n_; }
  double s() const { return s_; }
  const std::array<int, kMaxDim>& extent() const { return extent_; }

  // Unit-cube value for the offset b - a; zero offset gives 0.
  double operator()(const std::array<int, kMaxDim>& a,
                    const std::array<int, kMaxDim>& b) const {
    std::size_t idx = 0;
    for (int d = 0; d < n_; ++d) {
      int k = b[d] - a[d];
      k = k < 0 ? -k : k;
      idx = idx * extent_[d] + static_cast<std::size_t>(k);
    }
    return values_[idx];
  }

 private:
  int n_ = 0;
  double s_ = 0.0;
  std::array<int, kMaxDim> extent_{1, 1, 1};
  std::vector<double> values_;
};

}  // namespace fracvar
