#include "fracvar/pair_integrals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fracvar/error.hpp"
#include "fracvar/quadrature.hpp"

namespace fracvar {
namespace {

constexpr int kWedgeOrder = 16;
constexpr int kMaxDepth = 40;

struct Box {
  Point lo{};
  Point hi{};
};

// Tent-weighted kernel over a sub-box on which the weight is linear per axis.
class TentIntegrator {
 public:
  TentIntegrator(const Point& k, int n, double s) : k_(k), n_(n), s_(s) {
    for (int d = 0; d < n_; ++d) sigma_[d] = -k_[d];
  }

  double integrate(const Box& box, int depth) const {
    bool corner = true;
    bool inside = true;
    for (int d = 0; d < n_; ++d) {
      const double tol = 1e-14 * (1.0 + std::abs(sigma_[d]));
      const bool at_lo = std::abs(sigma_[d] - box.lo[d]) <= tol;
      const bool at_hi = std::abs(sigma_[d] - box.hi[d]) <= tol;
      corner = corner && (at_lo || at_hi);
      inside = inside && sigma_[d] >= box.lo[d] - tol && sigma_[d] <= box.hi[d] + tol;
    }
    if (corner) return duffy(box);
    if (inside) {
      throw NumericalError("tent_integral: singular point inside a sub-box");
    }
    double dist2 = 0.0;
    double size = 0.0;
    for (int d = 0; d < n_; ++d) {
      const double gap = std::max({box.lo[d] - sigma_[d], sigma_[d] - box.hi[d], 0.0});
      dist2 += gap * gap;
      size = std::max(size, box.hi[d] - box.lo[d]);
    }
    const double ratio = std::sqrt(dist2) / size;
    if (ratio < 1.0 && depth < kMaxDepth) return split(box, depth);
    int order = 5;
    if (ratio < 2.0) {
      order = 12;
    } else if (ratio < 4.0) {
      order = 9;
    } else if (ratio < 8.0) {
      order = 7;
    }
    return gauss(box, order);
  }

 private:
  double weight(const Point& t) const {
    double w = 1.0;
    for (int d = 0; d < n_; ++d) w *= 1.0 - std::abs(t[d]);
    return w;
  }

  double kernel(const Point& t) const {
    double r2 = 0.0;
    for (int d = 0; d < n_; ++d) {
      const double y = k_[d] + t[d];
      r2 += y * y;
    }
    return std::pow(r2, -0.5 * (n_ + 2.0 * s_));
  }

  double gauss(const Box& box, int order) const {
    const quad::Rule& rule = quad::gauss_legendre(order);
    const int q = static_cast<int>(rule.size());
    int total = 1;
    for (int d = 0; d < n_; ++d) total *= q;
    double sum = 0.0;
    for (int flat = 0; flat < total; ++flat) {
      int rem = flat;
      double w = 1.0;
      Point t{};
      for (int d = n_ - 1; d >= 0; --d) {
        const int j = rem % q;
        rem /= q;
        const double half = 0.5 * (box.hi[d] - box.lo[d]);
        t[d] = box.lo[d] + half * (1.0 + rule.nodes[j]);
        w *= half * rule.weights[j];
      }
      sum += w * weight(t) * kernel(t);
    }
    return sum;
  }

  double split(const Box& box, int depth) const {
    double sum = 0.0;
    for (int mask = 0; mask < (1 << n_); ++mask) {
      Box child;
      for (int d = 0; d < n_; ++d) {
        const double mid = 0.5 * (box.lo[d] + box.hi[d]);
        if (mask & (1 << d)) {
          child.lo[d] = mid;
          child.hi[d] = box.hi[d];
        } else {
          child.lo[d] = box.lo[d];
          child.hi[d] = mid;
        }
      }
      sum += integrate(child, depth + 1);
    }
    return sum;
  }

  // Pyramid (Duffy) split with the singular point at a corner of the box.
  // With t = sigma + sgn * a * Y the kernel is |a .* Y|^{-n-2s}, and on the
  // pyramid where Y_dstar is largest, Y = tau * v with v_dstar = 1. The tent
  // weight becomes a polynomial in tau whose powers integrate exactly.
  double duffy(const Box& box) const {
    std::array<double, kMaxDim> a{};
    std::array<double, kMaxDim> alpha{};
    std::array<double, kMaxDim> beta{};
    double jac = 1.0;
    for (int d = 0; d < n_; ++d) {
      a[d] = box.hi[d] - box.lo[d];
      jac *= a[d];
      const double tol = 1e-14 * (1.0 + std::abs(sigma_[d]));
      const double sgn = std::abs(sigma_[d] - box.lo[d]) <= tol ? 1.0 : -1.0;
      const double mid = 0.5 * (box.lo[d] + box.hi[d]);
      const double eps = mid >= 0.0 ? 1.0 : -1.0;
      // 1 - |t| = 1 - eps * t on the box.
      alpha[d] = 1.0 - eps * sigma_[d];
      beta[d] = -eps * sgn * a[d];
      if (std::abs(alpha[d]) < 1e-14) alpha[d] = 0.0;
    }
    double c0 = 1.0;
    for (int d = 0; d < n_; ++d) c0 *= alpha[d];
    if (c0 != 0.0) {
      return std::numeric_limits<double>::infinity();
    }
    const double expo = -(n_ + 2.0 * s_);
    const quad::Rule& rule = quad::gauss_legendre(kWedgeOrder);
    const int q = kWedgeOrder;
    int total = 1;
    for (int d = 1; d < n_; ++d) total *= q;
    double sum = 0.0;
    for (int dstar = 0; dstar < n_; ++dstar) {
      for (int flat = 0; flat < total; ++flat) {
        int rem = flat;
        double w = 1.0;
        std::array<double, kMaxDim> v{};
        for (int d = 0; d < n_; ++d) {
          if (d == dstar) {
            v[d] = 1.0;
            continue;
          }
          const int j = rem % q;
          rem /= q;
          v[d] = 0.5 * (1.0 + rule.nodes[j]);
          w *= 0.5 * rule.weights[j];
        }
        // Polynomial prod_d (alpha_d + beta_d v_d tau) = sum_m c_m tau^m.
        std::array<double, kMaxDim + 1> c{1.0, 0.0, 0.0, 0.0};
        for (int d = 0; d < n_; ++d) {
          for (int m = d + 1; m >= 1; --m) {
            c[m] = c[m] * alpha[d] + c[m - 1] * beta[d] * v[d];
          }
          c[0] *= alpha[d];
        }
        double radial = 0.0;
        for (int m = 1; m <= n_; ++m) radial += c[m] / (m - 2.0 * s_);
        double rho2 = 0.0;
        for (int d = 0; d < n_; ++d) rho2 += a[d] * a[d] * v[d] * v[d];
        sum += w * radial * std::pow(rho2, 0.5 * expo);
      }
    }
    // The Jacobian a^n of the map cancels against nothing else; the kernel
    // scale is already inside rho.
    return jac * sum;
  }

  Point k_;
  Point sigma_{};
  int n_;
  double s_;
};

}  // namespace

double interval_pair_integral(double a, double b, double c, double d, double s) {
  if (!(b > a) || !(d > c)) throw ValidationError("interval_pair_integral: empty interval");
  if (c < a) {
    std::swap(a, c);
    std::swap(b, d);
  }
  if (a == c && b == d) return 0.0;
  if (c < b) throw NumericalError("interval_pair_integral: overlapping intervals");
  const double alpha = 2.0 * s;
  const double gap = c - b;
  const double width = std::max(b - a, d - c);
  if (gap > 4.0 * width) {
    // Cancellation-free product Gauss for well separated intervals.
    const quad::Rule& rule = quad::gauss_legendre(8);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) {
      const double x = 0.5 * (a + b) + 0.5 * (b - a) * rule.nodes[i];
      for (std::size_t j = 0; j < rule.size(); ++j) {
        const double y = 0.5 * (c + d) + 0.5 * (d - c) * rule.nodes[j];
        sum += rule.weights[i] * rule.weights[j] * std::pow(y - x, -1.0 - alpha);
      }
    }
    return 0.25 * (b - a) * (d - c) * sum;
  }
  auto G = [alpha](double t) { return t > 0.0 ? std::pow(t, 1.0 - alpha) : 0.0; };
  return (G(c - a) + G(d - b) - G(c - b) - G(d - a)) / (alpha * (1.0 - alpha));
}

double tent_integral(const Point& k, int n, double s) {
  if (n < 1 || n > kMaxDim) throw ValidationError("tent_integral: n must be 1..3");
  if (!(s > 0.0 && s < 0.5)) throw ValidationError("tent_integral: s must lie in (0, 1/2)");
  bool zero = true;
  for (int d = 0; d < n; ++d) zero = zero && k[d] == 0.0;
  if (zero) return 0.0;

  std::array<std::vector<double>, kMaxDim> cuts;
  for (int d = 0; d < n; ++d) {
    std::vector<double>& c = cuts[d];
    c = {-1.0, 0.0, 1.0};
    const double sigma = -k[d];
    if (sigma > -1.0 && sigma < 1.0 && sigma != 0.0) c.push_back(sigma);
    std::sort(c.begin(), c.end());
  }
  TentIntegrator integrator(k, n, s);
  std::array<std::size_t, kMaxDim> count{1, 1, 1};
  for (int d = 0; d < n; ++d) count[d] = cuts[d].size() - 1;
  double total = 0.0;
  for (std::size_t i0 = 0; i0 < count[0]; ++i0) {
    for (std::size_t i1 = 0; i1 < count[1]; ++i1) {
      for (std::size_t i2 = 0; i2 < count[2]; ++i2) {
        const std::array<std::size_t, kMaxDim> id{i0, i1, i2};
        Box box;
        for (int d = 0; d < n; ++d) {
          box.lo[d] = cuts[d][id[d]];
          box.hi[d] = cuts[d][id[d] + 1];
        }
        total += integrator.integrate(box, 0);
      }
    }
  }
  if (!std::isfinite(total)) {
    throw NumericalError("tent_integral: overlapping cubes give a divergent integral");
  }
  return total;
}

double pair_integral(const Cube& a, const Cube& b, int n, double s) {
  if (!(a.side > 0.0) || std::abs(a.side - b.side) > 1e-12 * a.side) {
    throw ValidationError("pair_integral: cubes must share a positive side");
  }
  const double h = a.side;
  if (n == 1) {
    const double r = 0.5 * h;
    return interval_pair_integral(a.center[0] - r, a.center[0] + r, b.center[0] - r,
                                  b.center[0] + r, s);
  }
  Point k{};
  for (int d = 0; d < n; ++d) k[d] = (b.center[d] - a.center[d]) / h;
  const double value = std::pow(h, n - 2.0 * s) * tent_integral(k, n, s);
  if (!std::isfinite(value)) throw NumericalError("pair_integral: non-finite result");
  return value;
}

double cell_point_kernel(const Point& center, double side, const Point& z, int n,
                         double s, int order) {
  const quad::Rule& rule = quad::gauss_legendre(order);
  const int q = static_cast<int>(rule.size());
  int total = 1;
  for (int d = 0; d < n; ++d) total *= q;
  const double half = 0.5 * side;
  const double expo = -0.5 * (n + 2.0 * s);
  double sum = 0.0;
  for (int flat = 0; flat < total; ++flat) {
    int rem = flat;
    double w = 1.0;
    double r2 = 0.0;
    for (int d = n - 1; d >= 0; --d) {
      const int j = rem % q;
      rem /= q;
      const double x = center[d] + half * rule.nodes[j];
      r2 += (x - z[d]) * (x - z[d]);
      w *= half * rule.weights[j];
    }
    sum += w * std::pow(r2, expo);
  }
  return sum;
}

double lattice_complement_sum(int n, double s, int K) {
  if (n < 1 || n > kMaxDim) throw ValidationError("lattice_complement_sum: n must be 1..3");
  if (n == 1) return 1.0 / (s * (1.0 - 2.0 * s));
  if (K < 0) K = n == 2 ? 64 : 20;
  PairTable table(n, s, {K + 1, K + 1, K + 1});
  double near = 0.0;
  std::array<int, kMaxDim> zero{0, 0, 0};
  std::array<int, kMaxDim> k{0, 0, 0};
  const int top = 2 * K + 1;
  for (int a = 0; a < top; ++a) {
    for (int b = 0; b < top; ++b) {
      for (int c = 0; c < (n == 3 ? top : 1); ++c) {
        k = {a - K, b - K, n == 3 ? c - K : 0};
        near += table(zero, k);
      }
    }
  }
  // Beyond the cube of half-width A = K + 1/2: int_{C_0} int_{|y|_inf > A},
  // taken at the cell center (error O(A^{-2s-2})).
  const double A = K + 0.5;
  const quad::Rule& rule = quad::gauss_legendre(24);
  // J_n = (2n / 2s) int_{[-1,1]^{n-1}} (1 + |u|^2)^{-(n+2s)/2} du.
  double face = 0.0;
  const double expo = -0.5 * (n + 2.0 * s);
  for (std::size_t i = 0; i < rule.size(); ++i) {
    if (n == 2) {
      face += rule.weights[i] * std::pow(1.0 + rule.nodes[i] * rule.nodes[i], expo);
    } else {
      for (std::size_t j = 0; j < rule.size(); ++j) {
        const double u2 = rule.nodes[i] * rule.nodes[i] + rule.nodes[j] * rule.nodes[j];
        face += rule.weights[i] * rule.weights[j] * std::pow(1.0 + u2, expo);
      }
    }
  }
  const double far = (2.0 * n / (2.0 * s)) * face * std::pow(A, -2.0 * s);
  return near + far;
}

PairTable::PairTable(int n, double s, const std::array<int, kMaxDim>& extent)
    : n_(n), s_(s), extent_{1, 1, 1} {
  std::size_t total = 1;
  for (int d = 0; d < n_; ++d) {
    if (extent[d] < 1) throw ValidationError("PairTable: extent must be positive");
    extent_[d] = extent[d];
    total *= static_cast<std::size_t>(extent[d]);
  }
  values_.assign(total, 0.0);
  // Reflection and axis-permutation symmetry of T: evaluate only sorted
  // offsets and copy the rest.
  std::vector<double> cache;
  int kmax = 0;
  for (int d = 0; d < n_; ++d) kmax = std::max(kmax, extent_[d]);
  std::size_t cube = 1;
  for (int d = 0; d < n_; ++d) cube *= static_cast<std::size_t>(kmax);
  cache.assign(cube, -1.0);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::array<int, kMaxDim> k{0, 0, 0};
    std::size_t rem = idx;
    for (int d = n_ - 1; d >= 0; --d) {
      k[d] = static_cast<int>(rem % extent_[d]);
      rem /= extent_[d];
    }
    std::array<int, kMaxDim> sorted = k;
    std::sort(sorted.begin(), sorted.begin() + n_);
    std::size_t key = 0;
    for (int d = 0; d < n_; ++d) key = key * kmax + sorted[d];
    if (cache[key] < 0.0) {
      if (n_ == 1) {
        const double kk = sorted[0];
        cache[key] = kk == 0.0 ? 0.0 : interval_pair_integral(0.0, 1.0, kk, kk + 1.0, s_);
      } else {
        Point kp{};
        for (int d = 0; d < n_; ++d) kp[d] = sorted[d];
        cache[key] = tent_integral(kp, n_, s_);
      }
    }
    values_[idx] = cache[key];
  }
}

}  // namespace fracvar
